#include "idsa/idsa.h"

#include <cstring>
#include <fstream>
#include <new>
#include <string>

#include "core/errors.hpp"
#include "core/ids.hpp"

struct idsa_group {
  idsa::GroupPtr g;
};
struct idsa_subset {
  idsa::FiniteSubset s;
};
struct idsa_colouring {
  idsa::ColouringPtr c;
};
struct idsa_operator {
  idsa::RulePtr r;
};
struct idsa_freqs {
  idsa::FrequencyPtr f;
};
struct idsa_step {
  idsa::StepFunction f;
};

namespace {

using namespace idsa;

thread_local std::string g_last_error;

struct BufferTooSmall : std::runtime_error {
  BufferTooSmall() : std::runtime_error("buffer too small") {}
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <class F>
idsa_status guard(F&& body) {
  try {
    body();
    g_last_error.clear();
    return IDSA_OK;
  } catch (const InvalidArgument& e) {
    g_last_error = e.what();
    return IDSA_ERR_INVALID_ARGUMENT;
  } catch (const DomainError& e) {
    g_last_error = e.what();
    return IDSA_ERR_DOMAIN;
  } catch (const NumericalError& e) {
    g_last_error = e.what();
    return IDSA_ERR_NUMERICAL;
  } catch (const PreconditionError& e) {
    g_last_error = e.what();
    return IDSA_ERR_PRECONDITION;
  } catch (const ValidationError& e) {
    g_last_error = e.what();
    return IDSA_ERR_VALIDATION;
  } catch (const BufferTooSmall& e) {
    g_last_error = e.what();
    return IDSA_ERR_BUFFER_TOO_SMALL;
  } catch (const IoError& e) {
    g_last_error = e.what();
    return IDSA_ERR_IO;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return IDSA_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return IDSA_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return IDSA_ERR_INTERNAL;
  }
}

template <class T>
const T& need(const T* p, const char* what) {
  if (!p) throw InvalidArgument(std::string("null ") + what);
  return *p;
}

template <class T>
void need_out(T* p, const char* what) {
  if (!p) throw InvalidArgument(std::string("null output ") + what);
}

Element element_from(const GroupModel& g, const std::int64_t* coords) {
  if (!coords) throw InvalidArgument("null element coordinates");
  Element e;
  for (int i = 0; i < g.rank(); ++i) e.c[static_cast<std::size_t>(i)] = coords[i];
  return e;
}

void same_group(const GroupModel& a, const GroupModel& b) {
  if (a.kind() != b.kind() || a.rank() != b.rank())
    throw InvalidArgument("handles belong to different groups");
}

Pattern pattern_from(const FiniteSubset& domain, const int* values) {
  if (!values && !domain.empty()) throw InvalidArgument("null pattern values");
  Pattern p{domain, std::vector<int>(values, values + domain.size())};
  return p;
}

// Copies n items, or reports the size needed through `count`.
template <class Fill>
void copy_out(std::size_t n, std::size_t capacity, std::size_t* count, Fill&& fill) {
  if (count) *count = n;
  if (capacity < n) throw BufferTooSmall();
  fill();
}

}  // namespace

extern "C" {

const char* idsa_version(void) { return "1.0.0"; }

const char* idsa_last_error(void) { return g_last_error.c_str(); }

const char* idsa_status_name(idsa_status s) {
  switch (s) {
    case IDSA_OK: return "ok";
    case IDSA_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case IDSA_ERR_DOMAIN: return "domain";
    case IDSA_ERR_NUMERICAL: return "numerical";
    case IDSA_ERR_PRECONDITION: return "precondition";
    case IDSA_ERR_VALIDATION: return "validation";
    case IDSA_ERR_IO: return "io";
    case IDSA_ERR_BUFFER_TOO_SMALL: return "buffer_too_small";
    case IDSA_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

// ---- groups

idsa_status idsa_group_create_zd(int d, idsa_group** out) {
  return guard([&] {
    need_out(out, "group");
    *out = nullptr;
    *out = new idsa_group{make_free_abelian(d)};
  });
}

idsa_status idsa_group_create_h3(idsa_group** out) {
  return guard([&] {
    need_out(out, "group");
    *out = nullptr;
    *out = new idsa_group{make_heisenberg3()};
  });
}

void idsa_group_free(idsa_group* g) { delete g; }

idsa_status idsa_group_rank(const idsa_group* g, int* rank) {
  return guard([&] {
    need_out(rank, "rank");
    *rank = need(g, "group").g->rank();
  });
}

idsa_status idsa_group_word_length(const idsa_group* g, const int64_t* element, int64_t* length) {
  return guard([&] {
    const GroupModel& gm = *need(g, "group").g;
    need_out(length, "length");
    *length = gm.word_length(element_from(gm, element));
  });
}

idsa_status idsa_group_ball_size(const idsa_group* g, int radius, size_t* size) {
  return guard([&] {
    need_out(size, "size");
    if (radius < 0) throw InvalidArgument("radius must be nonnegative");
    *size = need(g, "group").g->ball_elements(radius).size();
  });
}

idsa_status idsa_group_generators(const idsa_group* g, int64_t* coords, size_t capacity, size_t* count) {
  return guard([&] {
    const GroupModel& gm = *need(g, "group").g;
    const auto& gens = gm.generators();
    const std::size_t r = static_cast<std::size_t>(gm.rank());
    if (count) *count = gens.size();
    copy_out(gens.size() * r, capacity, nullptr, [&] {
      for (std::size_t i = 0; i < gens.size(); ++i)
        for (std::size_t k = 0; k < r; ++k) coords[i * r + k] = gens[i].c[k];
    });
  });
}

// ---- subsets

idsa_status idsa_subset_folner(const idsa_group* g, int n, idsa_subset** out) {
  return guard([&] {
    need_out(out, "subset");
    *out = nullptr;
    *out = new idsa_subset{folner_set(need(g, "group").g, n).tile};
  });
}

idsa_status idsa_subset_ball(const idsa_group* g, int radius, idsa_subset** out) {
  return guard([&] {
    need_out(out, "subset");
    *out = nullptr;
    if (radius < 0) throw InvalidArgument("radius must be nonnegative");
    *out = new idsa_subset{ball(need(g, "group").g, radius)};
  });
}

idsa_status idsa_subset_box(const idsa_group* g, const int64_t* lo, const int64_t* hi, idsa_subset** out) {
  return guard([&] {
    need_out(out, "subset");
    *out = nullptr;
    const GroupPtr& gp = need(g, "group").g;
    if (!lo || !hi) throw InvalidArgument("null box bounds");
    const auto r = static_cast<std::size_t>(gp->rank());
    *out = new idsa_subset{box(gp, std::vector<Coord>(lo, lo + r), std::vector<Coord>(hi, hi + r))};
  });
}

idsa_status idsa_subset_from_elements(const idsa_group* g, const int64_t* coords, size_t count,
                                      idsa_subset** out) {
  return guard([&] {
    need_out(out, "subset");
    *out = nullptr;
    const GroupPtr& gp = need(g, "group").g;
    if (!coords && count > 0) throw InvalidArgument("null element coordinates");
    const auto r = static_cast<std::size_t>(gp->rank());
    std::vector<Element> elems;
    elems.reserve(count);
    for (std::size_t i = 0; i < count; ++i) elems.push_back(element_from(*gp, coords + i * r));
    *out = new idsa_subset{FiniteSubset(gp, std::move(elems))};
  });
}

void idsa_subset_free(idsa_subset* s) { delete s; }

idsa_status idsa_subset_size(const idsa_subset* s, size_t* size) {
  return guard([&] {
    need_out(size, "size");
    *size = need(s, "subset").s.size();
  });
}

idsa_status idsa_subset_elements(const idsa_subset* s, int64_t* coords, size_t capacity) {
  return guard([&] {
    const FiniteSubset& q = need(s, "subset").s;
    const auto r = static_cast<std::size_t>(q.group().rank());
    copy_out(q.size() * r, capacity, nullptr, [&] {
      for (std::size_t i = 0; i < q.size(); ++i)
        for (std::size_t k = 0; k < r; ++k) coords[i * r + k] = q.elements()[i].c[k];
    });
  });
}

idsa_status idsa_subset_diameter(const idsa_subset* s, int64_t* diameter) {
  return guard([&] {
    need_out(diameter, "diameter");
    *diameter = need(s, "subset").s.diameter();
  });
}

idsa_status idsa_subset_boundary_size(const idsa_subset* s, int radius, int kind, size_t* size) {
  return guard([&] {
    need_out(size, "size");
    const FiniteSubset& q = need(s, "subset").s;
    if (radius < 0) throw InvalidArgument("radius must be nonnegative");
    switch (kind) {
      case 0: *size = boundary(q, radius).size(); break;
      case 1: *size = boundary_int(q, radius).size(); break;
      case 2: *size = boundary_ext(q, radius).size(); break;
      default: throw InvalidArgument("boundary kind must be 0, 1 or 2");
    }
  });
}

idsa_status idsa_subset_right_generator_boundary(const idsa_subset* s, size_t* size) {
  return guard([&] {
    need_out(size, "size");
    *size = right_generator_boundary_size(need(s, "subset").s);
  });
}

idsa_status idsa_subset_shrink(const idsa_subset* s, int radius, idsa_subset** out) {
  return guard([&] {
    need_out(out, "subset");
    *out = nullptr;
    if (radius < 0) throw InvalidArgument("radius must be nonnegative");
    *out = new idsa_subset{shrink(need(s, "subset").s, radius)};
  });
}

// ---- colourings

idsa_status idsa_colouring_trivial(idsa_colouring** out) {
  return guard([&] {
    need_out(out, "colouring");
    *out = nullptr;
    *out = new idsa_colouring{std::make_shared<TrivialColouring>()};
  });
}

idsa_status idsa_colouring_half_line_mod3(int has_cutoff, int64_t cutoff, idsa_colouring** out) {
  return guard([&] {
    need_out(out, "colouring");
    *out = nullptr;
    ColouringPtr c = has_cutoff ? std::make_shared<HalfLineMod3Colouring>(cutoff)
                                : std::make_shared<HalfLineMod3Colouring>();
    *out = new idsa_colouring{std::move(c)};
  });
}

namespace {

Alphabet alphabet_from(const char* const* symbols, std::size_t colours) {
  if (!symbols && colours > 0) throw InvalidArgument("null alphabet");
  Alphabet a;
  for (std::size_t i = 0; i < colours; ++i) {
    if (!symbols[i]) throw InvalidArgument("null alphabet symbol");
    a.symbols.emplace_back(symbols[i]);
  }
  return a;
}

}  // namespace

idsa_status idsa_colouring_percolation(const char* const* symbols, const uint64_t* weights, size_t colours,
                                       uint64_t seed, idsa_colouring** out) {
  return guard([&] {
    need_out(out, "colouring");
    *out = nullptr;
    if (!weights && colours > 0) throw InvalidArgument("null weights");
    std::vector<std::uint64_t> w(weights, weights + colours);
    *out = new idsa_colouring{
        std::make_shared<PercolationColouring>(alphabet_from(symbols, colours), std::move(w), seed)};
  });
}

idsa_status idsa_colouring_periodic(const idsa_group* g, int n, const char* const* symbols, size_t colours,
                                    const int* tile_colours, size_t count, idsa_colouring** out) {
  return guard([&] {
    need_out(out, "colouring");
    *out = nullptr;
    if (!tile_colours && count > 0) throw InvalidArgument("null tile colours");
    *out = new idsa_colouring{std::make_shared<PeriodicColouring>(
        alphabet_from(symbols, colours), folner_set(need(g, "group").g, n),
        std::vector<int>(tile_colours, tile_colours + count))};
  });
}

void idsa_colouring_free(idsa_colouring* c) { delete c; }

idsa_status idsa_colouring_alphabet_size(const idsa_colouring* c, size_t* size) {
  return guard([&] {
    need_out(size, "size");
    *size = need(c, "colouring").c->alphabet().size();
  });
}

idsa_status idsa_colouring_at(const idsa_colouring* c, const idsa_group* g, const int64_t* element,
                              int* colour) {
  return guard([&] {
    need_out(colour, "colour");
    const GroupModel& gm = *need(g, "group").g;
    *colour = need(c, "colouring").c->colour(element_from(gm, element));
  });
}

// ---- operators

idsa_status idsa_operator_zero(const idsa_group* g, int k, int range, idsa_operator** out) {
  return guard([&] {
    need_out(out, "operator");
    *out = nullptr;
    if (k < 1 || range < 0) throw InvalidArgument("zero operator needs k >= 1 and range >= 0");
    *out = new idsa_operator{std::make_shared<ZeroRule>(need(g, "group").g, k, range)};
  });
}

idsa_status idsa_operator_adjacency(const idsa_group* g, idsa_operator** out) {
  return guard([&] {
    need_out(out, "operator");
    *out = nullptr;
    *out = new idsa_operator{std::make_shared<AdjacencyRule>(need(g, "group").g)};
  });
}

idsa_status idsa_operator_percolation(const idsa_group* g, const int* retained, size_t colours,
                                      double edge_weight, idsa_operator** out) {
  return guard([&] {
    need_out(out, "operator");
    *out = nullptr;
    if (!retained && colours > 0) throw InvalidArgument("null retained flags");
    std::vector<bool> keep;
    for (std::size_t i = 0; i < colours; ++i) keep.push_back(retained[i] != 0);
    *out = new idsa_operator{std::make_shared<PercolationRule>(need(g, "group").g, keep, edge_weight)};
  });
}

idsa_status idsa_operator_laplacian(const idsa_operator* base, idsa_operator** out) {
  return guard([&] {
    need_out(out, "operator");
    *out = nullptr;
    *out = new idsa_operator{std::make_shared<LaplacianRule>(need(base, "operator").r)};
  });
}

idsa_status idsa_operator_colour_table(const idsa_group* g, int colours, const double* table, size_t length,
                                       idsa_operator** out) {
  return guard([&] {
    need_out(out, "operator");
    *out = nullptr;
    if (!table && length > 0) throw InvalidArgument("null colour table");
    *out = new idsa_operator{std::make_shared<ColourTableRule>(need(g, "group").g, colours,
                                                               std::vector<double>(table, table + length))};
  });
}

idsa_status idsa_operator_periodic(const idsa_group* g, int k, const int64_t* offsets, const double* blocks,
                                   size_t count, idsa_operator** out) {
  return guard([&] {
    need_out(out, "operator");
    *out = nullptr;
    const GroupPtr& gp = need(g, "group").g;
    if (k < 1) throw InvalidArgument("block size must be positive");
    if ((!offsets || !blocks) && count > 0) throw InvalidArgument("null offset table");
    const auto r = static_cast<std::size_t>(gp->rank());
    const auto kk = static_cast<std::size_t>(k);
    std::map<Element, Block> table;
    for (std::size_t i = 0; i < count; ++i) {
      Element o = element_from(*gp, offsets + i * r);
      Block w(k, k);
      for (std::size_t a = 0; a < kk; ++a)
        for (std::size_t b = 0; b < kk; ++b)
          w(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = blocks[i * kk * kk + a * kk + b];
      if (!table.emplace(o, std::move(w)).second) throw InvalidArgument("duplicate offset");
    }
    *out = new idsa_operator{std::make_shared<PeriodicFoldRule>(gp, k, std::move(table))};
  });
}

void idsa_operator_free(idsa_operator* op) { delete op; }

idsa_status idsa_operator_info(const idsa_operator* op, int* k, int* range, int* invariance_radius) {
  return guard([&] {
    const LocalRule& r = *need(op, "operator").r;
    if (k) *k = r.dim();
    if (range) *range = r.range();
    if (invariance_radius) *invariance_radius = r.invariance_radius();
  });
}

idsa_status idsa_operator_norm_bound(const idsa_operator* op, double* bound) {
  return guard([&] {
    need_out(bound, "bound");
    *bound = need(op, "operator").r->norm_bound();
  });
}

// ---- frequencies

idsa_status idsa_freqs_trivial(idsa_freqs** out) {
  return guard([&] {
    need_out(out, "frequencies");
    *out = nullptr;
    *out = new idsa_freqs{std::make_shared<TrivialFrequencies>()};
  });
}

idsa_status idsa_freqs_percolation(const uint64_t* weights, size_t colours, idsa_freqs** out) {
  return guard([&] {
    need_out(out, "frequencies");
    *out = nullptr;
    if (!weights && colours > 0) throw InvalidArgument("null weights");
    *out = new idsa_freqs{
        std::make_shared<PercolationFrequencies>(std::vector<std::uint64_t>(weights, weights + colours))};
  });
}

idsa_status idsa_freqs_empirical(const idsa_colouring* c, const idsa_subset* reference, idsa_freqs** out) {
  return guard([&] {
    need_out(out, "frequencies");
    *out = nullptr;
    *out = new idsa_freqs{
        std::make_shared<EmpiricalFrequencies>(need(c, "colouring").c, need(reference, "subset").s)};
  });
}

void idsa_freqs_free(idsa_freqs* f) { delete f; }

idsa_status idsa_freqs_pattern(const idsa_freqs* f, const idsa_subset* domain, const int* values,
                               double* frequency) {
  return guard([&] {
    need_out(frequency, "frequency");
    const FrequencyProvider& fp = *need(f, "frequencies").f;
    *frequency = to_double(fp.frequency(canonicalize(pattern_from(need(domain, "subset").s, values))));
  });
}

idsa_status idsa_empirical_frequency(const idsa_colouring* c, const idsa_subset* domain, const int* values,
                                     const idsa_subset* u, double* frequency, char* text,
                                     size_t text_capacity) {
  return guard([&] {
    need_out(frequency, "frequency");
    const FiniteSubset& d = need(domain, "subset").s;
    const FiniteSubset& vol = need(u, "subset").s;
    same_group(d.group(), vol.group());
    const Rational r = empirical_frequency(pattern_from(d, values), *need(c, "colouring").c, vol);
    *frequency = to_double(r);
    if (text) {
      const std::string s = boost::multiprecision::numerator(r).str() + "/" +
                            boost::multiprecision::denominator(r).str();
      copy_out(s.size() + 1, text_capacity, nullptr, [&] { std::memcpy(text, s.c_str(), s.size() + 1); });
    }
  });
}

// ---- step functions

void idsa_step_free(idsa_step* f) { delete f; }

idsa_status idsa_step_size(const idsa_step* f, size_t* breakpoints) {
  return guard([&] {
    need_out(breakpoints, "size");
    *breakpoints = need(f, "step function").f.breakpoints().size();
  });
}

idsa_status idsa_step_data(const idsa_step* f, double* initial, double* breakpoints, double* values,
                           size_t capacity) {
  return guard([&] {
    const StepFunction& s = need(f, "step function").f;
    if (initial) *initial = s.initial();
    const std::size_t n = s.breakpoints().size();
    if (n > 0 && (!breakpoints || !values)) throw InvalidArgument("null step buffers");
    copy_out(n, capacity, nullptr, [&] {
      std::copy(s.breakpoints().begin(), s.breakpoints().end(), breakpoints);
      std::copy(s.values().begin(), s.values().end(), values);
    });
  });
}

idsa_status idsa_step_eval(const idsa_step* f, double x, double* value) {
  return guard([&] {
    need_out(value, "value");
    *value = need(f, "step function").f(x);
  });
}

idsa_status idsa_step_sup_distance(const idsa_step* f, const idsa_step* g, double* distance) {
  return guard([&] {
    need_out(distance, "distance");
    *distance = sup_distance(need(f, "step function").f, need(g, "step function").f);
  });
}

// ---- IDS computations

idsa_status idsa_ids_approximant(const idsa_operator* op, const idsa_colouring* c, const idsa_subset* u,
                                 int shrink_volume, double tau, idsa_step** out, idsa_approximant_info* info) {
  return guard([&] {
    need_out(out, "step function");
    *out = nullptr;
    const LocalRule& r = *need(op, "operator").r;
    const FiniteSubset& vol = need(u, "subset").s;
    same_group(*r.group(), vol.group());
    IdsApproximant a = ids_approximant(r, *need(c, "colouring").c, vol, shrink_volume != 0, tau);
    if (info) {
      info->volume = a.volume;
      info->normalization = a.normalization;
      info->tau = a.eigenvalues.tau;
      info->used_lanczos = a.eigenvalues.path == "lanczos" ? 1 : 0;
    }
    *out = new idsa_step{std::move(a.step)};
  });
}

idsa_status idsa_ids_certificate(const idsa_operator* op, const idsa_colouring* c, const idsa_subset* u,
                                 const idsa_subset* tile, const idsa_freqs* freqs, idsa_certificate* out) {
  return guard([&] {
    need_out(out, "certificate");
    const LocalRule& r = *need(op, "operator").r;
    const FiniteSubset& vol = need(u, "subset").s;
    const FiniteSubset& t = need(tile, "subset").s;
    same_group(*r.group(), vol.group());
    same_group(vol.group(), t.group());
    const ErrorCertificate e =
        ids_certificate(r, *need(c, "colouring").c, vol, t, *need(freqs, "frequencies").f);
    *out = idsa_certificate{e.tile_term, e.folner_term, e.freq_term, e.renorm_term, e.total};
  });
}

idsa_status idsa_frequency_side(const idsa_operator* op, const idsa_colouring* c, const idsa_subset* tile,
                                const idsa_freqs* freqs, const idsa_subset* fallback, double tau,
                                idsa_step** out, double* bound) {
  return guard([&] {
    need_out(out, "step function");
    *out = nullptr;
    const LocalRule& r = *need(op, "operator").r;
    const Colouring& col = *need(c, "colouring").c;
    const FiniteSubset& t = need(tile, "subset").s;
    const FrequencyProvider& fp = *need(freqs, "frequencies").f;
    const FiniteSubset& fb = need(fallback, "subset").s;
    same_group(*r.group(), t.group());
    FrequencySide side = frequency_side_ids(r, col, t, fp, class_source(col, t, fp, fb), tau);
    if (bound) *bound = side.bound;
    *out = new idsa_step{std::move(side.step)};
  });
}

idsa_status idsa_ids_delta(const idsa_operator* op, const idsa_colouring* c, const idsa_subset* u,
                           const idsa_subset* tile, const idsa_freqs* freqs, const idsa_subset* fallback,
                           double tau, idsa_delta* out) {
  return guard([&] {
    need_out(out, "delta");
    const LocalRule& r = *need(op, "operator").r;
    const Colouring& col = *need(c, "colouring").c;
    const FiniteSubset& vol = need(u, "subset").s;
    const FiniteSubset& t = need(tile, "subset").s;
    const FrequencyProvider& fp = *need(freqs, "frequencies").f;
    same_group(*r.group(), vol.group());
    same_group(vol.group(), t.group());
    const DeltaEstimate d =
        ids_delta(r, col, vol, t, fp, class_source(col, t, fp, need(fallback, "subset").s), tau);
    *out = idsa_delta{d.b_term, d.folner_term, d.freq_term, d.total, d.measured};
  });
}

idsa_status idsa_continuity_gap(const idsa_operator* h, const idsa_operator* g, const idsa_colouring* c,
                                const idsa_subset* u, double eps, double centre, double width, double tau,
                                idsa_continuity* out) {
  return guard([&] {
    need_out(out, "continuity report");
    if (!(width > 0.0)) throw InvalidArgument("bump width must be positive");
    const ContinuityReport rep = continuity_gap(*need(h, "operator").r, *need(g, "operator").r,
                                                *need(c, "colouring").c, need(u, "subset").s, eps,
                                                Bump{centre, width}, tau);
    *out = idsa_continuity{rep.gap, rep.bound, rep.max_entry_difference};
  });
}

namespace {

EigenvalueList spectrum_of(const idsa_operator* op, const idsa_colouring* c, const idsa_subset* q,
                           double tau) {
  const LocalRule& r = *need(op, "operator").r;
  const FiniteSubset& vol = need(q, "subset").s;
  same_group(*r.group(), vol.group());
  const RestrictedMatrix m = restrict_operator(r, *need(c, "colouring").c, vol);
  return eigenvalues(m, tau > 0.0 ? tau : default_tau(m.row_sum_bound()));
}

}  // namespace

idsa_status idsa_eigenvalues(const idsa_operator* op, const idsa_colouring* c, const idsa_subset* q,
                             double tau, double* values, size_t capacity, size_t* count) {
  return guard([&] {
    const EigenvalueList e = spectrum_of(op, c, q, tau);
    copy_out(e.values.size(), capacity, count, [&] { std::copy(e.values.begin(), e.values.end(), values); });
  });
}

idsa_status idsa_eigenvalue_clusters(const idsa_operator* op, const idsa_colouring* c, const idsa_subset* q,
                                     double tau, double* lambdas, size_t* multiplicities, size_t capacity,
                                     size_t* count) {
  return guard([&] {
    const auto clusters = eigenvalue_clusters(spectrum_of(op, c, q, tau));
    copy_out(clusters.size(), capacity, count, [&] {
      for (std::size_t i = 0; i < clusters.size(); ++i) {
        lambdas[i] = clusters[i].first;
        multiplicities[i] = clusters[i].second;
      }
    });
  });
}

idsa_status idsa_export_matrix_market(const idsa_operator* op, const idsa_colouring* c, const idsa_subset* q,
                                      const char* path) {
  return guard([&] {
    if (!path) throw InvalidArgument("null path");
    const LocalRule& r = *need(op, "operator").r;
    const RestrictedMatrix m = restrict_operator(r, *need(c, "colouring").c, need(q, "subset").s);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError(std::string("cannot open ") + path);
    write_matrix_market(f, m);
    f.flush();
    if (!f) throw IoError(std::string("write failed for ") + path);
  });
}

}  // extern "C"
