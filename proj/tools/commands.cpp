#include "commands.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <json.hpp>
#include <thread>

#include "capi.hpp"

namespace cli {

namespace {

using ojson = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string num(double x) { return fmt::format("{:.17g}", x); }

std::vector<int> sorted_unique(std::vector<int> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

// Files are collected in memory and written only after every check passed.
class OutputSet {
 public:
  void add(std::string rel, std::string content) { files_.emplace_back(std::move(rel), std::move(content)); }
  void add_json(std::string rel, const ojson& j) { add(std::move(rel), j.dump(2) + "\n"); }

  void write(const std::string& dir) const {
    for (const auto& [rel, content] : files_) {
      const fs::path p = fs::path(dir) / rel;
      fs::create_directories(p.parent_path());
      std::ofstream out(p, std::ios::binary | std::ios::trunc);
      out << content;
      out.flush();
      if (!out) throw std::runtime_error("cannot write " + p.string());
    }
  }

 private:
  std::vector<std::pair<std::string, std::string>> files_;
};

int worker_count(const RunConfig& cfg, const RunOptions& opt) { return std::max(1, opt.workers.value_or(cfg.workers)); }

// Runs job(i) for every i < n; the first failure stops the pool and is
// rethrown once all workers have joined.
void run_pool(std::size_t n, int workers, const std::function<void(std::size_t)>& job) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex m;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        job(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(m);
        if (!failure) failure = std::current_exception();
        next.store(n);
        return;
      }
    }
  };
  const std::size_t threads = std::min<std::size_t>(static_cast<std::size_t>(workers), n);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
}

// ---- handles from the config

struct Session {
  GroupH group;
  ColouringH colouring;
  OperatorH op;
  int range = 1;  // overall range R
};

GroupH build_group(const RunConfig& cfg) {
  try {
    if (cfg.group == "h3") return make_group([](idsa_group** o) { return idsa_group_create_h3(o); });
    return make_group([&](idsa_group** o) { return idsa_group_create_zd(cfg.d, o); });
  } catch (const CapiError& e) {
    throw ConfigError("/group", e.what());
  }
}

ColouringH build_colouring(const ColouringSpec& c, const GroupH& g, std::uint64_t seed) {
  try {
    if (c.kind == "trivial") return make_colouring([](idsa_colouring** o) { return idsa_colouring_trivial(o); });
    if (c.kind == "half_line_mod3")
      return make_colouring([&](idsa_colouring** o) {
        return idsa_colouring_half_line_mod3(c.cutoff ? 1 : 0, c.cutoff.value_or(0), o);
      });
    std::vector<const char*> symbols;
    for (const auto& s : c.alphabet) symbols.push_back(s.c_str());
    if (c.kind == "percolation")
      return make_colouring([&](idsa_colouring** o) {
        return idsa_colouring_percolation(symbols.data(), c.weights.data(), symbols.size(), seed, o);
      });
    return make_colouring([&](idsa_colouring** o) {
      return idsa_colouring_periodic(g.get(), c.period_n, symbols.data(), symbols.size(), c.tile_colours.data(),
                                     c.tile_colours.size(), o);
    });
  } catch (const CapiError& e) {
    throw ConfigError("/colouring", e.what());
  }
}

OperatorH build_operator(const OperatorSpec& o, const GroupH& g, std::size_t colours, const std::string& path) {
  try {
    if (o.kind == "adjacency")
      return make_operator([&](idsa_operator** out) { return idsa_operator_adjacency(g.get(), out); });
    if (o.kind == "percolation") {
      std::vector<int> keep(colours, 0);
      for (int c : o.retained) keep[static_cast<std::size_t>(c)] = 1;
      return make_operator([&](idsa_operator** out) {
        return idsa_operator_percolation(g.get(), keep.data(), keep.size(), o.edge_weight, out);
      });
    }
    if (o.kind == "laplacian") {
      OperatorH base = build_operator(*o.base, g, colours, path + "/base");
      return make_operator([&](idsa_operator** out) { return idsa_operator_laplacian(base.get(), out); });
    }
    if (o.kind == "zero")
      return make_operator([&](idsa_operator** out) { return idsa_operator_zero(g.get(), o.k, o.range, out); });
    if (o.kind == "colour_table")
      return make_operator([&](idsa_operator** out) {
        return idsa_operator_colour_table(g.get(), static_cast<int>(colours), o.table.data(), o.table.size(), out);
      });
    std::vector<std::int64_t> offs;
    std::vector<double> blocks;
    for (const auto& x : o.offsets) offs.insert(offs.end(), x.begin(), x.end());
    for (const auto& b : o.blocks) blocks.insert(blocks.end(), b.begin(), b.end());
    return make_operator([&](idsa_operator** out) {
      return idsa_operator_periodic(g.get(), o.k, offs.data(), blocks.data(), o.offsets.size(), out);
    });
  } catch (const CapiError& e) {
    throw ConfigError(path, e.what());
  }
}

int overall_range(const idsa_operator* op) {
  int k = 0, m = 0, n = 0;
  check(idsa_operator_info(op, &k, &m, &n));
  return std::max(m, n);
}

Session build_session(const RunConfig& cfg, std::uint64_t seed) {
  Session s;
  s.group = build_group(cfg);
  s.colouring = build_colouring(cfg.colouring, s.group, seed);
  s.op = build_operator(cfg.op, s.group, cfg.colouring.alphabet.size(), "/operator");
  s.range = overall_range(s.op.get());
  return s;
}

std::uint64_t colouring_seed(const RunConfig& cfg, const RunOptions& opt) {
  return opt.seed.value_or(cfg.colouring.seed);
}

SubsetH build_volume(const GroupH& g, const VolumeSpec& v, int j) {
  switch (v.kind) {
    case VolumeSpec::Kind::Folner:
      return make_subset([&](idsa_subset** o) { return idsa_subset_folner(g.get(), j, o); });
    case VolumeSpec::Kind::Ball:
      return make_subset([&](idsa_subset** o) { return idsa_subset_ball(g.get(), j, o); });
    case VolumeSpec::Kind::Box: {
      std::vector<std::int64_t> lo, hi;
      for (const auto& a : v.lo) lo.push_back(a.at(j));
      for (const auto& a : v.hi) hi.push_back(a.at(j));
      return make_subset([&](idsa_subset** o) { return idsa_subset_box(g.get(), lo.data(), hi.data(), o); });
    }
  }
  throw std::logic_error("unhandled volume kind");
}

SubsetH folner(const GroupH& g, int n) {
  return make_subset([&](idsa_subset** o) { return idsa_subset_folner(g.get(), n, o); });
}

std::string group_label(const RunConfig& cfg) { return cfg.group == "h3" ? "h3" : fmt::format("z{}", cfg.d); }

std::string step_csv(const idsa_step* s) {
  const StepData d = step_data(s);
  std::string out = "x,value\n-inf," + num(d.initial) + "\n";
  for (std::size_t i = 0; i < d.breakpoints.size(); ++i)
    out += num(d.breakpoints[i]) + "," + num(d.values[i]) + "\n";
  return out;
}

std::string clusters_csv(const Session& s, const idsa_subset* q, double tau) {
  size_t count = 0;
  idsa_status st = idsa_eigenvalue_clusters(s.op.get(), s.colouring.get(), q, tau, nullptr, nullptr, 0, &count);
  if (st != IDSA_ERR_BUFFER_TOO_SMALL) check(st);
  std::vector<double> lam(count);
  std::vector<size_t> mult(count);
  check(idsa_eigenvalue_clusters(s.op.get(), s.colouring.get(), q, tau, lam.data(), mult.data(), count, &count));
  std::string out = "lambda,multiplicity\n";
  for (std::size_t i = 0; i < count; ++i) out += num(lam[i]) + "," + std::to_string(mult[i]) + "\n";
  return out;
}

bool is_domain_error(const CapiError& e) { return e.status() == IDSA_ERR_DOMAIN; }

// ---- approximant and certificate sweep

struct ApproxCell {
  std::string volume;
  int j = 0;
  SubsetH u;
  std::size_t size = 0;
  StepH shrunk;
  idsa_approximant_info info{};
  std::string error;
  StepH unshrunk;
  std::string error_unshrunk;
  std::string clusters;  // CSV, on the unshrunk volume when it is emitted
};

struct CertCell {
  std::size_t approx = 0;
  int n = 0;
  idsa_certificate cert{};
  bool has_delta = false;
  idsa_delta delta{};
  std::string error;
};

struct SweepOptions {
  bool unshrunk = false;
  bool clusters = false;
  bool delta = false;
  double tau = 0.0;
  int workers = 1;
};

struct Sweep {
  std::vector<ApproxCell> approx;
  std::vector<int> tile_n;
  std::vector<CertCell> certs;  // approx-major, then n

  const CertCell& cert(std::size_t a, std::size_t ni) const { return certs[a * tile_n.size() + ni]; }
};

Sweep run_sweep(const RunConfig& cfg, const Session& s, const idsa_freqs* freqs, const idsa_subset* fallback,
                const SweepOptions& o) {
  Sweep sw;
  sw.tile_n = sorted_unique(cfg.tile_n);
  const std::vector<int> js = sorted_unique(cfg.folner_j);
  for (const auto& v : cfg.volumes)
    for (int j : js) {
      ApproxCell c;
      c.volume = v.name;
      c.j = j;
      c.u = build_volume(s.group, v, j);
      c.size = subset_size(c.u.get());
      sw.approx.push_back(std::move(c));
    }
  std::vector<SubsetH> tiles;
  for (int n : sw.tile_n) tiles.push_back(folner(s.group, n));

  run_pool(sw.approx.size(), o.workers, [&](std::size_t i) {
    ApproxCell& c = sw.approx[i];
    try {
      c.shrunk = make_step([&](idsa_step** out) {
        return idsa_ids_approximant(s.op.get(), s.colouring.get(), c.u.get(), 1, o.tau, out, &c.info);
      });
    } catch (const CapiError& e) {
      if (!is_domain_error(e)) throw;
      c.error = e.what();
    }
    if (o.unshrunk) {
      try {
        c.unshrunk = make_step([&](idsa_step** out) {
          return idsa_ids_approximant(s.op.get(), s.colouring.get(), c.u.get(), 0, o.tau, out, nullptr);
        });
      } catch (const CapiError& e) {
        if (!is_domain_error(e)) throw;
        c.error_unshrunk = e.what();
      }
    }
    if (o.clusters) {
      if (o.unshrunk && c.unshrunk) {
        c.clusters = clusters_csv(s, c.u.get(), o.tau);
      } else if (!o.unshrunk && c.shrunk) {
        SubsetH inner = make_subset([&](idsa_subset** out) { return idsa_subset_shrink(c.u.get(), s.range, out); });
        c.clusters = clusters_csv(s, inner.get(), o.tau);
      }
    }
  });

  for (std::size_t a = 0; a < sw.approx.size(); ++a)
    for (int n : sw.tile_n) sw.certs.push_back(CertCell{a, n, {}, false, {}, {}});

  run_pool(sw.certs.size(), o.workers, [&](std::size_t i) {
    CertCell& c = sw.certs[i];
    const ApproxCell& a = sw.approx[c.approx];
    const idsa_subset* tile = tiles[i % sw.tile_n.size()].get();
    if (!a.error.empty()) {
      c.error = a.error;
      return;
    }
    try {
      check(idsa_ids_certificate(s.op.get(), s.colouring.get(), a.u.get(), tile, freqs, &c.cert));
      if (o.delta) {
        check(idsa_ids_delta(s.op.get(), s.colouring.get(), a.u.get(), tile, freqs, fallback, o.tau, &c.delta));
        c.has_delta = true;
      }
    } catch (const CapiError& e) {
      if (!is_domain_error(e)) throw;
      c.error = e.what();
    }
  });
  return sw;
}

struct TriangleStats {
  std::size_t pairs = 0;
  double max_ratio = 0.0;
};

// Fail fast: sup |N_j1 - N_j2| may not exceed the sum of both certificates.
TriangleStats triangle_check(const Sweep& sw, const std::string& label) {
  TriangleStats st;
  for (std::size_t a = 0; a < sw.approx.size(); ++a)
    for (std::size_t b = a + 1; b < sw.approx.size(); ++b) {
      const ApproxCell& x = sw.approx[a];
      const ApproxCell& y = sw.approx[b];
      if (x.volume != y.volume || !x.shrunk || !y.shrunk) continue;
      double d = 0.0;
      check(idsa_step_sup_distance(x.shrunk.get(), y.shrunk.get(), &d));
      for (std::size_t ni = 0; ni < sw.tile_n.size(); ++ni) {
        const CertCell& cx = sw.cert(a, ni);
        const CertCell& cy = sw.cert(b, ni);
        if (!cx.error.empty() || !cy.error.empty()) continue;
        const double allowance = cx.cert.total + cy.cert.total;
        ++st.pairs;
        if (allowance > 0.0) st.max_ratio = std::max(st.max_ratio, d / allowance);
        if (d > allowance)
          throw CellAssertion(fmt::format("{}triangle consistency failed on volume {} for j={} and j={} at n={}: "
                                          "sup distance {} exceeds {}",
                                          label, x.volume, x.j, y.j, sw.tile_n[ni], num(d), num(allowance)));
      }
    }
  return st;
}

void delta_check(const Sweep& sw, const std::string& label) {
  for (const CertCell& c : sw.certs)
    if (c.has_delta && c.delta.measured > c.delta.total)
      throw CellAssertion(fmt::format("{}measured delta {} exceeds its estimate {} on volume {} j={} n={}", label,
                                      num(c.delta.measured), num(c.delta.total), sw.approx[c.approx].volume,
                                      sw.approx[c.approx].j, c.n));
}

// Trivial colouring: the deviation is at most twice the Folner ratio, so the
// total is dominated by tile + (3 + 4|B_R|) ratio + renorm.
struct Simplified {
  double ball = 0.0;  // |B_R|
  double coefficient() const { return 3.0 + 4.0 * ball; }
  double bound(const idsa_certificate& c) const {
    const double ratio = c.folner_term / (1.0 + 4.0 * ball);
    return c.tile_term + coefficient() * ratio + c.renorm_term;
  }
};

void simplified_check(const Sweep& sw, const Simplified& simp) {
  for (const CertCell& c : sw.certs) {
    if (!c.error.empty()) continue;
    const double b = simp.bound(c.cert);
    if (c.cert.total > b * (1.0 + 1e-12))
      throw CellAssertion(fmt::format("certificate total {} exceeds the simplified bound {} at j={} n={}",
                                      num(c.cert.total), num(b), sw.approx[c.approx].j, c.n));
  }
}

ojson certificate_rows(const Sweep& sw, const std::optional<std::uint64_t>& seed,
                       const std::optional<Simplified>& simp = std::nullopt) {
  ojson rows = ojson::array();
  for (const CertCell& c : sw.certs) {
    const ApproxCell& a = sw.approx[c.approx];
    ojson r;
    if (seed) r["seed"] = *seed;
    r["volume"] = a.volume;
    r["j"] = a.j;
    r["n"] = c.n;
    r["volume_size"] = a.size;
    if (!c.error.empty()) {
      r["error"] = c.error;
    } else {
      r["shrunk_size"] = a.info.volume;
      r["tile_term"] = c.cert.tile_term;
      r["folner_term"] = c.cert.folner_term;
      r["freq_term"] = c.cert.freq_term;
      r["renorm_term"] = c.cert.renorm_term;
      r["total"] = c.cert.total;
      if (simp) r["simplified_bound"] = simp->bound(c.cert);
      if (c.has_delta)
        r["delta"] = ojson{{"b_term", c.delta.b_term},
                           {"folner_term", c.delta.folner_term},
                           {"freq_term", c.delta.freq_term},
                           {"total", c.delta.total},
                           {"measured", c.delta.measured}};
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

ojson tightest_rows(const Sweep& sw) {
  ojson rows = ojson::array();
  for (std::size_t a = 0; a < sw.approx.size(); ++a) {
    const CertCell* best = nullptr;
    for (std::size_t ni = 0; ni < sw.tile_n.size(); ++ni) {
      const CertCell& c = sw.cert(a, ni);
      if (c.error.empty() && (!best || c.cert.total < best->cert.total)) best = &c;
    }
    if (!best) continue;
    rows.push_back(ojson{{"volume", sw.approx[a].volume}, {"j", sw.approx[a].j}, {"n", best->n}, {"total", best->cert.total}});
  }
  return rows;
}

ojson failed_cells(const Sweep& sw) {
  ojson rows = ojson::array();
  for (const ApproxCell& a : sw.approx) {
    if (!a.error.empty()) rows.push_back(ojson{{"volume", a.volume}, {"j", a.j}, {"mode", "shrunk"}, {"error", a.error}});
    if (!a.error_unshrunk.empty())
      rows.push_back(ojson{{"volume", a.volume}, {"j", a.j}, {"mode", "unshrunk"}, {"error", a.error_unshrunk}});
  }
  return rows;
}

void add_approximants(OutputSet& out, const Sweep& sw, const std::string& prefix) {
  for (const ApproxCell& a : sw.approx) {
    const std::string stem = fmt::format("{}{}_j{}", prefix, a.volume, a.j);
    if (a.shrunk) out.add("approximants/" + stem + ".csv", step_csv(a.shrunk.get()));
    if (a.unshrunk) out.add("approximants/" + stem + "_unshrunk.csv", step_csv(a.unshrunk.get()));
    if (!a.clusters.empty()) out.add("clusters/" + stem + (a.unshrunk ? "_unshrunk" : "") + ".csv", a.clusters);
  }
}

FreqsH build_frequencies(const RunConfig& cfg, const Session& s, SubsetH& reference) {
  const std::vector<int> js = sorted_unique(cfg.folner_j);
  const int jref = cfg.freqs.j.value_or(js.empty() ? 1 : js.back());
  reference = build_volume(s.group, cfg.volume(cfg.freqs.volume), jref);
  try {
    if (cfg.freqs.kind == "trivial") return make_freqs([](idsa_freqs** o) { return idsa_freqs_trivial(o); });
    if (cfg.freqs.kind == "percolation")
      return make_freqs([&](idsa_freqs** o) {
        return idsa_freqs_percolation(cfg.colouring.weights.data(), cfg.colouring.weights.size(), o);
      });
    return make_freqs([&](idsa_freqs** o) { return idsa_freqs_empirical(s.colouring.get(), reference.get(), o); });
  } catch (const CapiError& e) {
    throw ConfigError("/frequencies", e.what());
  }
}

ojson frequency_json(const RunConfig& cfg) {
  ojson f{{"kind", cfg.freqs.kind}};
  if (cfg.freqs.kind == "empirical") {
    const std::vector<int> js = sorted_unique(cfg.folner_j);
    f["volume"] = cfg.freqs.volume;
    f["j"] = cfg.freqs.j.value_or(js.empty() ? 1 : js.back());
  }
  return f;
}

}  // namespace

// ---- ids

void cmd_ids(const RunConfig& cfg, const RunOptions& opt) {
  if (cfg.folner_j.empty()) {
    std::cerr << "warning: folner_j is empty; nothing to do\n";
    return;
  }
  if (cfg.tile_n.empty()) throw ConfigError("/tile_n", "ids needs at least one tile index");
  const Session s = build_session(cfg, colouring_seed(cfg, opt));
  SubsetH reference;
  const FreqsH freqs = build_frequencies(cfg, s, reference);

  SweepOptions so;
  so.unshrunk = cfg.ids.unshrunk;
  so.clusters = cfg.ids.clusters;
  so.delta = cfg.ids.delta;
  so.tau = cfg.tau;
  so.workers = worker_count(cfg, opt);
  const Sweep sw = run_sweep(cfg, s, freqs.get(), reference.get(), so);
  const TriangleStats tri = triangle_check(sw, "");
  delta_check(sw, "");
  std::optional<Simplified> simp;
  if (cfg.colouring.kind == "trivial") {
    size_t ball = 0;
    check(idsa_group_ball_size(s.group.get(), s.range, &ball));
    simp = Simplified{static_cast<double>(ball)};
    simplified_check(sw, *simp);
  }

  OutputSet out;
  ojson side_rows = ojson::array();
  if (cfg.ids.frequency_side) {
    // Compared with the largest-j approximant along the frequency volume.
    std::size_t ref = sw.approx.size();
    for (std::size_t a = 0; a < sw.approx.size(); ++a)
      if (sw.approx[a].volume == cfg.freqs.volume && sw.approx[a].shrunk) ref = a;
    if (ref == sw.approx.size()) throw CellAssertion("frequency side: no valid approximant along " + cfg.freqs.volume);
    for (std::size_t ni = 0; ni < sw.tile_n.size(); ++ni) {
      const int n = sw.tile_n[ni];
      const SubsetH tile = folner(s.group, n);
      double bound = 0.0;
      const StepH side = make_step([&](idsa_step** o) {
        return idsa_frequency_side(s.op.get(), s.colouring.get(), tile.get(), freqs.get(), reference.get(), cfg.tau,
                                   o, &bound);
      });
      double d = 0.0;
      check(idsa_step_sup_distance(side.get(), sw.approx[ref].shrunk.get(), &d));
      const CertCell& c = sw.cert(ref, ni);
      if (!c.error.empty()) continue;
      const double allowed = bound + c.cert.total;
      if (d > allowed)
        throw CellAssertion(fmt::format("frequency-side distance {} exceeds {} at n={}", num(d), num(allowed), n));
      out.add(fmt::format("frequency_side/n{}.csv", n), step_csv(side.get()));
      side_rows.push_back(ojson{{"n", n},
                                {"volume", sw.approx[ref].volume},
                                {"j", sw.approx[ref].j},
                                {"sup_distance", d},
                                {"tile_bound", bound},
                                {"certificate_total", c.cert.total}});
    }
  }

  add_approximants(out, sw, "");
  out.add_json("certificates.json", certificate_rows(sw, std::nullopt, simp));
  ojson summary;
  summary["command"] = "ids";
  summary["group"] = group_label(cfg);
  summary["colouring"] = cfg.colouring.kind;
  summary["operator"] = cfg.op.kind;
  summary["range"] = s.range;
  summary["frequencies"] = frequency_json(cfg);
  summary["approximant_cells"] = sw.approx.size();
  summary["certificate_cells"] = sw.certs.size();
  summary["failed_cells"] = failed_cells(sw);
  summary["tightest"] = tightest_rows(sw);
  summary["triangle"] = ojson{{"pairs_checked", tri.pairs}, {"max_ratio", tri.max_ratio}};
  if (simp) summary["simplified_coefficient"] = simp->coefficient();
  if (cfg.ids.frequency_side) summary["frequency_side"] = side_rows;
  out.add_json("summary.json", summary);
  out.write(opt.out_dir);
}

// ---- folner-audit

void cmd_folner_audit(const RunConfig& cfg, const RunOptions& opt) {
  const std::vector<int> ns = sorted_unique(cfg.tile_n);
  if (ns.empty()) {
    std::cerr << "warning: tile_n is empty; nothing to do\n";
    return;
  }
  const GroupH g = build_group(cfg);
  const std::vector<int> radii = sorted_unique(cfg.audit.radii);

  struct Row {
    int n = 0;
    std::size_t size = 0, right = 0, expected = 0;
    std::vector<std::size_t> boundary;
    std::int64_t diameter = -1;
  };
  std::vector<Row> rows(ns.size());
  run_pool(ns.size(), worker_count(cfg, opt), [&](std::size_t i) {
    Row& r = rows[i];
    r.n = ns[i];
    const SubsetH q = folner(g, r.n);
    r.size = subset_size(q.get());
    check(idsa_subset_right_generator_boundary(q.get(), &r.right));
    const auto n = static_cast<std::size_t>(r.n);
    if (cfg.group == "h3") {
      r.expected = 5 * n * n * n - 2 * n * n + n;
    } else {
      std::size_t face = 1;
      for (int k = 1; k < cfg.d; ++k) face *= n;
      r.expected = 2 * static_cast<std::size_t>(cfg.d) * face;
    }
    for (int rad : radii) {
      std::size_t b = 0;
      check(idsa_subset_boundary_size(q.get(), rad, 0, &b));
      r.boundary.push_back(b);
    }
    if (r.n <= cfg.audit.diameter_max_n) check(idsa_subset_diameter(q.get(), &r.diameter));
  });

  std::string csv = "n,size,right_generator_boundary,expected,ratio";
  for (int rad : radii) csv += fmt::format(",boundary_r{0},boundary_ratio_r{0}", rad);
  csv += ",diameter\n";
  bool decreasing = true;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Row& r = rows[i];
    if (r.right != r.expected)
      throw CellAssertion(fmt::format("|Q_n S \\ Q_n| = {} differs from the closed formula {} at n={}", r.right,
                                      r.expected, r.n));
    const double ratio = static_cast<double>(r.right) / static_cast<double>(r.size);
    if (i > 0) {
      const Row& p = rows[i - 1];
      decreasing = decreasing && ratio < static_cast<double>(p.right) / static_cast<double>(p.size);
    }
    csv += fmt::format("{},{},{},{},{}", r.n, r.size, r.right, r.expected, num(ratio));
    for (std::size_t k = 0; k < radii.size(); ++k)
      csv += fmt::format(",{},{}", r.boundary[k], num(static_cast<double>(r.boundary[k]) / static_cast<double>(r.size)));
    csv += r.diameter >= 0 ? fmt::format(",{}\n", r.diameter) : std::string(",\n");
  }

  OutputSet out;
  out.add("folner_audit.csv", csv);
  ojson summary;
  summary["command"] = "folner-audit";
  summary["group"] = group_label(cfg);
  summary["rows"] = rows.size();
  summary["closed_formula_holds"] = true;
  summary["ratio_strictly_decreasing"] = decreasing;
  out.add_json("summary.json", summary);
  out.write(opt.out_dir);
}

// ---- percolation

void cmd_percolation(const RunConfig& cfg, const RunOptions& opt) {
  if (cfg.colouring.kind != "percolation")
    throw ConfigError("/colouring/kind", "the percolation command needs a percolation colouring");
  std::vector<std::uint64_t> seeds = cfg.percolation.seeds;
  if (opt.seed) seeds = {*opt.seed};
  if (seeds.empty()) seeds = {cfg.colouring.seed};
  std::vector<std::vector<std::int64_t>> single{std::vector<std::int64_t>(static_cast<std::size_t>(cfg.rank()), 0)};
  const auto domains = cfg.percolation.domains.empty() ? std::vector<decltype(single)>{single} : cfg.percolation.domains;

  const GroupH g = build_group(cfg);
  const std::size_t colours = cfg.colouring.alphabet.size();
  const OperatorH op = build_operator(cfg.op, g, colours, "/operator");
  const FreqsH analytic = make_freqs([&](idsa_freqs** o) {
    return idsa_freqs_percolation(cfg.colouring.weights.data(), cfg.colouring.weights.size(), o);
  });
  const SubsetH u = folner(g, cfg.percolation.volume_n);
  std::vector<SubsetH> dsets;
  for (const auto& d : domains) {
    std::vector<std::int64_t> flat;
    for (const auto& p : d) flat.insert(flat.end(), p.begin(), p.end());
    dsets.push_back(make_subset([&](idsa_subset** o) { return idsa_subset_from_elements(g.get(), flat.data(), d.size(), o); }));
  }

  struct SeedResult {
    std::string csv;
    std::vector<bool> within;  // per domain, every pattern within tolerance
    double max_diff = 0.0;
    std::optional<Sweep> sweep;
  };
  std::vector<SeedResult> results(seeds.size());
  SweepOptions so;
  so.tau = cfg.tau;

  run_pool(seeds.size(), worker_count(cfg, opt), [&](std::size_t si) {
    SeedResult& res = results[si];
    Session s;
    s.group = g;
    s.colouring = build_colouring(cfg.colouring, g, seeds[si]);
    s.op = op;
    s.range = overall_range(op.get());
    for (std::size_t di = 0; di < dsets.size(); ++di) {
      const std::size_t size = domains[di].size();
      std::vector<int> vals(size, 0);
      bool ok = true;
      for (;;) {
        double emp = 0.0, nu = 0.0;
        char text[128];
        check(idsa_empirical_frequency(s.colouring.get(), dsets[di].get(), vals.data(), u.get(), &emp, text,
                                       sizeof text));
        check(idsa_freqs_pattern(analytic.get(), dsets[di].get(), vals.data(), &nu));
        const double diff = std::fabs(emp - nu);
        const bool within = diff <= cfg.percolation.tolerance;
        ok = ok && within;
        res.max_diff = std::max(res.max_diff, diff);
        std::string pattern;
        for (std::size_t k = 0; k < size; ++k) pattern += (k ? ";" : "") + cfg.colouring.alphabet[static_cast<std::size_t>(vals[k])];
        res.csv += fmt::format("{},{},{},{},{},{},{},{}\n", seeds[si], di, pattern, text, num(emp), num(nu), num(diff),
                               within ? 1 : 0);
        // Next pattern in lexicographic order.
        std::size_t k = size;
        while (k > 0 && vals[k - 1] + 1 == static_cast<int>(colours)) vals[--k] = 0;
        if (k == 0) break;
        ++vals[k - 1];
      }
      res.within.push_back(ok);
    }
    if (!cfg.folner_j.empty() && !cfg.tile_n.empty()) {
      res.sweep = run_sweep(cfg, s, analytic.get(), u.get(), so);
      triangle_check(*res.sweep, fmt::format("seed {}: ", seeds[si]));
    }
  });

  OutputSet out;
  std::string csv = "seed,domain,pattern,empirical_exact,empirical,analytic,abs_diff,within\n";
  ojson certs = ojson::array();
  for (std::size_t si = 0; si < seeds.size(); ++si) {
    csv += results[si].csv;
    if (results[si].sweep) {
      for (auto& row : certificate_rows(*results[si].sweep, seeds[si])) certs.push_back(row);
      add_approximants(out, *results[si].sweep, fmt::format("seed{}/", seeds[si]));
    }
  }
  out.add("percolation_frequencies.csv", csv);
  if (!certs.empty()) out.add_json("certificates.json", certs);

  ojson dom = ojson::array();
  for (std::size_t di = 0; di < domains.size(); ++di) {
    std::size_t pass = 0;
    for (const auto& r : results) pass += r.within[di] ? 1 : 0;
    dom.push_back(ojson{{"domain", di}, {"points", domains[di]}, {"seeds_within_tolerance", pass}, {"seeds", seeds.size()}});
  }
  double max_diff = 0.0;
  for (const auto& r : results) max_diff = std::max(max_diff, r.max_diff);
  ojson summary;
  summary["command"] = "percolation";
  summary["group"] = group_label(cfg);
  summary["volume_size"] = subset_size(u.get());
  summary["tolerance"] = cfg.percolation.tolerance;
  summary["seeds"] = seeds;
  summary["domains"] = dom;
  summary["max_abs_diff"] = max_diff;
  out.add_json("summary.json", summary);
  out.write(opt.out_dir);
}

// ---- continuity

namespace {

// splitmix64 stream mapped to [-1, 1].
struct Uniform {
  std::uint64_t state;
  double next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return static_cast<double>(z >> 11) * 0x1p-53 * 2.0 - 1.0;
  }
};

// Random colour table symmetric under swapping the endpoints of each edge.
std::vector<double> random_table(const idsa_group* g, int colours, Uniform& rng) {
  size_t count = 0;
  int rank = 0;
  check(idsa_group_rank(g, &rank));
  idsa_status st = idsa_group_generators(g, nullptr, 0, &count);
  if (st != IDSA_ERR_BUFFER_TOO_SMALL && st != IDSA_OK) check(st);
  std::vector<std::int64_t> gens(count * static_cast<std::size_t>(rank));
  check(idsa_group_generators(g, gens.data(), gens.size(), &count));
  const auto r = static_cast<std::size_t>(rank);
  std::vector<std::size_t> inverse(count);
  for (std::size_t a = 0; a < count; ++a)
    for (std::size_t b = 0; b < count; ++b) {
      bool neg = true;
      for (std::size_t k = 0; k < r; ++k) neg = neg && gens[a * r + k] == -gens[b * r + k];
      if (neg) inverse[a] = b;
    }
  const std::size_t slots = count + 1;
  const auto c = static_cast<std::size_t>(colours);
  std::vector<double> t(c * c * slots, 0.0);
  std::vector<bool> set(t.size(), false);
  for (std::size_t cx = 0; cx < c; ++cx)
    for (std::size_t cy = 0; cy < c; ++cy)
      for (std::size_t sl = 0; sl < slots; ++sl) {
        const std::size_t idx = (cx * c + cy) * slots + sl;
        if (set[idx]) continue;
        t[idx] = rng.next();
        set[idx] = true;
        if (sl < count) {
          const std::size_t partner = (cy * c + cx) * slots + inverse[sl];
          t[partner] = t[idx];
          set[partner] = true;
        }
      }
  return t;
}

}  // namespace

void cmd_continuity(const RunConfig& cfg, const RunOptions& opt) {
  const auto& c = cfg.continuity;
  if (c.eps.empty()) {
    std::cerr << "warning: continuity.eps is empty; nothing to do\n";
    return;
  }
  const GroupH g = build_group(cfg);
  const ColouringH col = build_colouring(cfg.colouring, g, colouring_seed(cfg, opt));
  const int colours = static_cast<int>(cfg.colouring.alphabet.size());
  Uniform rng{c.table_seed};
  const std::vector<double> base = random_table(g.get(), colours, rng);
  const std::vector<double> direction = random_table(g.get(), colours, rng);
  const OperatorH h = make_operator([&](idsa_operator** o) {
    return idsa_operator_colour_table(g.get(), colours, base.data(), base.size(), o);
  });
  const SubsetH u = folner(g, c.volume_n);

  std::vector<idsa_continuity> rows(c.eps.size());
  run_pool(c.eps.size(), worker_count(cfg, opt), [&](std::size_t i) {
    std::vector<double> pert(base.size());
    for (std::size_t k = 0; k < base.size(); ++k) pert[k] = base[k] + c.eps[i] * direction[k];
    const OperatorH gop = make_operator([&](idsa_operator** o) {
      return idsa_operator_colour_table(g.get(), colours, pert.data(), pert.size(), o);
    });
    check(idsa_continuity_gap(h.get(), gop.get(), col.get(), u.get(), c.eps[i], c.centre, c.width, cfg.tau, &rows[i]));
  });

  std::string csv = "eps,gap,bound,max_entry_difference\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].gap > rows[i].bound)
      throw CellAssertion(fmt::format("continuity gap {} exceeds the bound {} at eps={}", num(rows[i].gap),
                                      num(rows[i].bound), num(c.eps[i])));
    csv += fmt::format("{},{},{},{}\n", num(c.eps[i]), num(rows[i].gap), num(rows[i].bound),
                       num(rows[i].max_entry_difference));
  }
  OutputSet out;
  out.add("continuity.csv", csv);
  ojson summary;
  summary["command"] = "continuity";
  summary["group"] = group_label(cfg);
  summary["volume_size"] = subset_size(u.get());
  summary["bump"] = ojson{{"centre", c.centre}, {"width", c.width}};
  summary["table_seed"] = c.table_seed;
  summary["rows"] = rows.size();
  out.add_json("summary.json", summary);
  out.write(opt.out_dir);
}

}  // namespace cli
