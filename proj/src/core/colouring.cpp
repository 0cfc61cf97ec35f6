#include "core/colouring.hpp"

#include <algorithm>

#include "core/errors.hpp"

namespace idsa {

double to_double(const Rational& r) { return r.convert_to<double>(); }

int Alphabet::index_of(const std::string& symbol) const {
  auto it = std::find(symbols.begin(), symbols.end(), symbol);
  if (it == symbols.end()) throw InvalidArgument("unknown colour symbol '" + symbol + "'");
  return static_cast<int>(it - symbols.begin());
}

Colouring::Colouring(Alphabet alphabet) : alphabet_(std::move(alphabet)) {
  if (alphabet_.symbols.empty()) throw InvalidArgument("alphabet must not be empty");
  std::vector<std::string> sorted = alphabet_.symbols;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw InvalidArgument("alphabet symbols must be distinct");
}

TrivialColouring::TrivialColouring() : Colouring(Alphabet{{"o"}}) {}

PeriodicColouring::PeriodicColouring(Alphabet alphabet, TilingSpec spec,
                                     std::vector<int> tile_colours)
    : Colouring(std::move(alphabet)), spec_(std::move(spec)), table_(std::move(tile_colours)) {
  if (table_.size() != spec_.tile.size())
    throw InvalidArgument("periodic colouring needs one colour per tile element");
  for (int v : table_)
    if (v < 0 || v >= static_cast<int>(this->alphabet().size()))
      throw InvalidArgument("periodic colour out of range");
}

int PeriodicColouring::colour(const Element& g) const {
  auto q = spec_.decompose(g).first;
  return table_[static_cast<std::size_t>(spec_.tile.index_of(q))];
}

ExplicitColouring::ExplicitColouring(Alphabet alphabet,
                                     std::unordered_map<Element, int, ElementHash> table,
                                     int fallback)
    : Colouring(std::move(alphabet)), table_(std::move(table)), fallback_(fallback) {
  const int k = static_cast<int>(this->alphabet().size());
  if (fallback_ < 0 || fallback_ >= k) throw InvalidArgument("default colour out of range");
  for (const auto& [g, v] : table_)
    if (v < 0 || v >= k) throw InvalidArgument("explicit colour out of range");
}

int ExplicitColouring::colour(const Element& g) const {
  auto it = table_.find(g);
  return it == table_.end() ? fallback_ : it->second;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

PercolationColouring::PercolationColouring(Alphabet alphabet, std::vector<std::uint64_t> weights,
                                           std::uint64_t seed)
    : Colouring(std::move(alphabet)), weights_(std::move(weights)), seed_(seed) {
  if (weights_.size() != this->alphabet().size())
    throw InvalidArgument("percolation needs one weight per colour");
  for (auto w : weights_) {
    if (w > (std::uint64_t{1} << 32)) throw InvalidArgument("percolation weight too large");
    total_ += w;
  }
  if (total_ == 0) throw InvalidArgument("percolation weights sum to zero");
}

int PercolationColouring::colour(const Element& g) const {
  std::uint64_t h = splitmix64(seed_);
  for (Coord v : g.c) h = splitmix64(h ^ static_cast<std::uint64_t>(v));
  auto u = static_cast<std::uint64_t>((static_cast<unsigned __int128>(h) * total_) >> 64);
  for (std::size_t a = 0; a < weights_.size(); ++a) {
    if (u < weights_[a]) return static_cast<int>(a);
    u -= weights_[a];
  }
  return static_cast<int>(weights_.size()) - 1;
}

HalfLineMod3Colouring::HalfLineMod3Colouring() : Colouring(Alphabet{{"white", "black"}}) {}

HalfLineMod3Colouring::HalfLineMod3Colouring(Coord cutoff)
    : Colouring(Alphabet{{"white", "black"}}), has_cutoff_(true), cutoff_(cutoff) {}

int HalfLineMod3Colouring::colour(const Element& g) const {
  const Coord x = g.c[0];
  if (g.c[1] != 0 || g.c[2] != 0 || g.c[3] != 0)
    throw InvalidArgument("half-line colouring is defined on Z only");
  if (x >= 0 || x % 3 == 0) return 0;
  if (has_cutoff_ && x <= cutoff_) return 0;
  return 1;
}

// ---- patterns

int Pattern::at(const Element& g) const {
  auto idx = domain.index_of(g);
  if (idx < 0) throw InvalidArgument("element outside the pattern domain");
  return values[static_cast<std::size_t>(idx)];
}

std::vector<Coord> PatternClass::serialize() const {
  std::vector<Coord> out;
  out.reserve(canonical.domain.size() * 4 + canonical.values.size());
  for (const Element& g : canonical.domain.elements()) out.insert(out.end(), g.c.begin(), g.c.end());
  out.insert(out.end(), canonical.values.begin(), canonical.values.end());
  return out;
}

std::uint64_t class_hash(const PatternClass& p) {
  std::uint64_t h = 0x6a09e667f3bcc908ULL;
  for (Coord v : p.serialize()) h = splitmix64(h ^ static_cast<std::uint64_t>(v));
  return h;
}

Pattern restrict(const Colouring& c, const FiniteSubset& q) {
  Pattern p{q, {}};
  p.values.reserve(q.size());
  for (const Element& g : q.elements()) p.values.push_back(c.colour(g));
  return p;
}

Pattern translate_pattern(const Pattern& p, const Element& x) {
  const GroupModel& g = p.domain.group();
  std::vector<std::pair<Element, int>> moved;
  moved.reserve(p.values.size());
  for (std::size_t i = 0; i < p.values.size(); ++i)
    moved.emplace_back(g.multiply(p.domain.elements()[i], x), p.values[i]);
  std::sort(moved.begin(), moved.end());
  std::vector<Element> dom;
  std::vector<int> vals;
  for (auto& [e, v] : moved) {
    dom.push_back(e);
    vals.push_back(v);
  }
  return Pattern{FiniteSubset(p.domain.group_ptr(), std::move(dom)), std::move(vals)};
}

PatternClass canonicalize(const Pattern& p) {
  if (p.domain.empty()) throw InvalidArgument("cannot canonicalize an empty pattern");
  // The coordinate order is invariant under left and right multiplication on
  // both shipped groups, so the least serialized translate P d^-1 is the one
  // with d = max D(P): it puts the smallest possible element first.
  const GroupModel& g = p.domain.group();
  return PatternClass{translate_pattern(p, g.inverse(p.domain.max_element()))};
}

PatternClass canonicalize_bruteforce(const Pattern& p) {
  if (p.domain.empty()) throw InvalidArgument("cannot canonicalize an empty pattern");
  const GroupModel& g = p.domain.group();
  std::optional<PatternClass> best;
  std::vector<Coord> best_key;
  for (const Element& d : p.domain.elements()) {
    PatternClass cand{translate_pattern(p, g.inverse(d))};
    auto key = cand.serialize();
    if (!best || key < best_key) {
      best = std::move(cand);
      best_key = std::move(key);
    }
  }
  return *best;
}

std::uint64_t count_occurrences(const Pattern& p, const Pattern& big) {
  if (p.domain.empty()) return 0;
  const GroupModel& g = big.domain.group();
  const auto& dom = p.domain.elements();
  const Element d0_inv = g.inverse(dom.front());
  std::uint64_t count = 0;
  for (const Element& y : big.domain.elements()) {
    const Element x = g.multiply(d0_inv, y);
    bool ok = true;
    for (std::size_t i = 0; i < dom.size() && ok; ++i) {
      auto idx = big.domain.index_of(g.multiply(dom[i], x));
      ok = idx >= 0 && big.values[static_cast<std::size_t>(idx)] == p.values[i];
    }
    if (ok) ++count;
  }
  return count;
}

std::vector<Element> placements(const FiniteSubset& d, const FiniteSubset& u) {
  std::vector<Element> out;
  if (d.empty()) return out;
  const GroupModel& g = u.group();
  const Element d0_inv = g.inverse(d.elements().front());
  for (const Element& y : u.elements()) {
    const Element x = g.multiply(d0_inv, y);
    bool ok = true;
    for (std::size_t i = 1; i < d.size() && ok; ++i) ok = u.contains(g.multiply(d.elements()[i], x));
    if (ok) out.push_back(x);
  }
  return out;
}

Rational empirical_frequency(const Pattern& p, const Colouring& c, const FiniteSubset& u) {
  if (u.empty()) throw InvalidArgument("empirical frequency needs a non-empty volume");
  return Rational(count_occurrences(p, restrict(c, u))) / Rational(u.size());
}

PatternSpectrum occurring_pattern_spectrum(const Colouring& c, const FiniteSubset& tile,
                                           const FiniteSubset& u) {
  const GroupModel& g = u.group();
  // Distinct placements of a tile are never translates of each other's domain
  // in a torsion-free group, so the colour vector in tile order is a complete
  // class key.
  struct Acc {
    std::uint64_t count = 0;
    Element first;
  };
  std::map<std::vector<int>, Acc> tally;
  PatternSpectrum out;
  std::vector<int> colours(tile.size());
  for (const Element& x : placements(tile, u)) {
    for (std::size_t i = 0; i < tile.size(); ++i) colours[i] = c.colour(g.multiply(tile.elements()[i], x));
    auto [it, fresh] = tally.try_emplace(colours);
    if (fresh) it->second.first = x;
    ++it->second.count;
    ++out.placements;
  }
  for (const auto& [vals, acc] : tally) {
    PatternClass cls = canonicalize(Pattern{tile, vals});
    out.entries.push_back(SpectrumEntry{std::move(cls), acc.count, acc.first});
  }
  std::sort(out.entries.begin(), out.entries.end(),
            [](const SpectrumEntry& a, const SpectrumEntry& b) {
              return a.cls.serialize() < b.cls.serialize();
            });
  return out;
}

// ---- frequency providers

Rational TrivialFrequencies::frequency(const PatternClass& p) const {
  for (int v : p.canonical.values)
    if (v != 0) return Rational(0);
  return Rational(1);
}

PercolationFrequencies::PercolationFrequencies(std::vector<std::uint64_t> weights)
    : weights_(std::move(weights)) {
  for (auto w : weights_) total_ += w;
  if (total_ == 0) throw InvalidArgument("percolation weights sum to zero");
}

Rational PercolationFrequencies::frequency(const PatternClass& p) const {
  boost::multiprecision::cpp_int num = 1, den = 1;
  for (int v : p.canonical.values) {
    if (v < 0 || v >= static_cast<int>(weights_.size()))
      throw InvalidArgument("pattern colour outside the percolation alphabet");
    num *= weights_[static_cast<std::size_t>(v)];
    den *= total_;
  }
  return Rational(num, den);
}

EmpiricalFrequencies::EmpiricalFrequencies(ColouringPtr c, FiniteSubset reference)
    : colouring_(std::move(c)), reference_(std::move(reference)) {
  if (reference_.empty()) throw InvalidArgument("empirical frequencies need a non-empty volume");
}

const EmpiricalFrequencies::DomainTable& EmpiricalFrequencies::table_for(
    const FiniteSubset& domain) const {
  std::lock_guard lock(mutex_);
  auto& slot = tables_[domain.elements()];
  if (!slot) {
    auto table = std::make_shared<DomainTable>();
    const GroupModel& g = reference_.group();
    std::vector<int> colours(domain.size());
    for (const Element& x : placements(domain, reference_)) {
      for (std::size_t i = 0; i < domain.size(); ++i)
        colours[i] = colouring_->colour(g.multiply(domain.elements()[i], x));
      ++table->counts[colours];
      ++table->placements;
    }
    slot = std::move(table);
  }
  return *slot;
}

Rational EmpiricalFrequencies::frequency(const PatternClass& p) const {
  const DomainTable& t = table_for(p.canonical.domain);
  auto it = t.counts.find(p.canonical.values);
  if (it == t.counts.end()) return Rational(0);
  return Rational(it->second) / Rational(reference_.size());
}

Rational EmpiricalFrequencies::total_mass(const FiniteSubset& domain) const {
  // Placement counts are translation invariant in the domain.
  const GroupModel& g = domain.group();
  FiniteSubset canon = domain.translate(g.inverse(domain.max_element()));
  return Rational(table_for(canon).placements) / Rational(reference_.size());
}

Rational frequency_deviation(const PatternSpectrum& spectrum, const FiniteSubset& tile,
                             const FiniteSubset& u, const FrequencyProvider& freqs) {
  if (u.empty()) throw InvalidArgument("frequency deviation needs a non-empty volume");
  const Rational vol(u.size());
  Rational dev(0), seen_mass(0);
  for (const auto& e : spectrum.entries) {
    Rational nu = freqs.frequency(e.cls);
    Rational emp = Rational(e.count) / vol;
    dev += emp > nu ? emp - nu : nu - emp;
    seen_mass += nu;
  }
  Rational residual = freqs.total_mass(tile) - seen_mass;
  if (residual < 0)
    throw PreconditionError("frequency provider assigns more mass to occurring patterns than its total");
  return dev + residual;
}

Rational frequency_deviation(const Colouring& c, const FiniteSubset& tile, const FiniteSubset& u,
                             const FrequencyProvider& freqs) {
  return frequency_deviation(occurring_pattern_spectrum(c, tile, u), tile, u, freqs);
}

}  // namespace idsa
