#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "core/cayley.hpp"

namespace idsa {

using Rational = boost::multiprecision::cpp_rational;

double to_double(const Rational& r);

// Colours are indices into the alphabet's symbol list.
struct Alphabet {
  std::vector<std::string> symbols;

  std::size_t size() const { return symbols.size(); }
  int index_of(const std::string& symbol) const;  // throws when unknown
};

class Colouring {
 public:
  explicit Colouring(Alphabet alphabet);
  virtual ~Colouring() = default;

  virtual int colour(const Element& g) const = 0;
  virtual std::string kind() const = 0;
  const Alphabet& alphabet() const { return alphabet_; }

 private:
  Alphabet alphabet_;
};

using ColouringPtr = std::shared_ptr<const Colouring>;

class TrivialColouring final : public Colouring {
 public:
  TrivialColouring();
  int colour(const Element&) const override { return 0; }
  std::string kind() const override { return "trivial"; }
};

// Colour of q gamma is table[q] for the tile element q.
class PeriodicColouring final : public Colouring {
 public:
  PeriodicColouring(Alphabet alphabet, TilingSpec spec, std::vector<int> tile_colours);
  int colour(const Element& g) const override;
  std::string kind() const override { return "periodic"; }

 private:
  TilingSpec spec_;
  std::vector<int> table_;
};

class ExplicitColouring final : public Colouring {
 public:
  ExplicitColouring(Alphabet alphabet, std::unordered_map<Element, int, ElementHash> table,
                    int fallback);
  int colour(const Element& g) const override;
  std::string kind() const override { return "explicit"; }

 private:
  std::unordered_map<Element, int, ElementHash> table_;
  int fallback_;
};

// i.i.d. colours with law weights[a] / sum(weights). The colour at g is a pure
// function of (seed, coordinates of g), so translating a sample only
// re-indexes it.
class PercolationColouring final : public Colouring {
 public:
  PercolationColouring(Alphabet alphabet, std::vector<std::uint64_t> weights, std::uint64_t seed);
  int colour(const Element& g) const override;
  std::string kind() const override { return "percolation"; }
  const std::vector<std::uint64_t>& weights() const { return weights_; }
  std::uint64_t total_weight() const { return total_; }
  std::uint64_t seed() const { return seed_; }

 private:
  std::vector<std::uint64_t> weights_;
  std::uint64_t total_ = 0;
  std::uint64_t seed_;
};

// On Z: white (0) if x >= 0 or x divisible by 3, black (1) otherwise. With a
// cutoff, every x <= cutoff is white as well.
class HalfLineMod3Colouring final : public Colouring {
 public:
  HalfLineMod3Colouring();
  explicit HalfLineMod3Colouring(Coord cutoff);
  int colour(const Element& g) const override;
  std::string kind() const override { return has_cutoff_ ? "half_line_mod3_window" : "half_line_mod3"; }

 private:
  bool has_cutoff_ = false;
  Coord cutoff_ = 0;
};

struct Pattern {
  FiniteSubset domain;
  std::vector<int> values;  // aligned with domain.elements()

  int at(const Element& g) const;
};

// Orbit representative under right translation.
struct PatternClass {
  Pattern canonical;

  std::vector<Coord> serialize() const;
  friend bool operator==(const PatternClass& a, const PatternClass& b) {
    return a.canonical.values == b.canonical.values && a.canonical.domain == b.canonical.domain;
  }
};

std::uint64_t class_hash(const PatternClass& p);

Pattern restrict(const Colouring& c, const FiniteSubset& q);
Pattern translate_pattern(const Pattern& p, const Element& x);
PatternClass canonicalize(const Pattern& p);
// Scans every translate P d^-1; the reference for canonicalize().
PatternClass canonicalize_bruteforce(const Pattern& p);

std::uint64_t count_occurrences(const Pattern& p, const Pattern& big);
// x with D x contained in U.
std::vector<Element> placements(const FiniteSubset& d, const FiniteSubset& u);
Rational empirical_frequency(const Pattern& p, const Colouring& c, const FiniteSubset& u);

struct SpectrumEntry {
  PatternClass cls;
  std::uint64_t count = 0;
  Element representative;  // some x with tile x inside U carrying this class
};

struct PatternSpectrum {
  std::vector<SpectrumEntry> entries;  // sorted by serialized class
  std::uint64_t placements = 0;
};

PatternSpectrum occurring_pattern_spectrum(const Colouring& c, const FiniteSubset& tile,
                                           const FiniteSubset& u);

class FrequencyProvider {
 public:
  virtual ~FrequencyProvider() = default;
  virtual Rational frequency(const PatternClass& p) const = 0;
  // Sum of frequencies over all patterns with the given domain.
  virtual Rational total_mass(const FiniteSubset& domain) const = 0;
  virtual std::string kind() const = 0;
};

using FrequencyPtr = std::shared_ptr<const FrequencyProvider>;

class TrivialFrequencies final : public FrequencyProvider {
 public:
  Rational frequency(const PatternClass& p) const override;
  Rational total_mass(const FiniteSubset&) const override { return Rational(1); }
  std::string kind() const override { return "trivial"; }
};

class PercolationFrequencies final : public FrequencyProvider {
 public:
  explicit PercolationFrequencies(std::vector<std::uint64_t> weights);
  Rational frequency(const PatternClass& p) const override;
  Rational total_mass(const FiniteSubset&) const override { return Rational(1); }
  std::string kind() const override { return "percolation"; }

 private:
  std::vector<std::uint64_t> weights_;
  std::uint64_t total_ = 0;
};

// Occurrence densities of C along a fixed reference volume.
class EmpiricalFrequencies final : public FrequencyProvider {
 public:
  EmpiricalFrequencies(ColouringPtr c, FiniteSubset reference);
  Rational frequency(const PatternClass& p) const override;
  Rational total_mass(const FiniteSubset& domain) const override;
  std::string kind() const override { return "empirical"; }
  const FiniteSubset& reference() const { return reference_; }
  const ColouringPtr& colouring() const { return colouring_; }

 private:
  struct DomainTable {
    std::map<std::vector<int>, std::uint64_t> counts;
    std::uint64_t placements = 0;
  };
  const DomainTable& table_for(const FiniteSubset& canonical_domain) const;

  ColouringPtr colouring_;
  FiniteSubset reference_;
  mutable std::mutex mutex_;
  mutable std::map<std::vector<Element>, std::shared_ptr<DomainTable>> tables_;
};

// Sum over occurring classes of |empirical - nu| plus the frequency mass of
// classes that do not occur in U.
Rational frequency_deviation(const PatternSpectrum& spectrum, const FiniteSubset& tile,
                             const FiniteSubset& u, const FrequencyProvider& freqs);
Rational frequency_deviation(const Colouring& c, const FiniteSubset& tile, const FiniteSubset& u,
                             const FrequencyProvider& freqs);

}  // namespace idsa
