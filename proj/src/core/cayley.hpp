#pragma once

#include <array>
#include <atomic>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

namespace idsa {

using Coord = std::int64_t;

// Group element as a fixed coordinate vector. Slots beyond the model's rank
// stay zero, so the default ordering is the lexicographic coordinate order.
struct Element {
  std::array<Coord, 4> c{};

  friend auto operator<=>(const Element&, const Element&) = default;
  friend bool operator==(const Element&, const Element&) = default;
};

struct ElementHash {
  std::size_t operator()(const Element& e) const noexcept {
    std::uint64_t h = 0x9e3779b97f4a7c15ULL;
    for (Coord v : e.c) {
      h ^= static_cast<std::uint64_t>(v) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return static_cast<std::size_t>(h);
  }
};

using ElementSet = std::unordered_set<Element, ElementHash>;

enum class GroupKind { FreeAbelian, Heisenberg3 };

class FiniteSubset;

class GroupModel : public std::enable_shared_from_this<GroupModel> {
 public:
  virtual ~GroupModel() = default;

  virtual GroupKind kind() const = 0;
  virtual int rank() const = 0;
  virtual std::string name() const = 0;
  virtual Element multiply(const Element& g, const Element& h) const = 0;
  virtual Element inverse(const Element& g) const = 0;

  // Monotile with volume-growing index n and its grid subgroup.
  virtual std::vector<Element> tile_elements(int n) const = 0;
  virtual bool in_grid(const Element& g, int n) const = 0;
  // Unique (q, gamma) with q in the tile, gamma in the grid and q*gamma = g.
  virtual std::pair<Element, Element> grid_decompose(const Element& g, int n) const = 0;
  virtual std::string grid_description(int n) const = 0;

  Element identity() const { return Element{}; }
  const std::vector<Element>& generators() const { return gens_; }

  // Throws InvalidArgument when g has non-zero coordinates beyond rank().
  void validate(const Element& g) const;

  // |g| in the word metric. Memoized by a BFS table that grows on demand;
  // concurrent readers share the table, growth is serialized.
  std::int64_t word_length(const Element& g) const;
  // d(g, h) = |h g^-1|. Right translations are isometries.
  std::int64_t word_distance(const Element& g, const Element& h) const;

  std::vector<Element> ball_elements(int radius) const;

 protected:
  std::vector<Element> gens_;

 private:
  std::uint64_t pack(const Element& g) const;
  void grow_memo_locked() const;

  mutable std::shared_mutex memo_mutex_;
  mutable std::unordered_map<std::uint64_t, std::int32_t> memo_;
  mutable std::vector<std::vector<Element>> layers_;
};

using GroupPtr = std::shared_ptr<const GroupModel>;

class FreeAbelianGroup final : public GroupModel {
 public:
  explicit FreeAbelianGroup(int d);
  GroupKind kind() const override { return GroupKind::FreeAbelian; }
  int rank() const override { return d_; }
  std::string name() const override;
  Element multiply(const Element& g, const Element& h) const override;
  Element inverse(const Element& g) const override;
  std::vector<Element> tile_elements(int n) const override;
  bool in_grid(const Element& g, int n) const override;
  std::pair<Element, Element> grid_decompose(const Element& g, int n) const override;
  std::string grid_description(int n) const override;

 private:
  int d_;
};

// Discrete Heisenberg group, (a,b,c)(a',b',c') = (a+a', b+b', c+c'+b*a').
class Heisenberg3Group final : public GroupModel {
 public:
  Heisenberg3Group();
  GroupKind kind() const override { return GroupKind::Heisenberg3; }
  int rank() const override { return 3; }
  std::string name() const override { return "h3"; }
  Element multiply(const Element& g, const Element& h) const override;
  Element inverse(const Element& g) const override;
  std::vector<Element> tile_elements(int n) const override;
  bool in_grid(const Element& g, int n) const override;
  std::pair<Element, Element> grid_decompose(const Element& g, int n) const override;
  std::string grid_description(int n) const override;
};

GroupPtr make_free_abelian(int d);
GroupPtr make_heisenberg3();

// Deduplicated, sorted set of elements of one group.
class FiniteSubset {
 public:
  FiniteSubset() = default;
  FiniteSubset(GroupPtr group, std::vector<Element> elements);

  const GroupModel& group() const { return *group_; }
  const GroupPtr& group_ptr() const { return group_; }
  const std::vector<Element>& elements() const { return elems_; }
  std::size_t size() const { return elems_.size(); }
  bool empty() const { return elems_.empty(); }
  bool contains(const Element& g) const { return index_.count(g) != 0; }
  // Position in the sorted order, or -1.
  std::ptrdiff_t index_of(const Element& g) const;
  const Element& max_element() const;

  // Max pairwise word distance. Cached; throws DomainError on the empty set.
  std::int64_t diameter() const;

  // Qx = {qx : q in Q}.
  FiniteSubset translate(const Element& x) const;

  friend bool operator==(const FiniteSubset& a, const FiniteSubset& b) {
    return a.elems_ == b.elems_;
  }

 private:
  GroupPtr group_;
  std::vector<Element> elems_;
  std::unordered_map<Element, std::size_t, ElementHash> index_;
  std::shared_ptr<std::atomic<std::int64_t>> diam_ =
      std::make_shared<std::atomic<std::int64_t>>(-1);
};

FiniteSubset ball(const GroupPtr& g, int radius);
// B_R(x) = B_R x.
FiniteSubset ball_at(const GroupPtr& g, int radius, const Element& x);
// Coordinate box lo <= c <= hi (inclusive) in the first rank() coordinates.
FiniteSubset box(const GroupPtr& g, const std::vector<Coord>& lo, const std::vector<Coord>& hi);

// Boundaries by BFS layers around Q.
FiniteSubset boundary_int(const FiniteSubset& q, int radius);
FiniteSubset boundary_ext(const FiniteSubset& q, int radius);
FiniteSubset boundary(const FiniteSubset& q, int radius);
FiniteSubset shrink(const FiniteSubset& q, int radius);
FiniteSubset grow(const FiniteSubset& q, int radius);
// Same sets through the union over the ball: Q \ sQ and sQ \ Q for s in B_R.
FiniteSubset boundary_int_union(const FiniteSubset& q, int radius);
FiniteSubset boundary_ext_union(const FiniteSubset& q, int radius);
// |QS \ Q| with S acting on the right, as reported in Folner audits.
std::size_t right_generator_boundary_size(const FiniteSubset& q);

struct TilingSpec {
  GroupPtr group;
  int n = 1;
  FiniteSubset tile;

  bool in_grid(const Element& g) const { return group->in_grid(g, n); }
  std::pair<Element, Element> decompose(const Element& g) const {
    return group->grid_decompose(g, n);
  }
};

TilingSpec folner_set(const GroupPtr& g, int n);

struct GridCover {
  std::vector<Element> interior;
  std::vector<Element> crossing;
};

// Shifts gamma in K_n x^-1 whose tile Q_n gamma meets A, split by whether the
// tile lies inside A.
GridCover grid_cover(const FiniteSubset& a, const Element& x, const TilingSpec& spec);

struct PartitionReport {
  std::size_t covered = 0;
  std::size_t overlaps = 0;  // elements hit more than once
  std::size_t gaps = 0;      // elements never hit
};

// Translates Q_n gamma over grid elements gamma in B_grid_radius, checked
// against B_region_radius.
PartitionReport check_tiling_partition(const TilingSpec& spec, int region_radius, int grid_radius);

}  // namespace idsa
