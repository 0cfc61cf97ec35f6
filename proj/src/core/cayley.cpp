#include "core/cayley.hpp"

#include <algorithm>
#include <mutex>
#include <sstream>

#include "core/errors.hpp"

namespace idsa {

namespace {

Coord floor_mod(Coord a, Coord m) {
  Coord r = a % m;
  return r < 0 ? r + m : r;
}

void require_positive(int n, const char* what) {
  if (n < 1) throw InvalidArgument(std::string(what) + " must be positive");
}

}  // namespace

void GroupModel::validate(const Element& g) const {
  for (int i = rank(); i < static_cast<int>(g.c.size()); ++i) {
    if (g.c[i] != 0) throw InvalidArgument("element has coordinates beyond the group rank");
  }
}

std::uint64_t GroupModel::pack(const Element& g) const {
  const int r = rank();
  const int bits = r <= 3 ? 21 : 16;
  const Coord half = Coord{1} << (bits - 1);
  std::uint64_t key = 0;
  for (int i = 0; i < r; ++i) {
    Coord v = g.c[i];
    if (v < -half || v >= half) throw InvalidArgument("element outside the word-length table range");
    key = (key << bits) | static_cast<std::uint64_t>(v + half);
  }
  return key;
}

void GroupModel::grow_memo_locked() const {
  if (layers_.empty()) {
    layers_.push_back({identity()});
    memo_.emplace(pack(identity()), 0);
    return;
  }
  const auto dist = static_cast<std::int32_t>(layers_.size());
  std::vector<Element> next;
  for (const Element& g : layers_.back()) {
    for (const Element& s : gens_) {
      Element h = multiply(s, g);
      if (memo_.emplace(pack(h), dist).second) next.push_back(h);
    }
  }
  std::sort(next.begin(), next.end());
  layers_.push_back(std::move(next));
}

std::int64_t GroupModel::word_length(const Element& g) const {
  const std::uint64_t key = pack(g);
  {
    std::shared_lock lock(memo_mutex_);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
  }
  std::unique_lock lock(memo_mutex_);
  for (;;) {
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    grow_memo_locked();
  }
}

std::int64_t GroupModel::word_distance(const Element& g, const Element& h) const {
  return word_length(multiply(h, inverse(g)));
}

std::vector<Element> GroupModel::ball_elements(int radius) const {
  if (radius < 0) throw InvalidArgument("radius must be nonnegative");
  {
    std::shared_lock lock(memo_mutex_);
    if (static_cast<int>(layers_.size()) > radius) {
      std::vector<Element> out;
      for (int r = 0; r <= radius; ++r) out.insert(out.end(), layers_[r].begin(), layers_[r].end());
      return out;
    }
  }
  std::unique_lock lock(memo_mutex_);
  while (static_cast<int>(layers_.size()) <= radius) grow_memo_locked();
  std::vector<Element> out;
  for (int r = 0; r <= radius; ++r) out.insert(out.end(), layers_[r].begin(), layers_[r].end());
  return out;
}

// ---- Z^d

FreeAbelianGroup::FreeAbelianGroup(int d) : d_(d) {
  if (d < 1 || d > 4) throw InvalidArgument("Z^d supports 1 <= d <= 4");
  for (int i = 0; i < d; ++i) {
    Element plus, minus;
    plus.c[i] = 1;
    minus.c[i] = -1;
    gens_.push_back(plus);
    gens_.push_back(minus);
  }
}

std::string FreeAbelianGroup::name() const { return "z" + std::to_string(d_); }

Element FreeAbelianGroup::multiply(const Element& g, const Element& h) const {
  Element r;
  for (int i = 0; i < d_; ++i) r.c[i] = g.c[i] + h.c[i];
  return r;
}

Element FreeAbelianGroup::inverse(const Element& g) const {
  Element r;
  for (int i = 0; i < d_; ++i) r.c[i] = -g.c[i];
  return r;
}

std::vector<Element> FreeAbelianGroup::tile_elements(int n) const {
  require_positive(n, "tile index");
  std::vector<Element> out;
  Element cur;
  for (;;) {
    out.push_back(cur);
    int i = d_ - 1;
    while (i >= 0 && ++cur.c[i] == n) cur.c[i--] = 0;
    if (i < 0) break;
  }
  return out;
}

bool FreeAbelianGroup::in_grid(const Element& g, int n) const {
  for (int i = 0; i < d_; ++i)
    if (floor_mod(g.c[i], n) != 0) return false;
  return true;
}

std::pair<Element, Element> FreeAbelianGroup::grid_decompose(const Element& g, int n) const {
  require_positive(n, "tile index");
  Element q, gamma;
  for (int i = 0; i < d_; ++i) {
    q.c[i] = floor_mod(g.c[i], n);
    gamma.c[i] = g.c[i] - q.c[i];
  }
  return {q, gamma};
}

std::string FreeAbelianGroup::grid_description(int n) const {
  return "(" + std::to_string(n) + "Z)^" + std::to_string(d_);
}

// ---- H3

Heisenberg3Group::Heisenberg3Group() {
  gens_ = {Element{{1, 0, 0, 0}}, Element{{-1, 0, 0, 0}}, Element{{0, 1, 0, 0}},
           Element{{0, -1, 0, 0}}};
}

Element Heisenberg3Group::multiply(const Element& g, const Element& h) const {
  return Element{{g.c[0] + h.c[0], g.c[1] + h.c[1], g.c[2] + h.c[2] + g.c[1] * h.c[0], 0}};
}

Element Heisenberg3Group::inverse(const Element& g) const {
  return Element{{-g.c[0], -g.c[1], g.c[0] * g.c[1] - g.c[2], 0}};
}

std::vector<Element> Heisenberg3Group::tile_elements(int n) const {
  require_positive(n, "tile index");
  std::vector<Element> out;
  const Coord nn = static_cast<Coord>(n) * n;
  out.reserve(static_cast<std::size_t>(nn * nn));
  for (Coord a = 0; a < n; ++a)
    for (Coord b = 0; b < n; ++b)
      for (Coord c = 0; c < nn; ++c) out.push_back(Element{{a, b, c, 0}});
  return out;
}

bool Heisenberg3Group::in_grid(const Element& g, int n) const {
  const Coord nn = static_cast<Coord>(n) * n;
  return floor_mod(g.c[0], n) == 0 && floor_mod(g.c[1], n) == 0 && floor_mod(g.c[2], nn) == 0;
}

std::pair<Element, Element> Heisenberg3Group::grid_decompose(const Element& g, int n) const {
  require_positive(n, "tile index");
  const Coord nn = static_cast<Coord>(n) * n;
  const Coord alpha = floor_mod(g.c[0], n);
  const Coord beta = floor_mod(g.c[1], n);
  const Coord a_grid = g.c[0] - alpha;  // n*a'
  const Coord b_grid = g.c[1] - beta;
  // central coordinate of q*gamma is kappa + c_grid + beta * a_grid
  const Coord rest = g.c[2] - beta * a_grid;
  const Coord kappa = floor_mod(rest, nn);
  return {Element{{alpha, beta, kappa, 0}}, Element{{a_grid, b_grid, rest - kappa, 0}}};
}

std::string Heisenberg3Group::grid_description(int n) const {
  return "G_" + std::to_string(n) + " = {(a,b,c) : a,b in " + std::to_string(n) + "Z, c in " +
         std::to_string(static_cast<Coord>(n) * n) + "Z}";
}

GroupPtr make_free_abelian(int d) { return std::make_shared<const FreeAbelianGroup>(d); }
GroupPtr make_heisenberg3() { return std::make_shared<const Heisenberg3Group>(); }

// ---- FiniteSubset

FiniteSubset::FiniteSubset(GroupPtr group, std::vector<Element> elements)
    : group_(std::move(group)), elems_(std::move(elements)) {
  if (!group_) throw InvalidArgument("subset needs a group");
  std::sort(elems_.begin(), elems_.end());
  elems_.erase(std::unique(elems_.begin(), elems_.end()), elems_.end());
  index_.reserve(elems_.size());
  for (std::size_t i = 0; i < elems_.size(); ++i) {
    group_->validate(elems_[i]);
    index_.emplace(elems_[i], i);
  }
}

std::ptrdiff_t FiniteSubset::index_of(const Element& g) const {
  auto it = index_.find(g);
  return it == index_.end() ? -1 : static_cast<std::ptrdiff_t>(it->second);
}

const Element& FiniteSubset::max_element() const {
  if (elems_.empty()) throw DomainError("empty subset has no maximum");
  return elems_.back();
}

std::int64_t FiniteSubset::diameter() const {
  if (elems_.empty()) throw DomainError("diameter of the empty set is undefined");
  std::int64_t cached = diam_->load();
  if (cached >= 0) return cached;
  // Distances only depend on h g^-1, so collect those quotients first.
  ElementSet quotients;
  std::vector<Element> inverses;
  inverses.reserve(elems_.size());
  for (const Element& g : elems_) inverses.push_back(group_->inverse(g));
  for (const Element& h : elems_)
    for (const Element& gi : inverses) quotients.insert(group_->multiply(h, gi));
  std::int64_t best = 0;
  for (const Element& q : quotients) best = std::max(best, group_->word_length(q));
  diam_->store(best);
  return best;
}

FiniteSubset FiniteSubset::translate(const Element& x) const {
  std::vector<Element> out;
  out.reserve(elems_.size());
  for (const Element& g : elems_) out.push_back(group_->multiply(g, x));
  return FiniteSubset(group_, std::move(out));
}

// ---- balls and boxes

FiniteSubset ball(const GroupPtr& g, int radius) { return FiniteSubset(g, g->ball_elements(radius)); }

FiniteSubset ball_at(const GroupPtr& g, int radius, const Element& x) {
  std::vector<Element> out = g->ball_elements(radius);
  for (Element& b : out) b = g->multiply(b, x);
  return FiniteSubset(g, std::move(out));
}

FiniteSubset box(const GroupPtr& g, const std::vector<Coord>& lo, const std::vector<Coord>& hi) {
  const int r = g->rank();
  if (static_cast<int>(lo.size()) != r || static_cast<int>(hi.size()) != r)
    throw InvalidArgument("box bounds must have one entry per coordinate");
  std::vector<Element> out;
  for (int i = 0; i < r; ++i)
    if (lo[i] > hi[i]) return FiniteSubset(g, {});
  Element cur;
  for (int i = 0; i < r; ++i) cur.c[i] = lo[i];
  for (;;) {
    out.push_back(cur);
    int i = r - 1;
    while (i >= 0 && ++cur.c[i] > hi[i]) {
      cur.c[i] = lo[i];
      --i;
    }
    if (i < 0) break;
  }
  return FiniteSubset(g, std::move(out));
}

// ---- boundaries

FiniteSubset boundary_ext(const FiniteSubset& q, int radius) {
  if (radius < 1) throw InvalidArgument("boundary radius must be positive");
  const GroupModel& g = q.group();
  ElementSet seen(q.elements().begin(), q.elements().end());
  std::vector<Element> frontier = q.elements();
  std::vector<Element> out;
  for (int layer = 0; layer < radius && !frontier.empty(); ++layer) {
    std::vector<Element> next;
    for (const Element& x : frontier)
      for (const Element& s : g.generators()) {
        Element y = g.multiply(s, x);
        if (seen.insert(y).second) next.push_back(y);
      }
    out.insert(out.end(), next.begin(), next.end());
    frontier = std::move(next);
  }
  return FiniteSubset(q.group_ptr(), std::move(out));
}

FiniteSubset boundary_int(const FiniteSubset& q, int radius) {
  if (radius < 1) throw InvalidArgument("boundary radius must be positive");
  const GroupModel& g = q.group();
  // A shortest path from x in Q to the complement stays in Q until its last
  // step, so BFS inside Q from the complement's first layer is exact.
  ElementSet seen;
  std::vector<Element> frontier;
  for (const Element& x : q.elements())
    for (const Element& s : g.generators())
      if (!q.contains(g.multiply(s, x))) {
        seen.insert(x);
        frontier.push_back(x);
        break;
      }
  std::vector<Element> out = frontier;
  for (int layer = 1; layer < radius && !frontier.empty(); ++layer) {
    std::vector<Element> next;
    for (const Element& x : frontier)
      for (const Element& s : g.generators()) {
        Element y = g.multiply(s, x);
        if (q.contains(y) && seen.insert(y).second) next.push_back(y);
      }
    out.insert(out.end(), next.begin(), next.end());
    frontier = std::move(next);
  }
  return FiniteSubset(q.group_ptr(), std::move(out));
}

FiniteSubset boundary(const FiniteSubset& q, int radius) {
  std::vector<Element> out = boundary_int(q, radius).elements();
  const FiniteSubset ext_set = boundary_ext(q, radius);
  const auto& ext = ext_set.elements();
  out.insert(out.end(), ext.begin(), ext.end());
  return FiniteSubset(q.group_ptr(), std::move(out));
}

FiniteSubset shrink(const FiniteSubset& q, int radius) {
  FiniteSubset inner = boundary_int(q, radius);
  std::vector<Element> out;
  for (const Element& x : q.elements())
    if (!inner.contains(x)) out.push_back(x);
  return FiniteSubset(q.group_ptr(), std::move(out));
}

FiniteSubset grow(const FiniteSubset& q, int radius) {
  std::vector<Element> out = q.elements();
  const FiniteSubset ext_set = boundary_ext(q, radius);
  const auto& ext = ext_set.elements();
  out.insert(out.end(), ext.begin(), ext.end());
  return FiniteSubset(q.group_ptr(), std::move(out));
}

FiniteSubset boundary_int_union(const FiniteSubset& q, int radius) {
  const GroupModel& g = q.group();
  std::vector<Element> out;
  const auto b = g.ball_elements(radius);
  for (const Element& x : q.elements())
    for (const Element& s : b)
      if (!q.contains(g.multiply(s, x))) {
        out.push_back(x);
        break;
      }
  return FiniteSubset(q.group_ptr(), std::move(out));
}

FiniteSubset boundary_ext_union(const FiniteSubset& q, int radius) {
  const GroupModel& g = q.group();
  std::vector<Element> out;
  for (const Element& s : g.ball_elements(radius))
    for (const Element& x : q.elements()) {
      Element y = g.multiply(s, x);
      if (!q.contains(y)) out.push_back(y);
    }
  return FiniteSubset(q.group_ptr(), std::move(out));
}

std::size_t right_generator_boundary_size(const FiniteSubset& q) {
  const GroupModel& g = q.group();
  ElementSet out;
  for (const Element& x : q.elements())
    for (const Element& s : g.generators()) {
      Element y = g.multiply(x, s);
      if (!q.contains(y)) out.insert(y);
    }
  return out.size();
}

// ---- tilings

TilingSpec folner_set(const GroupPtr& g, int n) {
  require_positive(n, "tile index");
  return TilingSpec{g, n, FiniteSubset(g, g->tile_elements(n))};
}

GridCover grid_cover(const FiniteSubset& a, const Element& x, const TilingSpec& spec) {
  const GroupModel& g = *spec.group;
  const Element x_inv = g.inverse(x);
  // g = q gamma' x^-1 with gamma' in the grid, i.e. g x = q gamma'.
  std::unordered_map<Element, std::size_t, ElementHash> hits;
  for (const Element& y : a.elements()) {
    auto [q, gamma] = spec.decompose(g.multiply(y, x));
    ++hits[g.multiply(gamma, x_inv)];
  }
  GridCover out;
  for (const auto& [gamma, count] : hits) {
    (count == spec.tile.size() ? out.interior : out.crossing).push_back(gamma);
  }
  std::sort(out.interior.begin(), out.interior.end());
  std::sort(out.crossing.begin(), out.crossing.end());
  return out;
}

PartitionReport check_tiling_partition(const TilingSpec& spec, int region_radius, int grid_radius) {
  const GroupModel& g = *spec.group;
  FiniteSubset region = ball(spec.group, region_radius);
  std::vector<std::uint32_t> hits(region.size(), 0);
  for (const Element& gamma : g.ball_elements(grid_radius)) {
    if (!spec.in_grid(gamma)) continue;
    for (const Element& q : spec.tile.elements()) {
      auto idx = region.index_of(g.multiply(q, gamma));
      if (idx >= 0) ++hits[static_cast<std::size_t>(idx)];
    }
  }
  PartitionReport rep;
  for (auto h : hits) {
    if (h == 0) ++rep.gaps;
    else if (h > 1) ++rep.overlaps;
    else ++rep.covered;
  }
  return rep;
}

}  // namespace idsa
