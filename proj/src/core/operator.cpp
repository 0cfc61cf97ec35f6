#include "core/operator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <ostream>

#include "core/errors.hpp"

namespace idsa {

namespace {

double block_norm(const Block& b) {
  if (b.size() == 0) return 0.0;
  if (b.rows() == 1 && b.cols() == 1) return std::abs(b(0, 0));
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(b);
  return svd.singularValues()(0);
}

int slot_of(const GroupModel& g, const Element& offset) {
  const auto& s = g.generators();
  for (std::size_t i = 0; i < s.size(); ++i)
    if (s[i] == offset) return static_cast<int>(i);
  if (offset == g.identity()) return static_cast<int>(s.size());
  return -1;
}

}  // namespace

int LocalView::colour(const Element& rel) const {
  auto idx = ball_->index_of(rel);
  if (idx < 0) throw InvalidArgument("relative element outside the local view");
  return colours_[static_cast<std::size_t>(idx)];
}

std::size_t LocalRule::KeyHash::operator()(const Key& k) const noexcept {
  std::size_t h = ElementHash{}(k.offset);
  for (int c : k.colours) h = h * 1000003u ^ static_cast<std::size_t>(c + 1);
  return h;
}

LocalRule::LocalRule(GroupPtr group, int k, int range, int invariance_radius)
    : group_(std::move(group)), k_(k), m_(range), n_(invariance_radius) {
  if (!group_) throw InvalidArgument("rule needs a group");
  if (k_ < 1) throw InvalidArgument("internal dimension must be positive");
  if (m_ < 0 || n_ < 0) throw InvalidArgument("ranges must be nonnegative");
  view_ball_ = ball(group_, 2 * overall_range());
}

LocalView LocalRule::view_at(const Colouring& c, const Element& x) const {
  std::vector<int> colours;
  colours.reserve(view_ball_.size());
  for (const Element& b : view_ball_.elements()) colours.push_back(c.colour(group_->multiply(b, x)));
  return LocalView(&view_ball_, std::move(colours));
}

Block LocalRule::block_at(const Colouring& c, const Element& x, const Element& y) const {
  const Element offset = group_->multiply(y, group_->inverse(x));
  if (group_->word_length(offset) > m_) return Block::Zero(k_, k_);
  LocalView view = view_at(c, x);
  Key key{view.colours(), offset};
  {
    std::shared_lock lock(mutex_);
    auto it = table_.find(key);
    if (it != table_.end()) return it->second;
  }
  Block b = kernel(view, offset);
  if (b.rows() != k_ || b.cols() != k_) throw ValidationError("kernel returned a block of the wrong size");
  const double nb = block_norm(b);
  std::unique_lock lock(mutex_);
  max_norm_ = std::max(max_norm_, nb);
  return table_.emplace(std::move(key), std::move(b)).first->second;
}

double LocalRule::max_block_norm() const {
  std::shared_lock lock(mutex_);
  return max_norm_;
}

double LocalRule::norm_bound() const {
  return max_block_norm() * static_cast<double>(group_->ball_elements(overall_range()).size());
}

// ---- concrete rules

AdjacencyRule::AdjacencyRule(GroupPtr g) : LocalRule(std::move(g), 1, 1, 1) {}

Block AdjacencyRule::kernel(const LocalView&, const Element& offset) const {
  const int slot = slot_of(*group(), offset);
  Block b = Block::Zero(1, 1);
  if (slot >= 0 && slot < static_cast<int>(group()->generators().size())) b(0, 0) = 1.0;
  return b;
}

PercolationRule::PercolationRule(GroupPtr g, std::vector<bool> retained, double edge_weight)
    : LocalRule(std::move(g), 1, 1, 1), retained_(std::move(retained)), weight_(edge_weight) {
  if (std::none_of(retained_.begin(), retained_.end(), [](bool b) { return b; }))
    throw InvalidArgument("percolation needs at least one retained colour");
}

Block PercolationRule::kernel(const LocalView& view, const Element& offset) const {
  Block b = Block::Zero(1, 1);
  const int slot = slot_of(*group(), offset);
  if (slot < 0 || slot == static_cast<int>(group()->generators().size())) return b;
  auto keep = [&](int colour) {
    return colour >= 0 && colour < static_cast<int>(retained_.size()) && retained_[colour];
  };
  if (keep(view.colour(group()->identity())) && keep(view.colour(offset))) b(0, 0) = weight_;
  return b;
}

namespace {

const LocalRule& require_rule(const RulePtr& r) {
  if (!r) throw InvalidArgument("laplacian needs a base rule");
  return *r;
}

}  // namespace

LaplacianRule::LaplacianRule(RulePtr base)
    : LocalRule(require_rule(base).group(), 1, require_rule(base).range(),
                std::max(require_rule(base).invariance_radius(), require_rule(base).range())),
      base_(std::move(base)) {
  if (base_->dim() != 1 || base_->range() != 1)
    throw InvalidArgument("laplacian needs a scalar nearest-neighbour base rule");
}

Block LaplacianRule::kernel(const LocalView& view, const Element& offset) const {
  Block b = Block::Zero(1, 1);
  if (offset == group()->identity()) {
    for (const Element& s : group()->generators()) b(0, 0) += base_->kernel(view, s)(0, 0);
  } else if (slot_of(*group(), offset) >= 0) {
    b(0, 0) = -base_->kernel(view, offset)(0, 0);
  }
  return b;
}

ColourTableRule::ColourTableRule(GroupPtr g, int colours, std::vector<double> table)
    : LocalRule(std::move(g), 1, 1, 1), colours_(colours), table_(std::move(table)) {
  const auto& gens = group()->generators();
  const int slots = static_cast<int>(gens.size()) + 1;
  if (colours_ < 1 || table_.size() != static_cast<std::size_t>(colours_ * colours_ * slots))
    throw InvalidArgument("colour table must have colours^2 * (|S|+1) entries");
  for (int cx = 0; cx < colours_; ++cx)
    for (int cy = 0; cy < colours_; ++cy)
      for (int s = 0; s + 1 < slots; ++s) {
        const int inv = slot_of(*group(), group()->inverse(gens[static_cast<std::size_t>(s)]));
        if (entry(cx, cy, s) != entry(cy, cx, inv))
          throw ValidationError("colour table is not symmetric under swapping the endpoints");
      }
}

double ColourTableRule::entry(int cx, int cy, int slot) const {
  const int slots = static_cast<int>(group()->generators().size()) + 1;
  return table_[static_cast<std::size_t>((cx * colours_ + cy) * slots + slot)];
}

Block ColourTableRule::kernel(const LocalView& view, const Element& offset) const {
  Block b = Block::Zero(1, 1);
  const int slot = slot_of(*group(), offset);
  if (slot < 0) return b;
  const int cx = view.colour(group()->identity());
  const int cy = view.colour(offset);
  if (cx >= colours_ || cy >= colours_) throw InvalidArgument("colour outside the table");
  b(0, 0) = entry(cx, cy, slot);
  return b;
}

int PeriodicFoldRule::offsets_range(const GroupModel& g, const std::map<Element, Block>& offsets) {
  std::int64_t m = 0;
  for (const auto& [o, w] : offsets)
    if (w.size() > 0 && w.cwiseAbs().maxCoeff() > 0.0) m = std::max(m, g.word_length(o));
  return static_cast<int>(m);
}

PeriodicFoldRule::PeriodicFoldRule(GroupPtr g, int k, std::map<Element, Block> offsets)
    : LocalRule(g, k, std::max(1, offsets_range(*g, offsets)), 0), offsets_(std::move(offsets)) {
  for (const auto& [o, w] : offsets_) {
    group()->validate(o);
    if (w.rows() != k || w.cols() != k) throw InvalidArgument("offset block has the wrong size");
    const Element inv = group()->inverse(o);
    auto it = offsets_.find(inv);
    const Block partner = it == offsets_.end() ? Block::Zero(k, k) : it->second;
    if ((partner - w.transpose()).cwiseAbs().maxCoeff() > 0.0)
      throw ValidationError("cover kernel is not symmetric: W(o^-1) != W(o)^T");
  }
}

std::shared_ptr<PeriodicFoldRule> PeriodicFoldRule::from_kernel(GroupPtr g, int k, int radius,
                                                                const CoverKernel& a,
                                                                const std::vector<Element>& samples) {
  if (radius < 0) throw InvalidArgument("cover radius must be nonnegative");
  auto shell = g->ball_elements(radius + 2);
  for (const Element& t : samples)
    for (const Element& o : shell)
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) {
          const double base = a(o, i, g->identity(), j);
          if (g->word_length(o) > radius && base != 0.0)
            throw ValidationError("cover kernel does not vanish beyond the stated radius");
          if (a(g->multiply(o, t), i, t, j) != base)
            throw ValidationError("cover kernel is not invariant under the group action");
        }
  std::map<Element, Block> table;
  for (const Element& o : g->ball_elements(radius)) {
    Block w(k, k);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) w(i, j) = a(o, i, g->identity(), j);
    if (w.cwiseAbs().maxCoeff() > 0.0) table.emplace(o, std::move(w));
  }
  return std::make_shared<PeriodicFoldRule>(std::move(g), k, std::move(table));
}

Block PeriodicFoldRule::kernel(const LocalView&, const Element& offset) const {
  auto it = offsets_.find(offset);
  return it == offsets_.end() ? Block::Zero(dim(), dim()) : it->second;
}

// ---- restriction

Eigen::MatrixXd RestrictedMatrix::to_dense() const { return dense ? d : Eigen::MatrixXd(s); }

double RestrictedMatrix::row_sum_bound() const {
  if (dense) return d.rows() == 0 ? 0.0 : d.cwiseAbs().rowwise().sum().maxCoeff();
  // Symmetric, so column sums equal row sums.
  double best = 0.0;
  for (int c = 0; c < s.outerSize(); ++c) {
    double col = 0.0;
    for (Eigen::SparseMatrix<double>::InnerIterator it(s, c); it; ++it) col += std::abs(it.value());
    best = std::max(best, col);
  }
  return best;
}

double RestrictedMatrix::trace() const {
  if (dense) return d.trace();
  double t = 0.0;
  for (int c = 0; c < s.outerSize(); ++c)
    for (Eigen::SparseMatrix<double>::InnerIterator it(s, c); it; ++it)
      if (it.row() == it.col()) t += it.value();
  return t;
}

double RestrictedMatrix::frobenius_sq() const { return dense ? d.squaredNorm() : s.squaredNorm(); }

RestrictedMatrix restrict_operator(const LocalRule& rule, const Colouring& c, const FiniteSubset& q,
                                   Storage storage) {
  if (q.empty()) throw InvalidArgument("cannot restrict to an empty set");
  if (q.group_ptr().get() != rule.group().get() && q.group().name() != rule.group()->name())
    throw InvalidArgument("subset and rule live on different groups");
  const GroupModel& g = *rule.group();
  const int k = rule.dim();
  const auto n = static_cast<Eigen::Index>(q.size()) * k;
  const double tol = 1e-12;
  std::vector<Eigen::Triplet<double>> trips;
  const auto offsets = g.ball_elements(rule.range());
  const auto& elems = q.elements();
  for (std::size_t ix = 0; ix < elems.size(); ++ix) {
    const Element& x = elems[ix];
    for (const Element& o : offsets) {
      const Element y = g.multiply(o, x);
      const auto iy = q.index_of(y);
      if (iy < static_cast<std::ptrdiff_t>(ix)) continue;
      const Block b = rule.block_at(c, x, y);
      const auto rx = static_cast<Eigen::Index>(ix) * k;
      const auto ry = static_cast<Eigen::Index>(iy) * k;
      if (static_cast<std::size_t>(iy) == ix) {
        if ((b - b.transpose()).cwiseAbs().maxCoeff() > tol * (1.0 + b.cwiseAbs().maxCoeff()))
          throw ValidationError("diagonal block is not symmetric");
        for (int i = 0; i < k; ++i)
          for (int j = i; j < k; ++j) {
            if (b(i, j) == 0.0) continue;
            trips.emplace_back(rx + i, rx + j, b(i, j));
            if (i != j) trips.emplace_back(rx + j, rx + i, b(i, j));
          }
        continue;
      }
      const Block back = rule.block_at(c, y, x);
      if ((back - b.transpose()).cwiseAbs().maxCoeff() > tol * (1.0 + b.cwiseAbs().maxCoeff()))
        throw ValidationError("kernel violates block(y,x) = block(x,y)^T");
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) {
          if (b(i, j) == 0.0) continue;
          trips.emplace_back(ry + i, rx + j, b(i, j));
          trips.emplace_back(rx + j, ry + i, b(i, j));
        }
    }
  }
  RestrictedMatrix m;
  m.q = q;
  m.k = k;
  m.dense = storage == Storage::Dense ||
            (storage == Storage::Auto && static_cast<std::size_t>(n) < kDenseStorageLimit);
  if (m.dense) {
    m.d = Eigen::MatrixXd::Zero(n, n);
    for (const auto& t : trips) m.d(t.row(), t.col()) = t.value();
  } else {
    m.s.resize(n, n);
    m.s.setFromTriplets(trips.begin(), trips.end());
    m.s.makeCompressed();
  }
  return m;
}

double max_abs_difference(const RestrictedMatrix& a, const RestrictedMatrix& b) {
  if (!(a.q == b.q) || a.k != b.k) throw InvalidArgument("matrices are restricted to different sets");
  if (a.dense && b.dense) return a.d.rows() == 0 ? 0.0 : (a.d - b.d).cwiseAbs().maxCoeff();
  Eigen::SparseMatrix<double> sa = a.dense ? a.d.sparseView() : a.s;
  Eigen::SparseMatrix<double> sb = b.dense ? b.d.sparseView() : b.s;
  Eigen::SparseMatrix<double> diff = sa - sb;
  double m = 0.0;
  for (int c = 0; c < diff.outerSize(); ++c)
    for (Eigen::SparseMatrix<double>::InnerIterator it(diff, c); it; ++it)
      m = std::max(m, std::abs(it.value()));
  return m;
}

void write_matrix_market(std::ostream& out, const RestrictedMatrix& m) {
  std::vector<std::tuple<Eigen::Index, Eigen::Index, double>> lower;
  if (m.dense) {
    for (Eigen::Index j = 0; j < m.d.cols(); ++j)
      for (Eigen::Index i = j; i < m.d.rows(); ++i)
        if (m.d(i, j) != 0.0) lower.emplace_back(i, j, m.d(i, j));
  } else {
    for (int c = 0; c < m.s.outerSize(); ++c)
      for (Eigen::SparseMatrix<double>::InnerIterator it(m.s, c); it; ++it)
        if (it.row() >= it.col()) lower.emplace_back(it.row(), it.col(), it.value());
    std::sort(lower.begin(), lower.end(), [](const auto& a, const auto& b) {
      return std::get<1>(a) != std::get<1>(b) ? std::get<1>(a) < std::get<1>(b)
                                              : std::get<0>(a) < std::get<0>(b);
    });
  }
  out << "%%MatrixMarket matrix coordinate real symmetric\n";
  out << m.rows() << ' ' << m.rows() << ' ' << lower.size() << '\n';
  char buf[64];
  for (const auto& [i, j, v] : lower) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << (i + 1) << ' ' << (j + 1) << ' ' << buf << '\n';
  }
}

InvarianceReport check_invariance(const LocalRule& rule, const Colouring& c,
                                  const std::vector<Element>& bases,
                                  const std::vector<Element>& shifts) {
  const GroupModel& g = *rule.group();
  InvarianceReport rep;
  const auto offsets = g.ball_elements(rule.range());
  for (const Element& x : bases) {
    const auto here = rule.view_at(c, x).colours();
    for (const Element& t : shifts) {
      const Element xt = g.multiply(x, t);
      if (rule.view_at(c, xt).colours() != here) {
        ++rep.skipped;
        continue;
      }
      for (const Element& o : offsets) {
        const Element y = g.multiply(o, x);
        ++rep.checked;
        if ((rule.block_at(c, x, y) - rule.block_at(c, xt, g.multiply(y, t))).cwiseAbs().maxCoeff() != 0.0)
          ++rep.violations;
      }
    }
  }
  return rep;
}

}  // namespace idsa
