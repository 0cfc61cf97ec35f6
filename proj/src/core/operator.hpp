#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "core/cayley.hpp"
#include "core/colouring.hpp"

namespace idsa {

using Block = Eigen::MatrixXd;

// Colours on B_{2R} x, addressed by the relative element b (colour of b x).
class LocalView {
 public:
  LocalView(const FiniteSubset* ball, std::vector<int> colours)
      : ball_(ball), colours_(std::move(colours)) {}
  int colour(const Element& rel) const;
  const std::vector<int>& colours() const { return colours_; }

 private:
  const FiniteSubset* ball_;
  std::vector<int> colours_;
};

// Kernel of a finite-range, colouring-invariant operator on l2(G, R^k).
// block_at(C, x, y) is p_y H i_x; blocks vanish for d(x, y) > range().
class LocalRule {
 public:
  LocalRule(GroupPtr group, int k, int range, int invariance_radius);
  virtual ~LocalRule() = default;

  const GroupPtr& group() const { return group_; }
  int dim() const { return k_; }
  int range() const { return m_; }
  int invariance_radius() const { return n_; }
  int overall_range() const { return std::max(m_, n_); }
  virtual std::string kind() const = 0;

  // Block for offset o = y x^-1 from the colours around x.
  virtual Block kernel(const LocalView& view, const Element& offset) const = 0;

  // Reads the colours on B_{2R} x and looks the block up in the rule's table.
  virtual Block block_at(const Colouring& c, const Element& x, const Element& y) const;

  LocalView view_at(const Colouring& c, const Element& x) const;

  // Largest operator norm among blocks produced so far.
  double max_block_norm() const;
  // c |B_R| with c = max_block_norm(); an upper bound for ||H|| over the
  // local patterns seen during assembly.
  double norm_bound() const;

 private:
  struct Key {
    std::vector<int> colours;
    Element offset;
    bool operator==(const Key& o) const { return offset == o.offset && colours == o.colours; }
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept;
  };

  GroupPtr group_;
  int k_, m_, n_;
  FiniteSubset view_ball_;
  mutable std::shared_mutex mutex_;
  mutable std::unordered_map<Key, Block, KeyHash> table_;
  mutable double max_norm_ = 0.0;
};

using RulePtr = std::shared_ptr<const LocalRule>;

class ZeroRule final : public LocalRule {
 public:
  ZeroRule(GroupPtr g, int k = 1, int range = 1) : LocalRule(std::move(g), k, range, 0) {}
  std::string kind() const override { return "zero"; }
  Block kernel(const LocalView&, const Element&) const override { return Block::Zero(dim(), dim()); }
};

class AdjacencyRule final : public LocalRule {
 public:
  explicit AdjacencyRule(GroupPtr g);
  std::string kind() const override { return "adjacency"; }
  Block kernel(const LocalView& view, const Element& offset) const override;
};

// Adjacency of the subgraph induced on vertices whose colour is retained.
class PercolationRule final : public LocalRule {
 public:
  PercolationRule(GroupPtr g, std::vector<bool> retained, double edge_weight = 1.0);
  std::string kind() const override { return "percolation"; }
  Block kernel(const LocalView& view, const Element& offset) const override;

 private:
  std::vector<bool> retained_;
  double weight_;
};

// Degree minus adjacency of a scalar adjacency-type rule.
class LaplacianRule final : public LocalRule {
 public:
  explicit LaplacianRule(RulePtr base);
  std::string kind() const override { return "laplacian"; }
  Block kernel(const LocalView& view, const Element& offset) const override;

 private:
  RulePtr base_;
};

// Scalar rule with value table[c_x][c_y][slot], slot indexing S then e.
class ColourTableRule final : public LocalRule {
 public:
  ColourTableRule(GroupPtr g, int colours, std::vector<double> table);
  std::string kind() const override { return "colour_table"; }
  Block kernel(const LocalView& view, const Element& offset) const override;
  double entry(int cx, int cy, int slot) const;

 private:
  int colours_;
  std::vector<double> table_;
};

// Cover G x D with |D| = k. The G-invariant kernel is A((h,i),(g,j)) =
// W_{h g^-1}[i][j]; the folded rule has block(x, y) = W_{y x^-1}.
class PeriodicFoldRule final : public LocalRule {
 public:
  using CoverKernel = std::function<double(const Element& h, int i, const Element& g, int j)>;

  PeriodicFoldRule(GroupPtr g, int k, std::map<Element, Block> offsets);
  // Reads W_o[i][j] = a((o,i),(e,j)) for |o| <= radius after checking
  // invariance under the sampled translations and vanishing just past radius.
  static std::shared_ptr<PeriodicFoldRule> from_kernel(GroupPtr g, int k, int radius,
                                                       const CoverKernel& a,
                                                       const std::vector<Element>& samples);

  std::string kind() const override { return "periodic"; }
  Block kernel(const LocalView& view, const Element& offset) const override;

 private:
  static int offsets_range(const GroupModel& g, const std::map<Element, Block>& offsets);
  std::map<Element, Block> offsets_;
};

enum class Storage { Auto, Dense, Sparse };

inline constexpr std::size_t kDenseStorageLimit = 2000;

// H[Q] with rows ordered by the sorted elements of Q, k rows per element.
struct RestrictedMatrix {
  FiniteSubset q;
  int k = 1;
  bool dense = true;
  Eigen::MatrixXd d;
  Eigen::SparseMatrix<double> s;

  Eigen::Index rows() const { return dense ? d.rows() : s.rows(); }
  Eigen::MatrixXd to_dense() const;
  double trace() const;
  double frobenius_sq() const;
  // Largest absolute row sum; bounds the spectral radius.
  double row_sum_bound() const;
};

RestrictedMatrix restrict_operator(const LocalRule& rule, const Colouring& c, const FiniteSubset& q,
                                   Storage storage = Storage::Auto);

// Entrywise max |A - B| for matrices over the same Q.
double max_abs_difference(const RestrictedMatrix& a, const RestrictedMatrix& b);

// MatrixMarket coordinate real symmetric, lower triangle, 1-based.
void write_matrix_market(std::ostream& out, const RestrictedMatrix& m);

struct InvarianceReport {
  std::size_t checked = 0;
  std::size_t skipped = 0;  // local patterns differed
  std::size_t violations = 0;
};

// For x in bases, y within range of x and t in shifts: when the colours on
// B_{2R} x and B_{2R} x t agree, block(x, y) must equal block(xt, yt).
InvarianceReport check_invariance(const LocalRule& rule, const Colouring& c,
                                  const std::vector<Element>& bases,
                                  const std::vector<Element>& shifts);

}  // namespace idsa
