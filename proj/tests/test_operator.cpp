#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>

#include "core/errors.hpp"
#include "core/operator.hpp"
#include "gen.hpp"

using namespace idsa;
using gen::el;

namespace {

Eigen::VectorXd spectrum(const Eigen::MatrixXd& m) {
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m, Eigen::EigenvaluesOnly).eigenvalues();
}

// Reads absolute coordinates, so translating the base point changes the block.
class CoordinateRule final : public LocalRule {
 public:
  explicit CoordinateRule(GroupPtr g) : LocalRule(std::move(g), 1, 1, 1) {}
  std::string kind() const override { return "coordinate"; }
  Block kernel(const LocalView&, const Element&) const override { return Block::Zero(1, 1); }
  Block block_at(const Colouring&, const Element& x, const Element& y) const override {
    Block b = Block::Zero(1, 1);
    if (x == y) b(0, 0) = static_cast<double>(x.c[0]);
    return b;
  }
};

// Non-symmetric kernel: weight 1 towards +1 and 2 towards -1.
class LopsidedRule final : public LocalRule {
 public:
  explicit LopsidedRule(GroupPtr g) : LocalRule(std::move(g), 1, 1, 1) {}
  std::string kind() const override { return "lopsided"; }
  Block kernel(const LocalView&, const Element& o) const override {
    Block b = Block::Zero(1, 1);
    if (o == el({1})) b(0, 0) = 1.0;
    if (o == el({-1})) b(0, 0) = 2.0;
    return b;
  }
};

std::shared_ptr<PeriodicFoldRule> period_two_chain(const GroupPtr& z1) {
  // Site (g, i) is the integer 2g + i; bonds alternate between weights 1 and 2.
  auto a = [](const Element& h, int i, const Element& g, int j) {
    const Coord p = 2 * h.c[0] + i, q = 2 * g.c[0] + j;
    const Coord lo = std::min(p, q);
    if (std::abs(p - q) != 1) return 0.0;
    return lo % 2 == 0 ? 1.0 : 2.0;
  };
  std::vector<Element> samples;
  for (Coord t = -5; t <= 5; ++t) samples.push_back(el({t}));
  return PeriodicFoldRule::from_kernel(z1, 2, 1, a, samples);
}

}  // namespace

TEST_CASE("zero rule restricts to the zero matrix") {
  auto h3 = make_heisenberg3();
  ZeroRule zero(h3, 2);
  TrivialColouring triv;
  RestrictedMatrix m = restrict_operator(zero, triv, ball(h3, 2));
  CHECK(m.rows() == 2 * 17);
  CHECK(m.to_dense().cwiseAbs().maxCoeff() == 0.0);
  CHECK(zero.norm_bound() == 0.0);
  CHECK_THROWS_AS(restrict_operator(zero, triv, FiniteSubset(h3, {})), InvalidArgument);
}

TEST_CASE("adjacency on a path and on H3") {
  auto z1 = make_free_abelian(1);
  AdjacencyRule adj(z1);
  TrivialColouring triv;
  Eigen::MatrixXd path(3, 3);
  path << 0, 1, 0, 1, 0, 1, 0, 1, 0;
  CHECK(restrict_operator(adj, triv, box(z1, {0}, {2})).to_dense() == path);

  auto h3 = make_heisenberg3();
  AdjacencyRule a3(h3);
  CHECK(a3.overall_range() == 1);
  FiniteSubset b2 = ball(h3, 2);
  Eigen::MatrixXd m = restrict_operator(a3, triv, b2).to_dense();
  CHECK(m == m.transpose());
  CHECK(m.diagonal().cwiseAbs().maxCoeff() == 0.0);
  const FiniteSubset b1 = ball(h3, 1);
  for (const Element& x : b1.elements())
    CHECK(m.row(b2.index_of(x)).sum() == 4.0);
}

TEST_CASE("norm bound dominates the adjacency spectrum on Z^d boxes") {
  TrivialColouring triv;
  for (int d = 1; d <= 3; ++d) {
    auto g = make_free_abelian(d);
    AdjacencyRule adj(g);
    const int n = d == 3 ? 8 : 14;
    std::vector<Coord> lo(static_cast<std::size_t>(d), 0), hi(static_cast<std::size_t>(d), n - 1);
    Eigen::VectorXd ev = spectrum(restrict_operator(adj, triv, box(g, lo, hi)).to_dense());
    // Sine modes: the top eigenvalue of a box with n sites per side.
    const double top = 2.0 * d * std::cos(M_PI / (n + 1));
    CHECK(ev.maxCoeff() == doctest::Approx(top).epsilon(1e-10));
    CHECK(ev.minCoeff() == doctest::Approx(-top).epsilon(1e-10));
    CHECK(adj.norm_bound() == 2.0 * d + 1.0);
    CHECK(adj.norm_bound() >= 2.0 * d);
  }
}

TEST_CASE("every restriction's spectrum lies within the norm bound") {
  PercolationColouring perc(Alphabet{{"0", "1", "2"}}, {1, 1, 1}, 12);
  for (auto g : {make_free_abelian(2), make_heisenberg3()}) {
    std::vector<RulePtr> rules{std::make_shared<AdjacencyRule>(g),
                               std::make_shared<PercolationRule>(g, std::vector<bool>{true, false, true}),
                               std::make_shared<LaplacianRule>(std::make_shared<AdjacencyRule>(g))};
    for (const auto& rule : rules)
      for (int t = 0; t < 10; ++t) {
        Eigen::VectorXd ev = spectrum(restrict_operator(*rule, perc, gen::subset(g, 3, 0.5)).to_dense());
        CHECK(ev.cwiseAbs().maxCoeff() <= rule->norm_bound() + 1e-9);
      }
  }
}

TEST_CASE("half-line mod-3 percolation restrictions") {
  auto z1 = make_free_abelian(1);
  HalfLineMod3Colouring half;
  PercolationRule black(z1, {false, true});
  for (int j = 1; j <= 12; ++j) {
    FiniteSubset u = box(z1, {1}, {3 * j});
    CHECK(restrict_operator(black, half, u).to_dense().cwiseAbs().maxCoeff() == 0.0);

    FiniteSubset v = box(z1, {-3 * j}, {-1});
    Eigen::MatrixXd m = restrict_operator(black, half, v).to_dense();
    // j disjoint black pairs and j isolated white sites.
    int pairs = 0;
    for (Eigen::Index i = 0; i + 1 < m.rows(); ++i) pairs += m(i, i + 1) == 1.0;
    CHECK(pairs == j);
    CHECK(m.sum() == 2.0 * j);
    Eigen::VectorXd ev = spectrum(m);
    int lo = 0, mid = 0, hi = 0;
    for (double e : ev) {
      lo += std::abs(e + 1.0) < 1e-12;
      mid += std::abs(e) < 1e-12;
      hi += std::abs(e - 1.0) < 1e-12;
    }
    CHECK(lo == j);
    CHECK(mid == j);
    CHECK(hi == j);
  }
}

TEST_CASE("percolation with every colour retained is adjacency") {
  PercolationColouring perc(Alphabet{{"0", "1"}}, {1, 1}, 3);
  for (auto g : {make_free_abelian(3), make_heisenberg3()}) {
    PercolationRule all(g, {true, true});
    AdjacencyRule adj(g);
    for (int t = 0; t < 5; ++t) {
      FiniteSubset q = gen::subset(g, 3, 0.5);
      CHECK(restrict_operator(all, perc, q).to_dense() == restrict_operator(adj, perc, q).to_dense());
    }
  }
  CHECK_THROWS_AS(PercolationRule(make_free_abelian(1), {false, false}), InvalidArgument);
}

TEST_CASE("Laplacian examples") {
  auto z2 = make_free_abelian(2);
  TrivialColouring triv;
  LaplacianRule lap(std::make_shared<AdjacencyRule>(z2));
  FiniteSubset q = box(z2, {0, 0}, {4, 4});
  Eigen::MatrixXd m = restrict_operator(lap, triv, q).to_dense();
  for (Eigen::Index i = 0; i < m.rows(); ++i) CHECK(m(i, i) == 4.0);
  CHECK(m(q.index_of(el({1, 1})), q.index_of(el({1, 2}))) == -1.0);
  CHECK(m(q.index_of(el({1, 1})), q.index_of(el({2, 2}))) == 0.0);

  // A retained vertex whose neighbours are all deleted has a zero row.
  ExplicitColouring lonely(Alphabet{{"out", "in"}}, {{el({0, 0}), 1}}, 0);
  LaplacianRule perc_lap(std::make_shared<PercolationRule>(z2, std::vector<bool>{false, true}));
  Eigen::MatrixXd lm = restrict_operator(perc_lap, lonely, q).to_dense();
  CHECK(lm.row(q.index_of(el({0, 0}))).cwiseAbs().maxCoeff() == 0.0);

  PercolationColouring perc(Alphabet{{"0", "1"}}, {2, 1}, 17);
  for (auto g : {z2, make_heisenberg3()}) {
    LaplacianRule l(std::make_shared<PercolationRule>(g, std::vector<bool>{true, false}));
    for (int t = 0; t < 20; ++t)
      CHECK(spectrum(restrict_operator(l, perc, gen::subset(g, 3, 0.6)).to_dense()).minCoeff() >= -1e-9);
  }
  CHECK_THROWS_AS(LaplacianRule(nullptr), InvalidArgument);
}

TEST_CASE("periodic fold of the period-two chain matches the unfolded chain") {
  auto z1 = make_free_abelian(1);
  auto fold = period_two_chain(z1);
  CHECK(fold->dim() == 2);
  CHECK(fold->range() == 1);
  TrivialColouring triv;
  for (int m = 1; m <= 30; ++m) {
    RestrictedMatrix h = restrict_operator(*fold, triv, box(z1, {0}, {m - 1}));
    Eigen::MatrixXd dense = h.to_dense();
    CHECK(dense == dense.transpose());
    Eigen::MatrixXd chain = Eigen::MatrixXd::Zero(2 * m, 2 * m);
    for (int i = 0; i + 1 < 2 * m; ++i) chain(i, i + 1) = chain(i + 1, i) = i % 2 == 0 ? 1.0 : 2.0;
    CHECK((spectrum(dense) - spectrum(chain)).cwiseAbs().maxCoeff() < 1e-12);
  }

  std::map<Element, Block> bad{{el({1}), Block::Identity(2, 2)}};
  CHECK_THROWS_AS(PeriodicFoldRule(z1, 2, bad), ValidationError);
  auto drifting = [](const Element& h, int, const Element& g, int) {
    return std::abs(h.c[0] - g.c[0]) == 1 && h.c[0] > 3 ? 1.0 : 0.0;
  };
  CHECK_THROWS_AS(PeriodicFoldRule::from_kernel(z1, 1, 1, drifting, {el({0}), el({5})}), ValidationError);
  auto long_range = [](const Element& h, int, const Element& g, int) {
    return std::abs(h.c[0] - g.c[0]) == 3 ? 1.0 : 0.0;
  };
  CHECK_THROWS_AS(PeriodicFoldRule::from_kernel(z1, 1, 1, long_range, {el({0})}), ValidationError);
}

TEST_CASE("singleton fold of the Cayley graph is adjacency") {
  auto h3 = make_heisenberg3();
  std::map<Element, Block> offs;
  for (const Element& s : h3->generators()) offs.emplace(s, Block::Ones(1, 1));
  PeriodicFoldRule fold(h3, 1, offs);
  AdjacencyRule adj(h3);
  TrivialColouring triv;
  FiniteSubset q = folner_set(h3, 3).tile;
  CHECK(restrict_operator(fold, triv, q).to_dense() == restrict_operator(adj, triv, q).to_dense());
}

TEST_CASE("colour table rules validate symmetry") {
  auto z1 = make_free_abelian(1);
  // Generators of Z are (+1, -1), then the identity slot.
  std::vector<double> ok{0, 0, 5, 1, 2, 0, 2, 1, 0, 3, 3, 7};
  ColourTableRule rule(z1, 2, ok);
  CHECK(rule.entry(0, 1, 0) == 1.0);
  std::vector<double> broken = ok;
  broken[3] = 9;
  CHECK_THROWS_AS(ColourTableRule(z1, 2, broken), ValidationError);
  CHECK_THROWS_AS(ColourTableRule(z1, 2, {1, 2}), InvalidArgument);
}

TEST_CASE("asymmetric kernels are rejected during assembly") {
  auto z1 = make_free_abelian(1);
  LopsidedRule rule(z1);
  TrivialColouring triv;
  CHECK_THROWS_AS(restrict_operator(rule, triv, box(z1, {0}, {3})), ValidationError);
}

TEST_CASE("restrictions are bitwise symmetric and consistent with sub-restrictions") {
  PercolationColouring perc(Alphabet{{"0", "1", "2"}}, {1, 2, 3}, 99);
  for (auto g : {make_free_abelian(2), make_heisenberg3()}) {
    std::vector<double> table(9 * 5);
    const auto& s = g->generators();
    for (int cx = 0; cx < 3; ++cx)
      for (int cy = 0; cy < 3; ++cy)
        for (int slot = 0; slot < 5; ++slot) {
          double v = 0.1 * (cx + 1) * (cy + 1) + 0.01 * (slot < 4 ? std::abs(s[static_cast<std::size_t>(slot)].c[0]) : 7);
          table[static_cast<std::size_t>((cx * 3 + cy) * 5 + slot)] = slot == 4 && cx != cy ? 0.0 : v;
        }
    ColourTableRule rule(g, 3, table);
    for (int t = 0; t < 20; ++t) {
      FiniteSubset q = gen::subset(g, 3, 0.6);
      Eigen::MatrixXd m = restrict_operator(rule, perc, q).to_dense();
      CHECK(m == m.transpose());
      std::vector<Element> sub;
      for (const Element& x : q.elements())
        if (gen::uniform(0, 2) > 0) sub.push_back(x);
      if (sub.empty()) continue;
      FiniteSubset qs(g, sub);
      Eigen::MatrixXd ms = restrict_operator(rule, perc, qs).to_dense();
      bool same = true;
      for (std::size_t i = 0; i < qs.size(); ++i)
        for (std::size_t j = 0; j < qs.size(); ++j)
          same = same && ms(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) ==
                             m(q.index_of(qs.elements()[i]), q.index_of(qs.elements()[j]));
      CHECK(same);
      // Sparse storage assembles the same entries.
      CHECK(max_abs_difference(restrict_operator(rule, perc, q, Storage::Sparse),
                               restrict_operator(rule, perc, q, Storage::Dense)) == 0.0);
    }
  }
}

TEST_CASE("restriction to shrunk disjoint pieces decouples") {
  PercolationColouring perc(Alphabet{{"0", "1"}}, {1, 1}, 5);
  for (auto g : {make_free_abelian(2), make_heisenberg3()}) {
    LaplacianRule rule(std::make_shared<PercolationRule>(g, std::vector<bool>{true, false}));
    const int r = rule.overall_range();
    for (int t = 0; t < 10; ++t) {
      // Random blocks of a grid of translated tiles.
      TilingSpec spec = folner_set(g, g->kind() == GroupKind::Heisenberg3 ? 4 : 5);
      std::vector<FiniteSubset> pieces;
      std::vector<Element> all;
      for (int p = 0; p < 4; ++p) {
        Element gamma;
        gamma.c[0] = spec.n * 2 * p;
        gamma.c[1] = spec.n * static_cast<Coord>(gen::uniform(-2, 2));
        FiniteSubset piece = shrink(spec.tile.translate(gamma), r);
        if (piece.empty()) continue;
        pieces.push_back(piece);
        all.insert(all.end(), piece.elements().begin(), piece.elements().end());
      }
      FiniteSubset uni(g, all);
      REQUIRE(uni.size() == all.size());
      Eigen::MatrixXd m = restrict_operator(rule, perc, uni).to_dense();
      Eigen::MatrixXd direct = Eigen::MatrixXd::Zero(m.rows(), m.cols());
      for (const auto& piece : pieces) {
        Eigen::MatrixXd b = restrict_operator(rule, perc, piece).to_dense();
        for (std::size_t i = 0; i < piece.size(); ++i)
          for (std::size_t j = 0; j < piece.size(); ++j)
            direct(uni.index_of(piece.elements()[i]), uni.index_of(piece.elements()[j])) =
                b(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      }
      CHECK(m == direct);
    }
  }
}

TEST_CASE("invariance checks") {
  auto z2 = make_free_abelian(2);
  auto h3 = make_heisenberg3();
  TrivialColouring triv;
  std::vector<Element> bases, shifts;
  for (int i = 0; i < 10; ++i) {
    bases.push_back(gen::element(*h3, 6));
    shifts.push_back(gen::element(*h3, 6));
  }
  AdjacencyRule adj(h3);
  InvarianceReport a = check_invariance(adj, triv, bases, shifts);
  CHECK(a.violations == 0);
  CHECK(a.checked > 0);

  // Period-2 colouring: translates by the period lattice always match.
  PeriodicColouring per(Alphabet{{"0", "1"}}, folner_set(z2, 2), {0, 1, 1, 0});
  PercolationRule pr(z2, {false, true});
  std::vector<Element> zb, zs;
  for (int i = 0; i < 20; ++i) {
    zb.push_back(gen::element(*z2, 10));
    zs.push_back(gen::element(*z2, 10));
  }
  InvarianceReport p = check_invariance(pr, per, zb, zs);
  CHECK(p.violations == 0);
  CHECK(p.checked > 0);
  CHECK(p.skipped > 0);

  CoordinateRule broken(z2);
  InvarianceReport b = check_invariance(broken, triv, zb, zs);
  CHECK(b.violations > 0);
}

TEST_CASE("MatrixMarket export lists the lower triangle") {
  auto z1 = make_free_abelian(1);
  LaplacianRule lap(std::make_shared<AdjacencyRule>(z1));
  TrivialColouring triv;
  std::ostringstream os;
  write_matrix_market(os, restrict_operator(lap, triv, box(z1, {0}, {2})));
  CHECK(os.str() ==
        "%%MatrixMarket matrix coordinate real symmetric\n3 3 5\n1 1 2\n2 1 -1\n2 2 2\n3 2 -1\n3 3 2\n");
  std::ostringstream sp;
  write_matrix_market(sp, restrict_operator(lap, triv, box(z1, {0}, {2}), Storage::Sparse));
  CHECK(sp.str() == os.str());
}
