#include "core/spectra.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "core/errors.hpp"

namespace idsa {

namespace {

void require_symmetric(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) throw InvalidArgument("matrix must be square");
  if (a.size() == 0) return;
  const double scale = 1.0 + a.cwiseAbs().maxCoeff();
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw InvalidArgument("matrix is not symmetric");
}

void require_symmetric(const Eigen::SparseMatrix<double>& a) {
  if (a.rows() != a.cols()) throw InvalidArgument("matrix must be square");
  Eigen::SparseMatrix<double> t = a.transpose();
  Eigen::SparseMatrix<double> d = a - t;
  double worst = 0.0, scale = 1.0;
  for (int c = 0; c < a.outerSize(); ++c)
    for (Eigen::SparseMatrix<double>::InnerIterator it(a, c); it; ++it)
      scale = std::max(scale, 1.0 + std::abs(it.value()));
  for (int c = 0; c < d.outerSize(); ++c)
    for (Eigen::SparseMatrix<double>::InnerIterator it(d, c); it; ++it)
      worst = std::max(worst, std::abs(it.value()));
  if (worst > 1e-12 * scale) throw InvalidArgument("matrix is not symmetric");
}

std::vector<double> dense_values(const Eigen::MatrixXd& a) {
  if (a.rows() == 0) return {};
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("dense eigensolver did not converge");
  std::vector<double> v(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  std::sort(v.begin(), v.end());
  return v;
}

double sparse_trace(const Eigen::SparseMatrix<double>& s) {
  double t = 0.0;
  for (int c = 0; c < s.outerSize(); ++c)
    for (Eigen::SparseMatrix<double>::InnerIterator it(s, c); it; ++it)
      if (it.row() == it.col()) t += it.value();
  return t;
}

// Lanczos route with a trace / Frobenius consistency check; falls back to the
// dense solver when the moments disagree.
EigenvalueList lanczos_values(const Eigen::SparseMatrix<double>& s, double tau) {
  EigenvalueList out;
  out.tau = tau;
  const auto n = s.rows();
  if (n == 0) {
    out.path = "lanczos";
    return out;
  }
  Tridiagonal t = lanczos_tridiagonalize(s);
  out.values = tridiagonal_eigenvalues(t, std::max(0.1 * tau, 1e-15));
  out.path = "lanczos";
  double sum = 0.0, sum_sq = 0.0, norm = 0.0;
  for (double v : out.values) {
    sum += v;
    sum_sq += v * v;
    norm = std::max(norm, std::abs(v));
  }
  const double dn = static_cast<double>(n);
  const bool trace_ok = std::abs(sum - sparse_trace(s)) <= dn * tau;
  const bool frob_ok = std::abs(sum_sq - s.squaredNorm()) <= dn * tau * (2.0 * norm + tau);
  if (!trace_ok || !frob_ok) {
    out.values = dense_values(Eigen::MatrixXd(s));
    out.path = "lanczos->dense";
  }
  return out;
}

}  // namespace

double default_tau(double norm_bound) { return 1e-9 * std::max(1.0, norm_bound); }

Tridiagonal lanczos_tridiagonalize(const Eigen::SparseMatrix<double>& a, std::uint64_t seed) {
  const auto n = a.rows();
  Tridiagonal t;
  if (n == 0) return t;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double scale = std::max(1.0, std::sqrt(a.squaredNorm()));
  const double breakdown = 1e-10 * scale;
  Eigen::MatrixXd q(n, n);

  auto orthogonalize = [&](Eigen::VectorXd& w, Eigen::Index upto) {
    if (upto == 0) return;
    for (int pass = 0; pass < 2; ++pass) {
      Eigen::VectorXd h = q.leftCols(upto).transpose() * w;
      w.noalias() -= q.leftCols(upto) * h;
    }
  };
  auto fresh_vector = [&](Eigen::Index upto) {
    for (;;) {
      Eigen::VectorXd v(n);
      for (Eigen::Index i = 0; i < n; ++i) v(i) = normal(rng);
      orthogonalize(v, upto);
      const double nv = v.norm();
      if (nv > 1e-8) return Eigen::VectorXd(v / nv);
    }
  };

  q.col(0) = fresh_vector(0);
  t.alpha.reserve(static_cast<std::size_t>(n));
  t.beta.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXd w = a * q.col(i);
    const double alpha = q.col(i).dot(w);
    t.alpha.push_back(alpha);
    if (i + 1 == n) break;
    orthogonalize(w, i + 1);
    const double beta = w.norm();
    if (beta < breakdown) {
      t.beta.push_back(0.0);
      q.col(i + 1) = fresh_vector(i + 1);
    } else {
      t.beta.push_back(beta);
      q.col(i + 1) = w / beta;
    }
  }
  return t;
}

std::size_t sturm_count(const Tridiagonal& t, double x) {
  std::size_t count = 0;
  double d = 1.0;
  const double tiny = std::numeric_limits<double>::min();
  for (std::size_t i = 0; i < t.alpha.size(); ++i) {
    const double b2 = i == 0 ? 0.0 : t.beta[i - 1] * t.beta[i - 1];
    d = t.alpha[i] - x - (i == 0 ? 0.0 : b2 / d);
    if (d == 0.0) d = -tiny;
    if (d < 0.0) ++count;
  }
  return count;
}

std::vector<double> tridiagonal_eigenvalues(const Tridiagonal& t, double tol) {
  const std::size_t n = t.alpha.size();
  std::vector<double> out;
  if (n == 0) return out;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t i = 0; i < n; ++i) {
    double r = 0.0;
    if (i > 0) r += std::abs(t.beta[i - 1]);
    if (i + 1 < n) r += std::abs(t.beta[i]);
    lo = std::min(lo, t.alpha[i] - r);
    hi = std::max(hi, t.alpha[i] + r);
  }
  const double pad = 1e-12 * std::max(1.0, std::max(std::abs(lo), std::abs(hi)));
  lo -= pad;
  hi += pad;
  out.reserve(n);
  double floor = lo;
  for (std::size_t k = 0; k < n; ++k) {
    // lambda_k is the point where the count of eigenvalues below x passes k.
    double a = floor, b = hi;
    while (b - a > tol) {
      const double mid = 0.5 * (a + b);
      if (mid <= a || mid >= b) break;
      if (sturm_count(t, mid) > k) b = mid;
      else a = mid;
    }
    const double v = 0.5 * (a + b);
    out.push_back(v);
    floor = a;
  }
  std::sort(out.begin(), out.end());
  return out;
}

EigenvalueList eigenvalues(const Eigen::MatrixXd& a, double tau, SolverPath path) {
  require_symmetric(a);
  if (!(tau > 0.0)) throw InvalidArgument("tolerance must be positive");
  const bool sparse = path == SolverPath::Sparse ||
                      (path == SolverPath::Auto && a.rows() > kSparseSolverThreshold);
  if (sparse) return lanczos_values(a.sparseView(), tau);
  EigenvalueList out;
  out.tau = tau;
  out.values = dense_values(a);
  out.path = "dense";
  return out;
}

EigenvalueList eigenvalues(const RestrictedMatrix& m, double tau, SolverPath path) {
  if (!(tau > 0.0)) throw InvalidArgument("tolerance must be positive");
  const bool sparse = path == SolverPath::Sparse ||
                      (path == SolverPath::Auto && m.rows() > kSparseSolverThreshold);
  if (!sparse) return eigenvalues(m.to_dense(), tau, SolverPath::Dense);
  Eigen::SparseMatrix<double> s = m.dense ? Eigen::SparseMatrix<double>(m.d.sparseView()) : m.s;
  require_symmetric(s);
  return lanczos_values(s, tau);
}

std::vector<std::pair<double, std::size_t>> eigenvalue_clusters(const EigenvalueList& eigs) {
  std::vector<std::pair<double, std::size_t>> out;
  for (std::size_t i = 0; i < eigs.values.size(); ++i) {
    if (i > 0 && eigs.values[i] - eigs.values[i - 1] < eigs.tau) {
      ++out.back().second;
    } else {
      out.emplace_back(eigs.values[i], 1);
    }
  }
  return out;
}

StepFunction counting_function(const EigenvalueList& eigs) {
  std::vector<double> bps, vals;
  double running = 0.0;
  for (const auto& [lambda, mult] : eigenvalue_clusters(eigs)) {
    running += static_cast<double>(mult);
    bps.push_back(lambda - eigs.tau);
    vals.push_back(running);
  }
  return StepFunction(0.0, std::move(bps), std::move(vals));
}

std::size_t numerical_rank(const Eigen::MatrixXd& c, double tau) {
  if (c.size() == 0) return 0;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(c);
  const auto& sv = svd.singularValues();
  const double thr = static_cast<double>(std::max(c.rows(), c.cols())) * tau * sv(0);
  std::size_t r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > thr) ++r;
  return r;
}

GapReport rank_perturbation_gap(const Eigen::MatrixXd& a, const Eigen::MatrixXd& c, double tau) {
  if (a.rows() != c.rows() || a.cols() != c.cols()) throw InvalidArgument("dimension mismatch");
  require_symmetric(c);
  GapReport r;
  r.gap = sup_distance(counting_function(eigenvalues(a, tau, SolverPath::Dense)),
                       counting_function(eigenvalues(Eigen::MatrixXd(a + c), tau, SolverPath::Dense)));
  r.bound = static_cast<double>(numerical_rank(c, tau));
  return r;
}

GapReport projection_truncation_gap(const Eigen::MatrixXd& a, const std::vector<Eigen::Index>& keep,
                                    double tau) {
  require_symmetric(a);
  std::vector<Eigen::Index> idx = keep;
  std::sort(idx.begin(), idx.end());
  idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
  for (auto i : idx)
    if (i < 0 || i >= a.rows()) throw InvalidArgument("kept index out of range");
  const auto m = static_cast<Eigen::Index>(idx.size());
  Eigen::MatrixXd sub(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) sub(i, j) = a(idx[i], idx[j]);
  GapReport r;
  r.gap = sup_distance(counting_function(eigenvalues(a, tau, SolverPath::Dense)),
                       counting_function(eigenvalues(sub, tau, SolverPath::Dense)));
  r.bound = 4.0 * static_cast<double>(a.rows() - m);
  return r;
}

QuasiModeReport quasi_mode_count(const Eigen::MatrixXd& a, double lambda, double eps,
                                 const Eigen::MatrixXd& u, double tol) {
  require_symmetric(a);
  if (u.rows() != a.rows()) throw InvalidArgument("vectors have the wrong length");
  if (!(eps > 0.0)) throw InvalidArgument("eps must be positive");
  const auto m = u.cols();
  Eigen::MatrixXd gram = u.transpose() * u;
  if ((gram - Eigen::MatrixXd::Identity(m, m)).cwiseAbs().maxCoeff() > tol)
    throw PreconditionError("quasi-modes are not orthonormal");
  Eigen::MatrixXd w = a * u - lambda * u;
  Eigen::MatrixXd wg = w.transpose() * w;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (!(std::sqrt(wg(i, i)) < eps))
      throw PreconditionError("quasi-mode residual is not below eps");
    for (Eigen::Index j = 0; j < i; ++j)
      if (std::abs(wg(i, j)) > tol) throw PreconditionError("quasi-mode residuals are not orthogonal");
  }
  QuasiModeReport r;
  r.modes = static_cast<std::size_t>(m);
  for (double v : dense_values(a))
    if (v > lambda - eps && v < lambda + eps) ++r.count;
  return r;
}

ShiftReport spectral_shift_integral(const Eigen::MatrixXd& h, const Eigen::MatrixXd& g, double tau) {
  if (h.rows() != g.rows() || h.cols() != g.cols()) throw InvalidArgument("dimension mismatch");
  ShiftReport r;
  r.integral = l1_distance(counting_function(eigenvalues(h, tau, SolverPath::Dense)),
                           counting_function(eigenvalues(g, tau, SolverPath::Dense)));
  for (double v : dense_values(Eigen::MatrixXd(h - g))) r.trace_norm += std::abs(v);
  return r;
}

}  // namespace idsa
