#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "core/ergodic.hpp"
#include "core/operator.hpp"

namespace idsa {

enum class SolverPath { Auto, Dense, Sparse };

// Above this many rows Auto picks the Lanczos route.
inline constexpr Eigen::Index kSparseSolverThreshold = 6000;

struct EigenvalueList {
  std::vector<double> values;  // ascending, with multiplicity
  double tau = 1e-9;
  std::string path;  // "dense", "lanczos" or "lanczos->dense"
};

double default_tau(double norm_bound);

EigenvalueList eigenvalues(const Eigen::MatrixXd& a, double tau, SolverPath path = SolverPath::Auto);
EigenvalueList eigenvalues(const RestrictedMatrix& m, double tau, SolverPath path = SolverPath::Auto);

// Lanczos with full reorthogonalization, restarted with a fresh orthogonal
// vector whenever the Krylov space closes, so T carries every multiplicity.
// Returns the diagonal and off-diagonal of T.
struct Tridiagonal {
  std::vector<double> alpha;
  std::vector<double> beta;  // beta[i] couples i and i+1; size n-1
};
Tridiagonal lanczos_tridiagonalize(const Eigen::SparseMatrix<double>& a, std::uint64_t seed = 1);
// All eigenvalues of T by Sturm-count bisection, to absolute accuracy tol.
std::vector<double> tridiagonal_eigenvalues(const Tridiagonal& t, double tol);
// Number of eigenvalues of T strictly below x.
std::size_t sturm_count(const Tridiagonal& t, double x);

// n(A)(E) = #{lambda_i <= E}. Eigenvalues closer than tau are merged, and a
// cluster is counted from tau below its smallest member.
StepFunction counting_function(const EigenvalueList& eigs);

// Eigenvalue clusters: (smallest member, multiplicity).
std::vector<std::pair<double, std::size_t>> eigenvalue_clusters(const EigenvalueList& eigs);

std::size_t numerical_rank(const Eigen::MatrixXd& c, double tau);

struct GapReport {
  double gap = 0.0;
  double bound = 0.0;
  bool ok() const { return gap <= bound; }
};

// sup_E |n(A)(E) - n(A+C)(E)| against rank(C).
GapReport rank_perturbation_gap(const Eigen::MatrixXd& a, const Eigen::MatrixXd& c, double tau);
// sup_E |n(A)(E) - n(pAi)(E)| for the compression onto the kept coordinates,
// against 4 * codimension.
GapReport projection_truncation_gap(const Eigen::MatrixXd& a, const std::vector<Eigen::Index>& keep,
                                    double tau);

struct QuasiModeReport {
  std::size_t modes = 0;  // m
  std::size_t count = 0;  // eigenvalues in (lambda - eps, lambda + eps)
  bool ok() const { return count >= modes; }
};

// Columns of u are the candidate vectors. Throws PreconditionError when they
// are not orthonormal, their images under A - lambda are not pairwise
// orthogonal, or some image has norm >= eps.
QuasiModeReport quasi_mode_count(const Eigen::MatrixXd& a, double lambda, double eps,
                                 const Eigen::MatrixXd& u, double tol = 1e-9);

struct ShiftReport {
  double integral = 0.0;    // integral of |n(H) - n(G)|
  double trace_norm = 0.0;  // sum of |eigenvalues of H - G|
  bool ok() const { return integral <= trace_norm * (1.0 + 1e-12) + 1e-12; }
};

ShiftReport spectral_shift_integral(const Eigen::MatrixXd& h, const Eigen::MatrixXd& g, double tau);

}  // namespace idsa
