#pragma once

#include <Eigen/Dense>
#include <vector>

#include "core/cayley.hpp"
#include "core/colouring.hpp"
#include "core/ergodic.hpp"
#include "core/operator.hpp"
#include "core/spectra.hpp"

namespace idsa {

struct IdsApproximant {
  StepFunction step;  // n(H[V]) / (k |V|)
  int range = 0;      // overall range R of the rule
  int k = 1;
  std::size_t volume = 0;  // |V|, V = U_{j,R} or U when not shrunk
  double normalization = 0.0;
  EigenvalueList eigenvalues;
};

// tau <= 0 selects default_tau of the assembled matrix's row-sum bound.
IdsApproximant ids_approximant(const LocalRule& rule, const Colouring& c, const FiniteSubset& u,
                               bool shrink_volume = true, double tau = 0.0,
                               SolverPath path = SolverPath::Auto);

// F(Q) = n(H[Q_R]) with boundary term b(Q) = 4 |boundary^R Q| k, C = k and
// D = 4 |B_R| k.
class IdsFunction final : public AlmostAdditiveFunction {
 public:
  IdsFunction(const LocalRule& rule, const Colouring& c, double tau = 0.0);
  StepFunction eval(const FiniteSubset& q) const override;
  double boundary_term(const FiniteSubset& q) const override;
  double bound_constant() const override;
  double boundary_constant() const override;

 private:
  const LocalRule& rule_;
  const Colouring& colouring_;
  double tau_;
};

struct ErrorCertificate {
  double tile_term = 0.0;    // 8 |boundary^R Q_n| / |Q_n|
  double folner_term = 0.0;  // (1 + 4|B_R|) |boundary^{diam Q_n} U| / |U|
  double freq_term = 0.0;    // frequency deviation of C along U
  double renorm_term = 0.0;  // |boundary_int^R U| / |U|
  double total = 0.0;
};

ErrorCertificate ids_certificate(const LocalRule& rule, const Colouring& c, const FiniteSubset& u,
                                 const FiniteSubset& tile, const FrequencyProvider& freqs);

// Patterns whose frequency-weighted spectra form the frequency-side
// approximant: the classes seen along the empirical reference volume, or
// along `fallback` for analytic providers.
PatternSpectrum class_source(const Colouring& c, const FiniteSubset& tile,
                             const FrequencyProvider& freqs, const FiniteSubset& fallback);

struct FrequencySide {
  StepFunction step;  // sum nu_P n(H[(Q_n x_P)_R]) / (|Q_n| k)
  double bound = 0.0;  // 4 |boundary^R Q_n| / |Q_n|
};

FrequencySide frequency_side_ids(const LocalRule& rule, const Colouring& c, const FiniteSubset& tile,
                                 const FrequencyProvider& freqs, const PatternSpectrum& classes,
                                 double tau = 0.0);

// Measured || F(U)/|U| - sum nu_P F(Q_n x_P)/|Q_n| || against the estimate
// with C = k and D = 4|B_R|k.
DeltaEstimate ids_delta(const LocalRule& rule, const Colouring& c, const FiniteSubset& u,
                        const FiniteSubset& tile, const FrequencyProvider& freqs,
                        const PatternSpectrum& classes, double tau = 0.0);

struct JumpReport {
  double lambda = 0.0;
  int radius = 0;
  std::size_t multiplicity = 0;
  Pattern pattern;  // C on B_r(x0)
  double frequency = 0.0;
  std::size_t ball3r = 0;
  double lower_bound = 0.0;  // m nu_P / (|B_3r| k)
  double residual = 0.0;
};

// vectors: columns of length k |B_r(x0)|, rows in the sorted order of
// B_r(x0). They must be linearly independent eigenvectors of H for lambda,
// which is checked on B_{r+M}(x0) (exact by finite range).
JumpReport jump_lower_bound(const LocalRule& rule, const Colouring& c, const Element& x0, int radius,
                            const Eigen::MatrixXd& vectors, double lambda,
                            const FrequencyProvider& freqs, double tol = 1e-9);

// f(lambda + delta) - f(lambda - delta).
double observed_jump(const StepFunction& f, double lambda, double delta);

struct SupportEntry {
  double lambda = 0.0;
  std::size_t multiplicity = 0;
  double reference_mass = 0.0;  // increase of the reference on [lambda-delta, lambda+delta]
  bool supported = false;
};

struct SupportReport {
  std::vector<SupportEntry> entries;
  std::size_t unsupported = 0;
  double delta = 0.0;
  double mass_threshold = 0.0;
};

// Advisory comparison of the eigenvalues of a moderate volume with the
// increase points of a reference approximant.
SupportReport spectrum_support_diagnostic(const EigenvalueList& moderate,
                                          const StepFunction& reference, double delta,
                                          double mass_threshold);

// f(E) = (1 - ((E - centre)/width)^2)^2 on |E - centre| < width, else 0.
struct Bump {
  double centre = 0.0;
  double width = 1.0;
  double operator()(double e) const;
  double derivative_sup() const;  // 8 / (3 sqrt(3) width)
};

struct ContinuityReport {
  double gap = 0.0;    // |sum f(lambda_H) - sum f(lambda_G)| / |U|
  double bound = 0.0;  // 2 ||f'|| |B_R| eps
  double max_entry_difference = 0.0;
  bool ok() const { return gap <= bound; }
};

// Throws PreconditionError when some entry of H[U] - G[U] exceeds eps.
ContinuityReport continuity_gap(const LocalRule& h, const LocalRule& g, const Colouring& c,
                                const FiniteSubset& u, double eps, const Bump& f,
                                double tau = 0.0);

}  // namespace idsa
