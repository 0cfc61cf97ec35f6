#include "core/ids.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "core/errors.hpp"

namespace idsa {

namespace {

// Taken from the assembled matrix so the value does not depend on which
// blocks the rule has cached.
double resolve_tau(double tau, const RestrictedMatrix& m) {
  return tau > 0.0 ? tau : default_tau(m.row_sum_bound());
}

double ball_size(const LocalRule& rule) {
  return static_cast<double>(rule.group()->ball_elements(rule.overall_range()).size());
}

StepFunction counts_on(const LocalRule& rule, const Colouring& c, const FiniteSubset& v,
                       double tau) {
  if (v.empty()) return StepFunction();
  RestrictedMatrix m = restrict_operator(rule, c, v);
  return counting_function(eigenvalues(m, resolve_tau(tau, m)));
}

}  // namespace

IdsApproximant ids_approximant(const LocalRule& rule, const Colouring& c, const FiniteSubset& u,
                               bool shrink_volume, double tau, SolverPath path) {
  const int r = rule.overall_range();
  FiniteSubset v = shrink_volume && r > 0 ? shrink(u, r) : u;
  if (v.empty()) throw DomainError("shrunk volume is empty; the volume is too small for the range");
  RestrictedMatrix m = restrict_operator(rule, c, v);
  IdsApproximant out;
  out.range = r;
  out.k = rule.dim();
  out.volume = v.size();
  out.normalization = static_cast<double>(rule.dim()) * static_cast<double>(v.size());
  out.eigenvalues = eigenvalues(m, resolve_tau(tau, m), path);
  // Divide rather than scale so count / total is correctly rounded.
  StepFunction counts = counting_function(out.eigenvalues);
  std::vector<double> vals = counts.values();
  for (double& v : vals) v /= out.normalization;
  out.step = StepFunction(0.0, counts.breakpoints(), std::move(vals));
  return out;
}

IdsFunction::IdsFunction(const LocalRule& rule, const Colouring& c, double tau)
    : rule_(rule), colouring_(c), tau_(tau) {}

StepFunction IdsFunction::eval(const FiniteSubset& q) const {
  if (q.empty()) return StepFunction();
  const int r = rule_.overall_range();
  return counts_on(rule_, colouring_, r > 0 ? shrink(q, r) : q, tau_);
}

double IdsFunction::boundary_term(const FiniteSubset& q) const {
  const int r = rule_.overall_range();
  if (r == 0 || q.empty()) return 0.0;
  return 4.0 * static_cast<double>(boundary(q, r).size()) * rule_.dim();
}

double IdsFunction::bound_constant() const { return rule_.dim(); }

double IdsFunction::boundary_constant() const { return 4.0 * ball_size(rule_) * rule_.dim(); }

ErrorCertificate ids_certificate(const LocalRule& rule, const Colouring& c, const FiniteSubset& u,
                                 const FiniteSubset& tile, const FrequencyProvider& freqs) {
  if (u.empty() || tile.empty()) throw InvalidArgument("certificate needs non-empty sets");
  const int r = std::max(1, rule.overall_range());
  ErrorCertificate cert;
  cert.tile_term = 8.0 * static_cast<double>(boundary(tile, r).size()) / static_cast<double>(tile.size());
  cert.folner_term = (1.0 + 4.0 * ball_size(rule)) * folner_ratio(u, tile);
  cert.freq_term = to_double(frequency_deviation(c, tile, u, freqs));
  cert.renorm_term = static_cast<double>(boundary_int(u, r).size()) / static_cast<double>(u.size());
  cert.total = cert.tile_term + cert.folner_term + cert.freq_term + cert.renorm_term;
  return cert;
}

PatternSpectrum class_source(const Colouring& c, const FiniteSubset& tile,
                             const FrequencyProvider& freqs, const FiniteSubset& fallback) {
  if (const auto* emp = dynamic_cast<const EmpiricalFrequencies*>(&freqs))
    return occurring_pattern_spectrum(*emp->colouring(), tile, emp->reference());
  return occurring_pattern_spectrum(c, tile, fallback);
}

FrequencySide frequency_side_ids(const LocalRule& rule, const Colouring& c, const FiniteSubset& tile,
                                 const FrequencyProvider& freqs, const PatternSpectrum& classes,
                                 double tau) {
  IdsFunction f(rule, c, tau);
  FrequencySide out;
  out.step = frequency_approximant(
                 classes, [&](const SpectrumEntry& e) { return f.eval(tile.translate(e.representative)); },
                 tile, freqs)
                 .scaled(1.0 / rule.dim());
  const int r = std::max(1, rule.overall_range());
  out.bound = 4.0 * static_cast<double>(boundary(tile, r).size()) / static_cast<double>(tile.size());
  return out;
}

DeltaEstimate ids_delta(const LocalRule& rule, const Colouring& c, const FiniteSubset& u,
                        const FiniteSubset& tile, const FrequencyProvider& freqs,
                        const PatternSpectrum& classes, double tau) {
  IdsFunction f(rule, c, tau);
  StepFunction approx = frequency_approximant(
      classes, [&](const SpectrumEntry& e) { return f.eval(tile.translate(e.representative)); }, tile,
      freqs);
  const double dev = to_double(frequency_deviation(c, tile, u, freqs));
  return delta_estimate(f, u, tile, approx, dev);
}

JumpReport jump_lower_bound(const LocalRule& rule, const Colouring& c, const Element& x0, int radius,
                            const Eigen::MatrixXd& vectors, double lambda,
                            const FrequencyProvider& freqs, double tol) {
  if (radius < 0) throw InvalidArgument("radius must be nonnegative");
  const GroupPtr& g = rule.group();
  const int k = rule.dim();
  FiniteSubset support = ball_at(g, radius, x0);
  if (vectors.rows() != static_cast<Eigen::Index>(support.size()) * k || vectors.cols() == 0)
    throw InvalidArgument("eigenvectors must have k |B_r| rows and at least one column");
  if (Eigen::FullPivLU<Eigen::MatrixXd>(vectors).rank() != vectors.cols())
    throw PreconditionError("eigenvectors are not linearly independent");

  FiniteSubset outer = ball_at(g, radius + rule.range(), x0);
  RestrictedMatrix m = restrict_operator(rule, c, outer);
  Eigen::MatrixXd embedded = Eigen::MatrixXd::Zero(m.rows(), vectors.cols());
  for (std::size_t i = 0; i < support.size(); ++i) {
    const auto row = outer.index_of(support.elements()[i]) * k;
    for (int a = 0; a < k; ++a)
      embedded.row(row + a) = vectors.row(static_cast<Eigen::Index>(i) * k + a);
  }
  Eigen::MatrixXd resid = m.to_dense() * embedded - lambda * embedded;
  JumpReport rep;
  for (Eigen::Index j = 0; j < resid.cols(); ++j)
    rep.residual = std::max(rep.residual, resid.col(j).norm() / std::max(1e-300, embedded.col(j).norm()));
  if (rep.residual > tol) throw PreconditionError("vectors are not eigenvectors for lambda");

  rep.lambda = lambda;
  rep.radius = radius;
  rep.multiplicity = static_cast<std::size_t>(vectors.cols());
  rep.pattern = restrict(c, support);
  rep.frequency = to_double(freqs.frequency(canonicalize(rep.pattern)));
  rep.ball3r = g->ball_elements(3 * radius).size();
  rep.lower_bound = static_cast<double>(rep.multiplicity) * rep.frequency /
                    (static_cast<double>(rep.ball3r) * k);
  return rep;
}

double observed_jump(const StepFunction& f, double lambda, double delta) {
  return f(lambda + delta) - f(lambda - delta);
}

SupportReport spectrum_support_diagnostic(const EigenvalueList& moderate,
                                          const StepFunction& reference, double delta,
                                          double mass_threshold) {
  SupportReport rep;
  rep.delta = delta;
  rep.mass_threshold = mass_threshold;
  for (const auto& [lambda, mult] : eigenvalue_clusters(moderate)) {
    SupportEntry e;
    e.lambda = lambda;
    e.multiplicity = mult;
    // Mass on the closed window: left limit at lambda - delta.
    const double left = std::nextafter(lambda - delta, -std::numeric_limits<double>::infinity());
    e.reference_mass = reference(lambda + delta) - reference(left);
    e.supported = e.reference_mass > mass_threshold;
    if (!e.supported) ++rep.unsupported;
    rep.entries.push_back(e);
  }
  return rep;
}

double Bump::operator()(double e) const {
  const double t = (e - centre) / width;
  if (std::abs(t) >= 1.0) return 0.0;
  const double s = 1.0 - t * t;
  return s * s;
}

double Bump::derivative_sup() const { return 8.0 / (3.0 * std::sqrt(3.0) * width); }

ContinuityReport continuity_gap(const LocalRule& h, const LocalRule& g, const Colouring& c,
                                const FiniteSubset& u, double eps, const Bump& f, double tau) {
  if (u.empty()) throw InvalidArgument("volume must not be empty");
  if (!(f.width > 0.0)) throw InvalidArgument("bump width must be positive");
  if (h.dim() != g.dim()) throw InvalidArgument("operators have different internal dimensions");
  RestrictedMatrix mh = restrict_operator(h, c, u);
  RestrictedMatrix mg = restrict_operator(g, c, u);
  ContinuityReport rep;
  rep.max_entry_difference = max_abs_difference(mh, mg);
  // Slack for the rounding in entries such as (1 + eps) - 1.
  const double scale = 1.0 + std::max(h.max_block_norm(), g.max_block_norm());
  if (rep.max_entry_difference > eps + 64.0 * std::numeric_limits<double>::epsilon() * scale)
    throw PreconditionError("entrywise difference exceeds eps");
  const double t = tau > 0.0 ? tau : default_tau(std::max(mh.row_sum_bound(), mg.row_sum_bound()));
  const std::vector<double> eh = eigenvalues(mh, t).values;
  const std::vector<double> eg = eigenvalues(mg, t).values;
  double sum = 0.0;
  for (std::size_t i = 0; i < eh.size(); ++i) sum += f(eh[i]) - f(eg[i]);
  rep.gap = std::abs(sum) / static_cast<double>(u.size());
  const int r = std::max(h.overall_range(), g.overall_range());
  rep.bound = 2.0 * f.derivative_sup() * static_cast<double>(h.group()->ball_elements(r).size()) * eps;
  return rep;
}

}  // namespace idsa
