#include "core/ergodic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "core/errors.hpp"

namespace idsa {

StepFunction::StepFunction(double initial, std::vector<double> breakpoints,
                           std::vector<double> values)
    : initial_(initial) {
  if (breakpoints.size() != values.size())
    throw InvalidArgument("step function needs one value per breakpoint");
  double prev_value = initial;
  for (std::size_t i = 0; i < breakpoints.size(); ++i) {
    if (!std::isfinite(breakpoints[i]) || !std::isfinite(values[i]))
      throw InvalidArgument("step function entries must be finite");
    if (i > 0 && !(breakpoints[i] > breakpoints[i - 1]))
      throw InvalidArgument("breakpoints must be strictly increasing");
    if (values[i] == prev_value) continue;
    breaks_.push_back(breakpoints[i]);
    values_.push_back(values[i]);
    prev_value = values[i];
  }
}

double StepFunction::operator()(double x) const {
  auto it = std::upper_bound(breaks_.begin(), breaks_.end(), x);
  if (it == breaks_.begin()) return initial_;
  return values_[static_cast<std::size_t>(it - breaks_.begin()) - 1];
}

double StepFunction::sup_norm() const {
  double m = std::abs(initial_);
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

StepFunction StepFunction::scaled(double a) const {
  std::vector<double> vals = values_;
  for (double& v : vals) v *= a;
  return StepFunction(initial_ * a, breaks_, std::move(vals));
}

StepFunction StepFunction::combine(double a, const StepFunction& f, double b,
                                   const StepFunction& g) {
  std::vector<double> bps, vals;
  bps.reserve(f.breaks_.size() + g.breaks_.size());
  std::size_t i = 0, j = 0;
  double fv = f.initial_, gv = g.initial_;
  while (i < f.breaks_.size() || j < g.breaks_.size()) {
    double x;
    if (j >= g.breaks_.size() || (i < f.breaks_.size() && f.breaks_[i] < g.breaks_[j])) {
      x = f.breaks_[i];
      fv = f.values_[i++];
    } else if (i >= f.breaks_.size() || g.breaks_[j] < f.breaks_[i]) {
      x = g.breaks_[j];
      gv = g.values_[j++];
    } else {
      x = f.breaks_[i];
      fv = f.values_[i++];
      gv = g.values_[j++];
    }
    bps.push_back(x);
    vals.push_back(a * fv + b * gv);
  }
  return StepFunction(a * f.initial_ + b * g.initial_, std::move(bps), std::move(vals));
}

double sup_distance(const StepFunction& f, const StepFunction& g) {
  return StepFunction::combine(1.0, f, -1.0, g).sup_norm();
}

double l1_distance(const StepFunction& f, const StepFunction& g) {
  StepFunction d = StepFunction::combine(1.0, f, -1.0, g);
  if (d.initial() != 0.0 || d.terminal() != 0.0) return std::numeric_limits<double>::infinity();
  double area = 0.0;
  const auto& b = d.breakpoints();
  const auto& v = d.values();
  for (std::size_t i = 0; i + 1 < b.size(); ++i) area += std::abs(v[i]) * (b[i + 1] - b[i]);
  return area;
}

AdditivityCheck check_almost_additivity(const AlmostAdditiveFunction& f,
                                        const std::vector<FiniteSubset>& parts) {
  if (parts.empty()) throw InvalidArgument("need at least one part");
  std::vector<Element> all;
  std::size_t total = 0;
  StepFunction sum;
  AdditivityCheck out;
  for (const auto& p : parts) {
    all.insert(all.end(), p.elements().begin(), p.elements().end());
    total += p.size();
    sum = StepFunction::combine(1.0, sum, 1.0, f.eval(p));
    out.allowance += f.boundary_term(p);
  }
  FiniteSubset uni(parts.front().group_ptr(), std::move(all));
  if (uni.size() != total) throw InvalidArgument("parts must be pairwise disjoint");
  out.defect = sup_distance(f.eval(uni), sum);
  return out;
}

StepFunction ergodic_average(const AlmostAdditiveFunction& f, const FiniteSubset& u) {
  if (u.empty()) throw InvalidArgument("ergodic average needs a non-empty volume");
  return f.eval(u).scaled(1.0 / static_cast<double>(u.size()));
}

StepFunction frequency_approximant(const PatternSpectrum& classes,
                                   const std::function<StepFunction(const SpectrumEntry&)>& ftilde,
                                   const FiniteSubset& tile, const FrequencyProvider& freqs) {
  if (tile.empty()) throw InvalidArgument("tile must not be empty");
  StepFunction acc;
  const double inv = 1.0 / static_cast<double>(tile.size());
  for (const auto& e : classes.entries) {
    const double nu = to_double(freqs.frequency(e.cls));
    if (nu == 0.0) continue;
    acc = StepFunction::combine(1.0, acc, nu * inv, ftilde(e));
  }
  return acc;
}

double folner_ratio(const FiniteSubset& u, const FiniteSubset& tile) {
  if (u.empty()) throw InvalidArgument("volume must not be empty");
  const auto diam = tile.diameter();
  if (diam == 0) return 0.0;
  return static_cast<double>(boundary(u, static_cast<int>(diam)).size()) /
         static_cast<double>(u.size());
}

DeltaEstimate delta_estimate(const AlmostAdditiveFunction& f, const FiniteSubset& u,
                             const FiniteSubset& tile, const StepFunction& approximant,
                             double deviation) {
  DeltaEstimate d;
  const double c = f.bound_constant();
  d.b_term = f.boundary_term(tile) / static_cast<double>(tile.size());
  d.folner_term = (c + f.boundary_constant()) * folner_ratio(u, tile);
  d.freq_term = c * deviation;
  d.total = d.b_term + d.folner_term + d.freq_term;
  d.measured = sup_distance(ergodic_average(f, u), approximant);
  return d;
}

LimitCertificates limit_certificates(const AlmostAdditiveFunction& f, const FiniteSubset& u,
                                     const FiniteSubset& tile, double deviation) {
  const double c = f.bound_constant();
  const double b = f.boundary_term(tile) / static_cast<double>(tile.size());
  LimitCertificates out;
  out.bound_vs_freq = b;
  out.bound_vs_uj = 2.0 * b + (c + f.boundary_constant()) * folner_ratio(u, tile) + c * deviation;
  return out;
}

}  // namespace idsa
