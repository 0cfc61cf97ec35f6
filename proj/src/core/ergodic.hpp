#pragma once

#include <functional>
#include <vector>

#include "core/cayley.hpp"
#include "core/colouring.hpp"

namespace idsa {

// Right-continuous step function: `initial` on (-inf, b_0), values[i] on
// [b_i, b_{i+1}). Breakpoints are strictly increasing and every breakpoint
// changes the value.
class StepFunction {
 public:
  StepFunction() = default;
  StepFunction(double initial, std::vector<double> breakpoints, std::vector<double> values);
  static StepFunction constant(double v) { return StepFunction(v, {}, {}); }

  double operator()(double x) const;
  double initial() const { return initial_; }
  const std::vector<double>& breakpoints() const { return breaks_; }
  const std::vector<double>& values() const { return values_; }
  double terminal() const { return values_.empty() ? initial_ : values_.back(); }
  double sup_norm() const;

  StepFunction scaled(double a) const;
  // a*f + b*g on the merged breakpoints.
  static StepFunction combine(double a, const StepFunction& f, double b, const StepFunction& g);

 private:
  double initial_ = 0.0;
  std::vector<double> breaks_;
  std::vector<double> values_;
};

// Exact sup norm of f - g by sweeping the merged breakpoints.
double sup_distance(const StepFunction& f, const StepFunction& g);
// Integral of |f - g| over the real line (infinite when the tails differ).
double l1_distance(const StepFunction& f, const StepFunction& g);

class AlmostAdditiveFunction {
 public:
  virtual ~AlmostAdditiveFunction() = default;
  virtual StepFunction eval(const FiniteSubset& q) const = 0;
  virtual double boundary_term(const FiniteSubset& q) const = 0;
  // ||F(Q)|| <= C |Q|
  virtual double bound_constant() const = 0;
  // b(Q) <= D |Q|
  virtual double boundary_constant() const = 0;
};

// F(Q) = |Q| as a constant function; exactly additive.
class CardinalityFunction final : public AlmostAdditiveFunction {
 public:
  StepFunction eval(const FiniteSubset& q) const override {
    return StepFunction::constant(static_cast<double>(q.size()));
  }
  double boundary_term(const FiniteSubset&) const override { return 0.0; }
  double bound_constant() const override { return 1.0; }
  double boundary_constant() const override { return 0.0; }
};

struct AdditivityCheck {
  double defect = 0.0;  // ||F(union) - sum F(Q_k)||
  double allowance = 0.0;  // sum b(Q_k)
};

// Parts must be pairwise disjoint.
AdditivityCheck check_almost_additivity(const AlmostAdditiveFunction& f,
                                        const std::vector<FiniteSubset>& parts);

StepFunction ergodic_average(const AlmostAdditiveFunction& f, const FiniteSubset& u);

// Sum over the listed classes of nu_P * Ftilde(P) / |tile|. Classes outside
// the list are taken to have zero frequency or zero value.
StepFunction frequency_approximant(const PatternSpectrum& classes,
                                   const std::function<StepFunction(const SpectrumEntry&)>& ftilde,
                                   const FiniteSubset& tile, const FrequencyProvider& freqs);

// |boundary^{diam tile}(U)| / |U|, zero for a single-point tile.
double folner_ratio(const FiniteSubset& u, const FiniteSubset& tile);

struct DeltaEstimate {
  double b_term = 0.0;       // b(Q_n)/|Q_n|
  double folner_term = 0.0;  // (C+D) |boundary^{diam Q_n} U| / |U|
  double freq_term = 0.0;    // C * deviation
  double total = 0.0;
  double measured = 0.0;     // ||F(U)/|U| - approximant||
};

DeltaEstimate delta_estimate(const AlmostAdditiveFunction& f, const FiniteSubset& u,
                             const FiniteSubset& tile, const StepFunction& approximant,
                             double deviation);

struct LimitCertificates {
  double bound_vs_uj = 0.0;    // 2 b/|Q_n| + (C+D) folner + C dev
  double bound_vs_freq = 0.0;  // b/|Q_n|
};

LimitCertificates limit_certificates(const AlmostAdditiveFunction& f, const FiniteSubset& u,
                                     const FiniteSubset& tile, double deviation);

}  // namespace idsa
