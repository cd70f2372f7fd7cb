#pragma once

#include <utility>
#include <variant>
#include <vector>

#include "semimyopic/belief.hpp"

namespace semimyopic {

/// low below the threshold, mid exactly at it, high above it.
struct StepUtility {
  double threshold = 1.0;
  double low = 0.0;
  double mid = 0.5;
  double high = 1.0;
};

/// u(x) = tanh((x - shift) / scale)
struct TanhUtility {
  double scale = 1.0;
  double shift = 0.0;
};

/// Linear interpolation between (x, u) knots, constant beyond the end knots.
struct PiecewiseLinearUtility {
  std::vector<std::pair<double, double>> knots;
};

class UtilityFn {
 public:
  using Variant = std::variant<StepUtility, TanhUtility, PiecewiseLinearUtility>;

  UtilityFn() : UtilityFn(StepUtility{}) {}
  UtilityFn(StepUtility step);              // NOLINT(google-explicit-constructor)
  UtilityFn(TanhUtility tanh);              // NOLINT(google-explicit-constructor)
  UtilityFn(PiecewiseLinearUtility knots);  // NOLINT(google-explicit-constructor)

  const Variant& variant() const { return fn_; }

  double operator()(double x) const;

  /// Points where u is not smooth, ascending.
  std::vector<double> kinks() const;

  /// Infimum and supremum of u.
  std::pair<double, double> range() const;

 private:
  Variant fn_;
};

double evaluate(const UtilityFn& u, double x);

/// Expected utility under a Gaussian belief. Closed form for step and
/// piecewise-linear utilities, Gauss-Hermite (or split adaptive quadrature when
/// the belief is wide relative to the tanh scale) otherwise. A known item
/// evaluates u at its value.
double expected_utility(const UtilityFn& u, const GaussianBelief& belief);

/// Generic quadrature path usable for any utility: the real line is split at
/// the utility's kinks and each smooth piece integrated separately.
double expected_utility_numeric(const UtilityFn& u, const GaussianBelief& belief,
                                double relative_tolerance = 1e-10);

}  // namespace semimyopic
