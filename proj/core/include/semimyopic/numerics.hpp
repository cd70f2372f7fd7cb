#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

namespace semimyopic::numerics {

inline double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) * (0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2);
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

/// Nodes and weights for integrals against the standard normal density:
/// the integral of f(z) phi(z) is approximated by sum_i weights[i] * f(nodes[i]).
struct GaussHermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Probabilists' Gauss-Hermite rule with `points` nodes (Golub-Welsch).
/// Rules are computed once per size and cached; the returned reference stays valid.
const GaussHermiteRule& gauss_hermite(int points);

/// Adaptive Gauss-Kronrod integral of f over the finite interval [a, b]. Panels
/// stop splitting once their error estimate meets the larger of the two
/// tolerances, so integrands that are zero up to rounding terminate quickly.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double relative_tolerance, double absolute_tolerance = 1e-15);

/// Half-width, in standard deviations, beyond which normal tails are dropped.
inline constexpr double kTailCutoff = 12.0;

}  // namespace semimyopic::numerics
