#include "semimyopic/numerics.hpp"

#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

namespace semimyopic::numerics {

namespace {

GaussHermiteRule build_rule(int points) {
  // Jacobi matrix of the monic probabilists' Hermite recurrence
  // He_{k+1}(z) = z He_k(z) - k He_{k-1}(z).
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(points);
  Eigen::VectorXd sub(points > 1 ? points - 1 : 0);
  for (int k = 1; k < points; ++k) sub(k - 1) = std::sqrt(static_cast<double>(k));

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("gauss_hermite: eigen decomposition failed");
  }

  GaussHermiteRule rule;
  rule.nodes.resize(points);
  rule.weights.resize(points);
  double total = 0.0;
  for (int i = 0; i < points; ++i) {
    rule.nodes[i] = solver.eigenvalues()(i);
    const double v = solver.eigenvectors()(0, i);
    rule.weights[i] = v * v;
    total += rule.weights[i];
  }
  for (auto& w : rule.weights) w /= total;
  // Symmetrize so that odd moments vanish exactly.
  for (int i = 0; i < points / 2; ++i) {
    const int j = points - 1 - i;
    const double x = 0.5 * (rule.nodes[j] - rule.nodes[i]);
    const double w = 0.5 * (rule.weights[i] + rule.weights[j]);
    rule.nodes[i] = -x;
    rule.nodes[j] = x;
    rule.weights[i] = rule.weights[j] = w;
  }
  if (points % 2 == 1) rule.nodes[points / 2] = 0.0;
  return rule;
}

}  // namespace

const GaussHermiteRule& gauss_hermite(int points) {
  if (points < 1) throw std::invalid_argument("gauss_hermite: points must be >= 1");
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<const GaussHermiteRule>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[points];
  if (!slot) slot = std::make_unique<const GaussHermiteRule>(build_rule(points));
  return *slot;
}

namespace {

using Kronrod = boost::math::quadrature::gauss_kronrod<double, 31>;

double panel(const std::function<double(double)>& f, double a, double b, double tolerance, int depth) {
  double error = 0.0;
  const double value = Kronrod::integrate(f, a, b, 0, 0.0, &error);
  if (error <= tolerance || depth == 0) return value;
  const double mid = 0.5 * (a + b);
  return panel(f, a, mid, 0.5 * tolerance, depth - 1) + panel(f, mid, b, 0.5 * tolerance, depth - 1);
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 double relative_tolerance, double absolute_tolerance) {
  if (!(b > a)) return 0.0;
  double error = 0.0;
  const double rough = Kronrod::integrate(f, a, b, 0, 0.0, &error);
  const double tolerance = std::max(relative_tolerance * std::abs(rough), absolute_tolerance);
  if (error <= tolerance) return rough;
  const double mid = 0.5 * (a + b);
  return panel(f, a, mid, 0.5 * tolerance, 15) + panel(f, mid, b, 0.5 * tolerance, 15);
}

}  // namespace semimyopic::numerics
