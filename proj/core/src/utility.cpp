#include "semimyopic/utility.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "semimyopic/numerics.hpp"

namespace semimyopic {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

constexpr int kHermitePoints = 64;

double tanh_expected(const TanhUtility& t, const GaussianBelief& b) {
  const double sd = std::sqrt(b.variance);
  auto f = [&](double z) { return std::tanh((b.mean + sd * z - t.shift) / t.scale); };
  if (sd <= 0.5 * t.scale) {
    const auto& rule = numerics::gauss_hermite(kHermitePoints);
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) sum += rule.weights[i] * f(rule.nodes[i]);
    return sum;
  }
  // Wide belief: tanh is nearly a step at the shift, integrate the two sides separately.
  const double cut = std::clamp((t.shift - b.mean) / sd, -numerics::kTailCutoff, numerics::kTailCutoff);
  auto g = [&](double z) { return f(z) * numerics::normal_pdf(z); };
  return numerics::integrate(g, -numerics::kTailCutoff, cut, 1e-12) +
         numerics::integrate(g, cut, numerics::kTailCutoff, 1e-12);
}

double piecewise_expected(const PiecewiseLinearUtility& p, const GaussianBelief& b) {
  const auto& k = p.knots;
  const double sd = std::sqrt(b.variance);
  auto z_of = [&](double x) { return (x - b.mean) / sd; };

  double sum = k.front().second * numerics::normal_cdf(z_of(k.front().first)) +
               k.back().second * numerics::normal_cdf(-z_of(k.back().first));
  for (std::size_t j = 0; j + 1 < k.size(); ++j) {
    const auto [x0, u0] = k[j];
    const auto [x1, u1] = k[j + 1];
    const double slope = (u1 - u0) / (x1 - x0);
    const double intercept = u0 + slope * (b.mean - x0);  // value at the mean
    const double za = z_of(x0);
    const double zb = z_of(x1);
    const double mass = numerics::normal_cdf(zb) - numerics::normal_cdf(za);
    sum += intercept * mass + slope * sd * (numerics::normal_pdf(za) - numerics::normal_pdf(zb));
  }
  return sum;
}

}  // namespace

UtilityFn::UtilityFn(StepUtility step) : fn_(step) {
  if (!(step.low <= step.mid && step.mid <= step.high)) {
    throw std::invalid_argument("step utility requires low <= mid <= high");
  }
  if (!std::isfinite(step.threshold) || !std::isfinite(step.low) || !std::isfinite(step.high)) {
    throw std::invalid_argument("step utility parameters must be finite");
  }
}

UtilityFn::UtilityFn(TanhUtility tanh) : fn_(tanh) {
  if (!(tanh.scale > 0.0) || !std::isfinite(tanh.scale) || !std::isfinite(tanh.shift)) {
    throw std::invalid_argument("tanh utility requires a finite positive scale");
  }
}

UtilityFn::UtilityFn(PiecewiseLinearUtility knots) : fn_(std::move(knots)) {
  const auto& k = std::get<PiecewiseLinearUtility>(fn_).knots;
  if (k.empty()) throw std::invalid_argument("piecewise-linear utility needs at least one knot");
  for (std::size_t i = 0; i < k.size(); ++i) {
    if (!std::isfinite(k[i].first) || !std::isfinite(k[i].second)) {
      throw std::invalid_argument("piecewise-linear knots must be finite");
    }
    if (i > 0 && !(k[i].first > k[i - 1].first)) {
      throw std::invalid_argument("piecewise-linear knots must be strictly increasing in x");
    }
  }
}

double UtilityFn::operator()(double x) const {
  return std::visit(
      overloaded{
          [x](const StepUtility& s) { return x < s.threshold ? s.low : (x > s.threshold ? s.high : s.mid); },
          [x](const TanhUtility& t) { return std::tanh((x - t.shift) / t.scale); },
          [x](const PiecewiseLinearUtility& p) {
            const auto& k = p.knots;
            if (x <= k.front().first) return k.front().second;
            if (x >= k.back().first) return k.back().second;
            auto hi = std::upper_bound(k.begin(), k.end(), x,
                                       [](double v, const auto& knot) { return v < knot.first; });
            auto lo = std::prev(hi);
            const double w = (x - lo->first) / (hi->first - lo->first);
            return lo->second + w * (hi->second - lo->second);
          },
      },
      fn_);
}

std::vector<double> UtilityFn::kinks() const {
  return std::visit(overloaded{
                        [](const StepUtility& s) { return std::vector<double>{s.threshold}; },
                        [](const TanhUtility&) { return std::vector<double>{}; },
                        [](const PiecewiseLinearUtility& p) {
                          std::vector<double> out;
                          for (const auto& knot : p.knots) out.push_back(knot.first);
                          return out;
                        },
                    },
                    fn_);
}

std::pair<double, double> UtilityFn::range() const {
  return std::visit(overloaded{
                        [](const StepUtility& s) { return std::pair{s.low, s.high}; },
                        [](const TanhUtility&) { return std::pair{-1.0, 1.0}; },
                        [](const PiecewiseLinearUtility& p) {
                          auto [lo, hi] = std::minmax_element(
                              p.knots.begin(), p.knots.end(),
                              [](const auto& a, const auto& b) { return a.second < b.second; });
                          return std::pair{lo->second, hi->second};
                        },
                    },
                    fn_);
}

double evaluate(const UtilityFn& u, double x) { return u(x); }

double expected_utility(const UtilityFn& u, const GaussianBelief& belief) {
  if (belief.variance == 0.0) return u(belief.mean);
  return std::visit(
      overloaded{
          [&](const StepUtility& s) {
            const double z = (belief.mean - s.threshold) / std::sqrt(belief.variance);
            return s.low + (s.high - s.low) * numerics::normal_cdf(z);
          },
          [&](const TanhUtility& t) { return tanh_expected(t, belief); },
          [&](const PiecewiseLinearUtility& p) { return piecewise_expected(p, belief); },
      },
      u.variant());
}

double expected_utility_numeric(const UtilityFn& u, const GaussianBelief& belief,
                                double relative_tolerance) {
  if (belief.variance == 0.0) return u(belief.mean);
  const double sd = std::sqrt(belief.variance);
  auto kinks = u.kinks();
  // A steep tanh behaves like a kink at its centre.
  if (const auto* t = std::get_if<TanhUtility>(&u.variant())) kinks.push_back(t->shift);
  auto f = [&](double z) { return u(belief.mean + sd * z); };

  std::vector<double> cuts{-numerics::kTailCutoff};
  for (double x : kinks) {
    const double z = (x - belief.mean) / sd;
    if (z > cuts.back() && z < numerics::kTailCutoff) cuts.push_back(z);
  }
  cuts.push_back(numerics::kTailCutoff);

  // Mass beyond the cutoff takes the limiting utility value.
  double sum = f(-numerics::kTailCutoff - 1.0) * numerics::normal_cdf(-numerics::kTailCutoff) +
               f(numerics::kTailCutoff + 1.0) * numerics::normal_cdf(-numerics::kTailCutoff);
  auto g = [&](double z) { return f(z) * numerics::normal_pdf(z); };
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    // Open interior: the kink value itself has measure zero.
    sum += numerics::integrate(g, cuts[i], cuts[i + 1], relative_tolerance);
  }
  return sum;
}

}  // namespace semimyopic
