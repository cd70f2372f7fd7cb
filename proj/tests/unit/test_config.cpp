#include <gtest/gtest.h>

#include <functional>
#include <variant>

#include "config.hpp"

using semimyopic::cli::Config;
using semimyopic::cli::ConfigError;
namespace sm = semimyopic;

namespace {

std::string error_of(const std::function<void()>& action) {
  try {
    action();
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST(Config, SectionsAndDottedKeys) {
  Config c;
  c.parse("# comment\n[problem]\nn = 4   # trailing\nbudget=7\nmeasurement.cost = 0.003\n\n[utility]\nkind = tanh\n");
  EXPECT_EQ(c.get_int("problem.n", 1, 100), 4);
  EXPECT_EQ(c.get_int("problem.budget", 0, 100), 7);
  EXPECT_DOUBLE_EQ(c.get_double("measurement.cost"), 0.003);
  EXPECT_EQ(c.get_string("utility.kind"), "tanh");
}

TEST(Config, Defaults) {
  Config c;
  EXPECT_DOUBLE_EQ(c.get_double("measurement.noise_variance"), 5.0);
  EXPECT_EQ(c.get_string("scheme.family"), "blinkered");
  EXPECT_EQ(c.get_double_list("experiment.sigma_o2_list"), (std::vector<double>{3, 4, 5, 6}));
}

TEST(Config, UnknownKeyRejected) {
  Config c;
  EXPECT_NE(error_of([&] { c.parse("[problem]\nitems = 3\n"); }).find("problem.items"), std::string::npos);
  EXPECT_THROW(c.set_assignment("bogus.key=1"), ConfigError);
  EXPECT_THROW(c.set_assignment("no equals sign"), ConfigError);
}

TEST(Config, RequiredKeysNamed) {
  Config c;
  EXPECT_NE(error_of([&] { (void)c.get_int("problem.n", 1, 10); }).find("problem.n"), std::string::npos);
  EXPECT_NE(error_of([&] { (void)c.get_seed(); }).find("experiment.seed"), std::string::npos);
}

TEST(Config, TypedErrorsNameTheKey) {
  Config c;
  c.set("problem.budget", "five");
  EXPECT_NE(error_of([&] { (void)c.get_int("problem.budget", 0, 100); }).find("problem.budget"), std::string::npos);
  c.set("measurement.cost", "cheap");
  EXPECT_NE(error_of([&] { (void)c.get_double("measurement.cost"); }).find("measurement.cost"), std::string::npos);
  c.set("scheme.bisection", "maybe");
  EXPECT_NE(error_of([&] { (void)c.get_bool("scheme.bisection"); }).find("scheme.bisection"), std::string::npos);
  c.set("problem.budget", "1000");
  EXPECT_NE(error_of([&] { (void)c.get_int("problem.budget", 0, 100); }).find("outside"), std::string::npos);
}

TEST(Config, IntegralScientificNotation) {
  Config c;
  c.set("estimator.mc_samples", "2e4");
  EXPECT_EQ(c.get_int("estimator.mc_samples", 1, 100'000'000), 20'000);
  c.set("estimator.mc_samples", "2.5");
  EXPECT_THROW((void)c.get_int("estimator.mc_samples", 1, 100), ConfigError);
}

TEST(Config, MalformedLines) {
  Config c;
  EXPECT_THROW(c.parse("[problem\n"), ConfigError);
  EXPECT_THROW(c.parse("just words\n"), ConfigError);
}

TEST(Config, InstanceSpecWithKnownItem) {
  Config c;
  c.parse("[problem]\nn=2\nknown_item_index=0\nknown_item_value=1\n");
  const auto spec = sm::cli::instance_spec(c);
  EXPECT_EQ(spec.n, 2u);
  ASSERT_TRUE(spec.known_item.has_value());
  EXPECT_EQ(spec.known_item->index, 0u);
  EXPECT_TRUE(std::holds_alternative<sm::StepUtility>(spec.utility.variant()));
  c.set("problem.known_item_index", "2");
  EXPECT_THROW(sm::cli::instance_spec(c), ConfigError);
}

TEST(Config, ChainWithKnownItemRejected) {
  Config c;
  c.parse("[problem]\nn=3\nknown_item_index=0\ndependency_kind=chain\n");
  EXPECT_THROW(sm::cli::instance_spec(c), ConfigError);
}

TEST(Config, UtilityKinds) {
  Config c;
  c.set("utility.kind", "piecewise_linear");
  c.set("utility.knots", "0:0,1:1,2:1.5");
  const auto u = sm::cli::utility(c);
  ASSERT_TRUE(std::holds_alternative<sm::PiecewiseLinearUtility>(u.variant()));
  c.set("utility.kind", "quadratic");
  EXPECT_NE(error_of([&] { (void)sm::cli::utility(c); }).find("utility.kind"), std::string::npos);
}

TEST(Config, Families) {
  Config c;
  c.set("scheme.family", "myopic,omni-myopic,exhaustive");
  EXPECT_EQ(sm::cli::families(c), (std::vector<sm::ConstraintFamily>{sm::ConstraintFamily::kMyopic,
                                                                      sm::ConstraintFamily::kOmniMyopic,
                                                                      sm::ConstraintFamily::kExhaustive}));
  c.set("scheme.family", "greedy");
  EXPECT_THROW(sm::cli::families(c), ConfigError);
}

TEST(Config, MeasurementValidation) {
  Config c;
  c.set("measurement.noise_variance", "0");
  EXPECT_THROW(sm::cli::measurement_model(c), ConfigError);
  c.set("measurement.noise_variance", "nan");
  EXPECT_THROW(sm::cli::measurement_model(c), ConfigError);
}
