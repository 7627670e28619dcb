#include <cmath>
#include <memory>

#include <gtest/gtest.h>

#include "nshr/schedules.hpp"
#include "oracles.hpp"

using nshr::PolynomialSchedule;

namespace {

void expect_values(const nshr::ParameterSchedule& s, double t, double d, double dd, double g,
                   double gd) {
  const auto v = nshr::schedule_eval(s, t);
  EXPECT_NEAR(v.delta, d, 1e-14);
  EXPECT_NEAR(v.delta_dot, dd, 1e-14);
  EXPECT_NEAR(v.gamma, g, 1e-14);
  EXPECT_NEAR(v.gamma_dot, gd, 1e-14);
}

/// Same law as PolynomialSchedule but opaque to the analytic path.
std::shared_ptr<nshr::FunctionSchedule> opaque_polynomial(double p, double c) {
  return std::make_shared<nshr::FunctionSchedule>(
      [p](double t) { return std::pow(t, p); },
      [p](double t) { return p == 0.0 ? 0.0 : p * std::pow(t, p - 1.0); },
      [p, c](double t) { return c * std::pow(t, p + 2.0); },
      [p, c](double t) { return c * (p + 2.0) * std::pow(t, p + 1.0); }, 1.0);
}

}  // namespace

TEST(Schedule, PowerRuleValues) {
  expect_values(PolynomialSchedule(0.5, 0.01), 1.0, 1.0, 0.5, 0.01, 0.025);
  expect_values(PolynomialSchedule(0.0, 1.0), 4.0, 1.0, 0.0, 16.0, 8.0);
  expect_values(PolynomialSchedule(1.0, 1.0), 2.0, 2.0, 1.0, 8.0, 12.0);
}

TEST(Schedule, DerivativesMatchCentralDifferences) {
  oracle::Rng rng(31);
  for (int i = 0; i < 50; ++i) {
    const PolynomialSchedule s(rng.uniform(0.0, 3.0), rng.log_uniform(1e-3, 10.0));
    const double t = rng.uniform(1.5, 40.0);
    const double h = 1e-5 * t;
    const double dd = oracle::central_difference([&](double u) { return s.delta(u); }, t, h);
    const double gd = oracle::central_difference([&](double u) { return s.gamma(u); }, t, h);
    EXPECT_NEAR(s.delta_dot(t), dd, 1e-6 * std::max(1.0, std::abs(dd)));
    EXPECT_NEAR(s.gamma_dot(t), gd, 1e-6 * std::abs(gd));
  }
}

TEST(Schedule, DomainAndPositivity) {
  const PolynomialSchedule s(0.5, 0.01);
  EXPECT_THROW(nshr::schedule_eval(s, 0.5), std::invalid_argument);
  const nshr::FunctionSchedule bad([](double) { return -1.0; }, [](double) { return 0.0; },
                                   [](double) { return 1.0; }, [](double) { return 0.0; }, 1.0);
  EXPECT_THROW(nshr::schedule_eval(bad, 2.0), std::domain_error);
  EXPECT_THROW(PolynomialSchedule(-0.1, 1.0), std::invalid_argument);
  EXPECT_THROW(PolynomialSchedule(0.5, 0.0), std::invalid_argument);
}

TEST(AssumptionB, ReferenceRegimeSatisfied) {
  const auto r = nshr::validate_assumption_B(PolynomialSchedule(0.5, 0.01), 4.0);
  EXPECT_TRUE(r.satisfied);
  EXPECT_EQ(r.method, "analytic");
  ASSERT_TRUE(r.zeta.has_value());
  EXPECT_DOUBLE_EQ(*r.zeta, 0.5);
  EXPECT_EQ(r.conditions.size(), 4u);
}

TEST(AssumptionB, ExponentAtOrAboveBoundViolates) {
  const auto r = nshr::validate_assumption_B(PolynomialSchedule(1.5, 1.0), 4.0);
  EXPECT_FALSE(r.satisfied);
  EXPECT_FALSE(r.conditions.back().holds);
  EXPECT_FALSE(nshr::validate_assumption_B(PolynomialSchedule(1.0, 1.0), 4.0).satisfied);
}

TEST(AssumptionB, ConstantDelta) {
  const auto r = nshr::validate_assumption_B(PolynomialSchedule(0.0, 1.0), 3.5);
  EXPECT_TRUE(r.satisfied);
  EXPECT_LE(*r.zeta, 0.5);
  EXPECT_THROW(nshr::validate_assumption_B(PolynomialSchedule(0.0, 1.0), 3.0), std::invalid_argument);
}

TEST(AssumptionD, ThresholdInstances) {
  const double threshold = 1.0 / (4.0 * 1.5 * 1.5);
  const auto ok = nshr::validate_assumption_D(PolynomialSchedule(1.0, 2.0 * threshold), 4.0, 1.5);
  EXPECT_TRUE(ok.satisfied);
  EXPECT_NEAR(*ok.threshold, 1.0 / 9.0, 1e-15);

  const auto small_c = nshr::validate_assumption_D(PolynomialSchedule(0.5, 0.01), 4.0, 1.5);
  EXPECT_FALSE(small_c.satisfied);
  EXPECT_FALSE(small_c.conditions.front().holds);

  EXPECT_FALSE(nshr::validate_assumption_D(PolynomialSchedule(0.0, 1.0), 4.0, 1.5).satisfied);
  EXPECT_THROW(nshr::validate_assumption_D(PolynomialSchedule(1.0, 1.0), 4.0, 3.0),
               std::invalid_argument);
  EXPECT_THROW(nshr::validate_assumption_D(PolynomialSchedule(1.0, 1.0), 4.0, 0.0),
               std::invalid_argument);
}

TEST(Assumptions, IncomparableInstances) {
  const PolynomialSchedule opt_only(0.5, 0.01);
  EXPECT_TRUE(nshr::validate_assumption_B(opt_only, 4.0).satisfied);
  EXPECT_FALSE(nshr::validate_assumption_D(opt_only, 4.0, 1.5).satisfied);

  const PolynomialSchedule mono_only(2.0, 1.0);
  EXPECT_FALSE(nshr::validate_assumption_B(mono_only, 4.0).satisfied);
  EXPECT_TRUE(nshr::validate_assumption_D(mono_only, 4.0, 1.5).satisfied);
}

TEST(Assumptions, PolynomialRegimesProperty) {
  oracle::Rng rng(32);
  for (int i = 0; i < 200; ++i) {
    const double alpha = rng.uniform(3.2, 10.0);
    const double p = rng.uniform(0.0, alpha - 3.0) * 0.999;
    EXPECT_TRUE(nshr::validate_assumption_B(PolynomialSchedule(p, rng.log_uniform(1e-6, 1e3)), alpha)
                    .satisfied);
    const double sigma = rng.uniform(0.05, 0.95) * (alpha - 1.0);
    const double threshold = 1.0 / (4.0 * (alpha - sigma - 1.0) * sigma);
    const PolynomialSchedule d(rng.uniform(0.01, 5.0), threshold * rng.uniform(1.01, 10.0));
    EXPECT_TRUE(nshr::validate_assumption_D(d, alpha, sigma).satisfied);
  }
}

TEST(Assumptions, GridMethodAgreesWithAnalytic) {
  struct Case {
    double p, c, alpha, sigma;
  };
  for (const Case k : {Case{0.5, 0.01, 4.0, 1.5}, Case{1.5, 1.0, 4.0, 1.5}, Case{2.0, 1.0, 4.0, 1.5},
                       Case{1.0, 2.0 / 9.0, 4.0, 1.5}, Case{0.25, 0.5, 5.0, 2.0}}) {
    const auto opaque = opaque_polynomial(k.p, k.c);
    const PolynomialSchedule exact(k.p, k.c);
    const auto gb = nshr::validate_assumption_B(*opaque, k.alpha);
    const auto gd = nshr::validate_assumption_D(*opaque, k.alpha, k.sigma);
    EXPECT_EQ(gb.method, "grid");
    EXPECT_EQ(gb.satisfied, nshr::validate_assumption_B(exact, k.alpha).satisfied) << k.p << " " << k.c;
    EXPECT_EQ(gd.satisfied, nshr::validate_assumption_D(exact, k.alpha, k.sigma).satisfied)
        << k.p << " " << k.c;
  }
}

TEST(Assumptions, GridDetectsDecayingRatio) {
  // gamma / (t^2 delta) = 1 / t decays to 0: D(i) cannot hold for any threshold.
  const nshr::FunctionSchedule s([](double t) { return t; }, [](double) { return 1.0; },
                                 [](double t) { return t * t; }, [](double t) { return 2.0 * t; }, 1.0);
  EXPECT_FALSE(nshr::validate_assumption_D(s, 4.0, 1.5).conditions.front().holds);
}
