#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "nshr/proxcore.hpp"
#include "oracles.hpp"

using nshr::Point;

TEST(SoftThreshold, ShrinksTowardZero) {
  EXPECT_DOUBLE_EQ(nshr::soft_threshold(3.0, 1.0), 2.0);
  EXPECT_DOUBLE_EQ(nshr::soft_threshold(-3.0, 1.0), -2.0);
  EXPECT_DOUBLE_EQ(nshr::soft_threshold(0.5, 1.0), 0.0);
  EXPECT_DOUBLE_EQ(nshr::soft_threshold(-1.0, 1.0), 0.0);
  EXPECT_DOUBLE_EQ(nshr::soft_threshold(4.0, 0.0), 4.0);
  EXPECT_THROW(nshr::soft_threshold(1.0, -1e-3), std::invalid_argument);
}

TEST(TestObjective, ValueAndMinimizer) {
  const nshr::TestObjective f;
  Point x(2);
  x << 2.0, -1.0;
  EXPECT_DOUBLE_EQ(f.value(x), 0.5 * (4.0 + 1000.0) + 3.0);
  EXPECT_EQ(f.value(Point::Zero(2)), 0.0);
  ASSERT_TRUE(f.optimal_value().has_value());
  EXPECT_EQ(*f.optimal_value(), 0.0);
  EXPECT_EQ(f.minimizer()->norm(), 0.0);
  EXPECT_THROW(f.value(Point::Zero(3)), std::invalid_argument);
}

TEST(TestObjective, ClosedFormProxAtHandPoint) {
  // gamma = 1: coordinate 1 is soft(3/2, 1/2) = 1, coordinate 2 is soft(0.5/1001, 1/1001) = 0.
  Point x(2);
  x << 3.0, 0.5;
  const Point p = nshr::prox_test_objective(1.0, x);
  EXPECT_DOUBLE_EQ(p[0], 1.0);
  EXPECT_DOUBLE_EQ(p[1], 0.0);
  EXPECT_THROW(nshr::prox_test_objective(0.0, x), std::invalid_argument);
  EXPECT_THROW(nshr::prox_test_objective(1.0, Point::Zero(3)), std::invalid_argument);
}

TEST(TestObjective, ProxMatchesGoldenSectionOracle) {
  oracle::Rng rng(11);
  const nshr::TestObjective f;
  for (int i = 0; i < 100; ++i) {
    const double gamma = rng.log_uniform(1e-4, 1e2);
    const Point x = rng.point(2, -50.0, 50.0);
    const Point p = f.prox(gamma, x);
    EXPECT_NEAR(p[0], oracle::golden_prox_quadratic_l1(1.0, 1.0, gamma, x[0]), 1e-8);
    EXPECT_NEAR(p[1], oracle::golden_prox_quadratic_l1(1000.0, 1.0, gamma, x[1]), 1e-8);
  }
}

TEST(Prox, FirmlyNonexpansive) {
  oracle::Rng rng(12);
  const nshr::TestObjective f;
  for (int i = 0; i < 200; ++i) {
    const double gamma = rng.log_uniform(1e-3, 10.0);
    const Point x = rng.point(2, -5.0, 5.0), y = rng.point(2, -5.0, 5.0);
    const Point px = f.prox(gamma, x), py = f.prox(gamma, y);
    EXPECT_LE((px - py).squaredNorm(), (px - py).dot(x - y) + 1e-12);
  }
}

TEST(Moreau, QuadraticEnvelopeClosedForm) {
  auto f = nshr::make_quadratic_objective(3, 2.5);
  oracle::Rng rng(13);
  for (int i = 0; i < 50; ++i) {
    const double gamma = rng.log_uniform(1e-3, 1e2);
    const Point x = rng.point(3, -4.0, 4.0);
    const auto m = nshr::moreau(*f, gamma, x);
    EXPECT_NEAR(m.value, oracle::quadratic_envelope(2.5, gamma, x), 1e-12 * (1.0 + m.value));
    EXPECT_LT((m.gradient - 2.5 / (1.0 + 2.5 * gamma) * x).norm(), 1e-12 * (1.0 + x.norm()));
  }
}

TEST(Moreau, GradientMatchesFiniteDifferenceOfValue) {
  const nshr::TestObjective f;
  oracle::Rng rng(14);
  for (int i = 0; i < 50; ++i) {
    const double gamma = rng.log_uniform(1e-2, 1.0);
    Point x = rng.point(2, -10.0, 10.0);
    const Point g = nshr::moreau_gradient(f, gamma, x);
    for (int j = 0; j < 2; ++j) {
      auto along = [&](double s) {
        Point y = x;
        y[j] = s;
        return nshr::moreau_value(f, gamma, y);
      };
      const double fd = oracle::central_difference(along, x[j], 1e-6);
      EXPECT_NEAR(g[j], fd, 1e-5 * (1.0 + std::abs(g[j])));
    }
  }
}

TEST(Moreau, EnvelopeBelowObjectiveAndAboveMinimum) {
  const nshr::TestObjective f;
  oracle::Rng rng(15);
  for (int i = 0; i < 100; ++i) {
    const double gamma = rng.log_uniform(1e-3, 1e2);
    const Point x = rng.point(2, -10.0, 10.0);
    const double env = nshr::moreau_value(f, gamma, x);
    EXPECT_LE(env, f.value(x) + 1e-9);
    EXPECT_GE(env, 0.0);
  }
}

TEST(BruteForceProx, RejectsBadInput) {
  auto abs_fn = [](double y) { return std::abs(y); };
  EXPECT_THROW(nshr::brute_force_prox_1d<double>(abs_fn, 1.0, 0.0, {1.0, 1.0}), std::invalid_argument);
  EXPECT_THROW(nshr::brute_force_prox_1d<double>(abs_fn, 0.0, 0.0, {-1.0, 1.0}), std::invalid_argument);
  auto bad = [](double) { return std::numeric_limits<double>::infinity(); };
  EXPECT_THROW(nshr::brute_force_prox_1d<double>(bad, 1.0, 0.0, {-1.0, 1.0}), nshr::NumericalError);
}

TEST(BruteForceProx, AutomaticBracketFindsFarMinimizer) {
  // prox of |.| at x = 40 with gamma = 1 is 39, outside [x - 1, x + 1] only if mis-bracketed.
  auto abs_fn = [](double y) { return std::abs(y); };
  EXPECT_NEAR(nshr::brute_force_prox_1d<double>(abs_fn, 1.0, 40.0), 39.0, 1e-6);
  // Indicator-like steep wall: minimizer far from x.
  auto steep = [](double y) { return 50.0 * std::abs(y); };
  EXPECT_NEAR(nshr::brute_force_prox_1d<double>(steep, 1.0, 3.0), 0.0, 1e-6);
}

TEST(SeparableObjective, RequiresPieces) {
  EXPECT_THROW(nshr::SeparableObjective({}), std::invalid_argument);
  EXPECT_THROW(nshr::quadratic_l1_piece(-1.0, 0.0), std::invalid_argument);
  EXPECT_THROW(nshr::TestObjective(1.0, 0.0, 1.0), std::invalid_argument);
}
