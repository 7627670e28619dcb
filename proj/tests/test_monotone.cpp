#include <memory>

#include <gtest/gtest.h>

#include "nshr/monotone.hpp"
#include "oracles.hpp"

using nshr::Point;

TEST(LinearOperator, RotationResolventMatchesCramer) {
  const auto rot = nshr::make_rotation_operator();
  Eigen::Matrix2d m;
  m << 0.0, -1.0, 1.0, 0.0;
  oracle::Rng rng(21);
  for (int i = 0; i < 50; ++i) {
    const double lambda = rng.log_uniform(1e-3, 1e3);
    const Point x = rng.point(2, -10.0, 10.0);
    EXPECT_LT((rot->resolvent(lambda, x) - oracle::cramer_resolvent(m, lambda, x)).norm(),
              1e-13 * (1.0 + x.norm()));
  }
  EXPECT_EQ(rot->zero()->norm(), 0.0);
}

TEST(LinearOperator, RejectsNonMonotoneMatrix) {
  Eigen::MatrixXd m(2, 2);
  m << -1.0, 0.0, 0.0, 1.0;
  EXPECT_THROW(nshr::LinearMonotoneOperator{m}, std::invalid_argument);
  EXPECT_THROW(nshr::LinearMonotoneOperator{Eigen::MatrixXd(2, 3)}, std::invalid_argument);
}

TEST(LinearOperator, ResolventArgumentChecks) {
  const auto rot = nshr::make_rotation_operator();
  EXPECT_THROW(rot->resolvent(0.0, Point::Zero(2)), std::invalid_argument);
  EXPECT_THROW(rot->resolvent(1.0, Point::Zero(3)), std::invalid_argument);
}

TEST(Yosida, SubdifferentialEqualsEnvelopeGradient) {
  auto f = std::make_shared<const nshr::TestObjective>();
  const nshr::SubdifferentialOperator op(f);
  oracle::Rng rng(22);
  for (int i = 0; i < 100; ++i) {
    const double lambda = rng.log_uniform(1e-3, 1e2);
    const Point x = rng.point(2, -20.0, 20.0);
    EXPECT_LT((nshr::yosida(op, lambda, x) - nshr::moreau_gradient(*f, lambda, x)).norm(), 1e-12);
  }
}

TEST(Yosida, IdentitiesHoldOnRandomDraws) {
  auto f = std::make_shared<const nshr::TestObjective>();
  const nshr::SubdifferentialOperator sub(f);
  const auto rot = nshr::make_rotation_operator();
  oracle::Rng rng(23);
  for (const nshr::MonotoneOperator* op : {static_cast<const nshr::MonotoneOperator*>(&sub),
                                           static_cast<const nshr::MonotoneOperator*>(rot.get())}) {
    for (int i = 0; i < 100; ++i) {
      const double a = rng.log_uniform(1e-2, 1e2), b = rng.log_uniform(1e-2, 1e2);
      const Point x = rng.point(2, -10.0, 10.0);
      EXPECT_LE(nshr::resolvent_identity_residual(*op, a, b, x), 1e-10);
      EXPECT_GE(nshr::yosida_perturbation_margin(*op, a, b, x), -1e-10);
      EXPECT_GE(nshr::yosida_basic_bound_margin(*op, a, x), -1e-10);
    }
  }
}

TEST(Yosida, CocoerciveAndLipschitz) {
  const auto rot = nshr::make_rotation_operator();
  oracle::Rng rng(24);
  for (int i = 0; i < 200; ++i) {
    const double lambda = rng.log_uniform(1e-2, 1e2);
    const Point x = rng.point(2, -5.0, 5.0), y = rng.point(2, -5.0, 5.0);
    const Point d = nshr::yosida(*rot, lambda, x) - nshr::yosida(*rot, lambda, y);
    EXPECT_GE(d.dot(x - y), lambda * d.squaredNorm() - 1e-10);
    EXPECT_LE(d.norm(), (x - y).norm() / lambda + 1e-10);
  }
}

TEST(Yosida, BasicBoundNeedsKnownZero) {
  struct NoZero : nshr::MonotoneOperator {
    Eigen::Index dimension() const override { return 1; }
    Point resolvent(double, const Point& x) const override { return x; }
  } op;
  EXPECT_THROW(nshr::yosida_basic_bound_margin(op, 1.0, Point::Zero(1)), std::invalid_argument);
}

TEST(Majorant, HandValues) {
  // a = c = -1, b = 1: Delta = -3, m = 0.375, n = 0.6.
  const auto mj = nshr::majorant_coefficients(-1.0, 1.0, -1.0);
  EXPECT_DOUBLE_EQ(mj.m, 0.375);
  EXPECT_DOUBLE_EQ(mj.n, 0.6);
  EXPECT_THROW(nshr::majorant_coefficients(1.0, 0.0, -1.0), std::invalid_argument);
  EXPECT_THROW(nshr::majorant_coefficients(-1.0, 3.0, -1.0), std::invalid_argument);
  EXPECT_THROW(nshr::majorant_coefficients(-1.0, 0.0, -1.0, 1.0), std::invalid_argument);
}

TEST(Majorant, BoundsQuadraticForm) {
  oracle::Rng rng(25);
  for (int i = 0; i < 50; ++i) {
    const double a = -rng.log_uniform(1e-2, 1e2), c = -rng.log_uniform(1e-2, 1e2);
    const double bmax = 2.0 * std::sqrt(a * c);
    const double b = rng.uniform(-0.99, 0.99) * bmax;
    const auto mj = nshr::majorant_coefficients(a, b, c, rng.uniform(0.05, 0.95));
    EXPECT_GT(mj.m, 0.0);
    EXPECT_GT(mj.n, 0.0);
    for (int j = 0; j < 20; ++j) {
      const Point x = rng.point(3, -3.0, 3.0), y = rng.point(3, -3.0, 3.0);
      const double p = a * x.squaredNorm() + b * x.dot(y) + c * y.squaredNorm();
      const double bound = -mj.m * x.squaredNorm() - mj.n * y.squaredNorm();
      EXPECT_LE(p, bound + 1e-9 * (std::abs(a) + std::abs(c)) * (1.0 + x.squaredNorm() + y.squaredNorm()));
    }
  }
}
