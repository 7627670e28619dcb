#include <cmath>
#include <memory>

#include <gtest/gtest.h>

#include "nshr/dynamics.hpp"
#include "oracles.hpp"

using nshr::DynamicKind;
using nshr::DynamicSpec;
using nshr::Point;
using nshr::Reformulation;

namespace {

Point vec2(double a, double b) {
  Point p(2);
  p << a, b;
  return p;
}

DynamicSpec reference_spec(double beta = 1.0) {
  DynamicSpec spec;
  spec.kind = DynamicKind::NSHR;
  spec.alpha = 4.0;
  spec.beta = beta;
  spec.schedule = std::make_shared<nshr::PolynomialSchedule>(0.5, 0.01);
  spec.driver = std::shared_ptr<const nshr::ProxObjective>(std::make_shared<nshr::TestObjective>());
  return spec;
}

}  // namespace

TEST(DynamicKind, NamesRoundTrip) {
  for (auto kind : {DynamicKind::NSHR, DynamicKind::HRMMD, DynamicKind::BaselineDelta,
                    DynamicKind::BaselineUnit, DynamicKind::AttouchLaszlo,
                    DynamicKind::BotKarapetyants}) {
    EXPECT_EQ(nshr::parse_dynamic_kind(nshr::to_string(kind)), kind);
  }
  EXPECT_THROW(nshr::parse_dynamic_kind("heavy-ball"), std::invalid_argument);
}

TEST(Coefficients, PerKind) {
  DynamicSpec spec = reference_spec(2.0);
  const double t = 4.0;
  const double delta = 2.0, gamma = 0.01 * 32.0;
  auto k = nshr::coefficients(spec, t);
  EXPECT_DOUBLE_EQ(k.smoothing, gamma);
  EXPECT_DOUBLE_EQ(k.inner, 2.0 * delta);
  EXPECT_DOUBLE_EQ(k.outer, 1.5 * delta);

  spec.kind = DynamicKind::BaselineDelta;
  k = nshr::coefficients(spec, t);
  EXPECT_EQ(k.inner, 0.0);
  EXPECT_DOUBLE_EQ(k.outer, delta);

  spec.kind = DynamicKind::BaselineUnit;
  EXPECT_EQ(nshr::coefficients(spec, t).outer, 1.0);

  spec.kind = DynamicKind::AttouchLaszlo;
  k = nshr::coefficients(spec, t);
  EXPECT_DOUBLE_EQ(k.inner, 2.0);
  EXPECT_EQ(k.outer, 1.0);

  spec.kind = DynamicKind::BotKarapetyants;
  spec.beta_schedule = nshr::PowerLaw{3.0, 0.0};
  k = nshr::coefficients(spec, t);
  EXPECT_DOUBLE_EQ(k.inner, 3.0);
  EXPECT_DOUBLE_EQ(k.outer, delta);
}

TEST(Reformulation, CompatibilityRecoversInitialVelocity) {
  const DynamicSpec spec = reference_spec();
  oracle::Rng rng(41);
  for (int i = 0; i < 50; ++i) {
    const Point x0 = rng.point(2, -20.0, 20.0), v0 = rng.point(2, -5.0, 5.0);
    for (auto form : {Reformulation::Paper, Reformulation::Shift}) {
      const auto z0 = nshr::initial_state(spec, form, x0, v0);
      const Point v = nshr::recover_velocity(spec, form, spec.t0, z0);
      EXPECT_LT((v - v0).norm(), 1e-12 * (1.0 + x0.norm() + v0.norm()));
    }
  }
}

TEST(Reformulation, MinimizerAtRestIsEquilibrium) {
  for (auto form : {Reformulation::Paper, Reformulation::Shift}) {
    const auto traj = nshr::simulate(reference_spec(), form, Point::Zero(2), Point::Zero(2), 20.0);
    for (const auto& z : traj.states) EXPECT_EQ(z.norm(), 0.0);
  }
}

TEST(Reformulation, PaperAndShiftAgree) {
  const DynamicSpec spec = reference_spec();
  const std::vector<double> grid{1.5, 2.0, 3.0, 5.0};
  nshr::IntegratorConfig cfg;
  cfg.rel_tol = 1e-11;
  cfg.abs_tol = 1e-13;
  const Point x0 = vec2(20.0, -15.0), v0 = Point::Zero(2);
  const auto a = nshr::simulate(spec, Reformulation::Paper, x0, v0, 5.0, cfg, grid);
  const auto b = nshr::simulate(spec, Reformulation::Shift, x0, v0, 5.0, cfg, grid);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_LT((nshr::position(spec, a.states[k]) - nshr::position(spec, b.states[k])).norm(), 1e-6)
        << a.times[k];
  }
}

TEST(Baseline, HyperbolicClosedForm) {
  // f = x^2/2, gamma = t^2, delta = 2 (1 + t^2) / t^2, alpha = 4: x(t) = 1/t.
  DynamicSpec spec;
  spec.kind = DynamicKind::BaselineDelta;
  spec.alpha = 4.0;
  spec.beta = 0.0;
  spec.schedule = std::make_shared<nshr::FunctionSchedule>(
      [](double t) { return 2.0 + 2.0 / (t * t); }, [](double t) { return -4.0 / (t * t * t); },
      [](double t) { return t * t; }, [](double t) { return 2.0 * t; }, 1.0);
  spec.driver = std::shared_ptr<const nshr::ProxObjective>(nshr::make_quadratic_objective(1));
  const std::vector<double> grid{2.0, 5.0, 10.0, 20.0};
  const auto traj = nshr::simulate(spec, Reformulation::Shift, Point::Constant(1, 1.0),
                                   Point::Constant(1, -1.0), 20.0, {}, grid);
  for (std::size_t k = 0; k < traj.size(); ++k) {
    EXPECT_NEAR(traj.states[k][0], 1.0 / traj.times[k], 1e-7);
    EXPECT_NEAR(traj.velocities[k][0], -1.0 / (traj.times[k] * traj.times[k]), 1e-7);
  }
}

TEST(Spec, ValidationRejectsInconsistentModels) {
  DynamicSpec spec = reference_spec();
  spec.kind = DynamicKind::BaselineDelta;
  EXPECT_THROW(spec.validate(), std::invalid_argument);
  spec.beta = 0.0;
  EXPECT_NO_THROW(spec.validate());

  DynamicSpec neg = reference_spec(-1.0);
  EXPECT_THROW(neg.validate(), std::invalid_argument);

  DynamicSpec op = reference_spec();
  op.kind = DynamicKind::HRMMD;
  EXPECT_THROW(op.validate(), std::invalid_argument);
  op.driver = std::shared_ptr<const nshr::MonotoneOperator>(nshr::make_rotation_operator());
  EXPECT_NO_THROW(op.validate());

  DynamicSpec early = reference_spec();
  early.t0 = 0.5;
  EXPECT_THROW(early.validate(), std::invalid_argument);

  DynamicSpec varying = reference_spec();
  varying.kind = DynamicKind::BotKarapetyants;
  varying.beta_schedule = nshr::PowerLaw{1.0, 0.5};
  EXPECT_THROW(varying.validate(), std::invalid_argument);

  DynamicSpec nodriver = reference_spec();
  nodriver.driver = std::shared_ptr<const nshr::ProxObjective>();
  EXPECT_THROW(nodriver.validate(), std::invalid_argument);
}

TEST(Spec, PaperFormNeedsPositiveBeta) {
  const DynamicSpec spec = reference_spec(0.0);
  EXPECT_THROW(nshr::initial_state(spec, Reformulation::Paper, Point::Zero(2), Point::Zero(2)),
               std::invalid_argument);
  EXPECT_NO_THROW(nshr::initial_state(spec, Reformulation::Shift, Point::Zero(2), Point::Zero(2)));
  EXPECT_THROW(nshr::shift_vector_field(spec, 0.5, nshr::State::Zero(4)), std::invalid_argument);
}

TEST(FieldBounds, LipschitzBoundHoldsOnRandomPairs) {
  const DynamicSpec spec = reference_spec();
  oracle::Rng rng(42);
  for (int i = 0; i < 100; ++i) {
    const double t = rng.uniform(1.0, 50.0);
    const auto bounds = nshr::paper_field_bounds(spec, t);
    const nshr::State u = rng.point(4, -10.0, 10.0), w = rng.point(4, -10.0, 10.0);
    const double lhs =
        (nshr::paper_vector_field(spec, t, u) - nshr::paper_vector_field(spec, t, w)).norm();
    EXPECT_LE(lhs, bounds.lipschitz * (u - w).norm() * (1.0 + 1e-12));
    EXPECT_LE(nshr::paper_vector_field(spec, t, u).norm(), bounds.growth * (1.0 + u.norm()));
  }
}

TEST(Residual, SimulatedTrajectorySatisfiesSecondOrderEquation) {
  const DynamicSpec spec = reference_spec();
  std::vector<double> grid;
  for (int k = 0; k <= 400; ++k) grid.push_back(1.0 + 0.01 * k);
  nshr::IntegratorConfig cfg;
  cfg.rel_tol = 1e-11;
  cfg.abs_tol = 1e-12;
  const auto traj =
      nshr::simulate(spec, Reformulation::Shift, vec2(2.0, -1.0), Point::Zero(2), 5.0, cfg, grid);
  for (std::size_t k = 100; k + 1 < traj.size(); k += 50) {
    const double scale = nshr::coefficients(spec, traj.times[k]).outer *
                         nshr::driving_map(spec, nshr::coefficients(spec, traj.times[k]).smoothing,
                                           nshr::position(spec, traj.states[k]))
                             .norm();
    EXPECT_LT(nshr::second_order_residual(spec, traj, k), 1e-2 * (1.0 + scale)) << traj.times[k];
  }
}
