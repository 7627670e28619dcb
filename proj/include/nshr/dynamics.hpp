#pragma once

// Inertial dynamics with Hessian-driven damping and time-rescaled smoothed
// gradients, their low-resolution baselines, and two reference Newton-like
// dynamics.
//
// Every model has the second-order form
//
//   x'' + (alpha/t) x' + d/dt[ c(t) g(t, x) ] + e(t) g(t, x) = 0,
//
// where g(t, .) is the Moreau-envelope gradient (or Yosida approximation) at
// the model's smoothing parameter. Two first-order systems are provided:
//
//  * Reformulation::Paper, the (x, y) system with
//      x' = -beta delta g - ((alpha-1)/t - 1/beta) x - y/beta,
//      y' = (1/beta - (alpha-2)/t) x - (1/t + 1/beta) y,
//    valid for the high-resolution models with beta > 0;
//  * Reformulation::Shift, the generic velocity shift v = x' + c(t) g(t, x):
//      x' = v - c g,   v' = -(alpha/t)(v - c g) - e g,
//    valid for every model, including beta = 0.
//
// Neither form ever evaluates d/dt[c g]; no Hessian is needed.

#include <cmath>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "nshr/integrate.hpp"
#include "nshr/monotone.hpp"
#include "nshr/point.hpp"
#include "nshr/proxcore.hpp"
#include "nshr/schedules.hpp"

namespace nshr {

enum class DynamicKind {
  NSHR,             ///< high-resolution dynamic driven by grad f_{gamma(t)}
  HRMMD,            ///< same dynamic driven by the Yosida approximation A_{gamma(t)}
  BaselineDelta,    ///< beta = 0: x'' + (alpha/t) x' + delta grad f_gamma = 0
  BaselineUnit,     ///< beta = 0, delta = 1
  AttouchLaszlo,    ///< x'' + (alpha/t) x' + beta d/dt grad f_lambda + grad f_lambda = 0
  BotKarapetyants,  ///< x'' + (alpha/t) x' + beta d/dt grad f_lambda + b grad f_lambda = 0
};

enum class Reformulation { Paper, Shift };

inline std::string to_string(DynamicKind kind) {
  switch (kind) {
    case DynamicKind::NSHR: return "nshr";
    case DynamicKind::HRMMD: return "hrmmd";
    case DynamicKind::BaselineDelta: return "baseline-delta";
    case DynamicKind::BaselineUnit: return "baseline-unit";
    case DynamicKind::AttouchLaszlo: return "al";
    case DynamicKind::BotKarapetyants: return "bk";
  }
  return "unknown";
}

inline DynamicKind parse_dynamic_kind(const std::string& name) {
  for (auto kind : {DynamicKind::NSHR, DynamicKind::HRMMD, DynamicKind::BaselineDelta,
                    DynamicKind::BaselineUnit, DynamicKind::AttouchLaszlo,
                    DynamicKind::BotKarapetyants}) {
    if (to_string(kind) == name) return kind;
  }
  throw std::invalid_argument("unknown dynamic kind: " + name);
}

using Driver =
    std::variant<std::shared_ptr<const ProxObjective>, std::shared_ptr<const MonotoneOperator>>;

/// A fully parameterized continuous model.
///
/// Schedule slots by kind: NSHR/HRMMD/baselines use (delta, gamma) directly;
/// AttouchLaszlo reads lambda(t) from gamma and ignores delta;
/// BotKarapetyants reads b(t) from delta and lambda(t) from gamma.
struct DynamicSpec {
  DynamicKind kind = DynamicKind::NSHR;
  double alpha = 4.0;
  double beta = 1.0;
  std::shared_ptr<const ParameterSchedule> schedule;
  Driver driver;
  double t0 = 1.0;
  /// Optional beta(t) for BotKarapetyants. Only constant laws are supported.
  std::optional<PowerLaw> beta_schedule;

  Eigen::Index dimension() const {
    return std::visit([](const auto& d) { return d ? d->dimension() : Eigen::Index{0}; }, driver);
  }

  bool uses_operator() const {
    return std::holds_alternative<std::shared_ptr<const MonotoneOperator>>(driver);
  }

  const ProxObjective* objective() const {
    if (const auto* obj = std::get_if<std::shared_ptr<const ProxObjective>>(&driver)) return obj->get();
    if (const auto* op = std::get_if<std::shared_ptr<const MonotoneOperator>>(&driver)) {
      if (const auto* sub = dynamic_cast<const SubdifferentialOperator*>(op->get())) {
        return &sub->objective();
      }
    }
    return nullptr;
  }

  /// Known minimizer / zero of the driver, if any.
  std::optional<Point> reference_point() const {
    return std::visit(
        [](const auto& d) -> std::optional<Point> {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, std::shared_ptr<const ProxObjective>>) {
            return d->minimizer();
          } else {
            return d->zero();
          }
        },
        driver);
  }

  void validate() const {
    require(schedule != nullptr, "DynamicSpec: schedule is required");
    require(alpha > 0.0, "DynamicSpec: alpha must be positive");
    require(t0 > 0.0, "DynamicSpec: t0 must be positive");
    require(t0 >= schedule->t0(), "DynamicSpec: t0 precedes the schedule domain");
    require(dimension() >= 1, "DynamicSpec: driver is required");
    switch (kind) {
      case DynamicKind::HRMMD:
        require(uses_operator(), "DynamicSpec: HRMMD requires a monotone operator driver");
        break;
      default:
        require(!uses_operator(), "DynamicSpec: " + to_string(kind) + " requires an objective driver");
    }
    if (kind == DynamicKind::BaselineDelta || kind == DynamicKind::BaselineUnit) {
      require(beta == 0.0, "DynamicSpec: baseline dynamics have beta = 0");
    } else {
      require(beta >= 0.0, "DynamicSpec: beta must be nonnegative");
    }
    if (beta_schedule) {
      require(kind == DynamicKind::BotKarapetyants,
              "DynamicSpec: beta(t) is only meaningful for BotKarapetyants");
      if (beta_schedule->exponent != 0.0) {
        throw std::invalid_argument(
            "DynamicSpec: time-varying beta(t) inside the derivative term is unsupported");
      }
    }
  }

  double effective_beta() const { return beta_schedule ? beta_schedule->scale : beta; }
};

/// Coefficients of the generic second-order form at time t.
struct FieldCoefficients {
  double smoothing;  ///< parameter of the envelope / Yosida approximation
  double inner;      ///< c(t), inside the time derivative
  double outer;      ///< e(t), in front of g
};

inline FieldCoefficients coefficients(const DynamicSpec& spec, double t) {
  const ScheduleValues s = schedule_eval(*spec.schedule, t);
  const double beta = spec.effective_beta();
  switch (spec.kind) {
    case DynamicKind::NSHR:
    case DynamicKind::HRMMD:
      return {s.gamma, beta * s.delta, (1.0 + beta / t) * s.delta};
    case DynamicKind::BaselineDelta: return {s.gamma, 0.0, s.delta};
    case DynamicKind::BaselineUnit: return {s.gamma, 0.0, 1.0};
    case DynamicKind::AttouchLaszlo: return {s.gamma, beta, 1.0};
    case DynamicKind::BotKarapetyants: return {s.gamma, beta, s.delta};
  }
  throw std::logic_error("coefficients: unhandled kind");
}

/// grad f_lambda(x) or A_lambda(x) depending on the driver.
inline Point driving_map(const DynamicSpec& spec, double lambda, const Point& x) {
  return std::visit(
      [&](const auto& d) -> Point {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, std::shared_ptr<const ProxObjective>>) {
          return moreau_gradient(*d, lambda, x);
        } else {
          return yosida(*d, lambda, x);
        }
      },
      spec.driver);
}

namespace detail {

inline void check_time(const DynamicSpec& spec, double t) {
  if (!(t >= spec.t0)) {
    std::ostringstream msg;
    msg << "vector field evaluated at t = " << t << " before t0 = " << spec.t0;
    throw std::invalid_argument(msg.str());
  }
}

inline void require_paper_form(const DynamicSpec& spec) {
  require(spec.kind == DynamicKind::NSHR || spec.kind == DynamicKind::HRMMD,
          "paper reformulation applies to the high-resolution dynamics only");
  require(spec.beta > 0.0, "paper reformulation requires beta > 0 (use the shift form)");
}

}  // namespace detail

/// y0 such that (x0, y0) reproduces x'(t0) = v0 in the (x, y) system.
inline Point compatibility_y0(const Point& x0, const Point& v0, double t0, double alpha, double beta,
                              const ParameterSchedule& schedule, const ProxObjective& objective) {
  require(beta != 0.0, "compatibility_y0: beta = 0 has no (x, y) form; use the shift form");
  const ScheduleValues s = schedule_eval(schedule, t0);
  const Point g = moreau_gradient(objective, s.gamma, x0);
  return -beta * (v0 + beta * s.delta * g + ((alpha - 1.0) / t0 - 1.0 / beta) * x0);
}

/// Same condition for any high-resolution spec (objective or operator driver).
inline Point compatibility_y0(const DynamicSpec& spec, const Point& x0, const Point& v0) {
  detail::require_paper_form(spec);
  const double t0 = spec.t0;
  const ScheduleValues s = schedule_eval(*spec.schedule, t0);
  const Point g = driving_map(spec, s.gamma, x0);
  const double beta = spec.beta;
  return -beta * (v0 + beta * s.delta * g + ((spec.alpha - 1.0) / t0 - 1.0 / beta) * x0);
}

inline State paper_vector_field(const DynamicSpec& spec, double t, const State& z) {
  detail::require_paper_form(spec);
  detail::check_time(spec, t);
  const Eigen::Index n = spec.dimension();
  const auto x = z.head(n);
  const auto y = z.tail(n);
  const ScheduleValues s = schedule_eval(*spec.schedule, t);
  const double alpha = spec.alpha;
  const double beta = spec.beta;
  const Point g = driving_map(spec, s.gamma, x);
  State dz(2 * n);
  dz.head(n) = -beta * s.delta * g - ((alpha - 1.0) / t - 1.0 / beta) * x - y / beta;
  dz.tail(n) = (1.0 / beta - (alpha - 2.0) / t) * x - (1.0 / t + 1.0 / beta) * y;
  return dz;
}

inline State shift_vector_field(const DynamicSpec& spec, double t, const State& z) {
  detail::check_time(spec, t);
  const Eigen::Index n = spec.dimension();
  const auto x = z.head(n);
  const auto v = z.tail(n);
  const FieldCoefficients k = coefficients(spec, t);
  const Point g = driving_map(spec, k.smoothing, x);
  const Point xdot = v - k.inner * g;
  State dz(2 * n);
  dz.head(n) = xdot;
  dz.tail(n) = -(spec.alpha / t) * xdot - k.outer * g;
  return dz;
}

inline State vector_field(const DynamicSpec& spec, Reformulation form, double t, const State& z) {
  return form == Reformulation::Paper ? paper_vector_field(spec, t, z)
                                      : shift_vector_field(spec, t, z);
}

/// First-order state at t0 equivalent to x(t0) = x0, x'(t0) = v0.
inline State initial_state(const DynamicSpec& spec, Reformulation form, const Point& x0,
                           const Point& v0) {
  spec.validate();
  require(x0.size() == spec.dimension() && v0.size() == spec.dimension(),
          "initial_state: dimension mismatch");
  const Eigen::Index n = spec.dimension();
  State z(2 * n);
  z.head(n) = x0;
  if (form == Reformulation::Paper) {
    z.tail(n) = compatibility_y0(spec, x0, v0);
  } else {
    const FieldCoefficients k = coefficients(spec, spec.t0);
    z.tail(n) = v0 + k.inner * driving_map(spec, k.smoothing, x0);
  }
  return z;
}

/// x'(t) from a first-order state.
inline Point recover_velocity(const DynamicSpec& spec, Reformulation form, double t, const State& z) {
  const Eigen::Index n = spec.dimension();
  require(z.size() == 2 * n, "recover_velocity: state dimension mismatch");
  return vector_field(spec, form, t, z).head(n);
}

inline void attach_velocities(const DynamicSpec& spec, Reformulation form, Trajectory& traj) {
  traj.velocities.clear();
  traj.velocities.reserve(traj.size());
  for (std::size_t k = 0; k < traj.size(); ++k) {
    traj.velocities.push_back(recover_velocity(spec, form, traj.times[k], traj.states[k]));
  }
}

inline Point position(const DynamicSpec& spec, const State& z) { return z.head(spec.dimension()); }

/// Integrates the model from x(t0) = x0, x'(t0) = v0 and recovers velocities.
inline Trajectory simulate(const DynamicSpec& spec, Reformulation form, const Point& x0,
                           const Point& v0, double t_end, const IntegratorConfig& config = {},
                           const std::vector<double>& sample_grid = {}) {
  const State z0 = initial_state(spec, form, x0, v0);
  Trajectory traj = integrate(
      [&spec, form](double t, const State& z) { return vector_field(spec, form, t, z); }, spec.t0,
      z0, t_end, config, sample_grid);
  attach_velocities(spec, form, traj);
  return traj;
}

/// Finite-difference residual of the model's second-order equation at the
/// interior sample k of a uniformly sampled trajectory:
/// |x'' + (alpha/t) x' + d/dt[c g] + e g| with central differences.
inline double second_order_residual(const DynamicSpec& spec, const Trajectory& traj, std::size_t k) {
  require(k >= 1 && k + 1 < traj.size(), "second_order_residual: sample needs two neighbors");
  const double t = traj.times[k];
  const double h_back = t - traj.times[k - 1];
  const double h = traj.times[k + 1] - t;
  require(h > 0.0 && std::abs(h - h_back) <= 1e-6 * h,
          "second_order_residual: local spacing is not uniform");

  auto damped = [&](std::size_t i) {
    const FieldCoefficients c = coefficients(spec, traj.times[i]);
    const Point g = driving_map(spec, c.smoothing, position(spec, traj.states[i]));
    return std::pair<Point, Point>{c.inner * g, c.outer * g};
  };
  const Point x_prev = position(spec, traj.states[k - 1]);
  const Point x_mid = position(spec, traj.states[k]);
  const Point x_next = position(spec, traj.states[k + 1]);
  const Point xdot = (x_next - x_prev) / (2.0 * h);
  const Point xddot = (x_next - 2.0 * x_mid + x_prev) / (h * h);
  const Point inner_dot = (damped(k + 1).first - damped(k - 1).first) / (2.0 * h);
  const Point forcing = damped(k).second;
  return (xddot + (spec.alpha / t) * xdot + inner_dot + forcing).norm();
}

/// Growth and Lipschitz bounds of the (x, y) field: |F(t,u) - F(t,w)| <= K(t)|u - w|
/// and |F(t,u)| <= P(t)(1 + |u|). Useful as a step-size sanity estimate.
struct FieldBounds {
  double a;
  double b;
  double lipschitz;  ///< K(t) = sqrt(a^2 + b^2)
  double growth;     ///< P(t)
};

inline FieldBounds paper_field_bounds(const DynamicSpec& spec, double t) {
  detail::require_paper_form(spec);
  const ScheduleValues s = schedule_eval(*spec.schedule, t);
  const double alpha = spec.alpha;
  const double beta = spec.beta;
  const double a = beta * s.delta / s.gamma + std::abs((alpha - 1.0) / t - 1.0 / beta) +
                   std::abs(1.0 / beta - (alpha - 2.0) / t);
  const double b = 1.0 / beta + std::abs(1.0 / t + 1.0 / beta);
  const double k = std::hypot(a, b);
  const auto ref = spec.reference_point();
  const double anchor = ref ? beta * s.delta / s.gamma * ref->norm() : 0.0;
  return {a, b, k, std::max(anchor, k)};
}

}  // namespace nshr
