#pragma once

// Adaptive Dormand-Prince 5(4) integration with a PI step-size controller and
// the pair's quartic (C^1, fourth-order) dense output.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nshr/point.hpp"

namespace nshr {

using State = Eigen::VectorXd;

struct IntegratorConfig {
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  double initial_step = 1e-4;
  /// Non-positive means "the whole span".
  double max_step = 0.0;
  std::size_t max_steps = 2'000'000;

  void validate() const {
    require(abs_tol > 0.0 && rel_tol > 0.0, "IntegratorConfig: tolerances must be positive");
    require(initial_step > 0.0, "IntegratorConfig: initial step must be positive");
    require(max_steps >= 1, "IntegratorConfig: max steps must be at least 1");
  }
};

struct IntegratorStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t evaluations = 0;
};

/// Failure of the integrator itself; `t` is where it gave up.
class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, double t)
      : std::runtime_error(what + " (t = " + format(t) + ")"), t_(t) {}
  double t() const { return t_; }

 private:
  static std::string format(double t) {
    std::ostringstream s;
    s.precision(17);
    s << t;
    return s.str();
  }
  double t_;
};

/// Interpolant of one accepted step on [t, t + h].
struct DenseSegment {
  double t;
  double h;
  std::array<State, 5> coeffs;

  State operator()(double at) const {
    const double theta = (at - t) / h;
    const double theta1 = 1.0 - theta;
    return coeffs[0] +
           theta * (coeffs[1] + theta1 * (coeffs[2] + theta * (coeffs[3] + theta1 * coeffs[4])));
  }
};

/// Time-stamped first-order states. `velocities` is filled in by the dynamics
/// layer (it needs the model to recover x'(t) from the state).
struct Trajectory {
  std::vector<double> times;
  std::vector<State> states;
  std::vector<Point> velocities;
  IntegratorStats stats;
  std::vector<DenseSegment> segments;

  std::size_t size() const { return times.size(); }
  double t_begin() const { return times.front(); }
  double t_end() const { return times.back(); }

  /// Dense-output evaluation at any t in [t_begin, t_end].
  State at(double t) const {
    require(!segments.empty(), "Trajectory::at: no dense output available");
    require(t >= t_begin() - 1e-12 * std::abs(t_begin()) && t <= t_end() + 1e-12 * std::abs(t_end()),
            "Trajectory::at: time outside the integrated span");
    auto it = std::upper_bound(segments.begin(), segments.end(), t,
                               [](double value, const DenseSegment& s) { return value < s.t; });
    if (it != segments.begin()) --it;
    return (*it)(t);
  }
};

namespace detail::dopri {

inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
inline constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                        a75 = -2187.0 / 6784, a76 = 11.0 / 84;
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
inline constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                        d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                        d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

inline constexpr double kSafety = 0.9;
inline constexpr double kMinFactor = 0.2;
inline constexpr double kMaxFactor = 5.0;
// PI exponents (0.7/p, 0.4/p with p = 5).
inline constexpr double kAlpha = 0.14;
inline constexpr double kBeta = 0.08;

}  // namespace detail::dopri

/// Integrates z' = field(t, z) from (t0, z0) to t_end.
///
/// Output samples are t0, every grid time strictly inside (t0, t_end), and
/// t_end; an empty grid samples every accepted step. `field` is any callable
/// (double, const State&) -> State.
template <class Field>
Trajectory integrate(Field&& field, double t0, const State& z0, double t_end,
                     const IntegratorConfig& config = {},
                     const std::vector<double>& sample_grid = {}) {
  namespace dp = detail::dopri;
  config.validate();
  require(t_end > t0, "integrate: t_end must exceed t0");
  require(std::is_sorted(sample_grid.begin(), sample_grid.end()),
          "integrate: sample grid must be sorted");
  for (double s : sample_grid) {
    require(s >= t0 && s <= t_end, "integrate: sample grid must lie inside [t0, t_end]");
  }
  require_finite(z0, "initial state");

  Trajectory traj;
  traj.times.push_back(t0);
  traj.states.push_back(z0);

  auto grid_it = std::upper_bound(sample_grid.begin(), sample_grid.end(), t0);
  const double span = t_end - t0;
  const double max_step = config.max_step > 0.0 ? std::min(config.max_step, span) : span;

  auto eval = [&](double t, const State& z) {
    State dz = field(t, z);
    ++traj.stats.evaluations;
    if (!dz.allFinite()) throw IntegrationError("integrate: non-finite vector field", t);
    return dz;
  };

  double t = t0;
  State z = z0;
  State k1 = eval(t, z);
  double h = std::min(config.initial_step, max_step);
  double err_old = 1e-4;
  bool last_rejected = false;

  while (t < t_end) {
    if (traj.stats.accepted + traj.stats.rejected >= config.max_steps) {
      throw IntegrationError("integrate: maximum number of steps exceeded", t);
    }
    const bool final_step = t + h >= t_end || t + 1.01 * h >= t_end;
    if (final_step) h = t_end - t;
    if (h < 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t))) {
      throw IntegrationError("integrate: step size underflow", t);
    }

    const State k2 = eval(t + dp::c2 * h, z + h * (dp::a21 * k1));
    const State k3 = eval(t + dp::c3 * h, z + h * (dp::a31 * k1 + dp::a32 * k2));
    const State k4 = eval(t + dp::c4 * h, z + h * (dp::a41 * k1 + dp::a42 * k2 + dp::a43 * k3));
    const State k5 = eval(t + dp::c5 * h,
                          z + h * (dp::a51 * k1 + dp::a52 * k2 + dp::a53 * k3 + dp::a54 * k4));
    const State k6 = eval(t + h, z + h * (dp::a61 * k1 + dp::a62 * k2 + dp::a63 * k3 +
                                          dp::a64 * k4 + dp::a65 * k5));
    State z_new = z + h * (dp::a71 * k1 + dp::a73 * k3 + dp::a74 * k4 + dp::a75 * k5 +
                           dp::a76 * k6);
    const double t_new = final_step ? t_end : t + h;
    const State k7 = eval(t_new, z_new);

    const State err_vec = h * (dp::e1 * k1 + dp::e3 * k3 + dp::e4 * k4 + dp::e5 * k5 +
                               dp::e6 * k6 + dp::e7 * k7);
    double err = 0.0;
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      const double scale =
          config.abs_tol + config.rel_tol * std::max(std::abs(z[i]), std::abs(z_new[i]));
      err = std::max(err, std::abs(err_vec[i]) / scale);
    }
    if (!std::isfinite(err)) throw IntegrationError("integrate: non-finite error estimate", t);

    if (err <= 1.0) {
      DenseSegment seg;
      seg.t = t;
      seg.h = t_new - t;
      const State diff = z_new - z;
      const State bspl = h * k1 - diff;
      seg.coeffs[0] = z;
      seg.coeffs[1] = diff;
      seg.coeffs[2] = bspl;
      seg.coeffs[3] = diff - h * k7 - bspl;
      seg.coeffs[4] = h * (dp::d1 * k1 + dp::d3 * k3 + dp::d4 * k4 + dp::d5 * k5 + dp::d6 * k6 +
                           dp::d7 * k7);

      if (sample_grid.empty()) {
        if (t_new < t_end) {
          traj.times.push_back(t_new);
          traj.states.push_back(z_new);
        }
      } else {
        while (grid_it != sample_grid.end() && *grid_it < t_end && *grid_it <= t_new) {
          if (*grid_it <= traj.times.back()) {
            ++grid_it;
            continue;
          }
          traj.times.push_back(*grid_it);
          traj.states.push_back(*grid_it == t_new ? z_new : seg(*grid_it));
          ++grid_it;
        }
      }
      traj.segments.push_back(std::move(seg));

      ++traj.stats.accepted;
      t = t_new;
      z = std::move(z_new);
      k1 = k7;
      if (!z.allFinite()) throw IntegrationError("integrate: non-finite state", t);

      double factor = err == 0.0 ? dp::kMaxFactor
                                 : dp::kSafety * std::pow(err, -dp::kAlpha) *
                                       std::pow(err_old, dp::kBeta);
      factor = std::clamp(factor, dp::kMinFactor, last_rejected ? 1.0 : dp::kMaxFactor);
      h = std::min(h * factor, max_step);
      err_old = std::max(err, 1e-4);
      last_rejected = false;
    } else {
      ++traj.stats.rejected;
      const double factor =
          std::max(dp::kMinFactor, dp::kSafety * std::pow(err, -dp::kAlpha));
      h *= factor;
      last_rejected = true;
    }
  }

  traj.times.push_back(t_end);
  traj.states.push_back(z);
  return traj;
}

/// Dense-output resampling on the uniform grid t_begin + k h, k = 0, 1, ...
/// restricted to [lo, hi] when given.
inline Trajectory resample_uniform(const Trajectory& traj, double h,
                                   double lo = -std::numeric_limits<double>::infinity(),
                                   double hi = std::numeric_limits<double>::infinity()) {
  require(h > 0.0, "resample_uniform: h must be positive");
  require(traj.size() >= 2, "resample_uniform: trajectory too short");
  const double span = traj.t_end() - traj.t_begin();
  require(h < span, "resample_uniform: h must be smaller than the trajectory span");

  Trajectory out;
  out.stats = traj.stats;
  out.segments = traj.segments;
  const double t0 = traj.t_begin();
  const auto count = static_cast<std::size_t>(std::floor(span / h * (1.0 + 1e-12)));
  for (std::size_t k = 0; k <= count; ++k) {
    const double t = std::min(t0 + static_cast<double>(k) * h, traj.t_end());
    if (t < lo || t > hi) continue;
    out.times.push_back(t);
    out.states.push_back(traj.at(t));
  }
  return out;
}

}  // namespace nshr
