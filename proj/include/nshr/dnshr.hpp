#pragma once

// Discrete-time proximal scheme for the high-resolution dynamic (experimental:
// no convergence theory backs it).
//
// With t_k = k h, each step forms an explicit point r_{k+1} from the last two
// iterates and envelope gradients, then solves the implicit relation
//   x + s grad f_gamma(x) = r,   s = delta_{k+1} h^2, gamma = gamma_{k+1},
// exactly with one prox of f at lambda = gamma + s:
//   u = prox_{lambda f}(r),  x = (s/lambda) u + (gamma/lambda) r.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nshr/point.hpp"
#include "nshr/proxcore.hpp"
#include "nshr/schedules.hpp"

namespace nshr {

struct DiscreteState {
  std::size_t k = 1;
  Point x;       ///< x_k
  Point x_prev;  ///< x_{k-1}
  Point g_prev;  ///< g_{k-1}
  double delta_prev = 1.0;

  void validate() const {
    require(k >= 1, "DiscreteState: k must be at least 1");
    require(x.size() == x_prev.size() && x.size() == g_prev.size(),
            "DiscreteState: dimension mismatch");
    require_finite(x, "x_k");
    require_finite(x_prev, "x_{k-1}");
    require_finite(g_prev, "g_{k-1}");
    require(std::isfinite(delta_prev) && delta_prev > 0.0,
            "DiscreteState: delta_{k-1} must be positive");
  }
};

struct DnshrConfig {
  double h = 0.01;
  double alpha = 4.0;
  double beta = 1.0;
  std::shared_ptr<const ParameterSchedule> schedule;
  std::shared_ptr<const ProxObjective> objective;
  std::size_t max_iterations = 20000;
  /// Early stop on f(u_k) - f* (or |g_k| when f* is unknown).
  double threshold = 1e-10;

  void validate() const {
    require(h > 0.0 && std::isfinite(h), "DnshrConfig: h must be positive");
    require(max_iterations >= 2, "DnshrConfig: N must be at least 2");
    require(schedule != nullptr && objective != nullptr,
            "DnshrConfig: schedule and objective are required");
    require(schedule->t0() <= h, "DnshrConfig: schedule must be defined from t = h");
    require(threshold >= 0.0, "DnshrConfig: threshold must be nonnegative");
  }
};

/// Intermediates of one step, for residual checks.
struct StepDetail {
  Point g;  ///< g_k
  Point r;  ///< r_{k+1}
  Point u;  ///< u_{k+1}
  double s = 0.0;
  double lambda = 0.0;
  double gamma_next = 0.0;
  /// (r - u) / lambda, which equals grad f_{gamma_{k+1}}(x_{k+1}).
  Point g_next;
};

namespace detail {

inline void require_finite_step(const Point& v, const char* what, std::size_t k) {
  if (!v.allFinite()) {
    throw NumericalError(std::string("dnshr_step: non-finite ") + what + " at k = " +
                         std::to_string(k));
  }
}

}  // namespace detail

inline DiscreteState dnshr_step(const DiscreteState& state, const DnshrConfig& config,
                                StepDetail* detail_out = nullptr) {
  state.validate();
  const std::size_t k = state.k;
  const double h = config.h;
  const double tk = static_cast<double>(k) * h;
  const double tk1 = static_cast<double>(k + 1) * h;
  const ScheduleValues now = schedule_eval(*config.schedule, tk);
  const ScheduleValues next = schedule_eval(*config.schedule, tk1);
  const ProxObjective& f = *config.objective;

  const Point p = f.prox(now.gamma, state.x);
  const Point g = (state.x - p) / now.gamma;
  detail::require_finite_step(g, "g_k", k);

  const double kd = static_cast<double>(k);
  const Point old = state.delta_prev * state.g_prev;
  const Point r = 2.0 * state.x - state.x_prev - (config.alpha * h / kd) * (state.x - state.x_prev) -
                  config.beta * h * (now.delta * g - old) - (config.beta * h / kd) * old;
  detail::require_finite_step(r, "r_{k+1}", k);

  const double s = next.delta * h * h;
  const double lambda = next.gamma + s;
  const Point u = f.prox(lambda, r);
  detail::require_finite_step(u, "u_{k+1}", k);
  const Point x_next = (s / lambda) * u + (next.gamma / lambda) * r;
  detail::require_finite_step(x_next, "x_{k+1}", k);

  if (detail_out) {
    detail_out->g = g;
    detail_out->r = r;
    detail_out->u = u;
    detail_out->s = s;
    detail_out->lambda = lambda;
    detail_out->gamma_next = next.gamma;
    detail_out->g_next = (r - u) / lambda;
  }

  DiscreteState out;
  out.k = k + 1;
  out.x = x_next;
  out.x_prev = state.x;
  out.g_prev = g;
  out.delta_prev = now.delta;
  return out;
}

/// |x_{k+1} + s grad f_{gamma_{k+1}}(x_{k+1}) - r_{k+1}| with the gradient
/// recomputed from scratch.
inline double implicit_residual(const DnshrConfig& config, const Point& x_next,
                                const StepDetail& d) {
  const Point grad = moreau_gradient(*config.objective, d.gamma_next, x_next);
  return (x_next + d.s * grad - d.r).norm();
}

/// Initial state at k = 1: g_0 = grad f_{gamma(h)}(x_1), delta_0 = delta(h).
inline DiscreteState dnshr_initial_state(const DnshrConfig& config, const Point& x0,
                                         const Point& x1) {
  config.validate();
  require(x0.size() == x1.size() && x0.size() == config.objective->dimension(),
          "dnshr: starting points must match the objective dimension");
  const ScheduleValues s1 = schedule_eval(*config.schedule, config.h);
  DiscreteState st;
  st.k = 1;
  st.x = x1;
  st.x_prev = x0;
  st.g_prev = moreau_gradient(*config.objective, s1.gamma, x1);
  st.delta_prev = s1.delta;
  return st;
}

/// sup_k beta h delta_k q / (1 + q gamma_k) over k = 1..N: the explicit
/// Hessian-difference term acts like a damping step of this size on a
/// coordinate of curvature q. Linearizing, values above 2 put a root of the
/// three-term recurrence outside the unit disc.
inline double explicit_damping_number(const DnshrConfig& config, double curvature) {
  config.validate();
  require(curvature >= 0.0, "explicit_damping_number: curvature must be nonnegative");
  double sup = 0.0;
  for (std::size_t k = 1; k <= config.max_iterations; ++k) {
    const ScheduleValues s = schedule_eval(*config.schedule, static_cast<double>(k) * config.h);
    sup = std::max(sup, config.beta * config.h * s.delta * curvature / (1.0 + curvature * s.gamma));
  }
  return sup;
}

enum class DnshrStatus { Converged, MaxIterations, Diverged };

inline std::string to_string(DnshrStatus s) {
  switch (s) {
    case DnshrStatus::Converged: return "converged";
    case DnshrStatus::MaxIterations: return "max-iterations";
    case DnshrStatus::Diverged: return "diverged";
  }
  return "unknown";
}

struct DnshrIterate {
  std::size_t k;  ///< index of x_k and u_k
  Point x;
  Point u;
  /// f(u_k) - f*, NaN when f* is unknown.
  double gap;
  double grad_norm;  ///< |g_k| recovered as (r - u) / lambda
  double implicit_residual;
};

struct DnshrResult {
  DnshrStatus status = DnshrStatus::MaxIterations;
  std::vector<DnshrIterate> history;
  double max_implicit_residual = 0.0;
};

/// Runs at most N - 1 steps from (x0, x1), recording x_{k+1}, u_{k+1}.
inline DnshrResult dnshr_run(const DnshrConfig& config, const Point& x0, const Point& x1) {
  DiscreteState state = dnshr_initial_state(config, x0, x1);
  const ProxObjective& f = *config.objective;
  const std::optional<double> fstar = f.optimal_value();
  const double guard = 1e6 * (1.0 + x0.norm());

  DnshrResult result;
  auto stop_value = [&](double gap, double grad) { return fstar ? gap : grad; };

  // x_1 itself: u_1 = prox_{gamma_1}(x_1).
  {
    const double gamma1 = schedule_eval(*config.schedule, config.h).gamma;
    const Point u1 = f.prox(gamma1, x1);
    const double gap = fstar ? f.value(u1) - *fstar : std::numeric_limits<double>::quiet_NaN();
    const double grad = ((x1 - u1) / gamma1).norm();
    result.history.push_back({1, x1, u1, gap, grad, 0.0});
    if (stop_value(gap, grad) < config.threshold) {
      result.status = DnshrStatus::Converged;
      return result;
    }
  }

  for (std::size_t it = 1; it < config.max_iterations; ++it) {
    StepDetail d;
    state = dnshr_step(state, config, &d);
    const double res = implicit_residual(config, state.x, d);
    result.max_implicit_residual = std::max(result.max_implicit_residual, res);
    const double gap = fstar ? f.value(d.u) - *fstar : std::numeric_limits<double>::quiet_NaN();
    const double grad = d.g_next.norm();
    result.history.push_back({state.k, state.x, d.u, gap, grad, res});
    if (state.x.norm() > guard) {
      result.status = DnshrStatus::Diverged;
      return result;
    }
    if (stop_value(gap, grad) < config.threshold) {
      result.status = DnshrStatus::Converged;
      return result;
    }
  }
  result.status = DnshrStatus::MaxIterations;
  return result;
}

}  // namespace nshr
