#pragma once

// Energy functions, per-sample diagnostics, rate fits and oscillation
// metrics for computed trajectories.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "nshr/dynamics.hpp"
#include "nshr/integrate.hpp"
#include "nshr/point.hpp"
#include "nshr/proxcore.hpp"
#include "nshr/schedules.hpp"

namespace nshr {

inline constexpr double kNumericalFloor = 1e-14;

/// sigma in (0, alpha - 1), eta = sigma (alpha - sigma - 1) / 2 and the
/// envelope-gap weight a(t) = [t - beta (sigma + 1 - alpha)] t delta(t).
struct LyapunovParams {
  double sigma = 0.0;
  Point reference;

  double eta(double alpha) const { return sigma * (alpha - sigma - 1.0) / 2.0; }

  double a(const DynamicSpec& spec, double t) const {
    return (t - spec.beta * (sigma + 1.0 - spec.alpha)) * t * schedule_eval(*spec.schedule, t).delta;
  }

  void validate(double alpha) const {
    require(sigma > 0.0 && sigma < alpha - 1.0, "LyapunovParams: sigma must lie in (0, alpha - 1)");
    require(eta(alpha) > 0.0, "LyapunovParams: eta must be positive");
  }
};

/// Midpoint alpha - 1 - zeta/2 of the admissible sigma interval, zeta = alpha - 3 - p.
inline double default_sigma(double alpha, double p) {
  const double zeta = alpha - 3.0 - p;
  require(zeta > 0.0, "default_sigma: requires p < alpha - 3");
  return alpha - 1.0 - zeta / 2.0;
}

/// Default parameters for a spec: the sigma midpoint when the schedule is
/// polynomial with p < alpha - 3, else (alpha - 1) / 2.
inline LyapunovParams default_lyapunov_params(const DynamicSpec& spec) {
  LyapunovParams params;
  const auto ref = spec.reference_point();
  require(ref.has_value(), "default_lyapunov_params: driver has no known minimizer or zero");
  params.reference = *ref;
  params.sigma = (spec.alpha - 1.0) / 2.0;
  if (spec.kind != DynamicKind::HRMMD) {
    if (const auto* poly = dynamic_cast<const PolynomialSchedule*>(spec.schedule.get())) {
      if (poly->p() < spec.alpha - 3.0) params.sigma = default_sigma(spec.alpha, poly->p());
    }
  }
  return params;
}

inline double lyapunov_value(const LyapunovParams& params, const DynamicSpec& spec, double t,
                             const Point& x, const Point& xdot) {
  require(spec.kind == DynamicKind::NSHR, "lyapunov_value: NSHR spec required");
  require(t >= spec.t0, "lyapunov_value: t precedes t0");
  const ProxObjective* obj = spec.objective();
  require(obj != nullptr, "lyapunov_value: objective driver required");
  const auto fstar = obj->optimal_value();
  require(fstar.has_value(), "lyapunov_value: optimal value unknown");
  params.validate(spec.alpha);

  const ScheduleValues s = schedule_eval(*spec.schedule, t);
  const MoreauEvaluation m = moreau(*obj, s.gamma, x);
  const double weight = params.a(spec, t);
  if (!(weight > 0.0)) throw std::domain_error("lyapunov_value: a(t) is not positive at this t");
  const Point dx = x - params.reference;
  const Point mixed = params.sigma * dx + t * xdot + spec.beta * t * s.delta * m.gradient;
  return weight * (m.value - *fstar) + 0.5 * mixed.squaredNorm() +
         params.eta(spec.alpha) * dx.squaredNorm();
}

/// Operator version: no objective term.
inline double lyapunov_value_monotone(double sigma, double eta, const DynamicSpec& spec, double t,
                                      const Point& x, const Point& xdot) {
  require(spec.kind == DynamicKind::HRMMD, "lyapunov_value_monotone: HRMMD spec required");
  require(t >= spec.t0, "lyapunov_value_monotone: t precedes t0");
  const auto zero = spec.reference_point();
  if (!zero) throw std::invalid_argument("lyapunov_value_monotone: operator zero unknown");
  const ScheduleValues s = schedule_eval(*spec.schedule, t);
  const Point a = driving_map(spec, s.gamma, x);
  const Point dx = x - *zero;
  const Point mixed = sigma * dx + t * xdot + spec.beta * t * s.delta * a;
  return 0.5 * mixed.squaredNorm() + eta * dx.squaredNorm();
}

/// Quadratic-form coefficients of the operator energy's dissipation,
/// Omega = a|x'|^2 + b<A, x'> + c|A|^2, and the majorant -m|x'|^2 - n|A|^2
/// with m = epsilon t.
struct MonotoneDissipation {
  double a, b, c;
  double discriminant;  ///< Delta = b^2 - 4ac
  double m, n;
  /// B = alpha - sigma - 1.
  double big_b;
};

inline MonotoneDissipation monotone_dissipation(const DynamicSpec& spec, double sigma,
                                                double epsilon, double t) {
  const ScheduleValues s = schedule_eval(*spec.schedule, t);
  MonotoneDissipation d{};
  d.big_b = spec.alpha - sigma - 1.0;
  d.a = t * (sigma + 1.0 - spec.alpha);
  d.b = (spec.beta * (sigma + 1.0 - spec.alpha) - t) * t * s.delta;
  d.c = -(sigma * t * s.gamma * s.delta + spec.beta * t * t * s.delta * s.delta);
  d.discriminant = d.b * d.b - 4.0 * d.a * d.c;
  d.m = epsilon * t;
  d.n = (d.discriminant - 4.0 * d.m * d.c) / (4.0 * (d.m + d.a));
  return d;
}

// --- diagnostics --------------------------------------------------------------

struct DiagnosticsRecord {
  double t = 0.0;
  double obj_gap = 0.0;
  double env_gap = 0.0;
  double grad_norm = 0.0;
  double x_norm = 0.0;
  Point x;
  double t_xdot_norm = 0.0;
  double lyapunov = 0.0;
  double rel_obj = 1.0;
  double rel_grad = 1.0;
};

struct DiagnosticsSeries {
  std::vector<DiagnosticsRecord> records;

  std::size_t size() const { return records.size(); }
  const DiagnosticsRecord& back() const { return records.back(); }

  std::vector<double> times() const { return column(&DiagnosticsRecord::t); }
  std::vector<double> column(double DiagnosticsRecord::*field) const {
    std::vector<double> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(r.*field);
    return out;
  }
};

namespace detail {

/// value / initial with 0/0 = 1.
inline double relative(double value, double initial) {
  if (initial == 0.0) {
    return value == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
  }
  return value / initial;
}

}  // namespace detail

/// Per-sample diagnostics. Gap columns are NaN when the driver has no
/// objective (or f* is unknown); `lyapunov` is NaN for models other than
/// NSHR / HRMMD or when the energy weight a(t) is not yet positive.
inline DiagnosticsSeries diagnostics(const DynamicSpec& spec, const Trajectory& traj,
                                     std::optional<LyapunovParams> params = std::nullopt) {
  require(traj.size() >= 1, "diagnostics: trajectory is empty");
  require(traj.velocities.size() == traj.size(), "diagnostics: trajectory velocities missing");
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();

  const ProxObjective* obj = spec.objective();
  const std::optional<double> fstar = obj ? obj->optimal_value() : std::nullopt;
  const double fstar_value = fstar.value_or(nan);
  const bool energy = spec.kind == DynamicKind::NSHR || spec.kind == DynamicKind::HRMMD;
  if (energy && !params && spec.reference_point()) params = default_lyapunov_params(spec);

  DiagnosticsSeries series;
  series.records.reserve(traj.size());
  for (std::size_t k = 0; k < traj.size(); ++k) {
    DiagnosticsRecord r;
    r.t = traj.times[k];
    r.x = position(spec, traj.states[k]);
    const Point& xdot = traj.velocities[k];
    const double smoothing = coefficients(spec, r.t).smoothing;

    if (obj && fstar) {
      const MoreauEvaluation m = moreau(*obj, smoothing, r.x);
      r.obj_gap = obj->value(m.prox) - fstar_value;
      r.env_gap = m.value - fstar_value;
      r.grad_norm = m.gradient.norm();
    } else {
      r.obj_gap = nan;
      r.env_gap = nan;
      r.grad_norm = driving_map(spec, smoothing, r.x).norm();
    }
    r.x_norm = r.x.norm();
    r.t_xdot_norm = r.t * xdot.norm();

    r.lyapunov = nan;
    if (energy && params) {
      if (spec.kind == DynamicKind::NSHR && fstar && params->a(spec, r.t) > 0.0) {
        r.lyapunov = lyapunov_value(*params, spec, r.t, r.x, xdot);
      } else if (spec.kind == DynamicKind::HRMMD) {
        r.lyapunov = lyapunov_value_monotone(params->sigma, params->eta(spec.alpha), spec, r.t,
                                             r.x, xdot);
      }
    }
    series.records.push_back(std::move(r));
  }

  const double obj0 = series.records.front().obj_gap;
  const double grad0 = series.records.front().grad_norm;
  for (auto& r : series.records) {
    r.rel_obj = std::isnan(obj0) ? nan : detail::relative(r.obj_gap, obj0);
    r.rel_grad = detail::relative(r.grad_norm, grad0);
  }
  return series;
}

// --- rate fits and oscillation --------------------------------------------------

struct Window {
  double lo;
  double hi;
};

/// Result of a log-log fit. `floor_hit` means fewer than `kMinFitSamples`
/// samples in the window exceed the numerical floor, and no slope is given.
struct RateFit {
  std::optional<double> exponent;
  std::size_t samples = 0;
  std::size_t floor_samples = 0;
  bool floor_hit = false;
};

inline constexpr std::size_t kMinFitSamples = 10;

/// Least-squares slope of log(value) against log(t) over the window, using
/// only samples above the floor.
inline RateFit fit_rate(const std::vector<double>& t, const std::vector<double>& value, Window window,
                        double floor = kNumericalFloor) {
  require(t.size() == value.size(), "fit_rate: series length mismatch");
  require(window.lo < window.hi, "fit_rate: empty window");
  RateFit fit;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < window.lo || t[i] > window.hi || std::isnan(value[i])) continue;
    if (!(value[i] > floor)) {
      ++fit.floor_samples;
      continue;
    }
    const double lx = std::log(t[i]);
    const double ly = std::log(value[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++fit.samples;
  }
  if (fit.samples < kMinFitSamples) {
    fit.floor_hit = fit.floor_samples > 0;
    if (!fit.floor_hit) throw std::invalid_argument("fit_rate: fewer than 10 samples in window");
    return fit;
  }
  const double n = static_cast<double>(fit.samples);
  const double denom = n * sxx - sx * sx;
  require(denom > 0.0, "fit_rate: window samples share one time value");
  fit.exponent = (n * sxy - sx * sy) / denom;
  return fit;
}

/// Total variation of log(max(value, floor)) minus |net change| over the window.
inline double oscillation_metric(const std::vector<double>& t, const std::vector<double>& value,
                                 Window window, double floor = kNumericalFloor) {
  require(t.size() == value.size(), "oscillation_metric: series length mismatch");
  std::vector<double> logs;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < window.lo || t[i] > window.hi) continue;
    require(!std::isnan(value[i]), "oscillation_metric: NaN in series");
    logs.push_back(std::log(std::max(value[i], floor)));
  }
  if (logs.size() < kMinFitSamples) {
    throw std::invalid_argument("oscillation_metric: fewer than 10 samples in window");
  }
  double tv = 0.0;
  for (std::size_t i = 1; i < logs.size(); ++i) tv += std::abs(logs[i] - logs[i - 1]);
  return std::max(0.0, tv - std::abs(logs.back() - logs.front()));
}

// --- monotonicity and integral checks -------------------------------------------

struct OnsetScan {
  /// Earliest sample time after which the series never increases by more than the slack.
  double onset;
  /// Time of the last increase beyond the slack, if any.
  std::optional<double> last_violation;
  /// Largest increase encountered after the onset (<= slack by construction).
  double max_increase_after_onset;
};

/// Scans for the last index with v[k] > v[k-1] + slack. NaN entries (energy
/// not yet defined) count as violations.
inline OnsetScan monotonicity_onset(const std::vector<double>& t, const std::vector<double>& v,
                                    double slack = 1e-9) {
  require(t.size() == v.size() && t.size() >= 2, "monotonicity_onset: need two or more samples");
  OnsetScan scan{t.front(), std::nullopt, 0.0};
  std::size_t start = 0;
  for (std::size_t k = 1; k < v.size(); ++k) {
    const bool bad = std::isnan(v[k]) || std::isnan(v[k - 1]) || v[k] > v[k - 1] + slack;
    if (bad) {
      scan.last_violation = t[k];
      start = k;
    }
  }
  scan.onset = t[start];
  for (std::size_t k = start + 1; k < v.size(); ++k) {
    scan.max_increase_after_onset = std::max(scan.max_increase_after_onset, v[k] - v[k - 1]);
  }
  return scan;
}

/// Trapezoidal cumulative integral; out[0] = 0.
inline std::vector<double> cumulative_trapezoid(const std::vector<double>& t,
                                                const std::vector<double>& f) {
  require(t.size() == f.size() && !t.empty(), "cumulative_trapezoid: bad series");
  std::vector<double> out(t.size(), 0.0);
  for (std::size_t k = 1; k < t.size(); ++k) {
    out[k] = out[k - 1] + 0.5 * (t[k] - t[k - 1]) * (f[k] + f[k - 1]);
  }
  return out;
}

/// Share of the total integral accumulated on [t_end / 10, t_end].
inline double last_decade_share(const std::vector<double>& t, const std::vector<double>& cumulative) {
  require(t.size() == cumulative.size() && t.size() >= 2, "last_decade_share: bad series");
  const double total = cumulative.back();
  require(total > 0.0, "last_decade_share: integral is not positive");
  const double cut = t.back() / 10.0;
  std::size_t i = 0;
  while (i + 1 < t.size() && t[i + 1] <= cut) ++i;
  double at_cut = cumulative[i];
  if (t[i] < cut && i + 1 < t.size()) {
    const double w = (cut - t[i]) / (t[i + 1] - t[i]);
    at_cut = (1.0 - w) * cumulative[i] + w * cumulative[i + 1];
  }
  return (total - at_cut) / total;
}

/// Integrands t |x'|^2 and t^3 delta^2 |grad f_gamma|^2 along a trajectory.
struct EnergyIntegrands {
  std::vector<double> velocity;
  std::vector<double> gradient;
};

inline EnergyIntegrands energy_integrands(const DynamicSpec& spec, const Trajectory& traj) {
  require(traj.velocities.size() == traj.size(), "energy_integrands: velocities missing");
  EnergyIntegrands out;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const double t = traj.times[k];
    const FieldCoefficients c = coefficients(spec, t);
    const double delta = schedule_eval(*spec.schedule, t).delta;
    const double g = driving_map(spec, c.smoothing, position(spec, traj.states[k])).squaredNorm();
    out.velocity.push_back(t * traj.velocities[k].squaredNorm());
    out.gradient.push_back(t * t * t * delta * delta * g);
  }
  return out;
}

/// Max of v over samples with t in [lo, hi]; NaN if none.
inline double window_max(const std::vector<double>& t, const std::vector<double>& v, Window w) {
  double m = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < w.lo || t[i] > w.hi) continue;
    m = std::isnan(m) ? v[i] : std::max(m, v[i]);
  }
  return m;
}

}  // namespace nshr
