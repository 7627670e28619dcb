#pragma once

// Time-varying parameters delta(t) (gradient rescaling) and gamma(t)
// (smoothing), plus checks of the standing assumptions of the two
// convergence theories.

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "nshr/point.hpp"

namespace nshr {

struct ScheduleValues {
  double delta;
  double delta_dot;
  double gamma;
  double gamma_dot;
};

/// scale * t^exponent
struct PowerLaw {
  double scale = 1.0;
  double exponent = 0.0;

  double operator()(double t) const { return scale * std::pow(t, exponent); }
  double derivative(double t) const {
    return exponent == 0.0 ? 0.0 : scale * exponent * std::pow(t, exponent - 1.0);
  }
};

class ParameterSchedule {
 public:
  explicit ParameterSchedule(double t0) : t0_(t0) {
    require(t0 > 0.0, "ParameterSchedule: t0 must be positive");
  }
  virtual ~ParameterSchedule() = default;

  double t0() const { return t0_; }

  virtual double delta(double t) const = 0;
  virtual double delta_dot(double t) const = 0;
  virtual double gamma(double t) const = 0;
  virtual double gamma_dot(double t) const = 0;
  /// One-line parameter summary for run metadata.
  virtual std::string describe() const { return "custom"; }

 private:
  double t0_;
};

/// delta = t^p, gamma = c t^(p+2), the family for which every assumption
/// check is decided in closed form.
class PolynomialSchedule : public ParameterSchedule {
 public:
  PolynomialSchedule(double p, double c, double t0 = 1.0)
      : ParameterSchedule(t0), p_(p), c_(c), delta_{1.0, p}, gamma_{c, p + 2.0} {
    require(p >= 0.0, "PolynomialSchedule: p must be nonnegative");
    require(c > 0.0, "PolynomialSchedule: c must be positive");
  }

  double p() const { return p_; }
  double c() const { return c_; }

  double delta(double t) const override { return delta_(t); }
  double delta_dot(double t) const override { return delta_.derivative(t); }
  double gamma(double t) const override { return gamma_(t); }
  double gamma_dot(double t) const override { return gamma_.derivative(t); }
  std::string describe() const override {
    std::ostringstream s;
    s.precision(17);
    s << "delta=t^" << p_ << " gamma=" << c_ << "*t^" << p_ + 2.0;
    return s.str();
  }

 private:
  double p_, c_;
  PowerLaw delta_, gamma_;
};

/// Independent power laws for delta and gamma. Used for the benchmark
/// dynamics, where the two slots carry b(t) and lambda(t).
class PowerSchedule : public ParameterSchedule {
 public:
  PowerSchedule(PowerLaw delta, PowerLaw gamma, double t0 = 1.0)
      : ParameterSchedule(t0), delta_(delta), gamma_(gamma) {
    require(delta.scale > 0.0 && gamma.scale > 0.0, "PowerSchedule: scales must be positive");
  }

  double delta(double t) const override { return delta_(t); }
  double delta_dot(double t) const override { return delta_.derivative(t); }
  double gamma(double t) const override { return gamma_(t); }
  double gamma_dot(double t) const override { return gamma_.derivative(t); }
  std::string describe() const override {
    std::ostringstream s;
    s.precision(17);
    s << "delta=" << delta_.scale << "*t^" << delta_.exponent << " gamma=" << gamma_.scale
      << "*t^" << gamma_.exponent;
    return s.str();
  }

  const PowerLaw& delta_law() const { return delta_; }
  const PowerLaw& gamma_law() const { return gamma_; }

 private:
  PowerLaw delta_, gamma_;
};

/// Arbitrary user-supplied C^1 schedule.
class FunctionSchedule : public ParameterSchedule {
 public:
  using Fn = std::function<double(double)>;

  FunctionSchedule(Fn delta, Fn delta_dot, Fn gamma, Fn gamma_dot, double t0)
      : ParameterSchedule(t0),
        delta_(std::move(delta)),
        delta_dot_(std::move(delta_dot)),
        gamma_(std::move(gamma)),
        gamma_dot_(std::move(gamma_dot)) {}

  double delta(double t) const override { return delta_(t); }
  double delta_dot(double t) const override { return delta_dot_(t); }
  double gamma(double t) const override { return gamma_(t); }
  double gamma_dot(double t) const override { return gamma_dot_(t); }

 private:
  Fn delta_, delta_dot_, gamma_, gamma_dot_;
};

inline ScheduleValues schedule_eval(const ParameterSchedule& schedule, double t) {
  if (!(t >= schedule.t0())) {
    std::ostringstream msg;
    msg << "schedule_eval: t = " << t << " precedes t0 = " << schedule.t0();
    throw std::invalid_argument(msg.str());
  }
  ScheduleValues v{schedule.delta(t), schedule.delta_dot(t), schedule.gamma(t),
                   schedule.gamma_dot(t)};
  if (!(v.delta > 0.0) || !(v.gamma > 0.0)) {
    std::ostringstream msg;
    msg << "schedule_eval: delta and gamma must stay positive (t = " << t << ", delta = "
        << v.delta << ", gamma = " << v.gamma << ")";
    throw std::domain_error(msg.str());
  }
  return v;
}

// --- assumption validation ---------------------------------------------------

struct ConditionVerdict {
  std::string name;
  bool holds = false;
  /// Estimated limit, ratio or slope that decided the verdict.
  double estimate = std::numeric_limits<double>::quiet_NaN();
  /// Threshold the estimate was compared against.
  double bound = std::numeric_limits<double>::quiet_NaN();
  std::string detail;
};

struct AssumptionReport {
  std::string assumption;
  /// "analytic" (polynomial family) or "grid" (geometric-grid trend test).
  std::string method;
  bool satisfied = false;
  std::vector<ConditionVerdict> conditions;
  /// Largest feasible zeta in B(iv) (alpha - 3 - sup t delta'/delta).
  std::optional<double> zeta;
  /// Bound M of D(ii).
  std::optional<double> growth_bound;
  /// 1 / (4 (alpha - sigma - 1) sigma) for D(i).
  std::optional<double> threshold;

  void finalize() {
    satisfied = !conditions.empty();
    for (const auto& c : conditions) satisfied = satisfied && c.holds;
  }
};

namespace detail {

inline constexpr int kGridDoublings = 20;
inline constexpr double kSlopeTolerance = 1e-3;

struct GridSeries {
  std::vector<double> t;
  std::vector<double> value;
};

inline GridSeries sample_ratio(const ParameterSchedule& s,
                               const std::function<double(const ScheduleValues&, double)>& ratio) {
  GridSeries out;
  for (int k = 0; k <= kGridDoublings; ++k) {
    const double t = s.t0() * std::ldexp(1.0, k);
    out.t.push_back(t);
    out.value.push_back(ratio(schedule_eval(s, t), t));
  }
  return out;
}

/// Least-squares slope of log|value| against log t over the upper half of the grid.
inline double tail_log_slope(const GridSeries& g) {
  const std::size_t begin = g.t.size() / 2;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  double count = 0;
  for (std::size_t i = begin; i < g.t.size(); ++i) {
    const double v = std::abs(g.value[i]);
    if (!(v > 0.0)) return -std::numeric_limits<double>::infinity();
    const double lx = std::log(g.t[i]);
    const double ly = std::log(v);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    count += 1;
  }
  return (count * sxy - sx * sy) / (count * sxx - sx * sx);
}

inline double tail_min(const GridSeries& g) {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = g.t.size() / 2; i < g.t.size(); ++i) m = std::min(m, g.value[i]);
  return m;
}

inline double tail_max(const GridSeries& g) {
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t i = g.t.size() / 2; i < g.t.size(); ++i) m = std::max(m, g.value[i]);
  return m;
}

/// "ratio = O(1/t)": t * ratio must not grow along the grid.
inline ConditionVerdict grid_big_o_inverse_t(const std::string& name, const ParameterSchedule& s,
                                             const std::function<double(const ScheduleValues&, double)>& ratio) {
  const auto g = sample_ratio(s, [&](const ScheduleValues& v, double t) { return t * ratio(v, t); });
  const double slope = tail_log_slope(g);
  return {name, slope <= kSlopeTolerance, slope, kSlopeTolerance,
          "log-log slope of t*ratio over the grid tail"};
}

}  // namespace detail

inline AssumptionReport validate_assumption_B(const ParameterSchedule& schedule, double alpha) {
  require(alpha > 3.0, "validate_assumption_B: alpha must exceed 3");
  AssumptionReport report;
  report.assumption = "B";

  if (const auto* poly = dynamic_cast<const PolynomialSchedule*>(&schedule)) {
    report.method = "analytic";
    const double p = poly->p();
    const double c = poly->c();
    report.conditions.push_back({"B(i) liminf gamma_dot/(t delta) > 0", c * (p + 2.0) > 0.0,
                                 c * (p + 2.0), 0.0, "gamma_dot/(t delta) = c (p + 2)"});
    report.conditions.push_back({"B(ii) t delta/gamma = O(1/t)", true, 1.0 / c,
                                 std::numeric_limits<double>::quiet_NaN(),
                                 "t delta/gamma = 1/(c t)"});
    report.conditions.push_back({"B(iii) gamma_dot/gamma = O(1/t)", true, p + 2.0,
                                 std::numeric_limits<double>::quiet_NaN(),
                                 "gamma_dot/gamma = (p + 2)/t"});
    const double zeta = alpha - 3.0 - p;
    report.conditions.push_back({"B(iv) 0 <= t delta_dot/delta <= alpha - 3 - zeta, zeta > 0",
                                 p >= 0.0 && zeta > 0.0, p, alpha - 3.0,
                                 "t delta_dot/delta = p; need p < alpha - 3"});
    report.zeta = zeta;
    report.finalize();
    return report;
  }

  report.method = "grid";
  using detail::GridSeries;
  {
    const auto g = detail::sample_ratio(
        schedule, [](const ScheduleValues& v, double t) { return v.gamma_dot / (t * v.delta); });
    const double slope = detail::tail_log_slope(g);
    const double lowest = detail::tail_min(g);
    report.conditions.push_back({"B(i) liminf gamma_dot/(t delta) > 0",
                                 lowest > 0.0 && slope >= -detail::kSlopeTolerance, lowest, 0.0,
                                 "tail minimum; tail log-slope must not decay"});
  }
  report.conditions.push_back(detail::grid_big_o_inverse_t(
      "B(ii) t delta/gamma = O(1/t)", schedule,
      [](const ScheduleValues& v, double t) { return t * v.delta / v.gamma; }));
  report.conditions.push_back(detail::grid_big_o_inverse_t(
      "B(iii) gamma_dot/gamma = O(1/t)", schedule,
      [](const ScheduleValues& v, double) { return v.gamma_dot / v.gamma; }));
  {
    const auto g = detail::sample_ratio(
        schedule, [](const ScheduleValues& v, double t) { return t * v.delta_dot / v.delta; });
    const double lowest = detail::tail_min(g);
    const double highest = detail::tail_max(g);
    const double zeta = alpha - 3.0 - highest;
    report.zeta = zeta;
    report.conditions.push_back({"B(iv) 0 <= t delta_dot/delta <= alpha - 3 - zeta, zeta > 0",
                                 lowest >= 0.0 && zeta > 0.0, highest, alpha - 3.0,
                                 "tail supremum of t delta_dot/delta"});
  }
  report.finalize();
  return report;
}

inline AssumptionReport validate_assumption_D(const ParameterSchedule& schedule, double alpha,
                                              double sigma) {
  require(alpha > 1.0, "validate_assumption_D: alpha must exceed 1");
  require(sigma > 0.0 && sigma < alpha - 1.0,
          "validate_assumption_D: sigma must lie in (0, alpha - 1)");
  AssumptionReport report;
  report.assumption = "D";
  const double threshold = 1.0 / (4.0 * (alpha - sigma - 1.0) * sigma);
  report.threshold = threshold;

  if (const auto* poly = dynamic_cast<const PolynomialSchedule*>(&schedule)) {
    report.method = "analytic";
    const double p = poly->p();
    const double c = poly->c();
    report.conditions.push_back({"D(i) lim gamma/(t^2 delta) > 1/(4 (alpha - sigma - 1) sigma)",
                                 c > threshold, c, threshold, "gamma/(t^2 delta) = c"});
    report.conditions.push_back({"D(ii) 0 < t delta_dot/delta <= M", p > 0.0, p, 0.0,
                                 "t delta_dot/delta = p; need p > 0"});
    report.conditions.push_back({"D(iii) |gamma_dot|/gamma = O(1/t)", true, p + 2.0,
                                 std::numeric_limits<double>::quiet_NaN(),
                                 "|gamma_dot|/gamma = (p + 2)/t"});
    report.growth_bound = p;
    report.finalize();
    return report;
  }

  report.method = "grid";
  {
    const auto g = detail::sample_ratio(
        schedule, [](const ScheduleValues& v, double t) { return v.gamma / (t * t * v.delta); });
    const double slope = detail::tail_log_slope(g);
    const double limit = g.value.back();
    report.conditions.push_back({"D(i) lim gamma/(t^2 delta) > 1/(4 (alpha - sigma - 1) sigma)",
                                 slope >= -detail::kSlopeTolerance && limit > threshold, limit,
                                 threshold, "last grid value; tail log-slope must not decay"});
  }
  {
    const auto g = detail::sample_ratio(
        schedule, [](const ScheduleValues& v, double t) { return t * v.delta_dot / v.delta; });
    const double lowest = detail::tail_min(g);
    const double highest = detail::tail_max(g);
    const double slope = detail::tail_log_slope(g);
    report.growth_bound = highest;
    report.conditions.push_back({"D(ii) 0 < t delta_dot/delta <= M",
                                 lowest > 0.0 && slope <= detail::kSlopeTolerance, highest, 0.0,
                                 "tail range of t delta_dot/delta"});
  }
  report.conditions.push_back(detail::grid_big_o_inverse_t(
      "D(iii) |gamma_dot|/gamma = O(1/t)", schedule,
      [](const ScheduleValues& v, double) { return std::abs(v.gamma_dot) / v.gamma; }));
  report.finalize();
  return report;
}

}  // namespace nshr
