#pragma once

// Experiment plans, concurrent execution and CSV / metadata export.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iterator>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nshr/dnshr.hpp"
#include "nshr/dynamics.hpp"
#include "nshr/integrate.hpp"
#include "nshr/lyapunov.hpp"
#include "nshr/monotone.hpp"
#include "nshr/proxcore.hpp"
#include "nshr/schedules.hpp"

#ifndef NSHR_VERSION_STRING
#define NSHR_VERSION_STRING "0.1.0"
#endif

namespace nshr {

/// Every default used by the built-in plans.
namespace defaults {

// Horizon, initial data and sampling.
inline constexpr double t0 = 1.0;
inline constexpr double t_end = 50.0;
inline constexpr double x0_1 = 20.0;
inline constexpr double x0_2 = -15.0;
inline constexpr std::size_t samples = 600;
inline constexpr double fit_lo = 20.0;
inline constexpr double fit_hi = 50.0;

// Reference high-resolution run: delta = t^p, gamma = c t^(p+2).
inline constexpr double alpha = 4.0;
inline constexpr double beta = 1.0;
inline constexpr double p = 0.5;
inline constexpr double c = 0.01;

// Sweeps. The alpha sweep uses p = alpha - 3.5 with the same c.
inline constexpr double beta_sweep[] = {0.01, 0.08, 0.8, 1.5};
inline constexpr double alpha_sweep[] = {4.0, 5.0, 6.0, 8.0};
inline constexpr double alpha_sweep_p_offset = 3.5;

// Comparison: the high-resolution model and both baselines use c = 1e-4.
inline constexpr double compare_c = 1e-4;
// Attouch-Laszlo: lambda(t) = (1.1 / 9) t^2, beta = 1.
inline constexpr double al_lambda_scale = 1.1 / 9.0;
inline constexpr double al_lambda_exponent = 2.0;
// Bot-Karapetyants: b(t) = 4.1 t^0.5, lambda(t) = t^0.5, beta(t) = 1.
inline constexpr double bk_b_scale = 4.1;
inline constexpr double bk_b_exponent = 0.5;
inline constexpr double bk_lambda_scale = 1.0;
inline constexpr double bk_lambda_exponent = 0.5;

// Operator demo: p = 1, sigma = 1.5, c = 2 / (4 (alpha - sigma - 1) sigma),
// twice the critical value of the limit condition.
inline constexpr double monotone_p = 1.0;
inline constexpr double monotone_sigma = 1.5;
inline constexpr double monotone_c = 2.0 / (4.0 * (alpha - monotone_sigma - 1.0) * monotone_sigma);

// Discrete scheme demo. beta = 0.08 keeps the explicit damping number
// (see explicit_damping_number) near 0.3 on the curvature-1000 coordinate;
// beta = 1 pushes it to about 3.8 and the recurrence diverges.
inline constexpr double dnshr_h = 0.01;
inline constexpr std::size_t dnshr_n = 20000;
inline constexpr double dnshr_beta = 0.08;

}  // namespace defaults

inline Point default_x0() {
  Point x(2);
  x << defaults::x0_1, defaults::x0_2;
  return x;
}

/// n points log-spaced on [lo, hi] with exact endpoints.
inline std::vector<double> log_grid(double lo, double hi, std::size_t n) {
  require(lo > 0.0 && hi > lo, "log_grid: need 0 < lo < hi");
  require(n >= 2, "log_grid: need at least two points");
  std::vector<double> g(n);
  const double a = std::log(lo), b = std::log(hi);
  for (std::size_t i = 0; i < n; ++i) {
    g[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
  }
  g.front() = lo;
  g.back() = hi;
  return g;
}

struct Configuration {
  std::string key;
  DynamicSpec spec;
};

struct DnshrPlan {
  DnshrConfig config;
  Point x0;
  Point x1;
};

struct ExperimentPlan {
  std::string name = "custom";
  std::vector<Configuration> configurations;
  Point x0 = default_x0();
  Point v0 = Point::Zero(2);
  double t0 = defaults::t0;
  double t_end = defaults::t_end;
  std::size_t samples = defaults::samples;
  Window fit_window{defaults::fit_lo, defaults::fit_hi};
  Window oscillation_window{defaults::t0, defaults::t_end};
  IntegratorConfig integrator;
  Reformulation form = Reformulation::Shift;
  std::optional<DnshrPlan> dnshr;

  void validate() const {
    require(!configurations.empty() || dnshr.has_value(), "ExperimentPlan: nothing to run");
    require(t_end > t0, "ExperimentPlan: empty horizon");
    require(samples >= 2, "ExperimentPlan: need at least two samples");
    integrator.validate();
    for (const auto& c : configurations) {
      c.spec.validate();
      require(c.spec.t0 == t0, "ExperimentPlan: configuration t0 differs from the plan horizon");
      require(c.spec.dimension() == x0.size() && x0.size() == v0.size(),
              "ExperimentPlan: initial data dimension mismatch in " + c.key);
      if (form == Reformulation::Paper) {
        require(c.spec.beta > 0.0 && (c.spec.kind == DynamicKind::NSHR ||
                                      c.spec.kind == DynamicKind::HRMMD),
                "ExperimentPlan: the (x, y) form only covers high-resolution models with beta > 0");
      }
    }
    if (dnshr) dnshr->config.validate();
  }
};

// --- built-in plans -------------------------------------------------------------

namespace detail {

inline std::string format_key_number(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

inline DynamicSpec high_resolution(double alpha, double beta, double p, double c,
                                   std::shared_ptr<const ProxObjective> objective) {
  DynamicSpec s;
  s.kind = DynamicKind::NSHR;
  s.alpha = alpha;
  s.beta = beta;
  s.schedule = std::make_shared<PolynomialSchedule>(p, c, defaults::t0);
  s.driver = std::move(objective);
  s.t0 = defaults::t0;
  return s;
}

}  // namespace detail

inline ExperimentPlan make_vary_beta_plan() {
  ExperimentPlan plan;
  plan.name = "vary_beta";
  auto f = std::make_shared<const TestObjective>();
  for (double beta : defaults::beta_sweep) {
    plan.configurations.push_back(
        {"beta_" + detail::format_key_number(beta),
         detail::high_resolution(defaults::alpha, beta, defaults::p, defaults::c, f)});
  }
  return plan;
}

inline ExperimentPlan make_vary_alpha_plan() {
  ExperimentPlan plan;
  plan.name = "vary_alpha";
  auto f = std::make_shared<const TestObjective>();
  for (double alpha : defaults::alpha_sweep) {
    plan.configurations.push_back(
        {"alpha_" + detail::format_key_number(alpha),
         detail::high_resolution(alpha, defaults::beta, alpha - defaults::alpha_sweep_p_offset,
                                 defaults::c, f)});
  }
  return plan;
}

inline ExperimentPlan make_compare_plan() {
  ExperimentPlan plan;
  plan.name = "compare";
  auto f = std::make_shared<const TestObjective>();

  DynamicSpec ours = detail::high_resolution(defaults::alpha, defaults::beta, defaults::p,
                                             defaults::compare_c, f);
  DynamicSpec base_delta = ours;
  base_delta.kind = DynamicKind::BaselineDelta;
  base_delta.beta = 0.0;
  DynamicSpec base_unit = base_delta;
  base_unit.kind = DynamicKind::BaselineUnit;

  DynamicSpec al;
  al.kind = DynamicKind::AttouchLaszlo;
  al.alpha = defaults::alpha;
  al.beta = defaults::beta;
  al.schedule = std::make_shared<PowerSchedule>(
      PowerLaw{1.0, 0.0}, PowerLaw{defaults::al_lambda_scale, defaults::al_lambda_exponent},
      defaults::t0);
  al.driver = std::shared_ptr<const ProxObjective>(f);

  DynamicSpec bk;
  bk.kind = DynamicKind::BotKarapetyants;
  bk.alpha = defaults::alpha;
  bk.beta = 1.0;
  bk.beta_schedule = PowerLaw{1.0, 0.0};
  bk.schedule = std::make_shared<PowerSchedule>(
      PowerLaw{defaults::bk_b_scale, defaults::bk_b_exponent},
      PowerLaw{defaults::bk_lambda_scale, defaults::bk_lambda_exponent}, defaults::t0);
  bk.driver = std::shared_ptr<const ProxObjective>(f);

  plan.configurations = {{"al", al},
                         {"baseline-delta", base_delta},
                         {"baseline-unit", base_unit},
                         {"bk", bk},
                         {"nshr", ours}};
  return plan;
}

inline ExperimentPlan make_monotone_demo_plan() {
  ExperimentPlan plan;
  plan.name = "monotone_demo";
  auto schedule =
      std::make_shared<PolynomialSchedule>(defaults::monotone_p, defaults::monotone_c, defaults::t0);
  auto make = [&](std::shared_ptr<const MonotoneOperator> op) {
    DynamicSpec s;
    s.kind = DynamicKind::HRMMD;
    s.alpha = defaults::alpha;
    s.beta = defaults::beta;
    s.schedule = schedule;
    s.driver = std::move(op);
    s.t0 = defaults::t0;
    return s;
  };
  plan.configurations = {
      {"rotation", make(make_rotation_operator())},
      {"subdifferential", make(std::make_shared<SubdifferentialOperator>(
                              std::make_shared<const TestObjective>()))}};
  return plan;
}

inline DnshrConfig make_dnshr_demo_config() {
  DnshrConfig c;
  c.h = defaults::dnshr_h;
  c.alpha = defaults::alpha;
  c.beta = defaults::dnshr_beta;
  c.schedule = std::make_shared<PolynomialSchedule>(defaults::p, defaults::c, defaults::dnshr_h);
  c.objective = std::make_shared<const TestObjective>();
  c.max_iterations = defaults::dnshr_n;
  return c;
}

inline ExperimentPlan make_dnshr_demo_plan() {
  ExperimentPlan plan;
  plan.name = "dnshr_demo";
  plan.dnshr = DnshrPlan{make_dnshr_demo_config(), default_x0(), default_x0()};
  return plan;
}

inline ExperimentPlan make_plan(const std::string& name) {
  if (name == "vary_beta") return make_vary_beta_plan();
  if (name == "vary_alpha") return make_vary_alpha_plan();
  if (name == "compare") return make_compare_plan();
  if (name == "monotone_demo") return make_monotone_demo_plan();
  if (name == "dnshr_demo") return make_dnshr_demo_plan();
  throw std::invalid_argument("unknown plan: " + name);
}

// --- execution --------------------------------------------------------------------

struct SeriesSummary {
  RateFit fit;
  std::optional<double> oscillation;
};

struct ConfigurationResult {
  std::string key;
  DynamicSpec spec;
  bool ok = false;
  std::string error;
  DiagnosticsSeries series;
  SeriesSummary obj_gap, env_gap, grad_norm, x_norm;
  double wall_seconds = 0.0;
  IntegratorStats stats;
};

struct RunResult {
  std::string plan;
  ExperimentPlan settings;
  std::vector<ConfigurationResult> configurations;
  std::optional<DnshrResult> dnshr;
  double dnshr_wall_seconds = 0.0;

  const ConfigurationResult& at(const std::string& key) const {
    for (const auto& c : configurations) {
      if (c.key == key) return c;
    }
    throw std::out_of_range("RunResult: no configuration " + key);
  }
};

namespace detail {

inline SeriesSummary summarize(const DiagnosticsSeries& series, double DiagnosticsRecord::*field,
                               Window fit, Window osc) {
  SeriesSummary out;
  const auto t = series.times();
  const auto v = series.column(field);
  for (double x : v) {
    if (std::isnan(x)) return out;
  }
  out.fit = fit_rate(t, v, fit);
  out.oscillation = oscillation_metric(t, v, osc);
  return out;
}

inline ConfigurationResult run_configuration(const ExperimentPlan& plan, const Configuration& c,
                                             const std::vector<double>& grid) {
  ConfigurationResult r;
  r.key = c.key;
  r.spec = c.spec;
  const auto start = std::chrono::steady_clock::now();
  try {
    Trajectory traj = simulate(c.spec, plan.form, plan.x0, plan.v0, plan.t_end, plan.integrator, grid);
    r.stats = traj.stats;
    r.series = diagnostics(c.spec, traj);
    r.obj_gap = summarize(r.series, &DiagnosticsRecord::obj_gap, plan.fit_window,
                          plan.oscillation_window);
    r.env_gap = summarize(r.series, &DiagnosticsRecord::env_gap, plan.fit_window,
                          plan.oscillation_window);
    r.grad_norm = summarize(r.series, &DiagnosticsRecord::grad_norm, plan.fit_window,
                            plan.oscillation_window);
    r.x_norm = summarize(r.series, &DiagnosticsRecord::x_norm, plan.fit_window,
                         plan.oscillation_window);
    r.ok = true;
  } catch (const std::exception& e) {
    r.ok = false;
    r.error = e.what();
  }
  r.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

}  // namespace detail

/// Runs every configuration concurrently; results are ordered by key.
inline RunResult run_plan(const ExperimentPlan& plan) {
  plan.validate();
  RunResult result;
  result.plan = plan.name;
  result.settings = plan;
  const std::vector<double> grid = log_grid(plan.t0, plan.t_end, plan.samples);

  std::vector<std::future<ConfigurationResult>> jobs;
  jobs.reserve(plan.configurations.size());
  for (const auto& c : plan.configurations) {
    jobs.push_back(std::async(std::launch::async, [&plan, &c, &grid] {
      return detail::run_configuration(plan, c, grid);
    }));
  }
  if (plan.dnshr) {
    const auto start = std::chrono::steady_clock::now();
    result.dnshr = dnshr_run(plan.dnshr->config, plan.dnshr->x0, plan.dnshr->x1);
    result.dnshr_wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  for (auto& j : jobs) result.configurations.push_back(j.get());
  std::sort(result.configurations.begin(), result.configurations.end(),
            [](const auto& a, const auto& b) { return a.key < b.key; });
  return result;
}

// --- export -------------------------------------------------------------------------

inline constexpr const char* kCsvHeader =
    "t,obj_gap,env_gap,grad_norm,x_norm,x1,x2,t_xdot_norm,rel_obj,rel_grad,lyapunov";
inline constexpr const char* kDnshrCsvHeader = "k,t,gap,grad_norm,x1,x2,u1,u2,implicit_residual";

namespace detail {

/// Scientific notation, 17 significant digits.
inline std::string sci(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

inline std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  return out;
}

inline void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

inline std::string join(const Point& x) {
  std::string s;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (i) s += ",";
    s += sci(x[i]);
  }
  return s;
}

}  // namespace detail

inline void write_series_csv(const DiagnosticsSeries& series, const std::filesystem::path& path) {
  auto out = detail::open_for_write(path);
  out << kCsvHeader << '\n';
  for (const auto& r : series.records) {
    require(r.x.size() == 2, "write_series_csv: the column layout is two-dimensional");
    const double cols[] = {r.t,    r.obj_gap, r.env_gap,     r.grad_norm, r.x_norm,  r.x[0],
                           r.x[1], r.t_xdot_norm, r.rel_obj, r.rel_grad,  r.lyapunov};
    for (std::size_t i = 0; i < std::size(cols); ++i) {
      if (i) out << ',';
      out << detail::sci(cols[i]);
    }
    out << '\n';
  }
  detail::finish(out, path);
}

inline void write_dnshr_csv(const DnshrResult& result, double h, const std::filesystem::path& path) {
  auto out = detail::open_for_write(path);
  out << kDnshrCsvHeader << '\n';
  for (const auto& it : result.history) {
    require(it.x.size() == 2, "write_dnshr_csv: the column layout is two-dimensional");
    out << it.k << ',' << detail::sci(static_cast<double>(it.k) * h) << ',' << detail::sci(it.gap)
        << ',' << detail::sci(it.grad_norm) << ',' << detail::sci(it.x[0]) << ','
        << detail::sci(it.x[1]) << ',' << detail::sci(it.u[0]) << ',' << detail::sci(it.u[1]) << ','
        << detail::sci(it.implicit_residual) << '\n';
  }
  detail::finish(out, path);
}

/// Parses a file written by write_series_csv.
inline std::vector<std::vector<double>> read_csv_rows(const std::filesystem::path& path,
                                                      std::string* header = nullptr) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
  std::string line;
  std::getline(in, line);
  if (header) *header = line;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::strtod(cell.c_str(), nullptr));
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace detail {

inline std::string fit_text(const RateFit& f) {
  if (f.exponent) return sci(*f.exponent);
  return f.floor_hit ? "floor-hit" : "none";
}

inline void write_metadata(const RunResult& result, const std::filesystem::path& path) {
  const ExperimentPlan& p = result.settings;
  auto out = open_for_write(path);
  out << "plan=" << result.plan << '\n';
  out << "version=" << NSHR_VERSION_STRING << '\n';
  out << "t0=" << sci(p.t0) << '\n';
  out << "t_end=" << sci(p.t_end) << '\n';
  out << "samples=" << p.samples << '\n';
  out << "sample_grid=log\n";
  out << "fit_window=" << sci(p.fit_window.lo) << ',' << sci(p.fit_window.hi) << '\n';
  out << "oscillation_window=" << sci(p.oscillation_window.lo) << ','
      << sci(p.oscillation_window.hi) << '\n';
  out << "numerical_floor=" << sci(kNumericalFloor) << '\n';
  out << "abs_tol=" << sci(p.integrator.abs_tol) << '\n';
  out << "rel_tol=" << sci(p.integrator.rel_tol) << '\n';
  out << "initial_step=" << sci(p.integrator.initial_step) << '\n';
  out << "max_step=" << sci(p.integrator.max_step) << '\n';
  out << "max_steps=" << p.integrator.max_steps << '\n';
  out << "reformulation=" << (p.form == Reformulation::Paper ? "xy" : "shift") << '\n';
  out << "x0=" << join(p.x0) << '\n';
  out << "v0=" << join(p.v0) << '\n';
  for (const auto& c : result.configurations) {
    const std::string k = "config." + c.key + ".";
    out << k << "kind=" << to_string(c.spec.kind) << '\n';
    out << k << "alpha=" << sci(c.spec.alpha) << '\n';
    out << k << "beta=" << sci(c.spec.effective_beta()) << '\n';
    out << k << "schedule=" << c.spec.schedule->describe() << '\n';
    out << k << "status=" << (c.ok ? "ok" : "failed") << '\n';
    if (!c.ok) {
      out << k << "error=" << c.error << '\n';
      continue;
    }
    out << k << "accepted_steps=" << c.stats.accepted << '\n';
    out << k << "rejected_steps=" << c.stats.rejected << '\n';
    out << k << "evaluations=" << c.stats.evaluations << '\n';
    out << k << "wall_seconds=" << sci(c.wall_seconds) << '\n';
    const std::pair<const char*, const SeriesSummary*> cols[] = {
        {"obj_gap", &c.obj_gap}, {"env_gap", &c.env_gap},
        {"grad_norm", &c.grad_norm}, {"x_norm", &c.x_norm}};
    for (const auto& [name, s] : cols) {
      if (!s->oscillation) continue;
      out << k << "rate." << name << '=' << fit_text(s->fit) << '\n';
      out << k << "oscillation." << name << '=' << sci(*s->oscillation) << '\n';
    }
  }
  if (result.dnshr) {
    const DnshrConfig& d = p.dnshr->config;
    out << "dnshr.h=" << sci(d.h) << '\n';
    out << "dnshr.alpha=" << sci(d.alpha) << '\n';
    out << "dnshr.beta=" << sci(d.beta) << '\n';
    out << "dnshr.schedule=" << d.schedule->describe() << '\n';
    out << "dnshr.max_iterations=" << d.max_iterations << '\n';
    out << "dnshr.threshold=" << sci(d.threshold) << '\n';
    out << "dnshr.status=" << to_string(result.dnshr->status) << '\n';
    out << "dnshr.iterations=" << result.dnshr->history.size() << '\n';
    out << "dnshr.max_implicit_residual=" << sci(result.dnshr->max_implicit_residual) << '\n';
    out << "dnshr.wall_seconds=" << sci(result.dnshr_wall_seconds) << '\n';
  }
  finish(out, path);
}

}  // namespace detail

/// One CSV per configuration (`<key>.csv`), `dnshr.csv` for the discrete
/// run, and `metadata.txt`. Returns the files written.
inline std::vector<std::filesystem::path> export_csv(const RunResult& result,
                                                     const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create directory " + dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> written;
  for (const auto& c : result.configurations) {
    if (!c.ok) continue;
    const auto path = dir / (c.key + ".csv");
    write_series_csv(c.series, path);
    written.push_back(path);
  }
  if (result.dnshr) {
    const auto path = dir / "dnshr.csv";
    write_dnshr_csv(*result.dnshr, result.settings.dnshr->config.h, path);
    written.push_back(path);
  }
  const auto meta = dir / "metadata.txt";
  detail::write_metadata(result, meta);
  written.push_back(meta);
  return written;
}

}  // namespace nshr
