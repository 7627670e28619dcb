#pragma once

// Command-line front end: simulate, bench, validate, dnshr.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage error, 3 validation ran
// and reported "not satisfied".

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nshr/bench.hpp"

namespace nshr::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitUnsatisfied = 3;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SimulateOptions {
  std::string dynamic = "nshr";
  std::string op = "rotation";
  std::string form = "shift";
  double alpha = defaults::alpha;
  double beta = defaults::beta;
  double p = defaults::p;
  double c = defaults::c;
  double t0 = defaults::t0;
  double t_end = defaults::t_end;
  std::string x0 = "20,-15";
  std::string v0 = "0,0";
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  std::size_t samples = defaults::samples;
  std::string out = "results";
};

struct BenchOptions {
  std::string plan = "vary_beta";
  std::string out = "results";
};

struct ValidateOptions {
  std::string assumption = "B";
  double alpha = defaults::alpha;
  double sigma = defaults::monotone_sigma;
  double p = defaults::p;
  double c = defaults::c;
};

struct DnshrOptions {
  double h = defaults::dnshr_h;
  std::size_t n = defaults::dnshr_n;
  double alpha = defaults::alpha;
  double beta = defaults::dnshr_beta;
  double p = defaults::p;
  double c = defaults::c;
  double threshold = 1e-10;
  std::string x0 = "20,-15";
  std::string x1;
  std::string out = "results";
};

struct Options {
  std::string config;
  SimulateOptions simulate;
  BenchOptions bench;
  ValidateOptions validate;
  DnshrOptions dnshr;
};

/// Flat key=value lines; '#' starts a comment line; keys are flag names
/// without the leading dashes.
inline std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file: " + path);
  std::vector<std::pair<std::string, std::string>> items;
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return std::string();
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw UsageError(path + ":" + std::to_string(lineno) + ": expected key=value");
    }
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    if (key.empty()) throw UsageError(path + ":" + std::to_string(lineno) + ": empty key");
    if (key == "config") throw UsageError(path + ": config files cannot include other config files");
    items.emplace_back(std::move(key), std::move(value));
  }
  return items;
}

inline Point parse_point(const std::string& text, const std::string& flag) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    char* end = nullptr;
    const double v = std::strtod(cell.c_str(), &end);
    if (cell.empty() || end == cell.c_str() || *end != '\0' || !std::isfinite(v)) {
      throw UsageError(flag + ": expected a comma-separated list of numbers, got '" + text + "'");
    }
    values.push_back(v);
  }
  if (values.empty()) throw UsageError(flag + ": empty list");
  Point p(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) p[static_cast<Eigen::Index>(i)] = values[i];
  return p;
}

namespace detail {

using nshr::detail::sci;

template <class T>
CLI::Option* add(CLI::App* app, const std::string& name, T& target, const std::string& help) {
  return app->add_option(name, target, help)
      ->capture_default_str()
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
}

inline void build(CLI::App& app, Options& o) {
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Print help for every subcommand");
  app.add_option("--config", o.config,
                 "key=value file; keys are flag names without dashes; values override flags")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.add_flag_callback("--version", [] { throw CLI::CallForVersion(NSHR_VERSION_STRING, 0); },
                        "Print the version and exit");

  auto* sim = app.add_subcommand("simulate", "Integrate one trajectory and export diagnostics CSV");
  auto& s = o.simulate;
  add(sim, "--dynamic", s.dynamic, "Model")
      ->check(CLI::IsMember({"nshr", "hrmmd", "baseline-delta", "baseline-unit", "al", "bk"}));
  add(sim, "--operator", s.op, "hrmmd driver: rotation or subdifferential of the test objective")
      ->check(CLI::IsMember({"rotation", "subdifferential"}));
  add(sim, "--form", s.form, "First-order system: shift (any model) or xy (needs beta > 0)")
      ->check(CLI::IsMember({"shift", "xy"}));
  add(sim, "--alpha", s.alpha, "Viscous damping alpha [dimensionless]");
  add(sim, "--beta", s.beta, "Hessian-damping weight beta [time units]; baselines force 0");
  add(sim, "--p", s.p, "delta(t) = t^p exponent [dimensionless] (ignored for al, bk)");
  add(sim, "--c", s.c, "gamma(t) = c t^(p+2) scale [time^-(p+2)] (ignored for al, bk)");
  add(sim, "--t0", s.t0, "Initial time [time units]");
  add(sim, "--t-end", s.t_end, "Final time [time units]");
  add(sim, "--x0", s.x0, "Initial position, comma list [state units]");
  add(sim, "--v0", s.v0, "Initial velocity, comma list [state units / time]");
  add(sim, "--abs-tol", s.abs_tol, "Absolute integration tolerance [state units]");
  add(sim, "--rel-tol", s.rel_tol, "Relative integration tolerance [dimensionless]");
  add(sim, "--samples", s.samples, "Log-spaced output samples [count]");
  add(sim, "--out", s.out, "Output directory");

  auto* bench = app.add_subcommand("bench", "Run a built-in experiment plan");
  add(bench, "--plan", o.bench.plan, "Plan name")
      ->check(CLI::IsMember({"vary_beta", "vary_alpha", "compare", "monotone_demo", "dnshr_demo"}));
  add(bench, "--out", o.bench.out, "Output directory");

  auto* val = app.add_subcommand("validate",
                                 "Check B or D for delta = t^p, gamma = c t^(p+2)");
  auto& v = o.validate;
  add(val, "--assumption", v.assumption, "B (optimization) or D (monotone)")
      ->check(CLI::IsMember({"B", "D"}));
  add(val, "--alpha", v.alpha, "Viscous damping alpha [dimensionless]");
  add(val, "--sigma", v.sigma, "Energy parameter sigma in (0, alpha - 1), used by D [dimensionless]");
  add(val, "--p", v.p, "delta(t) = t^p exponent [dimensionless]");
  add(val, "--c", v.c, "gamma(t) = c t^(p+2) scale [time^-(p+2)]");

  auto* dn = app.add_subcommand("dnshr", "Run the discrete proximal scheme (experimental)");
  // --h is the step size, so help here is --help only.
  dn->set_help_flag("--help", "Print this help message and exit");
  auto& d = o.dnshr;
  add(dn, "--h",d.h, "Step size h; t_k = k h [time units]");
  add(dn, "--n", d.n, "Maximum iterations N [count]");
  add(dn, "--alpha", d.alpha, "Viscous damping alpha [dimensionless]");
  add(dn, "--beta", d.beta, "Hessian-damping weight beta [time units]");
  add(dn, "--p", d.p, "delta(t) = t^p exponent [dimensionless]");
  add(dn, "--c", d.c, "gamma(t) = c t^(p+2) scale [time^-(p+2)]");
  add(dn, "--threshold", d.threshold, "Stop once f(u_k) - f* falls below this [objective units]");
  add(dn, "--x0", d.x0, "x_0, comma list [state units]");
  add(dn, "--x1", d.x1, "x_1, comma list [state units]; defaults to x_0");
  add(dn, "--out", d.out, "Output directory");
}

/// Appends config items among the selected subcommand's flags so that, with
/// take-last semantics, config values win over flags.
inline std::vector<std::string> with_config(const std::vector<std::string>& args,
                                            const std::vector<std::pair<std::string, std::string>>& items,
                                            const CLI::App& sub) {
  std::vector<std::string> out = args;
  for (const auto& [key, value] : items) {
    if (sub.get_option_no_throw("--" + key) == nullptr) {
      throw UsageError("config key '" + key + "' is not a flag of '" + sub.get_name() + "'");
    }
    out.push_back("--" + key);
    out.push_back(value);
  }
  return out;
}

inline void print_fit(std::ostream& out, const std::string& prefix, const SeriesSummary& s) {
  if (!s.oscillation) return;
  out << prefix << "rate=" << (s.fit.exponent ? sci(*s.fit.exponent)
                                                : std::string(s.fit.floor_hit ? "floor-hit" : "none"))
      << '\n';
  out << prefix << "oscillation=" << sci(*s.oscillation) << '\n';
}

inline void print_result(std::ostream& out, const RunResult& r) {
  for (const auto& c : r.configurations) {
    const std::string k = c.key + ".";
    out << k << "status=" << (c.ok ? "ok" : "failed") << '\n';
    if (!c.ok) {
      out << k << "error=" << c.error << '\n';
      continue;
    }
    const auto& last = c.series.back();
    out << k << "final.obj_gap=" << sci(last.obj_gap) << '\n';
    out << k << "final.grad_norm=" << sci(last.grad_norm) << '\n';
    out << k << "final.x_norm=" << sci(last.x_norm) << '\n';
    print_fit(out, k + "obj_gap.", c.obj_gap);
    print_fit(out, k + "grad_norm.", c.grad_norm);
    out << k << "wall_seconds=" << sci(c.wall_seconds) << '\n';
  }
}

inline int finish_run(std::ostream& out, std::ostream& err, const RunResult& r,
                      const std::string& dir) {
  for (const auto& p : export_csv(r, dir)) out << "wrote=" << p.string() << '\n';
  print_result(out, r);
  int code = kExitOk;
  for (const auto& c : r.configurations) {
    if (!c.ok) {
      err << "configuration " << c.key << " failed: " << c.error << '\n';
      code = kExitFailure;
    }
  }
  if (r.dnshr) {
    out << "dnshr.status=" << to_string(r.dnshr->status) << '\n';
    out << "dnshr.iterations=" << r.dnshr->history.size() << '\n';
    out << "dnshr.final_gap=" << sci(r.dnshr->history.back().gap) << '\n';
    out << "dnshr.max_implicit_residual=" << sci(r.dnshr->max_implicit_residual) << '\n';
    if (r.dnshr->status == DnshrStatus::Diverged) {
      err << "dnshr: iterates left the divergence guard\n";
      code = kExitFailure;
    }
  }
  return code;
}

inline ExperimentPlan simulate_plan(const SimulateOptions& s, bool beta_given) {
  auto f = std::make_shared<const TestObjective>();
  DynamicSpec spec;
  spec.kind = parse_dynamic_kind(s.dynamic);
  spec.alpha = s.alpha;
  spec.beta = s.beta;
  spec.t0 = s.t0;
  spec.schedule = std::make_shared<PolynomialSchedule>(s.p, s.c, s.t0);
  spec.driver = std::shared_ptr<const ProxObjective>(f);
  switch (spec.kind) {
    case DynamicKind::HRMMD:
      if (s.op == "rotation") {
        spec.driver = std::shared_ptr<const MonotoneOperator>(make_rotation_operator());
      } else {
        spec.driver = std::shared_ptr<const MonotoneOperator>(
            std::make_shared<SubdifferentialOperator>(f));
      }
      break;
    case DynamicKind::BaselineDelta:
    case DynamicKind::BaselineUnit:
      if (beta_given && s.beta != 0.0) throw UsageError("--beta must be 0 for baseline dynamics");
      spec.beta = 0.0;
      break;
    case DynamicKind::AttouchLaszlo:
    case DynamicKind::BotKarapetyants: {
      const ExperimentPlan cmp = make_compare_plan();
      DynamicSpec ref = cmp.configurations[spec.kind == DynamicKind::AttouchLaszlo ? 0 : 3].spec;
      ref.alpha = s.alpha;
      ref.beta = s.beta;
      if (ref.beta_schedule) ref.beta_schedule = PowerLaw{s.beta, 0.0};
      ref.t0 = s.t0;
      const auto* laws = dynamic_cast<const PowerSchedule*>(ref.schedule.get());
      ref.schedule = std::make_shared<PowerSchedule>(laws->delta_law(), laws->gamma_law(), s.t0);
      spec = ref;
      break;
    }
    case DynamicKind::NSHR: break;
  }

  ExperimentPlan plan;
  plan.name = "simulate";
  plan.t0 = s.t0;
  plan.t_end = s.t_end;
  plan.samples = s.samples;
  plan.oscillation_window = {s.t0, s.t_end};
  plan.fit_window = {std::max(s.t0, defaults::fit_lo * s.t_end / defaults::t_end), s.t_end};
  plan.x0 = parse_point(s.x0, "--x0");
  plan.v0 = parse_point(s.v0, "--v0");
  plan.integrator.abs_tol = s.abs_tol;
  plan.integrator.rel_tol = s.rel_tol;
  plan.form = s.form == "xy" ? Reformulation::Paper : Reformulation::Shift;
  plan.configurations.push_back({s.dynamic, spec});
  if (plan.x0.size() != 2 || plan.v0.size() != 2) {
    throw UsageError("--x0 and --v0 must have two entries (the test objective is two-dimensional)");
  }
  plan.validate();
  return plan;
}

inline ExperimentPlan dnshr_plan(const DnshrOptions& d) {
  ExperimentPlan plan;
  plan.name = "dnshr";
  DnshrPlan dp;
  dp.config.h = d.h;
  dp.config.alpha = d.alpha;
  dp.config.beta = d.beta;
  dp.config.max_iterations = d.n;
  dp.config.threshold = d.threshold;
  require(d.h > 0.0, "--h must be positive");
  dp.config.schedule = std::make_shared<PolynomialSchedule>(d.p, d.c, d.h);
  dp.config.objective = std::make_shared<const TestObjective>();
  dp.x0 = parse_point(d.x0, "--x0");
  dp.x1 = d.x1.empty() ? dp.x0 : parse_point(d.x1, "--x1");
  if (dp.x0.size() != 2 || dp.x1.size() != 2) throw UsageError("--x0 and --x1 need two entries");
  plan.dnshr = dp;
  plan.validate();
  return plan;
}

inline void print_report(std::ostream& out, const AssumptionReport& r) {
  out << "assumption=" << r.assumption << '\n';
  out << "method=" << r.method << '\n';
  out << "satisfied=" << (r.satisfied ? "true" : "false") << '\n';
  if (r.zeta) out << "zeta=" << sci(*r.zeta) << '\n';
  if (r.growth_bound) out << "growth_bound=" << sci(*r.growth_bound) << '\n';
  if (r.threshold) out << "threshold=" << sci(*r.threshold) << '\n';
  for (std::size_t i = 0; i < r.conditions.size(); ++i) {
    const auto& c = r.conditions[i];
    const std::string k = "condition." + std::to_string(i + 1) + ".";
    out << k << "name=" << c.name << '\n';
    out << k << "holds=" << (c.holds ? "true" : "false") << '\n';
    out << k << "estimate=" << sci(c.estimate) << '\n';
    out << k << "bound=" << sci(c.bound) << '\n';
    out << k << "detail=" << c.detail << '\n';
  }
}

}  // namespace detail

/// args excludes the program name.
inline int parse_and_dispatch(const std::vector<std::string>& args, std::ostream& out,
                              std::ostream& err) {
  auto parse = [](CLI::App& app, std::vector<std::string> a) {
    std::reverse(a.begin(), a.end());
    app.parse(a);
  };

  Options o;
  CLI::App app{"Inertial proximal dynamics: simulation, benchmarks, assumption checks", "nshr"};
  detail::build(app, o);
  try {
    parse(app, args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  const std::string cmd = sub->get_name();

  ExperimentPlan plan;
  try {
    if (!o.config.empty()) {
      const auto items = read_config_file(o.config);
      const auto merged = detail::with_config(args, items, *sub);
      o = Options{};
      CLI::App again{"", "nshr"};
      detail::build(again, o);
      try {
        parse(again, merged);
      } catch (const CLI::ParseError& e) {
        const int code = again.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
      }
      sub = again.get_subcommands().front();
      if (cmd == "simulate") plan = detail::simulate_plan(o.simulate, sub->count("--beta") > 0);
    } else if (cmd == "simulate") {
      plan = detail::simulate_plan(o.simulate, sub->count("--beta") > 0);
    }
    if (cmd == "dnshr") plan = detail::dnshr_plan(o.dnshr);
    if (cmd == "bench") plan = make_plan(o.bench.plan);
  } catch (const std::invalid_argument& e) {
    err << "nshr " << cmd << ": " << e.what() << '\n';
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "nshr " << cmd << ": " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (cmd == "validate") {
      const auto& v = o.validate;
      AssumptionReport report;
      try {
        const PolynomialSchedule schedule(v.p, v.c, defaults::t0);
        report = v.assumption == "B" ? validate_assumption_B(schedule, v.alpha)
                                     : validate_assumption_D(schedule, v.alpha, v.sigma);
      } catch (const std::invalid_argument& e) {
        err << "nshr validate: " << e.what() << '\n';
        return kExitUsage;
      }
      detail::print_report(out, report);
      return report.satisfied ? kExitOk : kExitUnsatisfied;
    }
    const RunResult result = run_plan(plan);
    const std::string dir =
        cmd == "simulate" ? o.simulate.out : cmd == "bench" ? o.bench.out : o.dnshr.out;
    return detail::finish_run(out, err, result, dir);
  } catch (const std::exception& e) {
    err << "nshr " << cmd << ": " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace nshr::cli
