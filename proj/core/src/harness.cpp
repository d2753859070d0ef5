#include "aei/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>

#include <CLI11.hpp>

#include "aei/csv.hpp"
#include "aei/reference.hpp"
#include "aei/verify.hpp"

namespace aei {

namespace {

constexpr std::array<std::pair<Experiment, std::string_view>, 5> kExperiments{{
    {Experiment::Drift, "drift"},
    {Experiment::Convergence, "convergence"},
    {Experiment::Efficiency, "efficiency"},
    {Experiment::Resonance, "resonance"},
    {Experiment::Verify, "verify"},
}};

std::vector<MethodId> with_baseline() {
  std::vector<MethodId> m = all_methods();
  m.push_back(MethodId::SE);
  return m;
}

std::vector<double> powers_of_two(int i_min, int i_max) {
  std::vector<double> out;
  for (int i = i_min; i <= i_max; ++i) out.push_back(std::ldexp(1.0, -i));
  return out;
}

std::string name(MethodId id) { return std::string(to_string(id)); }

}  // namespace

std::string_view to_string(Experiment e) {
  for (const auto& [x, n] : kExperiments) {
    if (x == e) return n;
  }
  return "?";
}

const std::vector<std::string>& csv_header(Experiment e) {
  static const std::map<Experiment, std::vector<std::string>> headers{
      {Experiment::Drift, {"method", "eps", "h", "t", "err_rel"}},
      {Experiment::Convergence,
       {"method", "eps", "h", "err_x", "err_v", "skipped"}},
      {Experiment::Resonance,
       {"method", "eps", "ratio", "ratio_times_normB", "err_x"}},
      {Experiment::Verify, {"check", "method", "value", "threshold", "pass"}},
      {Experiment::Efficiency, {"method", "eps", "h", "cpu_seconds", "err_x"}},
  };
  return headers.at(e);
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.methods.empty()) throw ConfigError("--methods: method list is empty");
  if (!(cfg.t_end > 0.0) || !std::isfinite(cfg.t_end)) {
    throw ConfigError("--T: must be positive");
  }
  if (cfg.stride < 1) throw ConfigError("--stride: must be >= 1");
  if (cfg.epsilons.empty()) throw ConfigError("--eps: list is empty");
  for (double e : cfg.epsilons) {
    if (!(e > 0.0 && e <= 1.0)) throw ConfigError("--eps: values must lie in (0, 1]");
  }
  for (double h : cfg.steps) {
    if (!(h > 0.0) || h > cfg.t_end) throw ConfigError("--step: need 0 < h <= T");
  }
  if (cfg.em1.quad_order < 2) throw ConfigError("--quad-order: must be >= 2");
  if (!(cfg.em1.fp_tol > 0.0)) throw ConfigError("--fp-tol: must be positive");
  if (cfg.em1.fp_max < 1) throw ConfigError("--fp-max: must be >= 1");
  if (!(cfg.reference_tol >= 1e-13 && cfg.reference_tol <= 1e-6)) {
    throw ConfigError("--ref-tol: must lie in [1e-13, 1e-6]");
  }
  switch (cfg.experiment) {
    case Experiment::Convergence:
      if (cfg.exponents.empty()) throw ConfigError("--i-min/--i-max: empty grid");
      if (cfg.t_end > 1.0) throw ConfigError("--T: convergence needs T <= 1");
      break;
    case Experiment::Resonance:
      if (cfg.ratios.empty()) throw ConfigError("--ratio-count: empty grid");
      for (double r : cfg.ratios) {
        if (!(r > 0.0)) throw ConfigError("--ratio-max: ratios must be positive");
      }
      break;
    default:
      break;
  }
}

namespace {

std::string describe(Experiment e) {
  switch (e) {
    case Experiment::Drift:
      return "Relative energy error along long runs";
    case Experiment::Convergence:
      return "Global errors in x and v against h and epsilon";
    case Experiment::Efficiency:
      return "Error at T against wall-clock time";
    case Experiment::Resonance:
      return "Error at T = 1 over a grid of h/epsilon";
    case Experiment::Verify:
      return "Structural checks of the coefficient functions and one-step maps";
  }
  return {};
}

}  // namespace

ExperimentConfig parse_cli(const std::vector<std::string>& args) {
  CLI::App app{"Structure-preserving exponential integrators: experiments",
               "aei"};
  app.require_subcommand(1, 1);

  struct Raw {
    std::vector<std::string> methods;
    std::vector<double> eps;
    std::vector<double> h;
    int i_min = 6, i_max = 10;
    double ratio_max = 4.5 * std::numbers::pi;
    int ratio_count = 200;
    double t_end = 0.0;
    int stride = 0;
    std::string out = ".";
    std::uint64_t seed = 42;
    int quad_order = Em1Options{}.quad_order;
    double fp_tol = Em1Options{}.fp_tol;
    int fp_max = Em1Options{}.fp_max;
    double ref_tol = 1e-12;
    int workers = 0;
    bool long_horizon = false;
  } raw;

  std::map<std::string, CLI::App*> subs;
  for (const auto& [exp, label] : kExperiments) {
    CLI::App* sub = app.add_subcommand(std::string(label), describe(exp));
    subs[std::string(label)] = sub;
    sub->add_option("--methods", raw.methods,
                    "Comma-separated subset of M1,M2,SM1,SM2,SM3,EM1,SE")
        ->delimiter(',');
    sub->add_option("--eps", raw.eps, "Comma-separated epsilon values")
        ->delimiter(',');
    sub->add_option("--T", raw.t_end, "Final time");
    sub->add_option("--out", raw.out, "Output directory");
    sub->add_option("--seed", raw.seed, "Seed for random verification states");
    sub->add_option("--quad-order", raw.quad_order, "EM1 Gauss-Legendre nodes");
    sub->add_option("--fp-tol", raw.fp_tol, "EM1 fixed-point tolerance");
    sub->add_option("--fp-max", raw.fp_max, "EM1 fixed-point iteration cap");
    sub->add_option("--ref-tol", raw.ref_tol, "Reference solver tolerance");
    sub->add_option("--workers", raw.workers, "Worker threads (0: all cores)");
    if (exp == Experiment::Drift || exp == Experiment::Efficiency) {
      sub->add_option("--step", raw.h, "Comma-separated step sizes h (default h = eps)")
          ->delimiter(',');
    }
    if (exp == Experiment::Drift) {
      sub->add_option("--stride", raw.stride, "Record every stride-th step");
      sub->add_flag("--long", raw.long_horizon, "Use the T = 100000 horizon");
    }
    if (exp == Experiment::Convergence || exp == Experiment::Efficiency) {
      sub->add_option("--i-min", raw.i_min, "Smallest exponent i in h = 2^-i");
      sub->add_option("--i-max", raw.i_max, "Largest exponent i in h = 2^-i");
    }
    if (exp == Experiment::Resonance) {
      sub->add_option("--ratio-max", raw.ratio_max, "Largest h/eps");
      sub->add_option("--ratio-count", raw.ratio_count, "Number of h/eps values");
    }
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    for (const auto& [label, sub] : subs) {
      if (sub->parsed()) throw HelpRequested(sub->help());
    }
    throw HelpRequested(app.help());
  } catch (const CLI::ParseError& e) {
    throw ConfigError(e.what());
  }

  ExperimentConfig cfg;
  std::string chosen;
  for (const auto& [label, sub] : subs) {
    if (sub->parsed()) chosen = label;
  }
  for (const auto& [exp, label] : kExperiments) {
    if (label == chosen) cfg.experiment = exp;
  }
  const CLI::App& sub = *subs.at(chosen);
  auto given = [&](const std::string& flag) {
    return sub.get_option_no_throw(flag) && sub.get_option_no_throw(flag)->count() > 0;
  };

  for (const std::string& m : raw.methods) {
    const auto id = parse_method(m);
    if (!id) throw ConfigError("--methods: unknown method '" + m + "'");
    cfg.methods.push_back(*id);
  }
  cfg.epsilons = raw.eps;
  cfg.steps = raw.h;
  cfg.output_dir = raw.out;
  cfg.seed = raw.seed;
  cfg.em1 = {raw.quad_order, raw.fp_tol, raw.fp_max};
  cfg.reference_tol = raw.ref_tol;
  cfg.workers = raw.workers;
  cfg.stride = 1;

  switch (cfg.experiment) {
    case Experiment::Drift:
      if (cfg.methods.empty()) cfg.methods = with_baseline();
      if (cfg.epsilons.empty()) cfg.epsilons = {0.05};
      cfg.t_end = given("--T") ? raw.t_end : (raw.long_horizon ? 1e5 : 1000.0);
      cfg.stride = given("--stride") ? raw.stride : 100;
      break;
    case Experiment::Convergence:
      if (cfg.methods.empty()) cfg.methods = all_methods();
      if (cfg.epsilons.empty()) cfg.epsilons = {1.0 / 16, 1.0 / 64};
      cfg.t_end = given("--T") ? raw.t_end : 1.0;
      for (int i = raw.i_min; i <= raw.i_max; ++i) cfg.exponents.push_back(i);
      break;
    case Experiment::Efficiency:
      if (cfg.methods.empty()) cfg.methods = with_baseline();
      if (cfg.epsilons.empty()) cfg.epsilons = {0.05};
      cfg.t_end = given("--T") ? raw.t_end : 10.0;
      if (cfg.steps.empty()) cfg.steps = powers_of_two(raw.i_min, raw.i_max);
      break;
    case Experiment::Resonance:
      if (cfg.methods.empty()) cfg.methods = all_methods();
      if (cfg.epsilons.empty()) cfg.epsilons = {1.0 / 1024};
      cfg.t_end = given("--T") ? raw.t_end : 1.0;
      if (raw.ratio_count > 0 && raw.ratio_max > 0.0) {
        cfg.ratios = ratio_grid(raw.ratio_max, raw.ratio_count);
      }
      break;
    case Experiment::Verify:
      if (cfg.methods.empty()) cfg.methods = all_methods();
      if (cfg.epsilons.empty()) cfg.epsilons = {0.05};
      cfg.t_end = given("--T") ? raw.t_end : 1000.0;
      break;
  }
  validate(cfg);
  return cfg;
}

namespace {

int run_drift(const ExperimentConfig& cfg, CsvWriter& csv, std::ostream& log) {
  struct Task {
    MethodId id;
    double eps;
    double h;
  };
  std::vector<Task> tasks;
  for (MethodId id : cfg.methods) {
    for (double eps : cfg.epsilons) {
      if (cfg.steps.empty()) {
        tasks.push_back({id, eps, eps});
      } else {
        for (double h : cfg.steps) tasks.push_back({id, eps, h});
      }
    }
  }
  std::vector<Trajectory> results(tasks.size());
  std::vector<std::string> errors(tasks.size());
  parallel_for(tasks.size(), cfg.workers, [&](std::size_t i) {
    const Problem prob = builtin_problem(tasks[i].eps);
    try {
      const MethodSpec m = make_method(tasks[i].id, prob, tasks[i].h, cfg.em1);
      results[i] = integrate(m, prob, cfg.t_end, cfg.stride);
    } catch (const Error& e) {
      errors[i] = e.what();
    }
  });

  int status = kExitOk;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const Task& t = tasks[i];
    if (!errors[i].empty()) {
      log << name(t.id) << " eps=" << t.eps << " h=" << t.h
          << ": " << errors[i] << "\n";
      status = kExitRuntimeError;
      continue;
    }
    const Trajectory& traj = results[i];
    if (traj.samples.size() >= 2) {
      const DriftSeries drift = energy_drift(traj);
      for (std::size_t k = 0; k < drift.times.size(); ++k) {
        csv.row({name(t.id), t.eps, t.h, drift.times[k], drift.err[k]});
      }
      log << std::left << std::setw(4) << name(t.id) << " eps=" << t.eps
          << " h=" << t.h << "  max|ERR|=" << format_double(drift.max_abs)
          << "  second/first=" << format_double(drift.secular_ratio) << "\n";
    }
    for (const auto& d : traj.diagnostics) log << "  note: " << d << "\n";
    if (traj.aborted) {
      log << "  aborted: " << traj.abort_reason << "\n";
      status = kExitRuntimeError;
    }
  }
  return status;
}

int run_convergence(const ExperimentConfig& cfg, CsvWriter& csv,
                    std::ostream& log) {
  ConvergenceOptions opts;
  opts.reference_tol = cfg.reference_tol;
  opts.em1 = cfg.em1;
  opts.workers = cfg.workers;
  for (MethodId id : cfg.methods) {
    const ConvergenceTable table = convergence_study(
        id, cfg.epsilons, cfg.exponents, cfg.t_end, opts);
    for (const auto& r : table.rows) {
      csv.row({table.method, r.epsilon, r.h, r.err_x, r.err_v, r.skipped});
    }
    for (double eps : table.epsilons()) {
      log << std::left << std::setw(4) << table.method << " eps=" << eps
          << "  slope_x=" << format_double(table.slope_x(eps))
          << "  slope_v=" << format_double(table.slope_v(eps)) << "\n";
    }
  }
  return kExitOk;
}

int run_efficiency(const ExperimentConfig& cfg, CsvWriter& csv,
                   std::ostream& log) {
  int status = kExitOk;
  for (double eps : cfg.epsilons) {
    const Problem prob = builtin_problem(eps);
    const std::vector<double> steps = cfg.steps.empty()
                                          ? std::vector<double>{eps}
                                          : cfg.steps;
    // Each step size lands on its own final time n·h.
    std::vector<double> finals;
    for (double h : steps) {
      finals.push_back(static_cast<double>(std::lround(cfg.t_end / h)) * h);
    }
    std::vector<double> times = finals;
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());
    ReferenceOptions ref_opts;
    ref_opts.tol = cfg.reference_tol;
    const std::vector<State> refs = reference_states(prob, times, ref_opts);

    for (MethodId id : cfg.methods) {
      for (std::size_t k = 0; k < steps.size(); ++k) {
        const double h = steps[k];
        const MethodSpec m = make_method(id, prob, h, cfg.em1);
        const auto start = std::chrono::steady_clock::now();
        const auto n = static_cast<int>(std::lround(cfg.t_end / h));
        const Trajectory traj = integrate(m, prob, cfg.t_end, n);
        const double seconds = std::chrono::duration<double>(
                                   std::chrono::steady_clock::now() - start)
                                   .count();
        const auto it = std::find(times.begin(), times.end(), finals[k]);
        const State& ref = refs[static_cast<std::size_t>(it - times.begin())];
        double err = std::numeric_limits<double>::infinity();
        if (traj.aborted) {
          status = kExitRuntimeError;
        } else {
          err = (traj.back().x - ref.x).norm() / ref.x.norm();
        }
        csv.row({name(id), eps, h, seconds, err});
        log << std::left << std::setw(4) << name(id) << " eps=" << eps
            << " h=" << h << "  seconds=" << seconds
            << "  err_x=" << format_double(err) << "\n";
      }
    }
  }
  return status;
}

int run_resonance(const ExperimentConfig& cfg, CsvWriter& csv,
                  std::ostream& log) {
  ResonanceOptions opts;
  opts.reference_tol = cfg.reference_tol;
  opts.em1 = cfg.em1;
  opts.workers = cfg.workers;
  for (MethodId id : cfg.methods) {
    for (double eps : cfg.epsilons) {
      const auto points = resonance_scan(id, eps, cfg.ratios, cfg.t_end, opts);
      int singular = 0;
      double worst = 0.0;
      for (const auto& p : points) {
        csv.row({name(id), eps, p.ratio, p.ratio_times_norm, p.err_x});
        if (p.singular) ++singular;
        if (std::isfinite(p.err_x)) worst = std::max(worst, p.err_x);
      }
      log << std::left << std::setw(4) << name(id) << " eps=" << eps
          << "  max finite err_x=" << format_double(worst)
          << "  singular points=" << singular << "\n";
    }
  }
  return kExitOk;
}

int run_verify(const ExperimentConfig& cfg, CsvWriter& csv, std::ostream& log) {
  VerifyOptions opts;
  opts.seed = cfg.seed;
  opts.drift_t_end = cfg.t_end;
  opts.em1 = cfg.em1;
  const auto checks = verification_suite(opts);
  bool all_pass = true;
  log << std::left << std::setw(40) << "check" << std::setw(8) << "method"
      << std::setw(26) << "value" << std::setw(28) << "threshold"
      << "result\n";
  for (const CheckResult& c : checks) {
    if (c.method != "-") {
      const auto id = parse_method(c.method);
      if (id && std::find(cfg.methods.begin(), cfg.methods.end(), *id) ==
                    cfg.methods.end()) {
        continue;
      }
    }
    csv.row({c.check, c.method, c.value, c.threshold, c.pass});
    all_pass = all_pass && c.pass;
    log << std::left << std::setw(40) << c.check << std::setw(8) << c.method
        << std::setw(26) << format_double(c.value)
        << std::setw(28)
        << (std::string(c.upper_bound ? "<= " : ">= ") +
            format_double(c.threshold))
        << (c.pass ? "PASS" : "FAIL") << "\n";
  }
  return all_pass ? kExitOk : kExitCheckFailed;
}

}  // namespace

int run_experiment(const ExperimentConfig& cfg, std::ostream& log) {
  validate(cfg);
  std::filesystem::create_directories(cfg.output_dir);
  const auto path =
      cfg.output_dir / (std::string(to_string(cfg.experiment)) + ".csv");
  CsvWriter csv(path, csv_header(cfg.experiment));
  int status = kExitOk;
  try {
    switch (cfg.experiment) {
      case Experiment::Drift:
        status = run_drift(cfg, csv, log);
        break;
      case Experiment::Convergence:
        status = run_convergence(cfg, csv, log);
        break;
      case Experiment::Efficiency:
        status = run_efficiency(cfg, csv, log);
        break;
      case Experiment::Resonance:
        status = run_resonance(cfg, csv, log);
        break;
      case Experiment::Verify:
        status = run_verify(cfg, csv, log);
        break;
    }
  } catch (const std::exception& e) {
    csv.flush();
    log << "error: " << e.what() << "\n";
    return kExitRuntimeError;
  }
  csv.flush();
  log << "wrote " << path.string() << "\n";
  return status;
}

}  // namespace aei
