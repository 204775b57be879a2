// bolusopt: simulate, optimize and verify rectangular insulin boluses.
//
// Exit codes: 0 ok, 1 property violation, 2 invalid input, 3 numerical failure.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bolusopt/errors.hpp"
#include "bolusopt/format.hpp"
#include "bolusopt/report.hpp"
#include "bolusopt/scenario_io.hpp"
#include "bolusopt/solvers.hpp"
#include "bolusopt/verify.hpp"

namespace fs = std::filesystem;
using namespace bolusopt;

namespace {

constexpr int kOk = 0;
constexpr int kViolation = 1;
constexpr int kInvalid = 2;
constexpr int kNumerical = 3;

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput:
    case ErrorKind::InfeasibleBasal:
    case ErrorKind::InfeasibleFloor:
    case ErrorKind::NoFloorContact:
    case ErrorKind::PreconditionFailed:
    case ErrorKind::WindowTooNarrow:
    case ErrorKind::GridMismatch:
      return kInvalid;
    default:
      return kNumerical;
  }
}

// Tags errors with the stage that raised them.
struct StageError : std::runtime_error {
  StageError(const std::string& stage, const Error& e)
      : std::runtime_error(stage + ": " + e.what()), kind(e.kind()) {}
  ErrorKind kind;
};

template <class F>
auto stage(const std::string& name, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    throw StageError(name, e);
  }
}

struct Options {
  std::string scenario;
  std::string mode = "global";
  std::string suite = "all";
  std::optional<double> tau, t_prime, u_hat;
  std::string out = ".";
  std::uint64_t seed = 1;
  std::size_t trials = 100;
  bool emit_mgdl = false;
  std::string grid;
};

Scenario load(const Options& o) {
  return stage("load scenario", [&] { return load_scenario(o.scenario, default_preset_dir()); });
}

fs::path out_dir(const Options& o) {
  fs::path dir(o.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw StageError("output", Error(ErrorKind::InvalidInput, "cannot create " + o.out));
  return dir;
}

std::string summary(const OptimizeResult& r) {
  std::ostringstream ss;
  ss << "t_prime=" << format_number(r.t_prime) << " tau=" << format_number(r.tau)
     << " u_hat=" << format_number(r.u_hat) << " gamma=" << format_number(r.gamma)
     << " classification=" << to_string(r.classification);
  return ss.str();
}

int cmd_simulate(const Options& o) {
  const Scenario sc = load(o);
  if (!o.tau) throw StageError("simulate", Error(ErrorKind::InvalidInput, "--tau is required"));
  const double tau = *o.tau;
  double t_prime = 0.0;
  if (o.t_prime) {
    t_prime = *o.t_prime;
  } else {
    t_prime = stage("optimize_delivery", [&] {
      return optimize_delivery(sc, tau, sc.solver.t_lo, sc.solver.t_hi).t_prime;
    });
  }
  double u_hat = 0.0;
  if (o.u_hat)
    u_hat = *o.u_hat;
  else
    u_hat = stage("solve_proper", [&] { return solve_proper(sc, t_prime, tau).u_hat; });

  const auto traj = stage("simulate", [&] {
    return simulate(sc.model, sc.input(u_hat, t_prime, tau), sc.meal, sc.sim);
  });
  const auto report = classify(traj, sc.lambda, sc.tol);

  std::ostringstream csv;
  write_trajectory_csv(csv, traj, o.emit_mgdl);
  const auto dir = out_dir(o);
  write_file_atomic(dir / "trajectory.csv", csv.str());
  write_file_atomic(dir / "report.json", shape_report_json(report));
  std::cout << "t_prime=" << format_number(t_prime) << " tau=" << format_number(tau)
            << " u_hat=" << format_number(u_hat) << " gamma=" << format_number(report.gamma)
            << " minimum=" << format_number(report.minimum)
            << " classification=" << to_string(report.classification) << '\n';
  return kOk;
}

std::vector<double> parse_grid(const std::string& spec) {
  // "a:b:n" (n evenly spaced points) or "v1,v2,..."
  std::vector<double> out;
  auto bad = [&] { return StageError("grid", Error(ErrorKind::InvalidInput, "bad --grid '" + spec + "'")); };
  try {
    if (spec.find(':') != std::string::npos) {
      std::istringstream ss(spec);
      std::string a, b, n;
      std::getline(ss, a, ':');
      std::getline(ss, b, ':');
      std::getline(ss, n);
      const double lo = std::stod(a), hi = std::stod(b);
      const int count = std::stoi(n);
      if (count < 1) throw bad();
      for (int i = 0; i < count; ++i)
        out.push_back(count == 1 ? lo : lo + (hi - lo) * i / (count - 1));
    } else {
      std::istringstream ss(spec);
      std::string item;
      while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
    }
  } catch (const std::logic_error&) {
    throw bad();
  }
  if (out.empty()) throw bad();
  return out;
}

int cmd_optimize(const Options& o) {
  const Scenario sc = load(o);
  auto need = [&](const std::optional<double>& v, const char* flag) {
    if (!v) throw StageError("optimize", Error(ErrorKind::InvalidInput, std::string(flag) + " is required for --mode " + o.mode));
    return *v;
  };
  const auto dir = out_dir(o);

  if (o.mode == "sweep") {
    const auto grid = parse_grid(o.grid.empty() ? "2:1000:20" : o.grid);
    const bool over_t_prime = o.tau.has_value() && !o.t_prime.has_value();
    const auto entries = stage("sweep_gamma", [&] {
      return over_t_prime ? sweep_gamma(sc, SweepParameter::TPrime, grid, o.tau)
                          : sweep_gamma(sc, SweepParameter::Tau, grid, o.t_prime);
    });
    std::ostringstream csv;
    write_sweep_csv(csv, entries);
    write_file_atomic(dir / "sweep.csv", csv.str());
    for (const auto& e : entries)
      std::cout << format_number(e.value) << ' '
                << (e.ok() ? format_number(e.gamma) + " " + std::string(to_string(e.classification)) : e.error)
                << '\n';
    return kOk;
  }

  OptimizeResult r;
  if (o.mode == "global") {
    r = stage("optimize_global", [&] { return optimize_global(sc); });
  } else if (o.mode == "duration") {
    r = stage("optimize_duration", [&] {
      return optimize_duration(sc, sc.solver.tau_lo, sc.solver.tau_hi);
    });
  } else if (o.mode == "delivery") {
    const double tau = need(o.tau, "--tau");
    r = stage("optimize_delivery", [&] {
      return optimize_delivery(sc, tau, sc.solver.t_lo, sc.solver.t_hi);
    });
  } else if (o.mode == "duration-fixed-t'" || o.mode == "duration-fixed") {
    const double t_prime = need(o.t_prime, "--t-prime");
    r = stage("optimize_duration_fixed_delivery", [&] {
      return optimize_duration_fixed_delivery(sc, t_prime, sc.solver.tau_lo, sc.solver.tau_hi);
    });
  } else {
    throw StageError("optimize", Error(ErrorKind::InvalidInput, "unknown mode '" + o.mode + "'"));
  }

  std::ostringstream csv;
  write_sweep_csv(csv, r.sweep_log);
  write_file_atomic(dir / "sweep.csv", csv.str());
  write_file_atomic(dir / "result.json", optimize_result_json(r));
  std::cout << summary(r) << '\n';
  if (!r.note.empty()) std::cout << "note: " << r.note << '\n';
  return kOk;
}

int cmd_verify(const Options& o) {
  const Scenario sc = load(o);
  std::vector<Suite> suites;
  if (o.suite == "all") {
    suites = {Suite::SteadyState, Suite::Monotonicity, Suite::Intersections, Suite::Nesting};
  } else if (const auto s = suite_from_string(o.suite)) {
    suites = {*s};
  } else {
    throw StageError("verify", Error(ErrorKind::InvalidInput, "unknown suite '" + o.suite + "'"));
  }
  const auto dir = out_dir(o);
  bool all_passed = true;
  for (Suite s : suites) {
    const auto rep = stage(std::string(to_string(s)), [&] { return run_suite(sc, s, o.trials, o.seed); });
    write_file_atomic(dir / ("verify-" + std::string(to_string(s)) + ".json"), suite_report_json(rep));
    std::cout << to_string(s) << ": " << (rep.passed() ? "pass" : "FAIL") << " (checked "
              << rep.checked << ", skipped " << rep.skipped << ", violations "
              << rep.violations.size() << ")\n";
    for (const auto& v : rep.violations) {
      std::cout << "  trial " << v.trial << ": " << v.message;
      for (const auto& [k, x] : v.inputs) std::cout << ' ' << k << '=' << format_number(x);
      std::cout << '\n';
    }
    all_passed = all_passed && rep.passed();
  }
  return all_passed ? kOk : kViolation;
}

int cmd_presets() {
  const auto dir = default_preset_dir();
  const auto names = stage("presets", [&] { return list_presets(dir); });
  for (const auto& name : names) {
    const auto p = stage("presets", [&] { return load_preset(name, dir); });
    std::cout << name << '\t' << p.model << '\t' << p.source << '\n';
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Peak-glucose minimizing insulin bolus design"};
  app.require_subcommand(1);
  Options o;

  auto add_scenario = [&](CLI::App* cmd) {
    cmd->add_option("--scenario", o.scenario, "Scenario file (JSON)")->required();
    cmd->add_option("--out", o.out, "Output directory");
  };

  auto* sim = app.add_subcommand("simulate", "Simulate one bolus and classify the response");
  add_scenario(sim);
  sim->add_option("--tau", o.tau, "Bolus duration, min");
  sim->add_option("--t-prime", o.t_prime, "Delivery time, min (optimized when omitted)");
  sim->add_option("--u-hat", o.u_hat, "Bolus magnitude (floor-touching when omitted)");
  sim->add_flag("--emit-mgdl", o.emit_mgdl, "Add a mg/dL glucose column");

  auto* opt = app.add_subcommand("optimize", "Optimize delivery time and/or duration");
  add_scenario(opt);
  opt->add_option("--mode", o.mode, "global | duration | delivery | duration-fixed-t' | sweep");
  opt->add_option("--tau", o.tau, "Duration for delivery mode, or fixed duration of a t' sweep");
  opt->add_option("--t-prime", o.t_prime, "Delivery time for duration-fixed-t' mode");
  opt->add_option("--grid", o.grid, "Sweep grid: a:b:n or comma separated values");

  auto* ver = app.add_subcommand("verify", "Run randomized property suites");
  add_scenario(ver);
  ver->add_option("--suite", o.suite, "monotonicity | intersections | steady-state | nesting | all");
  ver->add_option("--trials", o.trials, "Trials per randomized suite");
  ver->add_option("--seed", o.seed, "Random seed");

  auto* pre = app.add_subcommand("presets", "List parameter presets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kInvalid;
  }

  try {
    if (sim->parsed()) return cmd_simulate(o);
    if (opt->parsed()) return cmd_optimize(o);
    if (ver->parsed()) return cmd_verify(o);
    if (pre->parsed()) return cmd_presets();
  } catch (const StageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.kind);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumerical;
  }
  return kInvalid;
}
