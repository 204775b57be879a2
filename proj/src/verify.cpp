#include "bolusopt/verify.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <utility>

#include <json.hpp>

#include "bolusopt/analysis.hpp"
#include "bolusopt/errors.hpp"
#include "bolusopt/solvers.hpp"

namespace bolusopt {

namespace {

constexpr std::array<std::pair<Suite, std::string_view>, 4> kSuiteNames{{
    {Suite::Monotonicity, "monotonicity"},
    {Suite::Intersections, "intersections"},
    {Suite::SteadyState, "steady-state"},
    {Suite::Nesting, "nesting"},
}};

std::mt19937_64 trial_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t trial) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(trial),
                    static_cast<std::uint32_t>(trial >> 32)};
  return std::mt19937_64(seq);
}

struct Pulse {
  double t_prime = 0.0;
  double tau = 0.0;
  double u_hat = 0.0;
};

// Sampling box for random pulses. Doses (u_hat * tau, or the impulse weight)
// are drawn relative to a proper reference bolus so both models see
// comparable perturbations.
struct Ranges {
  double t_lo = 0.0, t_hi = 0.0, tau_max = 0.0, dose_ref = 0.0;
};

Ranges ranges_for(const Scenario& sc) {
  Ranges r;
  r.t_lo = sc.solver.t_lo;
  r.t_hi = std::min(sc.solver.t_hi, 0.5 * sc.sim.horizon);
  r.tau_max = std::min(600.0, 0.25 * sc.sim.horizon);
  const double t_ref = r.t_lo + 0.3 * (r.t_hi - r.t_lo);
  r.dose_ref = sc.basal() * 200.0;
  try {
    const auto sol = solve_proper(sc, t_ref, 200.0);
    if (sol.u_hat > 0.0) r.dose_ref = sol.u_hat * 200.0;
  } catch (const Error&) {
  }
  return r;
}

Pulse draw_timing(std::mt19937_64& rng, const Ranges& r) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Pulse p;
  p.t_prime = r.t_lo + unit(rng) * (r.t_hi - r.t_lo);
  p.tau = unit(rng) < 0.1 ? 0.0 : 1.0 + unit(rng) * (r.tau_max - 1.0);
  return p;
}

double magnitude_for(double dose, double tau) { return tau > 0.0 ? dose / tau : dose; }

SimConfig glucose_config(const SimConfig& base) {
  SimConfig cfg = base;
  cfg.record_states = false;
  cfg.record_stride = 1;
  return cfg;
}

template <class F>
void for_each_index(std::size_t n, bool parallel, F&& f) {
  if (!parallel) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < count; ++i) f(static_cast<std::size_t>(i));
}

// One slot per trial; merged in trial order afterwards.
struct TrialOutcome {
  bool checked = false;
  bool skipped = false;
  std::optional<Violation> violation;
};

void merge(SuiteReport& rep, const std::vector<TrialOutcome>& outcomes) {
  for (const auto& o : outcomes) {
    rep.checked += o.checked ? 1 : 0;
    rep.skipped += o.skipped ? 1 : 0;
    if (o.violation) rep.violations.push_back(*o.violation);
  }
}

void monotonicity(const Scenario& sc, SuiteReport& rep, bool parallel) {
  const Ranges ranges = ranges_for(sc);
  const SimConfig cfg = glucose_config(sc.sim);
  const double u_bar = sc.basal();
  std::vector<TrialOutcome> out(rep.trials);
  for_each_index(rep.trials, parallel, [&](std::size_t i) {
    auto rng = trial_rng(rep.seed, 1, i);
    const Pulse p = draw_timing(rng, ranges);
    // magnitudes up to 1.25x the floor-touching one at this timing
    double scale = magnitude_for(ranges.dose_ref, p.tau);
    try {
      const double proper = solve_proper(sc, p.t_prime, p.tau).u_hat;
      if (proper > 0.0) scale = proper;
    } catch (const Error&) {
    }
    std::uniform_real_distribution<double> magnitude(0.0, 1.25 * scale);
    double u1 = magnitude(rng), u2 = magnitude(rng);
    if (u1 == u2) {
      out[i].skipped = true;
      return;
    }
    if (u1 > u2) std::swap(u1, u2);
    Violation v;
    v.trial = i;
    v.inputs = {{"t_prime", p.t_prime}, {"tau", p.tau}, {"u_hat_1", u1}, {"u_hat_2", u2}};
    try {
      const auto a = simulate(sc.model, {u_bar, u1, p.t_prime, p.tau}, sc.meal, cfg);
      const auto b = simulate(sc.model, {u_bar, u2, p.t_prime, p.tau}, sc.meal, cfg);
      out[i].checked = true;
      for (std::size_t k = 0; k < a.size(); ++k) {
        const double t = a.times[k];
        const bool strict = t > p.t_prime + 1.0;
        const bool ok = strict ? b.glucose[k] < a.glucose[k] : b.glucose[k] <= a.glucose[k];
        if (!ok) {
          v.message = strict ? "larger bolus does not strictly lower glucose"
                             : "larger bolus raises glucose";
          v.inputs["time"] = t;
          v.inputs["g_1"] = a.glucose[k];
          v.inputs["g_2"] = b.glucose[k];
          out[i].violation = v;
          return;
        }
      }
    } catch (const Error& e) {
      v.message = std::string("simulation failed: ") + e.what();
      out[i].violation = v;
    }
  });
  merge(rep, out);
}

void intersections(const Scenario& sc, SuiteReport& rep, bool parallel) {
  // A pool of proper responses on one shared grid; trials are distinct pairs.
  // Larger than the minimum so each member appears in only a few pairs.
  std::size_t pool = std::max<std::size_t>(2, rep.trials / 4);
  while (pool * (pool - 1) / 2 < rep.trials) ++pool;
  const Ranges ranges = ranges_for(sc);

  std::vector<std::optional<Pulse>> members(pool);
  for_each_index(pool, parallel, [&](std::size_t j) {
    auto rng = trial_rng(rep.seed, 2, j);
    for (int attempt = 0; attempt < 8 && !members[j]; ++attempt) {
      Pulse p = draw_timing(rng, ranges);
      try {
        p.u_hat = solve_proper(sc, p.t_prime, p.tau).u_hat;
        members[j] = p;
      } catch (const Error&) {
      }
    }
  });

  std::vector<Pulse> ok;
  for (const auto& m : members)
    if (m) ok.push_back(*m);
  SimConfig cfg = glucose_config(sc.sim);
  for (const auto& p : ok) {
    cfg.breakpoints.push_back(p.t_prime);
    if (p.tau > 0.0) cfg.breakpoints.push_back(p.t_prime + p.tau);
  }
  std::sort(cfg.breakpoints.begin(), cfg.breakpoints.end());

  std::vector<Trajectory> traj(ok.size());
  std::vector<std::string> sim_error(ok.size());
  const double u_bar = sc.basal();
  for_each_index(ok.size(), parallel, [&](std::size_t j) {
    try {
      traj[j] = simulate(sc.model, {u_bar, ok[j].u_hat, ok[j].t_prime, ok[j].tau}, sc.meal, cfg);
    } catch (const Error& e) {
      sim_error[j] = e.what();
    }
  });

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t a = 0; a < ok.size(); ++a)
    for (std::size_t b = a + 1; b < ok.size(); ++b) pairs.emplace_back(a, b);
  auto shuffle_rng = trial_rng(rep.seed, 3, 0);
  std::shuffle(pairs.begin(), pairs.end(), shuffle_rng);
  if (pairs.size() > rep.trials) pairs.resize(rep.trials);

  std::vector<TrialOutcome> out(rep.trials);
  for (std::size_t i = pairs.size(); i < rep.trials; ++i) out[i].skipped = true;
  for_each_index(pairs.size(), parallel, [&](std::size_t i) {
    const auto [a, b] = pairs[i];
    const Pulse& p = ok[a];
    const Pulse& q = ok[b];
    Violation v;
    v.trial = i;
    v.inputs = {{"t_prime", p.t_prime}, {"tau", p.tau}, {"u_hat", p.u_hat},
                {"s_prime", q.t_prime}, {"sigma", q.tau}, {"v_hat", q.u_hat}};
    if (!sim_error[a].empty() || !sim_error[b].empty()) {
      v.message = "simulation failed: " + sim_error[a] + sim_error[b];
      out[i].violation = v;
      return;
    }
    out[i].checked = true;
    const std::size_t n = count_sign_changes(traj[a], traj[b], std::min(p.t_prime, q.t_prime));
    if (n > 2) {
      v.message = std::to_string(n) + " sign changes of the glucose difference";
      v.inputs["sign_changes"] = static_cast<double>(n);
      out[i].violation = v;
    }
  });
  merge(rep, out);
}

void steady_state(const Scenario& sc, SuiteReport& rep) {
  SimConfig cfg = sc.sim;
  cfg.horizon = std::max(2000.0, cfg.horizon);
  cfg.breakpoints.clear();
  MealCascade none = sc.meal;
  none.pulses.clear();
  const double u_bar = sc.basal();
  const auto tr = simulate(sc.model, {u_bar, 0.0, 0.0, 0.0}, none, cfg);
  rep.checked = 1;
  double worst = 0.0, worst_t = 0.0;
  for (std::size_t i = 0; i < tr.size(); ++i) {
    const double dev = std::fabs(tr.glucose[i] - sc.g0);
    if (dev > worst) {
      worst = dev;
      worst_t = tr.times[i];
    }
  }
  if (!(worst < 1e-6))
    rep.violations.push_back({0, "basal response drifts from g0",
                              {{"u_bar", u_bar}, {"time", worst_t}, {"deviation", worst}}});
  if (const auto* m = std::get_if<BergmanModel>(&sc.model)) {
    const auto& p = m->params();
    const double x_ref = p.b * p.k * u_bar;
    double x_dev = 0.0;
    for (std::size_t i = 0; i < tr.size(); ++i)
      x_dev = std::max(x_dev, std::fabs(tr.state(i)[2] - x_ref));
    if (!(x_dev <= 1e-9 * x_ref))
      rep.violations.push_back({0, "insulin effectiveness x is not constant at b k u_bar",
                                {{"u_bar", u_bar}, {"deviation", x_dev}}});
  }
}

void nesting(const Scenario& sc, SuiteReport& rep) {
  OptimizeResult r;
  try {
    r = optimize_global(sc);
  } catch (const Error& e) {
    rep.violations.push_back({0, std::string("optimizer failed: ") + e.what(), {}});
    return;
  }
  const double rel = sc.tol.equal_max;
  auto check = [&](const std::vector<SweepEntry>& seq, bool shrinking, const char* side) {
    for (std::size_t i = 1; i < seq.size(); ++i) {
      const auto& prev = seq[i - 1];
      const auto& next = seq[i];
      ++rep.checked;
      const double p0 = prev.t_prime, p1 = prev.t_prime + prev.tau;
      const double n0 = next.t_prime, n1 = next.t_prime + next.tau;
      const bool nested = shrinking ? (p0 < n0 && n1 < p1) : (n0 < p0 && p1 < n1);
      const bool improved = next.gamma < prev.gamma * (1.0 + rel);
      if (nested && improved) continue;
      Violation v;
      v.trial = i;
      v.message = std::string(side) + (nested ? ": gamma does not improve" : ": intervals not nested");
      v.inputs = {{"t_prime_prev", p0}, {"tau_prev", prev.tau}, {"gamma_prev", prev.gamma},
                  {"t_prime_next", n0}, {"tau_next", next.tau}, {"gamma_next", next.gamma}};
      rep.violations.push_back(v);
    }
  };
  check(r.upper_side, true, "lambda side");
  check(r.lower_side, false, "gamma side");
  ++rep.checked;
  if (r.report.minimum < sc.lambda - sc.tol.floor)
    rep.violations.push_back({0, "returned optimum is not proper",
                              {{"t_prime", r.t_prime}, {"tau", r.tau}, {"minimum", r.report.minimum}}});
}

SuiteReport run(const Scenario& sc, Suite suite, std::size_t trials, std::uint64_t seed,
                bool parallel) {
  SuiteReport rep;
  rep.suite = suite;
  rep.model = std::string(model_name(sc.model));
  rep.seed = seed;
  rep.trials = trials;
  switch (suite) {
    case Suite::Monotonicity: monotonicity(sc, rep, parallel); break;
    case Suite::Intersections: intersections(sc, rep, parallel); break;
    case Suite::SteadyState: steady_state(sc, rep); break;
    case Suite::Nesting: nesting(sc, rep); break;
  }
  return rep;
}

}  // namespace

std::string_view to_string(Suite suite) noexcept {
  for (const auto& [s, name] : kSuiteNames)
    if (s == suite) return name;
  return "steady-state";
}

std::optional<Suite> suite_from_string(std::string_view name) noexcept {
  for (const auto& [s, n] : kSuiteNames)
    if (n == name) return s;
  return std::nullopt;
}

SuiteReport run_suite(const Scenario& sc, Suite suite, std::size_t trials, std::uint64_t seed) {
  return run(sc, suite, trials, seed, true);
}

SuiteReport run_suite_serial(const Scenario& sc, Suite suite, std::size_t trials,
                             std::uint64_t seed) {
  return run(sc, suite, trials, seed, false);
}

std::string suite_report_json(const SuiteReport& rep) {
  nlohmann::ordered_json violations = nlohmann::ordered_json::array();
  for (const auto& v : rep.violations)
    violations.push_back({{"trial", v.trial}, {"message", v.message}, {"inputs", v.inputs}});
  nlohmann::ordered_json j{{"suite", to_string(rep.suite)},
                           {"model", rep.model},
                           {"seed", rep.seed},
                           {"trials", rep.trials},
                           {"checked", rep.checked},
                           {"skipped", rep.skipped},
                           {"passed", rep.passed()},
                           {"violations", violations}};
  return j.dump(2) + "\n";
}

}  // namespace bolusopt
