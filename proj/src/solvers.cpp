#include "bolusopt/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <tuple>

#include "bolusopt/errors.hpp"
#include "bolusopt/root.hpp"

namespace bolusopt {

std::string_view to_string(BracketSide side) noexcept {
  switch (side) {
    case BracketSide::Lower: return "lower";
    case BracketSide::Upper: return "upper";
    case BracketSide::None: break;
  }
  return "none";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Refined value at a sample that is a local extremum, otherwise the sample.
RefinedPoint refined_at(const Trajectory& tr, std::size_t i, bool is_max) {
  const auto& g = tr.glucose;
  if (i == 0 || i + 1 >= g.size()) return {tr.times[i], g[i]};
  const bool local = is_max ? (g[i - 1] <= g[i] && g[i + 1] <= g[i])
                            : (g[i - 1] >= g[i] && g[i + 1] >= g[i]);
  if (!local) return {tr.times[i], g[i]};
  const auto p = refine_extremum(tr, i);
  if (is_max ? p.value < g[i] : p.value > g[i]) return {tr.times[i], g[i]};
  return p;
}

struct MinimumSplit {
  double min_value = kInf;
  double min_time = 0.0;
  double pre_max = -kInf;   // largest glucose before the global minimum
  double post_max = -kInf;  // largest glucose after it
  double gamma() const { return std::max(pre_max, post_max); }
  double imbalance() const { return pre_max - post_max; }
};

MinimumSplit split_at_minimum(const Trajectory& tr) {
  const auto& g = tr.glucose;
  const auto imin = static_cast<std::size_t>(std::min_element(g.begin(), g.end()) - g.begin());
  MinimumSplit s;
  const auto m = refined_at(tr, imin, false);
  s.min_value = m.value;
  s.min_time = m.time;
  if (imin > 0) {
    const auto j = static_cast<std::size_t>(std::max_element(g.begin(), g.begin() + imin) - g.begin());
    s.pre_max = refined_at(tr, j, true).value;
  }
  if (imin + 1 < g.size()) {
    const auto j = static_cast<std::size_t>(std::max_element(g.begin() + imin + 1, g.end()) - g.begin());
    s.post_max = refined_at(tr, j, true).value;
  }
  return s;
}

double glucose_at(const Trajectory& tr, double t) {
  const auto it = std::lower_bound(tr.times.begin(), tr.times.end(), t);
  if (it == tr.times.end()) return tr.glucose.back();
  const auto i = static_cast<std::size_t>(it - tr.times.begin());
  if (i == 0 || tr.times[i] == t) return tr.glucose[i];
  const double w = (t - tr.times[i - 1]) / (tr.times[i] - tr.times[i - 1]);
  return tr.glucose[i - 1] + w * (tr.glucose[i] - tr.glucose[i - 1]);
}

SimConfig glucose_only(const SimConfig& base) {
  SimConfig cfg = base;
  cfg.record_states = false;
  cfg.record_stride = 1;
  return cfg;
}

Trajectory simulate_full(const Scenario& sc, double u_hat, double t_prime, double tau) {
  return simulate(sc.model, sc.input(u_hat, t_prime, tau), sc.meal, sc.sim);
}

SweepEntry entry_from(double value, const OptimizeResult& r) {
  SweepEntry e;
  e.value = value;
  e.t_prime = r.t_prime;
  e.tau = r.tau;
  e.u_hat = r.u_hat;
  e.gamma = r.gamma;
  e.classification = r.classification;
  return e;
}

}  // namespace

// ---------------------------------------------------------------------------

ProperSolveResult solve_proper(const Scenario& sc, double t_prime, double tau,
                               std::optional<double> hint, bool full_trajectory) {
  const double lambda = sc.lambda;
  const double u_bar = sc.basal();
  const SimConfig cfg = glucose_only(sc.sim);
  const double precision = std::min(sc.solver.floor_precision, sc.tol.floor);

  std::size_t sims = 0;
  auto run = [&](double u_hat) {
    ++sims;
    return simulate(sc.model, {u_bar, u_hat, t_prime, tau}, sc.meal, cfg);
  };

  Trajectory zero = run(0.0);
  const double g_at_delivery = glucose_at(zero, t_prime);
  if (lambda > g_at_delivery)
    throw Error(ErrorKind::InfeasibleFloor, "lambda = " + std::to_string(lambda) +
                                                " exceeds g(t') = " + std::to_string(g_at_delivery) +
                                                " at t' = " + std::to_string(t_prime));
  const double zero_min = split_at_minimum(zero).min_value;
  if (zero_min < lambda - sc.tol.floor)
    throw Error(ErrorKind::NoFloorContact,
                "the response without bolus already falls to " + std::to_string(zero_min));

  auto finish = [&](double u_hat, double achieved, Trajectory tr) {
    ProperSolveResult out;
    out.u_hat = u_hat;
    out.achieved_min = achieved;
    out.iterations = sims;
    out.trajectory = full_trajectory ? simulate_full(sc, u_hat, t_prime, tau) : std::move(tr);
    return out;
  };
  if (zero_min - lambda <= precision) return finish(0.0, zero_min, std::move(zero));

  double last_u = 0.0;
  Trajectory last;
  auto excess = [&](double u_hat) {
    last_u = u_hat;
    try {
      last = run(u_hat);
    } catch (const Error& e) {
      // glucose driven through zero: certainly below the floor
      if (e.kind() != ErrorKind::DomainError) throw;
      last = Trajectory{};
      return -lambda;
    }
    return split_at_minimum(last).min_value - lambda;
  };

  double lo = 0.0, f_lo = zero_min - lambda;
  double hi = 0.0, f_hi = 0.0;
  const std::size_t limit = sc.solver.max_iterations;
  if (hint && *hint > 0.0) {
    hi = *hint * 1.05;
    f_hi = excess(hi);
    if (f_hi > 0.0) {
      lo = hi;
      f_lo = f_hi;
      hi *= 2.0;
      f_hi = excess(hi);
    } else {
      const double inner = *hint * 0.95;
      const double f_inner = excess(inner);
      if (f_inner > 0.0) {
        lo = inner;
        f_lo = f_inner;
      } else {
        hi = inner;
        f_hi = f_inner;
      }
    }
  } else {
    hi = std::max(u_bar, 1e-6) * (tau > 0.0 ? 1.0 : 100.0);
    f_hi = excess(hi);
  }
  while (f_hi > 0.0) {
    if (sims > limit) throw Error(ErrorKind::IterationLimit, "cannot bracket the bolus magnitude");
    lo = hi;
    f_lo = f_hi;
    hi *= 2.0;
    f_hi = excess(hi);
  }

  const auto root = illinois_root(excess, lo, hi, f_lo, f_hi, precision, 1e-14 * hi,
                                  limit > sims ? limit - sims : 1);
  if (!root.converged || std::fabs(root.fx) > sc.tol.floor)
    throw Error(ErrorKind::IterationLimit, "bolus magnitude solve did not reach the floor");
  if (last_u != root.x || last.size() == 0) {
    (void)excess(root.x);
  }
  return finish(root.x, root.fx + lambda, std::move(last));
}

// ---------------------------------------------------------------------------

namespace {

struct DeliveryProbe {
  double t_prime = 0.0;
  double u_hat = 0.0;
  MinimumSplit split;
};

OptimizeResult finalize_delivery(const Scenario& sc, double tau, const DeliveryProbe& best,
                                 std::vector<SweepEntry> log) {
  OptimizeResult out;
  out.t_prime = best.t_prime;
  out.tau = tau;
  out.u_hat = best.u_hat;
  const auto traj = simulate_full(sc, best.u_hat, best.t_prime, tau);
  out.report = classify(traj, sc.lambda, sc.tol);
  out.gamma = out.report.gamma;
  out.classification = out.report.classification;
  out.sweep_log = std::move(log);
  return out;
}

}  // namespace

OptimizeResult optimize_delivery(const Scenario& sc, double tau, double t_lo, double t_hi,
                                 std::optional<double> u_hint) {
  if (!(t_hi > t_lo) || t_lo < 0.0)
    throw Error(ErrorKind::InvalidInput, "delivery window needs 0 <= t_lo < t_hi");
  std::vector<SweepEntry> log;
  std::optional<double> hint = u_hint;
  auto probe = [&](double t) {
    const auto sol = solve_proper(sc, t, tau, hint);
    hint = sol.u_hat > 0.0 ? std::optional<double>(sol.u_hat) : std::nullopt;
    DeliveryProbe p{t, sol.u_hat, split_at_minimum(sol.trajectory)};
    SweepEntry e;
    e.value = t;
    e.t_prime = t;
    e.tau = tau;
    e.u_hat = sol.u_hat;
    e.gamma = p.split.gamma();
    e.classification = classify(sol.trajectory, sc.lambda, sc.tol).classification;
    log.push_back(e);
    return p;
  };

  const double tol = sc.solver.tol_t_prime;
  DeliveryProbe lo = probe(t_lo);
  DeliveryProbe hi = probe(t_hi);

  if (lo.split.imbalance() < 0.0 && hi.split.imbalance() > 0.0) {
    // early delivery: the floor comes first and the peak after it; late
    // delivery: the reverse. The optimum sits where they trade places.
    while (hi.t_prime - lo.t_prime > tol) {
      const auto mid = probe(0.5 * (lo.t_prime + hi.t_prime));
      const double d = mid.split.imbalance();
      if (d == 0.0) return finalize_delivery(sc, tau, mid, std::move(log));
      (d < 0.0 ? lo : hi) = mid;
    }
    const auto& best = lo.split.gamma() <= hi.split.gamma() ? lo : hi;
    return finalize_delivery(sc, tau, best, std::move(log));
  }

  // No sign change of the imbalance: minimize gamma directly.
  constexpr double kInvPhi = 0.6180339887498949;
  double a = t_lo, b = t_hi;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  DeliveryProbe pc = probe(c), pd = probe(d);
  while (b - a > tol) {
    if (pc.split.gamma() <= pd.split.gamma()) {
      b = d;
      d = c;
      pd = pc;
      c = b - kInvPhi * (b - a);
      pc = probe(c);
    } else {
      a = c;
      c = d;
      pc = pd;
      d = a + kInvPhi * (b - a);
      pd = probe(d);
    }
  }
  DeliveryProbe best = pc.split.gamma() <= pd.split.gamma() ? pc : pd;
  for (const auto* edge : {&lo, &hi})
    if (edge->split.gamma() < best.split.gamma()) best = *edge;
  if (best.t_prime - t_lo <= 2.0 * tol || t_hi - best.t_prime <= 2.0 * tol)
    throw Error(ErrorKind::WindowTooNarrow,
                "best delivery time for tau = " + std::to_string(tau) +
                    " lies on the window edge [" + std::to_string(t_lo) + ", " +
                    std::to_string(t_hi) + "]");
  auto out = finalize_delivery(sc, tau, best, std::move(log));
  out.note = "imbalance did not change sign; golden-section fallback";
  return out;
}

// ---------------------------------------------------------------------------

namespace {

void require_excursion(const Scenario& sc) {
  const auto zero = simulate(sc.model, sc.input(), sc.meal, glucose_only(sc.sim));
  const double peak = *std::max_element(zero.glucose.begin(), zero.glucose.end());
  if (!(peak > sc.g0 + sc.tol.extremum))
    throw Error(ErrorKind::PreconditionFailed,
                "glucose never exceeds its initial value; peak cannot be lowered by a bolus");
}

std::vector<double> seed_durations(const SolverSettings& s, double tau_lo, double tau_hi) {
  std::vector<double> out;
  for (double t : s.tau_seeds)
    if (t > tau_lo && t < tau_hi) out.push_back(t);
  std::sort(out.begin(), out.end());
  out.push_back(tau_hi);
  return out;
}

// Generic bracket search shared by the two duration optimizers. `evaluate`
// returns the candidate result, its side and whether it already has the
// optimal shape. On tolerance-limited termination the better bracket
// endpoint is returned, or with `best_sampled` the best candidate seen.
template <class Evaluate>
OptimizeResult bracket_durations(const Scenario& sc, double tau_lo, double tau_hi,
                                 bool best_sampled, Evaluate&& evaluate) {
  if (!(tau_hi > tau_lo) || tau_lo < 0.0)
    throw Error(ErrorKind::InvalidInput, "duration bounds need 0 <= tau_lo < tau_hi");
  std::vector<SweepEntry> log, upper_seq, lower_seq;
  std::vector<std::string> notes;

  struct Candidate {
    OptimizeResult result;
    BracketSide side = BracketSide::None;
    bool optimal = false;
  };
  std::optional<Candidate> best;
  auto run = [&](double tau) {
    Candidate c;
    std::tie(c.result, c.side, c.optimal) = evaluate(tau);
    SweepEntry e = entry_from(tau, c.result);
    e.side = c.side;
    log.push_back(e);
    if (!c.result.note.empty()) notes.push_back(c.result.note);
    if (!c.result.report.improper && (!best || c.result.gamma < best->result.gamma)) best = c;
    return c;
  };
  auto conclude = [&](Candidate c, std::string note) {
    OptimizeResult out = std::move(c.result);
    out.sweep_log = std::move(log);
    out.upper_side = std::move(upper_seq);
    out.lower_side = std::move(lower_seq);
    out.note = std::move(note);
    std::sort(notes.begin(), notes.end());
    notes.erase(std::unique(notes.begin(), notes.end()), notes.end());
    for (const auto& n : notes) out.note += "; " + n;
    return out;
  };

  std::optional<Candidate> lower, upper;
  Candidate first = run(tau_lo);
  if (first.optimal) return conclude(std::move(first), "shortest duration is optimal");
  if (first.side == BracketSide::Upper) {
    if (tau_lo == 0.0) return conclude(std::move(first), "impulse response is on the upper side; impulse is optimal");
    throw Error(ErrorKind::NoGammaOptimalFound,
                "already on the upper side at tau_lo = " + std::to_string(tau_lo));
  }
  if (first.side == BracketSide::Lower) {
    lower_seq.push_back(log.back());
    lower = std::move(first);
  }

  for (double tau : seed_durations(sc.solver, tau_lo, tau_hi)) {
    Candidate c = run(tau);
    if (c.optimal) return conclude(std::move(c), "seed duration has the optimal shape");
    if (c.side == BracketSide::Lower) {
      lower_seq.push_back(log.back());
      lower = std::move(c);
    } else if (c.side == BracketSide::Upper) {
      upper_seq.push_back(log.back());
      upper = std::move(c);
      break;
    }
  }
  if (!lower)
    throw Error(ErrorKind::NoGammaOptimalFound,
                "no lower-side duration found in [" + std::to_string(tau_lo) + ", " +
                    std::to_string(tau_hi) + "]");
  if (!upper)
    throw Error(ErrorKind::NoLambdaOptimalFound,
                "no upper-side duration found up to tau_hi = " + std::to_string(tau_hi));

  std::size_t iterations = 0;
  while (upper->result.tau - lower->result.tau > sc.solver.tol_tau) {
    if (++iterations > sc.solver.max_iterations)
      throw Error(ErrorKind::IterationLimit, "duration bracket did not close");
    const double lo = lower->result.tau, hi = upper->result.tau;
    Candidate c = run(0.5 * (lo + hi));
    if (c.optimal) return conclude(std::move(c), "bracket midpoint has the optimal shape");
    if (c.side == BracketSide::None) {
      // resample on a finer partition of the bracket
      notes.push_back("ambiguous shape at tau = " + std::to_string(c.result.tau));
      for (double frac : {0.25, 0.75}) {
        c = run(lo + frac * (hi - lo));
        if (c.optimal) return conclude(std::move(c), "bracket resample has the optimal shape");
        if (c.side != BracketSide::None) break;
      }
      if (c.side == BracketSide::None)
        throw Error(ErrorKind::ClassificationAmbiguous,
                    "durations near " + std::to_string(c.result.tau) + " are on neither bracket side");
    }
    if (c.side == BracketSide::Lower) {
      lower_seq.push_back(log.back());
      lower = std::move(c);
    } else {
      upper_seq.push_back(log.back());
      upper = std::move(c);
    }
  }
  if (best_sampled && best) return conclude(std::move(*best), "bracket narrower than tol_tau");
  const bool lower_better = lower->result.gamma <= upper->result.gamma;
  return conclude(lower_better ? std::move(*lower) : std::move(*upper),
                  "bracket narrower than tol_tau");
}

}  // namespace

OptimizeResult optimize_duration(const Scenario& sc, double tau_lo, double tau_hi) {
  require_excursion(sc);
  return bracket_durations(sc, tau_lo, tau_hi, false, [&](double tau) {
    auto r = optimize_delivery(sc, tau, sc.solver.t_lo, sc.solver.t_hi);
    const auto& rep = r.report;
    BracketSide side = BracketSide::None;
    if (rep.lambda_optimal)
      side = BracketSide::Upper;
    else if (rep.gamma_optimal)
      side = BracketSide::Lower;
    else if (rep.lambda_attained.size() >= 2)
      side = BracketSide::Upper;
    else
      side = BracketSide::Lower;
    const bool optimal = rep.interlaced;
    return std::tuple{std::move(r), side, optimal};
  });
}

OptimizeResult optimize_duration_fixed_delivery(const Scenario& sc, double t_prime,
                                                double tau_lo, double tau_hi) {
  require_excursion(sc);
  std::optional<double> hint;
  return bracket_durations(sc, tau_lo, tau_hi, true, [&](double tau) {
    const auto sol = solve_proper(sc, t_prime, tau, hint, true);
    hint = sol.u_hat > 0.0 ? std::optional<double>(sol.u_hat) : std::nullopt;
    OptimizeResult r;
    r.t_prime = t_prime;
    r.tau = tau;
    r.u_hat = sol.u_hat;
    r.report = classify(sol.trajectory, sc.lambda, sc.tol);
    r.gamma = r.report.gamma;
    r.classification = r.report.classification;
    BracketSide side = BracketSide::None;
    if (r.report.case_b)
      side = BracketSide::Lower;
    else if (r.report.case_a)
      side = BracketSide::Upper;
    // global maxima on both sides of a floor contact: the A/B transition itself
    const bool optimal = r.report.interlaced || r.report.gamma_optimal || r.report.lambda_optimal;
    return std::tuple{std::move(r), side, optimal};
  });
}

OptimizeResult optimize_global(const Scenario& sc) {
  return optimize_duration(sc, sc.solver.tau_lo, sc.solver.tau_hi);
}

// ---------------------------------------------------------------------------

namespace {

SweepEntry sweep_point(const Scenario& sc, SweepParameter parameter, double value,
                       std::optional<double> fixed_other) {
  SweepEntry e;
  e.value = value;
  try {
    if (parameter == SweepParameter::Tau && !fixed_other) {
      e = entry_from(value, optimize_delivery(sc, value, sc.solver.t_lo, sc.solver.t_hi));
    } else {
      const double t_prime = parameter == SweepParameter::Tau ? *fixed_other : value;
      const double tau = parameter == SweepParameter::Tau ? value : *fixed_other;
      const auto sol = solve_proper(sc, t_prime, tau);
      const auto rep = classify(sol.trajectory, sc.lambda, sc.tol);
      e.t_prime = t_prime;
      e.tau = tau;
      e.u_hat = sol.u_hat;
      e.gamma = rep.gamma;
      e.classification = rep.classification;
    }
  } catch (const std::exception& ex) {
    e.error = ex.what();
  }
  return e;
}

void check_sweep_args(SweepParameter parameter, std::optional<double> fixed_other) {
  if (parameter == SweepParameter::TPrime && !fixed_other)
    throw Error(ErrorKind::InvalidInput, "a t_prime sweep needs a fixed duration");
}

}  // namespace

std::vector<SweepEntry> sweep_gamma_serial(const Scenario& sc, SweepParameter parameter,
                                           std::span<const double> grid,
                                           std::optional<double> fixed_other) {
  check_sweep_args(parameter, fixed_other);
  std::vector<SweepEntry> out;
  out.reserve(grid.size());
  for (double v : grid) out.push_back(sweep_point(sc, parameter, v, fixed_other));
  return out;
}

std::vector<SweepEntry> sweep_gamma(const Scenario& sc, SweepParameter parameter,
                                    std::span<const double> grid,
                                    std::optional<double> fixed_other) {
  check_sweep_args(parameter, fixed_other);
  std::vector<SweepEntry> out(grid.size());
  const auto n = static_cast<std::ptrdiff_t>(grid.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < n; ++i)
    out[static_cast<std::size_t>(i)] =
        sweep_point(sc, parameter, grid[static_cast<std::size_t>(i)], fixed_other);
  return out;
}

}  // namespace bolusopt
