#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bolusopt/analysis.hpp"
#include "bolusopt/integrate.hpp"
#include "bolusopt/scenario.hpp"

namespace bolusopt {

struct ProperSolveResult {
  double u_hat = 0.0;
  double achieved_min = 0.0;
  std::size_t iterations = 0;
  Trajectory trajectory;
};

/// Smallest bolus magnitude whose response touches lambda without crossing it.
/// `hint` is a previous magnitude for a nearby (t_prime, tau) used to seed the
/// bracket. With `full_trajectory` all states are recorded.
ProperSolveResult solve_proper(const Scenario& scenario, double t_prime, double tau,
                               std::optional<double> hint = std::nullopt,
                               bool full_trajectory = false);

/// Which side of the duration bracket an evaluated candidate landed on.
enum class BracketSide { None, Lower, Upper };

struct SweepEntry {
  double value = 0.0;  // the swept quantity (tau or t_prime)
  double t_prime = 0.0;
  double tau = 0.0;
  double u_hat = 0.0;
  double gamma = 0.0;
  Shape classification = Shape::Indeterminate;
  BracketSide side = BracketSide::None;
  std::string error;  // set when the point could not be evaluated

  bool ok() const noexcept { return error.empty(); }
};

struct OptimizeResult {
  double t_prime = 0.0;
  double tau = 0.0;
  double u_hat = 0.0;
  double gamma = 0.0;
  Shape classification = Shape::Indeterminate;
  ShapeReport report;
  std::vector<SweepEntry> sweep_log;
  /// Successive upper (lambda-optimal / case A) and lower (gamma-optimal /
  /// case B) bracket endpoints, in the order they were adopted.
  std::vector<SweepEntry> upper_side;
  std::vector<SweepEntry> lower_side;
  std::string note;
};

/// Delivery time for a fixed duration at which the largest maxima before and
/// after the floor-touching minimum coincide (or the two floor minima do, on
/// the lambda-optimal branch). Bisection on the sign of their difference;
/// golden-section on gamma when the window does not bracket a sign change.
OptimizeResult optimize_delivery(const Scenario& scenario, double tau, double t_lo, double t_hi,
                                 std::optional<double> u_hint = std::nullopt);

/// Duration bracket bisection between gamma-optimal (lower) and
/// lambda-optimal (upper) durations, each evaluated at its optimal delivery
/// time. Stops when the bracket is narrower than solver.tol_tau or a candidate
/// has the globally optimal shape.
OptimizeResult optimize_duration(const Scenario& scenario, double tau_lo, double tau_hi);

/// Duration bracket bisection at a fixed delivery time: case B responses
/// form the lower side, case A responses the upper side.
OptimizeResult optimize_duration_fixed_delivery(const Scenario& scenario, double t_prime,
                                                double tau_lo, double tau_hi);

/// Joint optimum over delivery time and duration using the scenario's bounds.
OptimizeResult optimize_global(const Scenario& scenario);

enum class SweepParameter { Tau, TPrime };

/// gamma along a grid. Tau sweeps optimize the delivery time per point unless
/// `fixed_other` pins it; t_prime sweeps require `fixed_other` as the duration.
/// Points are evaluated in parallel; per-point failures are recorded.
std::vector<SweepEntry> sweep_gamma(const Scenario& scenario, SweepParameter parameter,
                                    std::span<const double> grid,
                                    std::optional<double> fixed_other = std::nullopt);

/// Serial reference for sweep_gamma; identical results.
std::vector<SweepEntry> sweep_gamma_serial(const Scenario& scenario, SweepParameter parameter,
                                           std::span<const double> grid,
                                           std::optional<double> fixed_other = std::nullopt);

std::string_view to_string(BracketSide side) noexcept;

}  // namespace bolusopt
