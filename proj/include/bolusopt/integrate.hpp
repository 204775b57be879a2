#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "bolusopt/disturbance.hpp"
#include "bolusopt/models.hpp"

namespace bolusopt {

struct SimConfig {
  double horizon = 2000.0;
  double dt = 0.05;
  /// Extra grid points honoured exactly, on top of the input and meal edges.
  std::vector<double> breakpoints;
  std::size_t record_stride = 1;
  /// When false only times and glucose are kept (solver inner loops).
  bool record_states = true;

  void validate() const;
  bool operator==(const SimConfig&) const = default;
};

/// Sampled response. Glucose is always recorded; the remaining channels are
/// filled only when SimConfig::record_states is set.
struct Trajectory {
  std::vector<double> times;
  std::vector<double> glucose;
  std::vector<double> uptake;  // h = x + G (Bergman) or h1 (Hovorka)
  std::vector<double> input;
  std::vector<double> meal;
  std::vector<double> states;  // row-major, state_count per sample
  std::size_t state_count = 0;
  std::span<const std::string_view> state_names;

  std::size_t size() const noexcept { return times.size(); }
  bool has_states() const noexcept { return !states.empty(); }
  std::span<const double> state(std::size_t sample) const {
    return {states.data() + sample * state_count, state_count};
  }
  /// One state component across all samples.
  std::vector<double> component(std::size_t index) const;
};

/// Sorted, merged integration breakpoints for an input/meal/config triple.
std::vector<double> integration_grid_breakpoints(const PulseInput& input,
                                                 const MealCascade& cascade,
                                                 const SimConfig& config);

/// Classical RK4 over the augmented (model + meal cascade) state. Every
/// breakpoint is a grid point, so each step sees a constant input and
/// ingestion rate; impulses are applied as a jump at t_prime. The model
/// starts at its steady state for input.u_bar.
Trajectory simulate(const Model& model, const PulseInput& input, const MealCascade& cascade,
                    const SimConfig& config);

struct RefinedPoint {
  double time = 0.0;
  double value = 0.0;
};

/// Vertex of the parabola through samples index-1, index, index+1.
RefinedPoint refine_extremum(std::span<const double> times, std::span<const double> values,
                             std::size_t index);
RefinedPoint refine_extremum(const Trajectory& trajectory, std::size_t index);

/// CSV with header: time, g_mmol_per_L, [g_mg_per_dL], states..., u, r.
/// Numbers use the shortest round-trip representation.
void write_trajectory_csv(std::ostream& os, const Trajectory& trajectory, bool emit_mgdl);

inline constexpr double kMgdlPerMmol = 18.0;

}  // namespace bolusopt
