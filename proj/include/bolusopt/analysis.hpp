#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "bolusopt/integrate.hpp"

namespace bolusopt {

enum class ExtremumKind { Max, Min };

struct Extremum {
  double time = 0.0;
  double value = 0.0;
  ExtremumKind kind = ExtremumKind::Max;
  bool boundary = false;
};

struct Tolerances {
  double floor = 1e-4;       // absolute, mmol/L: how close a minimum must be to lambda
  double equal_max = 1e-3;   // relative: how close a maximum must be to gamma
  double extremum = 1e-5;    // absolute prominence for interior extrema

  void validate() const;
  bool operator==(const Tolerances&) const = default;
};

enum class Shape {
  LambdaOptimal,
  GammaOptimal,
  CaseA,
  CaseB,
  GloballyOptimalShape,
  Improper,
  Indeterminate,
};

std::string_view to_string(Shape shape) noexcept;
std::optional<Shape> shape_from_string(std::string_view name) noexcept;

struct ShapeReport {
  std::vector<Extremum> extrema;
  double gamma = 0.0;            // global maximum of g
  double gamma_time = 0.0;
  double minimum = 0.0;          // global minimum of g
  double minimum_time = 0.0;
  double initial = 0.0;          // g(0)
  std::vector<double> lambda_attained;   // times of minima within tol.floor of lambda
  std::vector<double> global_max_times;  // times of interior maxima within tol.equal_max of gamma
  bool improper = false;
  bool lambda_optimal = false;
  bool gamma_optimal = false;
  bool interlaced = false;  // >= 2 global maxima interlaced with >= 2 floor minima
  bool case_a = false;      // no global maximum after a global minimum
  bool case_b = false;      // no global maximum before a global minimum
  bool exceeds_initial = false;
  Shape classification = Shape::Indeterminate;
};

/// Alternating local extrema with prominence >= tol.extremum, refined to
/// sub-grid accuracy, framed by the two boundary samples.
std::vector<Extremum> find_extrema(std::span<const double> times, std::span<const double> values,
                                   const Tolerances& tol);
std::vector<Extremum> find_extrema(const Trajectory& trajectory, const Tolerances& tol);

ShapeReport classify(const Trajectory& trajectory, double lambda, const Tolerances& tol);

/// Sign changes of (a - b) for t > after, ignoring |a - b| <= noise.
/// `component` selects a state column; nullopt compares glucose.
std::size_t count_sign_changes(const Trajectory& a, const Trajectory& b, double after,
                               std::optional<std::size_t> component = std::nullopt,
                               double noise = 1e-9);

/// Largest glucose disappearance coefficient h over the horizon.
double max_h(const Trajectory& trajectory);

}  // namespace bolusopt
