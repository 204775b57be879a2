#include "bolusopt/analysis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <utility>

#include "bolusopt/errors.hpp"

namespace bolusopt {

void Tolerances::validate() const {
  if (!(floor > 0.0) || !(equal_max > 0.0) || !(extremum > 0.0))
    throw Error(ErrorKind::InvalidInput, "tolerances must be > 0");
}

namespace {

constexpr std::array<std::pair<Shape, std::string_view>, 7> kShapeNames{{
    {Shape::LambdaOptimal, "LambdaOptimal"},
    {Shape::GammaOptimal, "GammaOptimal"},
    {Shape::CaseA, "CaseA"},
    {Shape::CaseB, "CaseB"},
    {Shape::GloballyOptimalShape, "GloballyOptimalShape"},
    {Shape::Improper, "Improper"},
    {Shape::Indeterminate, "Indeterminate"},
}};

}  // namespace

std::string_view to_string(Shape shape) noexcept {
  for (const auto& [s, name] : kShapeNames)
    if (s == shape) return name;
  return "Indeterminate";
}

std::optional<Shape> shape_from_string(std::string_view name) noexcept {
  for (const auto& [s, n] : kShapeNames)
    if (n == name) return s;
  return std::nullopt;
}

std::vector<Extremum> find_extrema(std::span<const double> times, std::span<const double> values,
                                   const Tolerances& tol) {
  std::vector<Extremum> out;
  const std::size_t n = values.size();
  if (n == 0) return out;
  if (n == 1) {
    out.push_back({times[0], values[0], ExtremumKind::Max, true});
    return out;
  }

  auto emit = [&](std::size_t i, ExtremumKind kind) {
    const bool boundary = i == 0 || i + 1 == n;
    const auto p = boundary ? RefinedPoint{times[i], values[i]} : refine_extremum(times, values, i);
    out.push_back({p.time, p.value, kind, boundary});
  };

  // Hysteresis scan: an extremum is confirmed once the signal has moved
  // away from it by more than the prominence threshold.
  enum class Look { Unknown, ForMax, ForMin } look = Look::Unknown;
  std::size_t max_pos = 0, min_pos = 0;
  const double delta = tol.extremum;
  for (std::size_t i = 1; i < n; ++i) {
    const double v = values[i];
    if (v > values[max_pos]) max_pos = i;
    if (v < values[min_pos]) min_pos = i;
    switch (look) {
      case Look::Unknown:
        if (v > values[min_pos] + delta) {
          emit(min_pos, ExtremumKind::Min);
          look = Look::ForMax;
          max_pos = i;
        } else if (v < values[max_pos] - delta) {
          emit(max_pos, ExtremumKind::Max);
          look = Look::ForMin;
          min_pos = i;
        }
        break;
      case Look::ForMax:
        if (v < values[max_pos] - delta) {
          emit(max_pos, ExtremumKind::Max);
          look = Look::ForMin;
          min_pos = i;
        }
        break;
      case Look::ForMin:
        if (v > values[min_pos] + delta) {
          emit(min_pos, ExtremumKind::Min);
          look = Look::ForMax;
          max_pos = i;
        }
        break;
    }
  }

  const std::size_t last = n - 1;
  if (look == Look::Unknown) {
    const bool rising = values[last] >= values[0];
    out.push_back({times[0], values[0], rising ? ExtremumKind::Min : ExtremumKind::Max, true});
    out.push_back({times[last], values[last], rising ? ExtremumKind::Max : ExtremumKind::Min, true});
    return out;
  }
  if (!out.front().boundary) {
    // the first confirmed extremum is interior: the start is the opposite kind
    const auto kind = out.front().kind == ExtremumKind::Max ? ExtremumKind::Min : ExtremumKind::Max;
    out.insert(out.begin(), Extremum{times[0], values[0], kind, true});
  }
  const auto tail_kind = look == Look::ForMax ? ExtremumKind::Max : ExtremumKind::Min;
  out.push_back({times[last], values[last], tail_kind, true});
  return out;
}

std::vector<Extremum> find_extrema(const Trajectory& trajectory, const Tolerances& tol) {
  return find_extrema(trajectory.times, trajectory.glucose, tol);
}

ShapeReport classify(const Trajectory& trajectory, double lambda, const Tolerances& tol) {
  ShapeReport report;
  if (trajectory.size() == 0) return report;
  report.extrema = find_extrema(trajectory, tol);
  report.initial = trajectory.glucose.front();

  report.gamma = -std::numeric_limits<double>::infinity();
  report.minimum = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < trajectory.size(); ++i) {
    const double g = trajectory.glucose[i];
    if (g > report.gamma) {
      report.gamma = g;
      report.gamma_time = trajectory.times[i];
    }
    if (g < report.minimum) {
      report.minimum = g;
      report.minimum_time = trajectory.times[i];
    }
  }
  for (const auto& e : report.extrema) {
    if (e.boundary) continue;
    if (e.kind == ExtremumKind::Max && e.value > report.gamma) {
      report.gamma = e.value;
      report.gamma_time = e.time;
    }
    if (e.kind == ExtremumKind::Min && e.value < report.minimum) {
      report.minimum = e.value;
      report.minimum_time = e.time;
    }
  }

  report.exceeds_initial = report.gamma > report.initial + tol.extremum;
  report.improper = report.minimum < lambda - tol.floor;

  const double max_threshold = report.gamma * (1.0 - tol.equal_max);
  for (const auto& e : report.extrema) {
    if (e.boundary) continue;
    if (e.kind == ExtremumKind::Min && e.value <= lambda + tol.floor)
      report.lambda_attained.push_back(e.time);
    if (e.kind == ExtremumKind::Max && e.value >= max_threshold)
      report.global_max_times.push_back(e.time);
  }

  const auto& floors = report.lambda_attained;
  const auto& maxima = report.global_max_times;
  if (!floors.empty() && !maxima.empty()) {
    const double first_floor = floors.front(), last_floor = floors.back();
    const double first_max = maxima.front(), last_max = maxima.back();
    report.lambda_optimal = std::any_of(maxima.begin(), maxima.end(), [&](double m) {
      return first_floor < m && m < last_floor;
    });
    report.gamma_optimal = first_max < first_floor && last_floor < last_max;
    report.case_a = last_max < first_floor;
    report.case_b = first_max > last_floor;
    report.interlaced = maxima.size() >= 2 && floors.size() >= 2 && !report.case_a && !report.case_b;
  }

  if (report.improper)
    report.classification = Shape::Improper;
  else if (report.interlaced)
    report.classification = Shape::GloballyOptimalShape;
  else if (report.lambda_optimal)
    report.classification = Shape::LambdaOptimal;
  else if (report.gamma_optimal)
    report.classification = Shape::GammaOptimal;
  else if (report.case_a)
    report.classification = Shape::CaseA;
  else if (report.case_b)
    report.classification = Shape::CaseB;
  else
    report.classification = Shape::Indeterminate;
  return report;
}

std::size_t count_sign_changes(const Trajectory& a, const Trajectory& b, double after,
                               std::optional<std::size_t> component, double noise) {
  if (a.size() != b.size())
    throw Error(ErrorKind::GridMismatch, "trajectories have different sample counts");
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::fabs(a.times[i] - b.times[i]) > 1e-9)
      throw Error(ErrorKind::GridMismatch, "trajectories are sampled on different grids");
  if (component && (!a.has_states() || !b.has_states() || *component >= a.state_count))
    throw Error(ErrorKind::InvalidInput, "state component not recorded");

  auto value = [&](const Trajectory& t, std::size_t i) {
    return component ? t.states[i * t.state_count + *component] : t.glucose[i];
  };
  std::size_t changes = 0;
  int last_sign = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!(a.times[i] > after)) continue;
    const double diff = value(a, i) - value(b, i);
    const int sign = diff > noise ? 1 : (diff < -noise ? -1 : 0);
    if (sign == 0) continue;
    if (last_sign != 0 && sign != last_sign) ++changes;
    last_sign = sign;
  }
  return changes;
}

double max_h(const Trajectory& trajectory) {
  if (trajectory.uptake.empty())
    throw Error(ErrorKind::InvalidInput, "trajectory was recorded without states");
  return *std::max_element(trajectory.uptake.begin(), trajectory.uptake.end());
}

}  // namespace bolusopt
