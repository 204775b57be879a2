#pragma once

#include <utility>
#include <vector>

namespace bolusopt {

/// Rectangular ingestion pulse: `height` on [start, end].
struct MealPulse {
  double height = 0.0;
  double start = 0.0;
  double end = 0.0;

  bool operator==(const MealPulse&) const = default;
};

/// Second-order linear absorption cascade turning ingestion pulses rho(t)
/// into the glucose appearance rate r(t) = output_gain * f1:
///
///   f1' = (f2 - f1) / T
///   f2' = -f2 / T + drive_gain * rho(t)
///
/// rho(t) is the sum of active pulse heights times pulse_scale, which
/// converts the unit the heights are written in (e.g. g carbohydrate/min)
/// into the model's glucose unit.
struct MealCascade {
  double time_constant = 60.0;
  double output_gain = 0.0;
  double drive_gain = 1.0;
  std::vector<MealPulse> pulses;
  double pulse_scale = 1.0;

  void validate() const;
  bool operator==(const MealCascade&) const = default;

  /// Total ingestion rate; closed intervals, overlapping pulses add.
  double rho(double t) const noexcept;
  /// Every pulse edge, sorted and de-duplicated.
  std::vector<double> breakpoints() const;
};

std::pair<double, double> cascade_derivatives(double f1, double f2, const MealCascade& cascade,
                                              double t);

/// Derivatives with a precomputed (segment-constant) ingestion rate.
inline std::pair<double, double> cascade_derivatives_at(double f1, double f2,
                                                        const MealCascade& cascade,
                                                        double rho) noexcept {
  const double inv_t = 1.0 / cascade.time_constant;
  return {(f2 - f1) * inv_t, -f2 * inv_t + cascade.drive_gain * rho};
}

inline double meal_rate(double f1, const MealCascade& cascade) noexcept {
  return cascade.output_gain * f1;
}

/// mmol of glucose per gram.
inline constexpr double kMmolPerGramGlucose = 1000.0 / 180.156;

/// The example disturbances: a long low-rate pulse with a short spike. The
/// Hovorka heights are grams of carbohydrate per minute.
MealCascade bergman_paper_meal();
MealCascade hovorka_paper_meal();

}  // namespace bolusopt
