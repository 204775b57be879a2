#include "bolusopt/disturbance.hpp"

#include <algorithm>
#include <cmath>

#include "bolusopt/errors.hpp"

namespace bolusopt {

void MealCascade::validate() const {
  if (!(time_constant > 0.0) || !std::isfinite(time_constant))
    throw Error(ErrorKind::InvalidInput, "meal time_constant must be > 0");
  if (!std::isfinite(output_gain) || !std::isfinite(drive_gain) || !std::isfinite(pulse_scale))
    throw Error(ErrorKind::InvalidInput, "meal gains must be finite");
  for (const auto& p : pulses) {
    if (!std::isfinite(p.height) || !std::isfinite(p.start) || !std::isfinite(p.end))
      throw Error(ErrorKind::InvalidInput, "meal pulse fields must be finite");
    if (!(p.start < p.end)) throw Error(ErrorKind::InvalidInput, "meal pulse needs start < end");
    if (p.start < 0.0) throw Error(ErrorKind::InvalidInput, "meal pulse start must be >= 0");
  }
}

double MealCascade::rho(double t) const noexcept {
  double total = 0.0;
  for (const auto& p : pulses)
    if (t >= p.start && t <= p.end) total += p.height;
  return total * pulse_scale;
}

std::vector<double> MealCascade::breakpoints() const {
  std::vector<double> out;
  out.reserve(2 * pulses.size());
  for (const auto& p : pulses) {
    out.push_back(p.start);
    out.push_back(p.end);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::pair<double, double> cascade_derivatives(double f1, double f2, const MealCascade& cascade,
                                              double t) {
  return cascade_derivatives_at(f1, f2, cascade, cascade.rho(t));
}

MealCascade bergman_paper_meal() {
  return {60.0, 1.0 / 263.0, 1.0, {{5.0, 300.0, 800.0}, {100.0, 450.0, 460.0}}};
}

MealCascade hovorka_paper_meal() {
  return {55.0, 1.0 / 55.0, 0.8, {{0.2, 300.0, 800.0}, {5.0, 450.0, 460.0}}, kMmolPerGramGlucose};
}

}  // namespace bolusopt
