#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "bolusopt/analysis.hpp"
#include "bolusopt/disturbance.hpp"
#include "bolusopt/integrate.hpp"
#include "bolusopt/models.hpp"

namespace bolusopt {

struct SolverSettings {
  double tau_lo = 0.0;
  double tau_hi = 1000.0;
  double t_lo = 0.0;
  double t_hi = 1000.0;
  double tol_tau = 0.01;          // duration bracket width at termination, min
  double tol_t_prime = 1e-4;      // delivery-time bracket width at termination, min
  double floor_precision = 1e-9;  // |min g - lambda| target of the magnitude solve
  std::size_t max_iterations = 200;
  /// Durations probed, in order, while seeding the duration bracket.
  std::vector<double> tau_seeds{2.0, 50.0, 100.0, 200.0, 400.0, 800.0, 1600.0};

  void validate() const;
  bool operator==(const SolverSettings&) const = default;
};

/// One complete experiment: model, calibration, floor, disturbance and
/// numerical settings. The preset name and overrides are kept only so that a
/// loaded scenario serializes back to the same document.
struct Scenario {
  explicit Scenario(Model m) : model(std::move(m)) {}

  Model model;
  std::string preset;
  std::map<std::string, double> overrides;
  double g0 = 5.0;
  double lambda = 4.0;
  MealCascade meal;
  SimConfig sim;
  Tolerances tol;
  SolverSettings solver;

  void validate() const;
  bool operator==(const Scenario&) const = default;
  double basal() const { return basal_for(model, g0); }
  /// Basal-only input, optionally carrying a bolus.
  PulseInput input(double u_hat = 0.0, double t_prime = 0.0, double tau = 0.0) const {
    return {basal(), u_hat, t_prime, tau};
  }
};

BergmanParams bergman_paper_params();
HovorkaParams hovorka_2004_params(double body_weight = 70.0);

/// The two worked examples: g0 = 5, lambda = 4, stock meals.
Scenario bergman_paper_scenario();
Scenario hovorka_paper_scenario();

}  // namespace bolusopt
