#include "bolusopt/scenario.hpp"

#include <cmath>

#include "bolusopt/errors.hpp"

namespace bolusopt {

void SolverSettings::validate() const {
  if (!(tau_lo >= 0.0) || !(tau_hi > tau_lo))
    throw Error(ErrorKind::InvalidInput, "solver needs 0 <= tau_lo < tau_hi");
  if (!(t_lo >= 0.0) || !(t_hi > t_lo))
    throw Error(ErrorKind::InvalidInput, "solver needs 0 <= t_lo < t_hi");
  if (!(tol_tau > 0.0) || !(tol_t_prime > 0.0) || !(floor_precision > 0.0))
    throw Error(ErrorKind::InvalidInput, "solver tolerances must be > 0");
  if (max_iterations == 0) throw Error(ErrorKind::InvalidInput, "max_iterations must be >= 1");
}

void Scenario::validate() const {
  if (!(lambda > 0.0)) throw Error(ErrorKind::InvalidInput, "lambda must be > 0");
  if (!(g0 > 0.0)) throw Error(ErrorKind::InvalidInput, "g0 must be > 0");
  if (!(lambda < g0))
    throw Error(ErrorKind::InvalidInput, "lambda must be below g0 (got lambda = " +
                                             std::to_string(lambda) + ", g0 = " +
                                             std::to_string(g0) + ")");
  meal.validate();
  sim.validate();
  tol.validate();
  solver.validate();
  (void)basal();  // surfaces InfeasibleBasal early
}

BergmanParams bergman_paper_params() {
  BergmanParams p;
  p.a = 0.0101;
  p.b = 8.16e-4;
  p.c = 0.025;
  p.d = 0.025;
  p.k = 1.0 / 1806.0;
  p.G = 0.0023;
  p.E = 1.0;
  return p;
}

HovorkaParams hovorka_2004_params(double body_weight) {
  HovorkaParams p;
  p.body_weight = body_weight;
  p.a1 = 0.006;
  p.a2 = 0.06;
  p.a3 = 0.03;
  p.b1 = 51.2e-4;  // S_IT
  p.b2 = 8.2e-4;   // S_ID
  p.b3 = 520e-4;   // S_IE
  p.d = 1.0 / 55.0;
  p.k = 0.138;
  p.c = 1.0 / (0.12 * body_weight);
  p.E = 0.0161 * body_weight;
  p.f = 0.0097 * body_weight;
  p.V = 0.16 * body_weight;
  p.l = 0.066;
  p.g_c_bar = 4.5;
  p.g_r_bar = 9.0;
  p.R = 0.003;
  return p;
}

Scenario bergman_paper_scenario() {
  Scenario s{BergmanModel(bergman_paper_params())};
  s.preset = "bergman-paper";
  s.meal = bergman_paper_meal();
  s.sim.horizon = 2000.0;
  return s;
}

Scenario hovorka_paper_scenario() {
  Scenario s{HovorkaModel(hovorka_2004_params())};
  s.preset = "hovorka-2004-70kg";
  s.meal = hovorka_paper_meal();
  s.sim.horizon = 2500.0;
  return s;
}

}  // namespace bolusopt
