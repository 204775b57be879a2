#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "bolusopt/disturbance.hpp"
#include "bolusopt/errors.hpp"
#include "bolusopt/integrate.hpp"
#include "bolusopt/scenario.hpp"

using namespace bolusopt;

TEST_CASE("cascade derivatives") {
  const auto m = bergman_paper_meal();
  const auto [a, b] = cascade_derivatives(0.0, 0.0, m, 100.0);
  CHECK(a == 0.0);
  CHECK(b == 0.0);
  CHECK(m.rho(455.0) == 105.0);
  CHECK(m.rho(450.0) == 105.0);
  CHECK(m.rho(500.0) == 5.0);
  CHECK(m.rho(299.0) == 0.0);
  CHECK(m.rho(800.0) == 5.0);
  const auto [c, d] = cascade_derivatives(2.0, 5.0, m, 455.0);
  CHECK(c == doctest::Approx(3.0 / 60.0));
  CHECK(d == doctest::Approx(-5.0 / 60.0 + 105.0));
}

TEST_CASE("meal rate") {
  const auto m = bergman_paper_meal();
  CHECK(meal_rate(0.0, m) == 0.0);
  CHECK(meal_rate(263.0, m) == doctest::Approx(1.0));
  const auto h = hovorka_paper_meal();
  CHECK(meal_rate(55.0, h) == doctest::Approx(1.0));
  // grams of carbohydrate per minute converted to mmol/min
  CHECK(h.rho(500.0) == doctest::Approx(0.2 * 1000.0 / 180.156));
}

TEST_CASE("meal breakpoints and validation") {
  const auto m = bergman_paper_meal();
  const auto bp = m.breakpoints();
  REQUIRE(bp.size() == 4);
  CHECK(bp[0] == 300.0);
  CHECK(bp[1] == 450.0);
  CHECK(bp[2] == 460.0);
  CHECK(bp[3] == 800.0);
  MealCascade bad = m;
  bad.pulses.push_back({1.0, 10.0, 5.0});
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = m;
  bad.time_constant = 0.0;
  CHECK_THROWS_AS(bad.validate(), Error);
}

namespace {

// Basal-only Bergman run carrying the meal, so f1 and f2 are integrated
// alongside a flat model. Returns (times, r) samples.
Trajectory meal_run(const MealCascade& meal, double horizon, double dt = 0.05) {
  const BergmanModel m(bergman_paper_params());
  SimConfig cfg;
  cfg.horizon = horizon;
  cfg.dt = dt;
  return simulate(m, {m.basal(5.0), 0.0, 0.0, 0.0}, meal, cfg);
}

}  // namespace

TEST_CASE("f2 step response is first order") {
  // Unit step in rho from t = 0 with f1(0) = f2(0) = 0:
  //   f2(t) = D T (1 - e^{-t/T}),  f1(t) = D T (1 - e^{-t/T} - (t/T) e^{-t/T}).
  // Only f1 is recorded (output gain 1); f2 is recovered as f1 + T f1'.
  const double T = 60.0, D = 0.8;
  const MealCascade step{T, 1.0, D, {{1.0, 0.0, 5000.0}}};
  const auto tr = meal_run(step, T);
  const double t = tr.times.back();
  CHECK(t == T);
  const double e = std::exp(-1.0);
  CHECK(tr.meal.back() == doctest::Approx(D * T * (1.0 - 2.0 * e)).epsilon(1e-9));
  const std::size_t n = tr.size();
  const double df1 = (tr.meal[n - 1] - tr.meal[n - 3]) / (tr.times[n - 1] - tr.times[n - 3]);
  const double f2 = tr.meal[n - 2] + T * df1;
  CHECK(f2 == doctest::Approx(D * T * (1.0 - std::exp(-tr.times[n - 2] / T))).epsilon(1e-5));
}

TEST_CASE("total meal exposure equals the DC gain") {
  for (const auto& meal : {bergman_paper_meal(), hovorka_paper_meal()}) {
    const auto tr = meal_run(meal, 5000.0);
    double integral = 0.0;
    for (std::size_t i = 1; i < tr.size(); ++i)
      integral += 0.5 * (tr.meal[i] + tr.meal[i - 1]) * (tr.times[i] - tr.times[i - 1]);
    double rho_integral = 0.0;
    for (const auto& p : meal.pulses) rho_integral += p.height * (p.end - p.start);
    rho_integral *= meal.pulse_scale;
    const double expected = meal.output_gain * meal.drive_gain * meal.time_constant * rho_integral;
    CHECK(integral == doctest::Approx(expected).epsilon(1e-6));
  }
}

TEST_CASE("meal rate is non-negative, continuous and decays") {
  auto largest_step = [](const Trajectory& tr) {
    double out = 0.0;
    for (std::size_t i = 1; i < tr.size(); ++i) out = std::max(out, std::fabs(tr.meal[i] - tr.meal[i - 1]));
    return out;
  };
  const auto tr = meal_run(bergman_paper_meal(), 2000.0);
  CHECK(*std::min_element(tr.meal.begin(), tr.meal.end()) >= 0.0);
  // no jumps at the pulse edges: the largest step shrinks with dt
  const double coarse = largest_step(tr);
  const double fine = largest_step(meal_run(bergman_paper_meal(), 2000.0, 0.025));
  CHECK(fine / coarse == doctest::Approx(0.5).epsilon(0.05));
  CHECK(tr.meal.back() < 1e-3 * *std::max_element(tr.meal.begin(), tr.meal.end()));
}
