#include <doctest.h>

#include <cmath>

#include "bolusopt/errors.hpp"
#include "bolusopt/integrate.hpp"
#include "bolusopt/models.hpp"
#include "bolusopt/scenario.hpp"

using namespace bolusopt;

namespace {

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::InvalidInput;
}

}  // namespace

TEST_CASE("bergman derivatives vanish at the basal steady state") {
  const auto p = bergman_paper_params();
  const double u = basal_rate(p, 5.0);
  const BergmanState s{p.k * u, p.k * u, p.b * p.k * u, 5.0};
  const auto d = bergman_derivatives(s, p, u, 0.0);
  CHECK(std::fabs(d.z) < 1e-12);
  CHECK(std::fabs(d.y) < 1e-12);
  CHECK(std::fabs(d.x) < 1e-15);
  CHECK(std::fabs(d.g) < 1e-12);
}

TEST_CASE("bergman glucose derivative by hand") {
  const auto p = bergman_paper_params();
  const auto d = bergman_derivatives({0.0, 0.0, 0.0, 5.0}, p, 0.0, 0.0);
  CHECK(d.g == doctest::Approx(1.0 - 0.0023 * 5.0).epsilon(1e-15));
  CHECK(d.g == doctest::Approx(0.9885));

  const auto origin = bergman_derivatives({0.0, 0.0, 0.0, 0.0}, p, 0.0, 0.0);
  CHECK(origin.z == 0.0);
  CHECK(origin.y == 0.0);
  CHECK(origin.x == 0.0);
  CHECK(origin.g == 1.0);
}

TEST_CASE("bergman basal rate") {
  const auto p = bergman_paper_params();
  // 1806 / 8.16e-4 * (1/5 - 0.0023), evaluated independently
  CHECK(basal_rate(p, 5.0) == doctest::Approx(437556.6176470589).epsilon(1e-13));

  BergmanParams q = p;
  q.G = 0.25;
  q.E = 1.0;
  CHECK(basal_rate(q, 4.0) == 0.0);
  CHECK(kind_of([&] { basal_rate(q, 4.5); }) == ErrorKind::InfeasibleBasal);
  CHECK(kind_of([&] { basal_rate(p, 0.0); }) == ErrorKind::InvalidInput);

  double prev = basal_rate(p, 1.0);
  for (double g0 = 1.5; g0 < 400.0; g0 *= 1.5) {
    const double u = basal_rate(p, g0);
    CHECK(u < prev);
    prev = u;
  }
}

TEST_CASE("bergman steady state") {
  const auto p = bergman_paper_params();
  const auto s = bergman_steady_state(p, basal_rate(p, 5.0));
  CHECK(s.g == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(std::fabs(s.g - 5.0) < 1e-9);
  const auto zero = bergman_steady_state(p, 0.0);
  CHECK(zero.x == 0.0);
  CHECK(zero.g == doctest::Approx(1.0 / 0.0023));
}

TEST_CASE("bergman parameter validation") {
  auto p = bergman_paper_params();
  p.c = 0.0;
  CHECK(kind_of([&] { p.validate(); }) == ErrorKind::InvalidInput);
  p = bergman_paper_params();
  p.E = p.G / 2.0;
  CHECK(kind_of([&] { p.validate(); }) == ErrorKind::InvalidInput);
  CHECK(kind_of([&] { BergmanModel m(BergmanParams{}); }) == ErrorKind::InvalidInput);
}

TEST_CASE("hovorka piecewise terms") {
  const auto p = hovorka_2004_params();
  // below both thresholds
  CHECK(hovorka_fr(p, 4.0) == 0.0);
  CHECK(hovorka_fc(p, 4.0) == doctest::Approx(p.f / p.g_c_bar));
  // continuity at the thresholds, both branches
  CHECK(hovorka_fr(p, p.g_r_bar) == 0.0);
  CHECK(std::fabs(hovorka_fc(p, p.g_c_bar) - p.f / p.g_c_bar) < 1e-12);
  CHECK(std::fabs(hovorka_fr(p, std::nextafter(p.g_r_bar, 0.0)) - hovorka_fr(p, p.g_r_bar)) < 1e-12);
  CHECK(std::fabs(hovorka_fc(p, std::nextafter(p.g_c_bar, 0.0)) - hovorka_fc(p, p.g_c_bar)) < 1e-12);
  // above
  CHECK(hovorka_fr(p, 12.0) == doctest::Approx(p.V * p.R * (1.0 - 9.0 / 12.0)));
  CHECK(hovorka_fc(p, 6.0) == doctest::Approx(p.f / 6.0));
}

TEST_CASE("hovorka 70 kg parameter scaling") {
  const auto p = hovorka_2004_params(70.0);
  CHECK(p.V == doctest::Approx(11.2));
  CHECK(p.E == doctest::Approx(1.127));
  CHECK(p.f == doctest::Approx(0.679));
  CHECK(p.c == doctest::Approx(1.0 / 8.4));
  CHECK(p.d == doctest::Approx(1.0 / 55.0));
}

TEST_CASE("hovorka domain error at non-positive glucose") {
  const auto p = hovorka_2004_params();
  HovorkaState s;
  s.q1 = 0.0;
  CHECK(kind_of([&] { hovorka_derivatives(s, p, 0.0, 0.0); }) == ErrorKind::DomainError);
}

TEST_CASE("hovorka equilibrium and basal") {
  const auto p = hovorka_2004_params();
  const double u = hovorka_basal(p, 5.0);
  CHECK(u > 0.0);
  const auto s = hovorka_steady_state(p, u);
  CHECK(s.glucose(p) == doctest::Approx(5.0).epsilon(1e-10));
  const auto d = hovorka_derivatives(s, p, u, 0.0);
  for (double v : {d.z, d.y, d.x, d.x1, d.x2, d.x3, d.q1, d.q2}) CHECK(std::fabs(v) < 1e-9);

  const double g_max = hovorka_zero_input_glucose(p);
  CHECK(g_max > 5.0);
  CHECK(hovorka_basal(p, g_max) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(kind_of([&] { hovorka_basal(p, g_max + 0.5); }) == ErrorKind::InfeasibleBasal);

  // the basal rate is strictly decreasing in the target glucose
  CHECK(hovorka_basal(p, 4.5) > hovorka_basal(p, 5.0));
  CHECK(hovorka_basal(p, 5.0) > hovorka_basal(p, 7.0));
}

TEST_CASE("hovorka basal holds g0 for 5000 min") {
  const HovorkaModel m(hovorka_2004_params());
  const double u = m.basal(5.0);
  SimConfig cfg;
  cfg.horizon = 5000.0;
  const auto tr = simulate(m, {u, 0.0, 0.0, 0.0}, MealCascade{55.0, 0.0, 1.0, {}}, cfg);
  double worst = 0.0;
  for (double g : tr.glucose) worst = std::max(worst, std::fabs(g - 5.0));
  CHECK(worst < 1e-4);
}

TEST_CASE("pulse input is closed on both ends") {
  const PulseInput in{2.0, 3.0, 10.0, 5.0};
  CHECK(input_value(in, 10.0) == 5.0);
  CHECK(input_value(in, 15.0) == 5.0);
  CHECK(input_value(in, 12.0) == 5.0);
  CHECK(input_value(in, 9.999) == 2.0);
  CHECK(input_value(in, 15.001) == 2.0);
  CHECK(in.end() == 15.0);
  CHECK_FALSE(in.is_impulse());
  CHECK(PulseInput{1.0, 1.0, 3.0, 0.0}.is_impulse());
  CHECK(kind_of([] { PulseInput{1.0, -1.0, 0.0, 0.0}.validate(); }) == ErrorKind::InvalidInput);
}

TEST_CASE("model variant helpers") {
  const Model b = BergmanModel(bergman_paper_params());
  const Model h = HovorkaModel(hovorka_2004_params());
  CHECK(model_name(b) == "bergman");
  CHECK(model_name(h) == "hovorka");
  CHECK(state_names(b).size() == 4);
  CHECK(state_names(h).size() == 8);
  const auto s = steady_state_init(b, basal_for(b, 5.0));
  REQUIRE(s.size() == 4);
  CHECK(s[3] == doctest::Approx(5.0));
  const auto sh = steady_state_init(h, basal_for(h, 5.0));
  REQUIRE(sh.size() == 8);
  CHECK(sh[6] / hovorka_2004_params().V == doctest::Approx(5.0));
}
