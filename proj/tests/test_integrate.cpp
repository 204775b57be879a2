#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <string>

#include "bolusopt/errors.hpp"
#include "bolusopt/integrate.hpp"
#include "bolusopt/scenario.hpp"

using namespace bolusopt;

namespace {

double max_glucose(const Trajectory& tr) { return *std::max_element(tr.glucose.begin(), tr.glucose.end()); }

double value_at(const Trajectory& tr, double t) {
  const auto it = std::find_if(tr.times.begin(), tr.times.end(), [&](double x) { return std::fabs(x - t) < 1e-9; });
  REQUIRE(it != tr.times.end());
  return tr.glucose[static_cast<std::size_t>(it - tr.times.begin())];
}

}  // namespace

TEST_CASE("basal input without meal stays at g0") {
  for (const Scenario& sc : {bergman_paper_scenario(), hovorka_paper_scenario()}) {
    MealCascade none = sc.meal;
    none.pulses.clear();
    const auto tr = simulate(sc.model, sc.input(), none, sc.sim);
    for (double g : tr.glucose) CHECK(std::fabs(g - 5.0) < 1e-6);
  }
}

TEST_CASE("grid contains every breakpoint") {
  const auto sc = bergman_paper_scenario();
  SimConfig cfg = sc.sim;
  cfg.breakpoints = {123.456};
  const auto tr = simulate(sc.model, sc.input(1e6, 291.37, 71.123), sc.meal, cfg);
  CHECK(tr.times.front() == 0.0);
  CHECK(tr.times.back() == 2000.0);
  for (std::size_t i = 1; i < tr.size(); ++i) CHECK(tr.times[i] > tr.times[i - 1]);
  for (double t : {123.456, 291.37, 291.37 + 71.123, 300.0, 450.0, 460.0, 800.0}) {
    const bool found = std::any_of(tr.times.begin(), tr.times.end(), [&](double x) { return std::fabs(x - t) < 1e-9; });
    CHECK(found);
  }
  const auto bp = integration_grid_breakpoints(sc.input(1e6, 291.37, 71.123), sc.meal, cfg);
  CHECK(std::is_sorted(bp.begin(), bp.end()));
  CHECK(bp.front() == 0.0);
  CHECK(bp.back() == 2000.0);
}

TEST_CASE("fourth-order self-convergence") {
  // basal input plus a single meal pulse; glucose at t = 1000 against a fine reference
  auto sc = bergman_paper_scenario();
  sc.meal.pulses = {{5.0, 300.0, 800.0}};
  auto at = [&](double dt) {
    SimConfig cfg = sc.sim;
    cfg.dt = dt;
    cfg.horizon = 1000.0;
    return simulate(sc.model, sc.input(), sc.meal, cfg).glucose.back();
  };
  const double ref = at(0.25 / 16.0);
  const double e1 = std::fabs(at(4.0) - ref);
  const double e2 = std::fabs(at(2.0) - ref);
  const double e3 = std::fabs(at(1.0) - ref);
  CHECK(e1 / e2 == doctest::Approx(16.0).epsilon(0.2));
  CHECK(e2 / e3 == doctest::Approx(16.0).epsilon(0.2));
}

TEST_CASE("halving dt barely moves the peak") {
  const auto sc = bergman_paper_scenario();
  const auto in = sc.input(1.1e6, 292.5, 322.3);
  SimConfig fine = sc.sim;
  fine.dt = sc.sim.dt / 2.0;
  const double a = max_glucose(simulate(sc.model, in, sc.meal, sc.sim));
  const double b = max_glucose(simulate(sc.model, in, sc.meal, fine));
  CHECK(std::fabs(a - b) < 1e-5);
}

TEST_CASE("impulse equals the limit of short pulses") {
  for (const Scenario& sc : {bergman_paper_scenario(), hovorka_paper_scenario()}) {
    const double amount = model_name(sc.model) == "bergman" ? 2e7 : 300.0;
    const auto impulse = simulate(sc.model, sc.input(amount, 350.0, 0.0), sc.meal, sc.sim);
    const auto pulse = simulate(sc.model, sc.input(amount / 0.01, 350.0, 0.01), sc.meal, sc.sim);
    CHECK(std::fabs(value_at(impulse, 600.0) - value_at(pulse, 600.0)) < 1e-3);
    CHECK(value_at(impulse, 600.0) < value_at(simulate(sc.model, sc.input(), sc.meal, sc.sim), 600.0));
  }
}

TEST_CASE("bergman impulse jumps z by d k u_hat") {
  const auto p = bergman_paper_params();
  const BergmanModel m(p);
  const auto s = m.steady_state(m.basal(5.0));
  const auto j = m.apply_impulse(s, 1000.0);
  CHECK(j[0] - s[0] == doctest::Approx(p.d * p.k * 1000.0));
  CHECK(j[1] == s[1]);
}

TEST_CASE("simulation is deterministic") {
  const auto sc = hovorka_paper_scenario();
  const auto a = simulate(sc.model, sc.input(17.0, 282.0, 357.8), sc.meal, sc.sim);
  const auto b = simulate(sc.model, sc.input(17.0, 282.0, 357.8), sc.meal, sc.sim);
  CHECK(a.glucose == b.glucose);
  CHECK(a.states == b.states);
}

TEST_CASE("states stay non-negative") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (const Scenario& sc : {bergman_paper_scenario(), hovorka_paper_scenario()}) {
    const double scale = model_name(sc.model) == "bergman" ? 1.2e6 : 20.0;
    for (int i = 0; i < 5; ++i) {
      const double tau = 1.0 + 400.0 * unit(rng);
      const auto tr = simulate(sc.model, sc.input(scale * unit(rng), 600.0 * unit(rng), tau), sc.meal, sc.sim);
      CHECK(*std::min_element(tr.states.begin(), tr.states.end()) >= 0.0);
    }
  }
}

TEST_CASE("hovorka glucose is q1 over V at every sample") {
  const auto sc = hovorka_paper_scenario();
  const auto& p = std::get<HovorkaModel>(sc.model).params();
  const auto tr = simulate(sc.model, sc.input(15.0, 300.0, 200.0), sc.meal, sc.sim);
  for (std::size_t i = 0; i < tr.size(); i += 97) CHECK(tr.glucose[i] == tr.state(i)[6] / p.V);
}

TEST_CASE("record stride and glucose-only mode") {
  const auto sc = bergman_paper_scenario();
  SimConfig cfg = sc.sim;
  cfg.record_stride = 10;
  const auto tr = simulate(sc.model, sc.input(), sc.meal, cfg);
  CHECK(tr.size() < 4100);
  CHECK(tr.times.back() == 2000.0);
  cfg.record_stride = 1;
  cfg.record_states = false;
  const auto g = simulate(sc.model, sc.input(), sc.meal, cfg);
  CHECK_FALSE(g.has_states());
  CHECK(g.glucose.size() == g.times.size());
}

TEST_CASE("config validation") {
  const auto sc = bergman_paper_scenario();
  SimConfig cfg = sc.sim;
  cfg.dt = 0.0;
  CHECK_THROWS_AS(simulate(sc.model, sc.input(), sc.meal, cfg), Error);
  cfg = sc.sim;
  cfg.breakpoints = {5000.0};
  CHECK_THROWS_AS(simulate(sc.model, sc.input(), sc.meal, cfg), Error);
}

TEST_CASE("refine_extremum") {
  const std::vector<double> t{1.0, 2.0, 3.0};
  // vertex of -(t - 2.25)^2 + 4
  std::vector<double> v;
  for (double x : t) v.push_back(-(x - 2.25) * (x - 2.25) + 4.0);
  const auto p = refine_extremum(t, v, 1);
  CHECK(p.time == doctest::Approx(2.25));
  CHECK(p.value == doctest::Approx(4.0));

  const std::vector<double> flat{3.0, 3.0, 3.0};
  const auto q = refine_extremum(t, flat, 1);
  CHECK(q.time == 2.0);
  CHECK(q.value == 3.0);

  // non-uniform spacing
  const std::vector<double> tn{0.0, 0.5, 2.0};
  std::vector<double> vn;
  for (double x : tn) vn.push_back(2.0 * (x - 0.7) * (x - 0.7) - 1.0);
  const auto r = refine_extremum(tn, vn, 1);
  CHECK(r.time == doctest::Approx(0.7));
  CHECK(r.value == doctest::Approx(-1.0));
}

TEST_CASE("trajectory csv") {
  const auto sc = bergman_paper_scenario();
  SimConfig cfg = sc.sim;
  cfg.horizon = 1.0;
  cfg.dt = 0.5;
  const auto tr = simulate(sc.model, sc.input(), sc.meal, cfg);
  std::ostringstream os;
  os.imbue(std::locale::classic());
  write_trajectory_csv(os, tr, true);
  std::istringstream in(os.str());
  std::string header, row;
  std::getline(in, header);
  CHECK(header == "time,g_mmol_per_L,g_mg_per_dL,z,y,x,g,u,r");
  std::getline(in, row);
  CHECK(row.rfind("0,5,90,", 0) == 0);
  std::getline(in, row);
  CHECK(row.rfind("0.5,5,90,", 0) == 0);

  std::ostringstream plain;
  write_trajectory_csv(plain, tr, false);
  CHECK(plain.str().rfind("time,g_mmol_per_L,z,", 0) == 0);
}
