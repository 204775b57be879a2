#include <doctest.h>

#include <cmath>
#include <vector>

#include "bolusopt/errors.hpp"
#include "bolusopt/solvers.hpp"

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

double gamma_at(const Scenario& sc, double t_prime, double tau) {
  const auto sol = solve_proper(sc, t_prime, tau);
  return classify(sol.trajectory, sc.lambda, sc.tol).gamma;
}

// Bergman global optimum for the stock scenario, frozen.
constexpr double kBergmanTPrime = 292.55610704421997;
constexpr double kBergmanTau = 322.265625;
constexpr double kBergmanGamma = 6.14697221;

}  // namespace

TEST_CASE("proper solve touches the floor") {
  for (const Scenario& sc : {bergman_paper_scenario(), hovorka_paper_scenario()}) {
    for (auto [t, tau] : {std::pair{300.0, 200.0}, {200.0, 600.0}, {400.0, 0.0}}) {
      const auto sol = solve_proper(sc, t, tau);
      CHECK(std::fabs(sol.achieved_min - sc.lambda) <= sc.tol.floor);
      const double lowest = *std::min_element(sol.trajectory.glucose.begin(), sol.trajectory.glucose.end());
      CHECK(lowest >= sc.lambda - sc.tol.floor);
      CHECK(sol.iterations <= 60);
      CHECK(sol.u_hat > 0.0);
      CHECK_FALSE(classify(sol.trajectory, sc.lambda, sc.tol).improper);
    }
  }
}

TEST_CASE("proper magnitudes, frozen") {
  CHECK(solve_proper(bergman_paper_scenario(), 300.0, 200.0).u_hat == doctest::Approx(1163485.441).epsilon(1e-8));
  CHECK(solve_proper(hovorka_paper_scenario(), 300.0, 200.0).u_hat == doctest::Approx(21.42544219).epsilon(1e-8));
}

TEST_CASE("floor already met without a bolus gives a zero magnitude") {
  auto sc = bergman_paper_scenario();
  // the unbolused response never drops below g0
  sc.lambda = sc.g0 - 1e-10;
  const auto sol = solve_proper(sc, 300.0, 200.0, std::nullopt, true);
  CHECK(sol.u_hat == 0.0);
  CHECK(classify(sol.trajectory, sc.lambda, sc.tol).classification != Shape::Improper);
}

TEST_CASE("proper solve failures") {
  auto sc = bergman_paper_scenario();
  // a negative meal pulls glucose far below the floor before the bolus
  sc.meal.pulses = {{-5.0, 50.0, 150.0}};
  CHECK(kind_of([&] { solve_proper(sc, 300.0, 100.0); }) == ErrorKind::InfeasibleFloor);
  CHECK(kind_of([&] { solve_proper(sc, 10.0, 100.0); }) == ErrorKind::NoFloorContact);
}

TEST_CASE("delivery optimum beats nearby delivery times") {
  for (const Scenario& sc : {bergman_paper_scenario(), hovorka_paper_scenario()}) {
    const auto r = optimize_delivery(sc, 200.0, sc.solver.t_lo, sc.solver.t_hi);
    CHECK(r.classification == Shape::GammaOptimal);
    CHECK(gamma_at(sc, r.t_prime - 20.0, 200.0) > r.gamma);
    CHECK(gamma_at(sc, r.t_prime + 20.0, 200.0) > r.gamma);
    CHECK(std::fabs(r.report.minimum - sc.lambda) <= sc.tol.floor);
  }
}

TEST_CASE("delivery optimum on the edge of the window") {
  const auto sc = bergman_paper_scenario();
  CHECK(kind_of([&] { optimize_delivery(sc, 200.0, 0.0, 100.0); }) == ErrorKind::WindowTooNarrow);
  CHECK(kind_of([&] { optimize_delivery(sc, 200.0, 50.0, 50.0); }) == ErrorKind::InvalidInput);
}

TEST_CASE("gamma along tau, frozen") {
  struct Row {
    double tau, t_prime, gamma;
    Shape shape;
  };
  const std::vector<Row> bergman{{2.0, 415.3887033, 8.210963649, Shape::GammaOptimal},
                                 {100.0, 383.5104704, 7.599695737, Shape::GammaOptimal},
                                 {700.0, 184.3505502, 10.32327623, Shape::LambdaOptimal}};
  const std::vector<Row> hovorka{{2.0, 450.3422379, 10.16868201, Shape::GammaOptimal},
                                 {200.0, 365.3274179, 8.681396816, Shape::GammaOptimal},
                                 {1000.0, 142.0663595, 16.02471327, Shape::LambdaOptimal}};
  auto check = [](const Scenario& sc, const std::vector<Row>& rows) {
    for (const auto& row : rows) {
      CAPTURE(row.tau);
      const auto r = optimize_delivery(sc, row.tau, sc.solver.t_lo, sc.solver.t_hi);
      CHECK(r.t_prime == doctest::Approx(row.t_prime).epsilon(1e-5));
      CHECK(r.gamma == doctest::Approx(row.gamma).epsilon(1e-6));
      CHECK(r.classification == row.shape);
    }
  };
  check(bergman_paper_scenario(), bergman);
  check(hovorka_paper_scenario(), hovorka);
}

TEST_CASE("bergman global optimum, frozen") {
  const auto sc = bergman_paper_scenario();
  const auto r = optimize_global(sc);
  CHECK(r.classification == Shape::GloballyOptimalShape);
  CHECK(r.tau == doctest::Approx(kBergmanTau).epsilon(1e-6));
  CHECK(r.t_prime == doctest::Approx(kBergmanTPrime).epsilon(1e-5));
  CHECK(r.gamma == doctest::Approx(kBergmanGamma).epsilon(1e-6));
  CHECK(r.report.global_max_times.size() >= 2);
  CHECK(r.report.lambda_attained.size() >= 2);
  REQUIRE_FALSE(r.lower_side.empty());
  REQUIRE_FALSE(r.upper_side.empty());
  CHECK(r.lower_side.back().tau < r.tau + sc.solver.tol_tau);
  CHECK(r.upper_side.back().tau > r.tau - sc.solver.tol_tau);
  // every evaluated duration does at least as badly
  for (const auto& e : r.sweep_log)
    if (e.ok()) CHECK(e.gamma >= r.gamma * (1.0 - sc.tol.equal_max));
}

TEST_CASE("fixed delivery: case B below the optimum, case A above") {
  const auto sc = bergman_paper_scenario();
  auto shape = [&](double tau) {
    const auto sol = solve_proper(sc, kBergmanTPrime, tau);
    return classify(sol.trajectory, sc.lambda, sc.tol).classification;
  };
  for (double tau : {50.0, 150.0, 250.0}) CHECK(shape(tau) == Shape::CaseB);
  for (double tau : {400.0, 500.0, 700.0}) CHECK(shape(tau) == Shape::CaseA);

  const auto r = optimize_duration_fixed_delivery(sc, kBergmanTPrime, 0.0, 1000.0);
  CHECK(r.tau == doctest::Approx(kBergmanTau).epsilon(1e-4));
  CHECK(r.gamma == doctest::Approx(kBergmanGamma).epsilon(1e-5));
  for (const auto& e : r.lower_side) CHECK(e.classification == Shape::CaseB);
  for (const auto& e : r.upper_side) CHECK(e.classification == Shape::CaseA);
}

TEST_CASE("duration search failures") {
  auto sc = bergman_paper_scenario();
  CHECK(kind_of([&] { optimize_duration(sc, 0.0, 100.0); }) == ErrorKind::NoLambdaOptimalFound);
  CHECK(kind_of([&] { optimize_duration(sc, 600.0, 1000.0); }) == ErrorKind::NoGammaOptimalFound);
  CHECK(kind_of([&] { optimize_duration(sc, 300.0, 300.0); }) == ErrorKind::InvalidInput);
  sc.meal.pulses.clear();
  CHECK(kind_of([&] { optimize_global(sc); }) == ErrorKind::PreconditionFailed);
}

TEST_CASE("parallel sweep matches the serial reference") {
  const auto sc = bergman_paper_scenario();
  const std::vector<double> taus{0.0, 120.0, 450.0, 900.0};
  const auto par = sweep_gamma(sc, SweepParameter::Tau, taus);
  const auto ser = sweep_gamma_serial(sc, SweepParameter::Tau, taus);
  REQUIRE(par.size() == ser.size());
  for (std::size_t i = 0; i < par.size(); ++i) {
    CHECK(par[i].value == taus[i]);
    CHECK(par[i].gamma == ser[i].gamma);
    CHECK(par[i].t_prime == ser[i].t_prime);
    CHECK(par[i].u_hat == ser[i].u_hat);
    CHECK(par[i].classification == ser[i].classification);
    CHECK(par[i].error == ser[i].error);
  }

  // delivery-time sweep at a fixed duration, including a point that fails
  const std::vector<double> ts{10.0, 250.0, 350.0};
  auto neg = sc;
  neg.meal.pulses = {{-5.0, 50.0, 150.0}};
  const auto a = sweep_gamma(neg, SweepParameter::TPrime, ts, 100.0);
  const auto b = sweep_gamma_serial(neg, SweepParameter::TPrime, ts, 100.0);
  REQUIRE(a.size() == 3);
  CHECK_FALSE(a[0].ok());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].gamma == b[i].gamma);
    CHECK(a[i].error == b[i].error);
  }
  CHECK(kind_of([&] { sweep_gamma(sc, SweepParameter::TPrime, ts); }) == ErrorKind::InvalidInput);
}
