#include <doctest.h>

#include <json.hpp>

#include "bolusopt/verify.hpp"

using namespace bolusopt;
using nlohmann::json;

namespace {

void check_same(const SuiteReport& a, const SuiteReport& b) {
  CHECK(a.checked == b.checked);
  CHECK(a.skipped == b.skipped);
  REQUIRE(a.violations.size() == b.violations.size());
  for (std::size_t i = 0; i < a.violations.size(); ++i) {
    CHECK(a.violations[i].trial == b.violations[i].trial);
    CHECK(a.violations[i].inputs == b.violations[i].inputs);
  }
  CHECK(suite_report_json(a) == suite_report_json(b));
}

}  // namespace

TEST_CASE("suite names") {
  for (Suite s : {Suite::Monotonicity, Suite::Intersections, Suite::SteadyState, Suite::Nesting})
    CHECK(suite_from_string(to_string(s)) == s);
  CHECK(to_string(Suite::SteadyState) == "steady-state");
  CHECK_FALSE(suite_from_string("all").has_value());
}

TEST_CASE("randomized suites pass and match the serial reference") {
  for (const Scenario& sc : {bergman_paper_scenario(), hovorka_paper_scenario()}) {
    CAPTURE(model_name(sc.model));
    for (auto [suite, trials] : {std::pair{Suite::Monotonicity, 16}, {Suite::Intersections, 40}}) {
      const auto par = run_suite(sc, suite, trials, 11);
      CHECK(par.passed());
      CHECK(par.checked + par.skipped == static_cast<std::size_t>(trials));
      CHECK(par.checked > 0);
      check_same(par, run_suite_serial(sc, suite, trials, 11));
    }
  }
}

TEST_CASE("report records the seed") {
  const auto sc = bergman_paper_scenario();
  const auto a = json::parse(suite_report_json(run_suite(sc, Suite::Monotonicity, 4, 1)));
  const auto b = json::parse(suite_report_json(run_suite(sc, Suite::Monotonicity, 4, 2)));
  CHECK(a["seed"] == 1);
  CHECK(b["seed"] == 2);
}

TEST_CASE("steady state suite") {
  for (const Scenario& sc : {bergman_paper_scenario(), hovorka_paper_scenario()}) {
    const auto r = run_suite(sc, Suite::SteadyState, 1, 1);
    CHECK(r.passed());
    CHECK(r.checked >= 1);
  }
}

TEST_CASE("nesting suite on the bergman scenario") {
  const auto r = run_suite(bergman_paper_scenario(), Suite::Nesting, 1, 1);
  CHECK(r.passed());
  CHECK(r.checked > 2);
}

TEST_CASE("report json") {
  SuiteReport r;
  r.suite = Suite::Intersections;
  r.model = "hovorka";
  r.seed = 9;
  r.trials = 3;
  r.checked = 2;
  r.skipped = 1;
  r.violations.push_back({1, "three sign changes", {{"t_prime_1", 250.0}, {"tau_1", 40.0}}});
  const auto doc = json::parse(suite_report_json(r));
  CHECK(doc["suite"] == "intersections");
  CHECK(doc["model"] == "hovorka");
  CHECK(doc["passed"] == false);
  CHECK(doc["checked"] == 2);
  REQUIRE(doc["violations"].size() == 1);
  CHECK(doc["violations"][0]["trial"] == 1);
  CHECK(doc["violations"][0]["inputs"]["tau_1"] == 40.0);
}
