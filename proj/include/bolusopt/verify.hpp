#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bolusopt/scenario.hpp"

namespace bolusopt {

enum class Suite { Monotonicity, Intersections, SteadyState, Nesting };

std::string_view to_string(Suite suite) noexcept;
std::optional<Suite> suite_from_string(std::string_view name) noexcept;

/// A failed check with the exact inputs needed to replay it.
struct Violation {
  std::size_t trial = 0;
  std::string message;
  std::map<std::string, double> inputs;
};

struct SuiteReport {
  Suite suite = Suite::SteadyState;
  std::string model;
  std::uint64_t seed = 0;
  std::size_t trials = 0;   // requested
  std::size_t checked = 0;  // actually evaluated
  std::size_t skipped = 0;  // degenerate draws, e.g. equal magnitudes
  std::vector<Violation> violations;

  bool passed() const noexcept { return violations.empty(); }
};

/// Randomized property suites. Trial i draws from its own generator seeded
/// with (seed, i), so results do not depend on scheduling.
///
///  monotonicity   pairs u1 < u2 at a shared (t', tau): g(u2) <= g(u1) everywhere,
///                 strictly after t' + 1
///  intersections  distinct proper pulse pairs: at most two sign changes of the
///                 glucose difference after min(t', s')
///  steady-state   basal input without meal stays within 1e-6 of g0
///  nesting        duration-optimizer bracket sequences are nested and improving
SuiteReport run_suite(const Scenario& scenario, Suite suite, std::size_t trials, std::uint64_t seed);

/// Serial reference; identical reports.
SuiteReport run_suite_serial(const Scenario& scenario, Suite suite, std::size_t trials,
                             std::uint64_t seed);

std::string suite_report_json(const SuiteReport& report);

}  // namespace bolusopt
