#pragma once

#include <iosfwd>
#include <span>
#include <string>

#include "bolusopt/analysis.hpp"
#include "bolusopt/solvers.hpp"

namespace bolusopt {

/// JSON record: classification, gamma, floor contacts and the extrema table.
std::string shape_report_json(const ShapeReport& report);

/// JSON record of an optimizer result, including its bracket sequences.
std::string optimize_result_json(const OptimizeResult& result);

/// CSV with header value,t_prime,tau,u_hat,gamma,classification,side,error.
void write_sweep_csv(std::ostream& os, std::span<const SweepEntry> entries);

}  // namespace bolusopt
