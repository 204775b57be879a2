#include "bolusopt/report.hpp"

#include <ostream>

#include <json.hpp>

#include "bolusopt/format.hpp"

namespace bolusopt {

using nlohmann::ordered_json;

namespace {

ordered_json report_object(const ShapeReport& r) {
  ordered_json extrema = ordered_json::array();
  for (const auto& e : r.extrema)
    extrema.push_back({{"time", e.time},
                       {"value", e.value},
                       {"kind", e.kind == ExtremumKind::Max ? "max" : "min"},
                       {"boundary", e.boundary}});
  return {{"classification", to_string(r.classification)},
          {"gamma", r.gamma},
          {"gamma_time", r.gamma_time},
          {"minimum", r.minimum},
          {"minimum_time", r.minimum_time},
          {"initial", r.initial},
          {"lambda_attained", r.lambda_attained},
          {"global_max_times", r.global_max_times},
          {"improper", r.improper},
          {"lambda_optimal", r.lambda_optimal},
          {"gamma_optimal", r.gamma_optimal},
          {"interlaced", r.interlaced},
          {"case_a", r.case_a},
          {"case_b", r.case_b},
          {"exceeds_initial", r.exceeds_initial},
          {"extrema", extrema}};
}

ordered_json entry_object(const SweepEntry& e) {
  ordered_json j{{"value", e.value},
                 {"t_prime", e.t_prime},
                 {"tau", e.tau},
                 {"u_hat", e.u_hat},
                 {"gamma", e.gamma},
                 {"classification", to_string(e.classification)},
                 {"side", to_string(e.side)}};
  if (!e.ok()) j["error"] = e.error;
  return j;
}

ordered_json entries(std::span<const SweepEntry> list) {
  ordered_json out = ordered_json::array();
  for (const auto& e : list) out.push_back(entry_object(e));
  return out;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

}  // namespace

std::string shape_report_json(const ShapeReport& report) {
  return report_object(report).dump(2) + "\n";
}

std::string optimize_result_json(const OptimizeResult& r) {
  ordered_json j{{"t_prime", r.t_prime},
                 {"tau", r.tau},
                 {"u_hat", r.u_hat},
                 {"gamma", r.gamma},
                 {"classification", to_string(r.classification)},
                 {"note", r.note},
                 {"report", report_object(r.report)},
                 {"upper_side", entries(r.upper_side)},
                 {"lower_side", entries(r.lower_side)},
                 {"sweep_log", entries(r.sweep_log)}};
  return j.dump(2) + "\n";
}

void write_sweep_csv(std::ostream& os, std::span<const SweepEntry> list) {
  os << "value,t_prime,tau,u_hat,gamma,classification,side,error\n";
  for (const auto& e : list) {
    os << format_number(e.value) << ',' << format_number(e.t_prime) << ','
       << format_number(e.tau) << ',' << format_number(e.u_hat) << ',' << format_number(e.gamma)
       << ',' << to_string(e.classification) << ',' << to_string(e.side) << ','
       << csv_field(e.error) << '\n';
  }
}

}  // namespace bolusopt
