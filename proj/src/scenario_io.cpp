#include "bolusopt/scenario_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "bolusopt/errors.hpp"

#ifndef BOLUSOPT_DEFAULT_PRESET_DIR
#define BOLUSOPT_DEFAULT_PRESET_DIR "presets"
#endif

namespace bolusopt {

using nlohmann::json;

namespace {

constexpr std::string_view kScenarioFormat = "bolusopt-scenario";
constexpr std::string_view kPresetFormat = "bolusopt-preset";
constexpr int kFormatVersion = 1;

const std::vector<std::string_view> kBergmanKeys{"a", "b", "c", "d", "k", "G", "E"};
const std::vector<std::string_view> kHovorkaKeys{
    "a1", "a2", "a3", "b1", "b2", "b3", "t_max_i", "k", "l", "g_c_bar", "g_r_bar", "R",
    "body_weight", "insulin_volume_per_kg", "E_per_kg", "f_per_kg", "V_per_kg"};

[[noreturn]] void invalid(const std::string& msg) { throw Error(ErrorKind::InvalidInput, msg); }

// Reads an object field by field and rejects whatever was not consumed.
class Fields {
 public:
  Fields(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) invalid(where_ + ": expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json& raw(const std::string& key) {
    if (!j_.contains(key)) invalid(where_ + ": missing key '" + key + "'");
    used_.insert(key);
    return j_.at(key);
  }

  double number(const std::string& key) {
    const auto& v = raw(key);
    if (!v.is_number()) invalid(where_ + "." + key + ": expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) invalid(where_ + "." + key + ": must be finite");
    return x;
  }
  double number(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

  std::size_t count(const std::string& key, std::size_t fallback) {
    if (!has(key)) return fallback;
    const auto& v = raw(key);
    if (!v.is_number_unsigned()) invalid(where_ + "." + key + ": expected a non-negative integer");
    return v.get<std::size_t>();
  }

  int integer(const std::string& key) {
    const auto& v = raw(key);
    if (!v.is_number_integer()) invalid(where_ + "." + key + ": expected an integer");
    return v.get<int>();
  }

  std::string text(const std::string& key) {
    const auto& v = raw(key);
    if (!v.is_string()) invalid(where_ + "." + key + ": expected a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(const std::string& key) {
    const auto& v = raw(key);
    if (!v.is_array()) invalid(where_ + "." + key + ": expected an array");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) invalid(where_ + "." + key + ": expected numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  std::map<std::string, double> number_map(const std::string& key) {
    const auto& v = raw(key);
    if (!v.is_object()) invalid(where_ + "." + key + ": expected an object");
    std::map<std::string, double> out;
    for (const auto& [k, e] : v.items()) {
      if (!e.is_number()) invalid(where_ + "." + key + "." + k + ": expected a number");
      out[k] = e.get<double>();
    }
    return out;
  }

  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!used_.count(k)) invalid(where_ + ": unknown key '" + k + "'");
  }

  const std::string& where() const { return where_; }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> used_;
};

json parse_json(std::string_view text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    invalid(what + ": " + e.what());
  }
}

void check_header(Fields& f, std::string_view format) {
  if (f.text("format") != format) invalid(f.where() + ": format must be '" + std::string(format) + "'");
  if (f.integer("version") != kFormatVersion)
    invalid(f.where() + ": unsupported version (expected " + std::to_string(kFormatVersion) + ")");
}

const std::vector<std::string_view>& keys_for(std::string_view model) {
  if (model == "bergman") return kBergmanKeys;
  if (model == "hovorka") return kHovorkaKeys;
  invalid("unknown model '" + std::string(model) + "' (expected bergman or hovorka)");
}

void check_keys(std::string_view model, const std::map<std::string, double>& values,
                const std::string& where) {
  const auto& keys = keys_for(model);
  for (const auto& [k, v] : values) {
    if (std::find(keys.begin(), keys.end(), k) == keys.end())
      invalid(where + ": unknown " + std::string(model) + " parameter '" + k + "'");
    if (!std::isfinite(v)) invalid(where + "." + k + ": must be finite");
  }
}

MealCascade parse_meal(const json& j) {
  Fields f(j, "meal");
  MealCascade m;
  m.time_constant = f.number("time_constant");
  m.output_gain = f.number("output_gain");
  m.drive_gain = f.number("drive_gain", 1.0);
  m.pulse_scale = f.number("pulse_scale", 1.0);
  const auto& pulses = f.raw("pulses");
  if (!pulses.is_array()) invalid("meal.pulses: expected an array");
  for (std::size_t i = 0; i < pulses.size(); ++i) {
    Fields p(pulses[i], "meal.pulses[" + std::to_string(i) + "]");
    m.pulses.push_back({p.number("height"), p.number("start"), p.number("end")});
    p.finish();
  }
  f.finish();
  return m;
}

json meal_json(const MealCascade& m) {
  json pulses = json::array();
  for (const auto& p : m.pulses) pulses.push_back({{"height", p.height}, {"start", p.start}, {"end", p.end}});
  return {{"time_constant", m.time_constant},
          {"output_gain", m.output_gain},
          {"drive_gain", m.drive_gain},
          {"pulse_scale", m.pulse_scale},
          {"pulses", pulses}};
}

SimConfig parse_sim(const json& j) {
  Fields f(j, "sim");
  SimConfig s;
  s.horizon = f.number("horizon", s.horizon);
  s.dt = f.number("dt", s.dt);
  if (f.has("breakpoints")) s.breakpoints = f.numbers("breakpoints");
  s.record_stride = f.count("record_stride", s.record_stride);
  f.finish();
  return s;
}

Tolerances parse_tolerances(const json& j) {
  Fields f(j, "tolerances");
  Tolerances t;
  t.floor = f.number("floor", t.floor);
  t.equal_max = f.number("equal_max", t.equal_max);
  t.extremum = f.number("extremum", t.extremum);
  f.finish();
  return t;
}

SolverSettings parse_solver(const json& j) {
  Fields f(j, "solver");
  SolverSettings s;
  s.tau_lo = f.number("tau_lo", s.tau_lo);
  s.tau_hi = f.number("tau_hi", s.tau_hi);
  s.t_lo = f.number("t_lo", s.t_lo);
  s.t_hi = f.number("t_hi", s.t_hi);
  s.tol_tau = f.number("tol_tau", s.tol_tau);
  s.tol_t_prime = f.number("tol_t_prime", s.tol_t_prime);
  s.floor_precision = f.number("floor_precision", s.floor_precision);
  s.max_iterations = f.count("max_iterations", s.max_iterations);
  if (f.has("tau_seeds")) s.tau_seeds = f.numbers("tau_seeds");
  f.finish();
  return s;
}

double require(const std::map<std::string, double>& v, std::string_view model, const char* key) {
  const auto it = v.find(key);
  if (it == v.end())
    invalid(std::string(model) + " parameters: missing '" + key + "'");
  return it->second;
}

}  // namespace

std::vector<std::string_view> parameter_keys(std::string_view model) { return keys_for(model); }

Model build_model(std::string_view model, const std::map<std::string, double>& v) {
  check_keys(model, v, std::string(model) + " parameters");
  if (model == "bergman") {
    BergmanParams p;
    p.a = require(v, model, "a");
    p.b = require(v, model, "b");
    p.c = require(v, model, "c");
    p.d = require(v, model, "d");
    p.k = require(v, model, "k");
    p.G = require(v, model, "G");
    p.E = require(v, model, "E");
    return BergmanModel(p);
  }
  HovorkaParams p;
  p.body_weight = require(v, model, "body_weight");
  p.a1 = require(v, model, "a1");
  p.a2 = require(v, model, "a2");
  p.a3 = require(v, model, "a3");
  p.b1 = require(v, model, "b1");
  p.b2 = require(v, model, "b2");
  p.b3 = require(v, model, "b3");
  p.d = 1.0 / require(v, model, "t_max_i");
  p.k = require(v, model, "k");
  p.c = 1.0 / (require(v, model, "insulin_volume_per_kg") * p.body_weight);
  p.E = require(v, model, "E_per_kg") * p.body_weight;
  p.f = require(v, model, "f_per_kg") * p.body_weight;
  p.V = require(v, model, "V_per_kg") * p.body_weight;
  p.l = require(v, model, "l");
  p.g_c_bar = require(v, model, "g_c_bar");
  p.g_r_bar = require(v, model, "g_r_bar");
  p.R = require(v, model, "R");
  return HovorkaModel(p);
}

std::filesystem::path default_preset_dir() {
  if (const char* env = std::getenv("BOLUSOPT_PRESET_DIR"); env && *env) return env;
  return BOLUSOPT_DEFAULT_PRESET_DIR;
}

Preset parse_preset(std::string_view text) {
  const json j = parse_json(text, "preset");
  Fields f(j, "preset");
  check_header(f, kPresetFormat);
  Preset p;
  p.version = kFormatVersion;
  p.name = f.text("name");
  p.model = f.text("model");
  if (f.has("source")) p.source = f.text("source");
  p.parameters = f.number_map("parameters");
  f.finish();
  (void)build_model(p.model, p.parameters);  // complete and valid
  return p;
}

std::string serialize_preset(const Preset& p) {
  json j{{"format", kPresetFormat}, {"version", p.version}, {"name", p.name},
         {"model", p.model},       {"source", p.source},    {"parameters", p.parameters}};
  return j.dump(2) + "\n";
}

Preset load_preset(const std::string& name, const std::filesystem::path& dir) {
  if (name.empty() || name.find('/') != std::string::npos || name.find("..") != std::string::npos)
    invalid("bad preset name '" + name + "'");
  const auto path = dir / (name + ".json");
  if (!std::filesystem::exists(path))
    invalid("preset '" + name + "' not found in " + dir.string());
  Preset p = parse_preset(read_text_file(path));
  if (p.name != name) invalid(path.string() + ": preset name '" + p.name + "' does not match file");
  return p;
}

std::vector<std::string> list_presets(const std::filesystem::path& dir) {
  std::vector<std::string> out;
  std::error_code ec;
  for (const auto& e : std::filesystem::directory_iterator(dir, ec))
    if (e.is_regular_file() && e.path().extension() == ".json") out.push_back(e.path().stem().string());
  if (ec) invalid("cannot list presets in " + dir.string() + ": " + ec.message());
  std::sort(out.begin(), out.end());
  return out;
}

Scenario parse_scenario(std::string_view text, const std::filesystem::path& preset_dir) {
  const json j = parse_json(text, "scenario");
  Fields f(j, "scenario");
  check_header(f, kScenarioFormat);
  const std::string model = f.text("model");
  (void)keys_for(model);

  std::string preset_name;
  std::map<std::string, double> values, overrides;
  if (f.has("preset")) {
    preset_name = f.text("preset");
    const Preset p = load_preset(preset_name, preset_dir);
    if (p.model != model)
      invalid("preset '" + preset_name + "' is a " + p.model + " preset, scenario model is " + model);
    values = p.parameters;
  }
  if (f.has("parameters")) {
    overrides = f.number_map("parameters");
    check_keys(model, overrides, "scenario.parameters");
    for (const auto& [k, v] : overrides) values[k] = v;
  }

  Scenario sc{build_model(model, values)};
  sc.preset = preset_name;
  sc.overrides = overrides;
  sc.g0 = f.number("g0");
  sc.lambda = f.number("lambda");
  sc.meal = parse_meal(f.raw("meal"));
  if (f.has("sim")) sc.sim = parse_sim(f.raw("sim"));
  if (f.has("tolerances")) sc.tol = parse_tolerances(f.raw("tolerances"));
  if (f.has("solver")) sc.solver = parse_solver(f.raw("solver"));
  f.finish();
  sc.validate();
  return sc;
}

std::string serialize_scenario(const Scenario& sc) {
  json j{{"format", kScenarioFormat}, {"version", kFormatVersion}, {"model", model_name(sc.model)}};
  if (!sc.preset.empty()) j["preset"] = sc.preset;
  if (!sc.overrides.empty()) j["parameters"] = sc.overrides;
  j["g0"] = sc.g0;
  j["lambda"] = sc.lambda;
  j["meal"] = meal_json(sc.meal);
  j["sim"] = {{"horizon", sc.sim.horizon},
              {"dt", sc.sim.dt},
              {"breakpoints", sc.sim.breakpoints},
              {"record_stride", sc.sim.record_stride}};
  j["tolerances"] = {{"floor", sc.tol.floor}, {"equal_max", sc.tol.equal_max}, {"extremum", sc.tol.extremum}};
  const auto& s = sc.solver;
  j["solver"] = {{"tau_lo", s.tau_lo},
                 {"tau_hi", s.tau_hi},
                 {"t_lo", s.t_lo},
                 {"t_hi", s.t_hi},
                 {"tol_tau", s.tol_tau},
                 {"tol_t_prime", s.tol_t_prime},
                 {"floor_precision", s.floor_precision},
                 {"max_iterations", s.max_iterations},
                 {"tau_seeds", s.tau_seeds}};
  return j.dump(2) + "\n";
}

Scenario load_scenario(const std::filesystem::path& path, const std::filesystem::path& preset_dir) {
  return parse_scenario(read_text_file(path), preset_dir);
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) invalid("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::InvalidInput, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(ErrorKind::InvalidInput, "write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace bolusopt
