#include "bolusopt/models.hpp"

#include <cmath>
#include <string>

#include "bolusopt/errors.hpp"
#include "bolusopt/root.hpp"

namespace bolusopt {

namespace {

void require_positive(double value, const char* what) {
  if (!(value > 0.0) || !std::isfinite(value))
    throw Error(ErrorKind::InvalidInput, std::string(what) + " must be finite and > 0");
}

}  // namespace

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidInput: return "InvalidInput";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::InfeasibleBasal: return "InfeasibleBasal";
    case ErrorKind::ConvergenceError: return "ConvergenceError";
    case ErrorKind::NumericalError: return "NumericalError";
    case ErrorKind::InfeasibleFloor: return "InfeasibleFloor";
    case ErrorKind::NoFloorContact: return "NoFloorContact";
    case ErrorKind::IterationLimit: return "IterationLimit";
    case ErrorKind::NoGammaOptimalFound: return "NoGammaOptimalFound";
    case ErrorKind::NoLambdaOptimalFound: return "NoLambdaOptimalFound";
    case ErrorKind::PreconditionFailed: return "PreconditionFailed";
    case ErrorKind::WindowTooNarrow: return "WindowTooNarrow";
    case ErrorKind::GridMismatch: return "GridMismatch";
    case ErrorKind::ClassificationAmbiguous: return "ClassificationAmbiguous";
  }
  return "Unknown";
}

// ---------------------------------------------------------------------------

void PulseInput::validate() const {
  auto non_negative = [](double v, const char* what) {
    if (!(v >= 0.0) || !std::isfinite(v))
      throw Error(ErrorKind::InvalidInput, std::string(what) + " must be finite and >= 0");
  };
  non_negative(u_bar, "u_bar");
  non_negative(u_hat, "u_hat");
  non_negative(t_prime, "t_prime");
  non_negative(tau, "tau");
}

double input_value(const PulseInput& input, double t) {
  if (t >= input.t_prime && t <= input.end()) return input.u_bar + input.u_hat;
  return input.u_bar;
}

// ---------------------------------------------------------------------------

void BergmanParams::validate() const {
  require_positive(a, "a");
  require_positive(b, "b");
  require_positive(c, "c");
  require_positive(d, "d");
  require_positive(k, "k");
  require_positive(G, "G");
  require_positive(E, "E");
  if (E < G) throw Error(ErrorKind::InvalidInput, "E must be >= G");
}

BergmanState bergman_derivatives(const BergmanState& s, const BergmanParams& p, double u_val,
                                 double r_val) {
  return {-p.d * s.z + p.d * p.k * u_val, -p.c * s.y + p.c * s.z, -p.a * s.x + p.a * p.b * s.y,
          -(s.x + p.G) * s.g + r_val + p.E};
}

double basal_rate(const BergmanParams& p, double g0) {
  if (!(g0 > 0.0)) throw Error(ErrorKind::InvalidInput, "g0 must be > 0");
  const double excess = p.E / g0 - p.G;
  if (excess < 0.0)
    throw Error(ErrorKind::InfeasibleBasal,
                "g0 = " + std::to_string(g0) + " exceeds the zero-input equilibrium E/G");
  return excess / (p.k * p.b);
}

BergmanState bergman_steady_state(const BergmanParams& p, double u_bar) {
  if (!(u_bar >= 0.0)) throw Error(ErrorKind::InvalidInput, "u_bar must be >= 0");
  const double ku = p.k * u_bar;
  return {ku, ku, p.b * ku, p.E / (p.b * ku + p.G)};
}

// ---------------------------------------------------------------------------

void HovorkaParams::validate() const {
  require_positive(a1, "a1");
  require_positive(a2, "a2");
  require_positive(a3, "a3");
  require_positive(b1, "b1");
  require_positive(b2, "b2");
  require_positive(b3, "b3");
  require_positive(c, "c");
  require_positive(d, "d");
  require_positive(k, "k");
  require_positive(E, "E");
  require_positive(f, "f");
  require_positive(g_c_bar, "g_c_bar");
  require_positive(g_r_bar, "g_r_bar");
  require_positive(l, "l");
  require_positive(V, "V");
  require_positive(R, "R");
  require_positive(body_weight, "body_weight");
}

double hovorka_fc(const HovorkaParams& p, double g) noexcept {
  return g >= p.g_c_bar ? p.f / g : p.f / p.g_c_bar;
}

double hovorka_fr(const HovorkaParams& p, double g) noexcept {
  return g >= p.g_r_bar ? p.V * p.R * (1.0 - p.g_r_bar / g) : 0.0;
}

double hovorka_h1(const HovorkaState& s, const HovorkaParams& p) {
  const double g = s.glucose(p);
  if (!(g > 0.0)) throw Error(ErrorKind::DomainError, "Hovorka glucose must stay positive");
  return (hovorka_fc(p, g) + hovorka_fr(p, g) + s.x3 * p.E / g) / p.V + s.x1;
}

HovorkaState hovorka_derivatives(const HovorkaState& s, const HovorkaParams& p, double u_val,
                                 double r_val) {
  const double h1 = hovorka_h1(s, p);
  const double h2 = p.l + s.x2;
  const double w = p.E + r_val;
  return {-p.d * s.z + u_val,
          -p.d * s.y + p.d * s.z,
          -p.k * s.x + p.c * p.d * s.y,
          -p.a1 * s.x1 + p.a1 * p.b1 * s.x,
          -p.a2 * s.x2 + p.a2 * p.b2 * s.x,
          -p.a3 * s.x3 + p.a3 * p.b3 * s.x,
          -h1 * s.q1 + p.l * s.q2 + w,
          -h2 * s.q2 + s.x1 * s.q1};
}

namespace {

// Net q1 balance at equilibrium of the insulin chain with plasma insulin x,
// evaluated at glucose g. Strictly decreasing in both g and x.
double hovorka_balance(const HovorkaParams& p, double x, double g) {
  const double x1 = p.b1 * x;
  const double x2 = p.b2 * x;
  const double x3 = p.b3 * x;
  const double uptake = g * hovorka_fc(p, g) + g * hovorka_fr(p, g);
  return p.E * (1.0 - x3) - uptake - x1 * p.V * g * x2 / (p.l + x2);
}

double hovorka_equilibrium_glucose(const HovorkaParams& p, double x) {
  if (p.b3 * x >= 1.0)
    throw Error(ErrorKind::ConvergenceError,
                "insulin action suppresses all endogenous production; no positive equilibrium");
  auto balance = [&](double g) { return hovorka_balance(p, x, g); };
  double lo = 1e-9;
  double hi = std::max(p.g_r_bar, p.g_c_bar) * 2.0;
  double f_hi = balance(hi);
  for (int i = 0; i < 200 && f_hi > 0.0; ++i) {
    hi *= 2.0;
    f_hi = balance(hi);
  }
  const double f_lo = balance(lo);
  if (!(f_lo > 0.0) || f_hi > 0.0)
    throw Error(ErrorKind::ConvergenceError, "cannot bracket Hovorka equilibrium glucose");
  auto root = illinois_root(balance, lo, hi, f_lo, f_hi, 1e-15, 1e-14, 500);
  if (!root.converged)
    throw Error(ErrorKind::ConvergenceError, "Hovorka equilibrium glucose did not converge");
  return root.x;
}

}  // namespace

double hovorka_zero_input_glucose(const HovorkaParams& p) {
  return hovorka_equilibrium_glucose(p, 0.0);
}

double hovorka_basal(const HovorkaParams& p, double g0) {
  if (!(g0 > 0.0)) throw Error(ErrorKind::InvalidInput, "g0 must be > 0");
  auto balance = [&](double x) { return hovorka_balance(p, x, g0); };
  const double f0 = balance(0.0);
  if (f0 < 0.0)
    throw Error(ErrorKind::InfeasibleBasal,
                "g0 = " + std::to_string(g0) + " exceeds the zero-input steady state " +
                    std::to_string(hovorka_zero_input_glucose(p)));
  if (f0 == 0.0) return 0.0;
  const double x_hi = 1.0 / p.b3;
  auto root = illinois_root(balance, 0.0, x_hi, f0, balance(x_hi), 1e-15, 1e-15, 500);
  if (!root.converged) throw Error(ErrorKind::ConvergenceError, "Hovorka basal did not converge");
  // x = c u / k at equilibrium of the insulin kinetics chain
  return p.k * root.x / p.c;
}

HovorkaState hovorka_steady_state(const HovorkaParams& p, double u_bar) {
  if (!(u_bar >= 0.0)) throw Error(ErrorKind::InvalidInput, "u_bar must be >= 0");
  HovorkaState s;
  s.z = u_bar / p.d;
  s.y = s.z;
  s.x = p.c * u_bar / p.k;
  s.x1 = p.b1 * s.x;
  s.x2 = p.b2 * s.x;
  s.x3 = p.b3 * s.x;
  const double g = hovorka_equilibrium_glucose(p, s.x);
  s.q1 = p.V * g;
  s.q2 = s.x1 * s.q1 / (p.l + s.x2);
  return s;
}

// ---------------------------------------------------------------------------

BergmanModel::BergmanModel(const BergmanParams& params) : params_(params) { params_.validate(); }

std::span<const std::string_view> BergmanModel::state_names() {
  static constexpr std::array<std::string_view, kStateSize> names{"z", "y", "x", "g"};
  return names;
}

BergmanModel::State BergmanModel::steady_state(double u_bar) const {
  const auto s = bergman_steady_state(params_, u_bar);
  return {s.z, s.y, s.x, s.g};
}

BergmanModel::State BergmanModel::apply_impulse(const State& s, double amount) const noexcept {
  // integral of d k u over a Dirac impulse of weight `amount`
  State out = s;
  out[0] += params_.d * params_.k * amount;
  return out;
}

HovorkaModel::HovorkaModel(const HovorkaParams& params) : params_(params) { params_.validate(); }

std::span<const std::string_view> HovorkaModel::state_names() {
  static constexpr std::array<std::string_view, kStateSize> names{"z",  "y",  "x",  "x1",
                                                                  "x2", "x3", "q1", "q2"};
  return names;
}

namespace {

HovorkaState unpack(const HovorkaModel::State& s) {
  return {s[0], s[1], s[2], s[3], s[4], s[5], s[6], s[7]};
}

}  // namespace

HovorkaModel::State HovorkaModel::derivatives(const State& s, double u_val, double r_val) const {
  const auto d = hovorka_derivatives(unpack(s), params_, u_val, r_val);
  return {d.z, d.y, d.x, d.x1, d.x2, d.x3, d.q1, d.q2};
}

double HovorkaModel::uptake(const State& s) const { return hovorka_h1(unpack(s), params_); }

HovorkaModel::State HovorkaModel::steady_state(double u_bar) const {
  const auto s = hovorka_steady_state(params_, u_bar);
  return {s.z, s.y, s.x, s.x1, s.x2, s.x3, s.q1, s.q2};
}

HovorkaModel::State HovorkaModel::apply_impulse(const State& s, double amount) const noexcept {
  State out = s;
  out[0] += amount;
  return out;
}

// ---------------------------------------------------------------------------

std::string_view model_name(const Model& model) {
  return std::visit([](const auto& m) { return m.name(); }, model);
}

std::span<const std::string_view> state_names(const Model& model) {
  return std::visit([](const auto& m) { return m.state_names(); }, model);
}

double basal_for(const Model& model, double g0) {
  return std::visit([g0](const auto& m) { return m.basal(g0); }, model);
}

std::vector<double> steady_state_init(const Model& model, double u_bar) {
  return std::visit(
      [u_bar](const auto& m) {
        const auto s = m.steady_state(u_bar);
        return std::vector<double>(s.begin(), s.end());
      },
      model);
}

}  // namespace bolusopt
