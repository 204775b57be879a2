#pragma once

#include <array>
#include <concepts>
#include <cstddef>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

namespace bolusopt {

// All times are in minutes and glucose concentrations in mmol/L.

/// Rectangular bolus on top of a constant basal rate. A zero duration is the
/// impulse limit: the bolus magnitude is then an amount delivered at t_prime.
struct PulseInput {
  double u_bar = 0.0;
  double u_hat = 0.0;
  double t_prime = 0.0;
  double tau = 0.0;

  bool is_impulse() const noexcept { return tau == 0.0; }
  double end() const noexcept { return t_prime + tau; }
  void validate() const;
};

/// Pointwise input rate. Both interval endpoints belong to the bolus.
double input_value(const PulseInput& input, double t);

// ---------------------------------------------------------------------------
// Bergman minimal model

struct BergmanParams {
  double a = 0.0;  // insulin motility, 1/min
  double b = 0.0;  // insulin sensitivity
  double c = 0.0;  // 1/min
  double d = 0.0;  // 1/min
  double k = 0.0;  // clearance scaling
  double G = 0.0;  // glucose effectiveness, 1/min
  double E = 0.0;  // endogenous production, mmol/(L min)

  void validate() const;
  bool operator==(const BergmanParams&) const = default;
};

struct BergmanState {
  double z = 0.0;
  double y = 0.0;
  double x = 0.0;
  double g = 0.0;
};

BergmanState bergman_derivatives(const BergmanState& s, const BergmanParams& p, double u_val,
                                 double r_val);

/// Basal rate whose equilibrium glucose is g0. Throws InfeasibleBasal when
/// that would require a negative rate.
double basal_rate(const BergmanParams& p, double g0);

BergmanState bergman_steady_state(const BergmanParams& p, double u_bar);

// ---------------------------------------------------------------------------
// Hovorka model

struct HovorkaParams {
  double a1 = 0.0, a2 = 0.0, a3 = 0.0;  // insulin action deactivation, 1/min
  double b1 = 0.0, b2 = 0.0, b3 = 0.0;  // insulin action gains
  double c = 0.0;                       // 1/insulin distribution volume, 1/L
  double d = 0.0;                       // 1/absorption time, 1/min
  double k = 0.0;                       // insulin elimination, 1/min
  double E = 0.0;                       // endogenous production, mmol/min
  double f = 0.0;                       // non-insulin-dependent flux, mmol/min
  double g_c_bar = 0.0;                 // f_c threshold, mmol/L
  double g_r_bar = 0.0;                 // renal threshold, mmol/L
  double l = 0.0;                       // transfer rate, 1/min
  double V = 0.0;                       // glucose distribution volume, L
  double R = 0.0;                       // renal clearance rate, 1/min
  double body_weight = 0.0;             // kg

  void validate() const;
  bool operator==(const HovorkaParams&) const = default;
};

struct HovorkaState {
  double z = 0.0, y = 0.0, x = 0.0;
  double x1 = 0.0, x2 = 0.0, x3 = 0.0;
  double q1 = 0.0, q2 = 0.0;

  double glucose(const HovorkaParams& p) const noexcept { return q1 / p.V; }
};

/// Piecewise non-insulin-dependent uptake term f_c(g).
double hovorka_fc(const HovorkaParams& p, double g) noexcept;
/// Piecewise renal clearance term f_r(g).
double hovorka_fr(const HovorkaParams& p, double g) noexcept;
/// Glucose disappearance coefficient h1 of the q1 compartment.
double hovorka_h1(const HovorkaState& s, const HovorkaParams& p);

HovorkaState hovorka_derivatives(const HovorkaState& s, const HovorkaParams& p, double u_val,
                                 double r_val);

/// Equilibrium glucose for u = 0 and no meal; upper bound for any calibrated g0.
double hovorka_zero_input_glucose(const HovorkaParams& p);

/// Basal rate whose equilibrium glucose is g0, by scalar root finding.
double hovorka_basal(const HovorkaParams& p, double g0);

HovorkaState hovorka_steady_state(const HovorkaParams& p, double u_bar);

// ---------------------------------------------------------------------------
// Generic model contract used by the integrator and solvers.
//
// Implementations must keep glucose continuous and non-increasing in the
// insulin input, the disappearance rate monotone in the input, and the
// zero-input equilibrium at or above any calibrated steady state.

template <class M>
concept GlucoseModel = requires(const M& m, const typename M::State& s, double v) {
  { M::kStateSize } -> std::convertible_to<std::size_t>;
  { m.derivatives(s, v, v) } -> std::same_as<typename M::State>;
  { m.glucose(s) } -> std::convertible_to<double>;
  { m.uptake(s) } -> std::convertible_to<double>;
  { m.steady_state(v) } -> std::same_as<typename M::State>;
  { m.basal(v) } -> std::convertible_to<double>;
  { m.apply_impulse(s, v) } -> std::same_as<typename M::State>;
  { M::state_names() } -> std::convertible_to<std::span<const std::string_view>>;
};

class BergmanModel {
 public:
  static constexpr std::size_t kStateSize = 4;
  using State = std::array<double, kStateSize>;

  explicit BergmanModel(const BergmanParams& params);

  const BergmanParams& params() const noexcept { return params_; }
  static constexpr std::string_view name() { return "bergman"; }
  static std::span<const std::string_view> state_names();

  State derivatives(const State& s, double u_val, double r_val) const noexcept {
    const auto& p = params_;
    return {-p.d * s[0] + p.d * p.k * u_val, -p.c * s[1] + p.c * s[0],
            -p.a * s[2] + p.a * p.b * s[1], -(s[2] + p.G) * s[3] + r_val + p.E};
  }
  double glucose(const State& s) const noexcept { return s[3]; }
  double uptake(const State& s) const noexcept { return s[2] + params_.G; }
  State steady_state(double u_bar) const;
  double basal(double g0) const { return basal_rate(params_, g0); }
  State apply_impulse(const State& s, double amount) const noexcept;
  bool operator==(const BergmanModel&) const = default;

 private:
  BergmanParams params_;
};

class HovorkaModel {
 public:
  static constexpr std::size_t kStateSize = 8;
  using State = std::array<double, kStateSize>;

  explicit HovorkaModel(const HovorkaParams& params);

  const HovorkaParams& params() const noexcept { return params_; }
  static constexpr std::string_view name() { return "hovorka"; }
  static std::span<const std::string_view> state_names();

  State derivatives(const State& s, double u_val, double r_val) const;
  double glucose(const State& s) const noexcept { return s[6] / params_.V; }
  double uptake(const State& s) const;
  State steady_state(double u_bar) const;
  double basal(double g0) const { return hovorka_basal(params_, g0); }
  State apply_impulse(const State& s, double amount) const noexcept;
  bool operator==(const HovorkaModel&) const = default;

 private:
  HovorkaParams params_;
};

static_assert(GlucoseModel<BergmanModel>);
static_assert(GlucoseModel<HovorkaModel>);

using Model = std::variant<BergmanModel, HovorkaModel>;

std::string_view model_name(const Model& model);
std::span<const std::string_view> state_names(const Model& model);
double basal_for(const Model& model, double g0);

/// Equilibrium state for a constant input u_bar and no meal.
std::vector<double> steady_state_init(const Model& model, double u_bar);

}  // namespace bolusopt
