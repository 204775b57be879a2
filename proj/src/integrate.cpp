#include "bolusopt/integrate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <ostream>
#include <string>

#include "bolusopt/errors.hpp"
#include "bolusopt/format.hpp"

namespace bolusopt {

namespace {

constexpr double kMergeTolerance = 1e-9;

template <GlucoseModel M>
class Integrator {
 public:
  static constexpr std::size_t kN = M::kStateSize;
  using Augmented = std::array<double, kN + 2>;  // model states, f1, f2

  Integrator(const M& model, const PulseInput& input, const MealCascade& cascade,
             const SimConfig& config)
      : model_(model), input_(input), cascade_(cascade), config_(config) {}

  Trajectory run() const {
    const auto grid = integration_grid_breakpoints(input_, cascade_, config_);

    Augmented s{};
    const auto init = model_.steady_state(input_.u_bar);
    std::copy(init.begin(), init.end(), s.begin());

    Trajectory out;
    out.state_count = kN;
    out.state_names = M::state_names();
    std::size_t expected = 1;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i)
      expected += segment_steps(grid[i], grid[i + 1]);
    expected = expected / config_.record_stride + 2;
    out.times.reserve(expected);
    out.glucose.reserve(expected);
    if (config_.record_states) {
      out.uptake.reserve(expected);
      out.input.reserve(expected);
      out.meal.reserve(expected);
      out.states.reserve(expected * kN);
    }

    record(out, 0.0, s);
    std::size_t step_counter = 0;
    bool impulse_done = !input_.is_impulse() || input_.u_hat == 0.0;

    for (std::size_t seg = 0; seg + 1 < grid.size(); ++seg) {
      const double a = grid[seg];
      const double b = grid[seg + 1];
      if (!impulse_done && std::fabs(a - input_.t_prime) <= kMergeTolerance) {
        s = with_model(s, model_.apply_impulse(model_part(s), input_.u_hat));
        impulse_done = true;
      }
      const double mid = 0.5 * (a + b);
      const double u = input_.is_impulse() ? input_.u_bar : input_value(input_, mid);
      const double rho = cascade_.rho(mid);
      const std::size_t n = segment_steps(a, b);
      const double h = (b - a) / static_cast<double>(n);
      for (std::size_t j = 0; j < n; ++j) {
        s = rk4_step(s, h, u, rho);
        ++step_counter;
        const bool last = seg + 2 == grid.size() && j + 1 == n;
        if (step_counter % config_.record_stride == 0 || last) {
          const double t = j + 1 == n ? b : a + h * static_cast<double>(j + 1);
          check_finite(s, t);
          record(out, t, s);
        }
      }
    }
    return out;
  }

 private:
  std::size_t segment_steps(double a, double b) const {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil((b - a) / config_.dt - 1e-9)));
  }

  static typename M::State model_part(const Augmented& s) {
    typename M::State m;
    std::copy_n(s.begin(), kN, m.begin());
    return m;
  }

  static Augmented with_model(Augmented s, const typename M::State& m) {
    std::copy(m.begin(), m.end(), s.begin());
    return s;
  }

  Augmented rhs(const Augmented& s, double u, double rho) const {
    const double r = meal_rate(s[kN], cascade_);
    const auto dm = model_.derivatives(model_part(s), u, r);
    const auto [df1, df2] = cascade_derivatives_at(s[kN], s[kN + 1], cascade_, rho);
    Augmented d;
    std::copy(dm.begin(), dm.end(), d.begin());
    d[kN] = df1;
    d[kN + 1] = df2;
    return d;
  }

  Augmented rk4_step(const Augmented& s, double h, double u, double rho) const {
    const auto k1 = rhs(s, u, rho);
    Augmented tmp;
    for (std::size_t i = 0; i < kN + 2; ++i) tmp[i] = s[i] + 0.5 * h * k1[i];
    const auto k2 = rhs(tmp, u, rho);
    for (std::size_t i = 0; i < kN + 2; ++i) tmp[i] = s[i] + 0.5 * h * k2[i];
    const auto k3 = rhs(tmp, u, rho);
    for (std::size_t i = 0; i < kN + 2; ++i) tmp[i] = s[i] + h * k3[i];
    const auto k4 = rhs(tmp, u, rho);
    Augmented next;
    for (std::size_t i = 0; i < kN + 2; ++i)
      next[i] = s[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return next;
  }

  static void check_finite(const Augmented& s, double t) {
    for (double v : s)
      if (!std::isfinite(v))
        throw Error(ErrorKind::NumericalError, "non-finite state at t = " + std::to_string(t));
  }

  void record(Trajectory& out, double t, const Augmented& s) const {
    const auto m = model_part(s);
    out.times.push_back(t);
    out.glucose.push_back(model_.glucose(m));
    if (!config_.record_states) return;
    out.uptake.push_back(model_.uptake(m));
    out.input.push_back(input_.is_impulse() ? input_.u_bar : input_value(input_, t));
    out.meal.push_back(meal_rate(s[kN], cascade_));
    out.states.insert(out.states.end(), m.begin(), m.end());
  }

  const M& model_;
  const PulseInput& input_;
  const MealCascade& cascade_;
  const SimConfig& config_;
};

}  // namespace

void SimConfig::validate() const {
  if (!(horizon > 0.0) || !std::isfinite(horizon))
    throw Error(ErrorKind::InvalidInput, "horizon must be > 0");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw Error(ErrorKind::InvalidInput, "dt must be > 0");
  if (record_stride == 0) throw Error(ErrorKind::InvalidInput, "record_stride must be >= 1");
  for (double b : breakpoints)
    if (!(b >= 0.0 && b <= horizon))
      throw Error(ErrorKind::InvalidInput, "breakpoints must lie within [0, horizon]");
}

std::vector<double> Trajectory::component(std::size_t index) const {
  std::vector<double> out;
  if (!has_states()) return out;
  out.reserve(size());
  for (std::size_t i = 0; i < size(); ++i) out.push_back(states[i * state_count + index]);
  return out;
}

std::vector<double> integration_grid_breakpoints(const PulseInput& input,
                                                 const MealCascade& cascade,
                                                 const SimConfig& config) {
  std::vector<double> raw{0.0, config.horizon, input.t_prime};
  if (!input.is_impulse()) raw.push_back(input.end());
  const auto meal = cascade.breakpoints();
  raw.insert(raw.end(), meal.begin(), meal.end());
  raw.insert(raw.end(), config.breakpoints.begin(), config.breakpoints.end());

  std::vector<double> grid;
  std::sort(raw.begin(), raw.end());
  for (double b : raw) {
    if (b < 0.0 || b > config.horizon) continue;
    if (!grid.empty() && b - grid.back() <= kMergeTolerance) continue;
    grid.push_back(b);
  }
  // the horizon must stay the exact final point
  if (grid.back() != config.horizon) grid.back() = config.horizon;
  return grid;
}

Trajectory simulate(const Model& model, const PulseInput& input, const MealCascade& cascade,
                    const SimConfig& config) {
  input.validate();
  cascade.validate();
  config.validate();
  return std::visit(
      [&](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        return Integrator<M>(m, input, cascade, config).run();
      },
      model);
}

RefinedPoint refine_extremum(std::span<const double> times, std::span<const double> values,
                             std::size_t index) {
  if (index == 0 || index + 1 >= values.size()) return {times[index], values[index]};
  const double x0 = times[index - 1] - times[index];
  const double x2 = times[index + 1] - times[index];
  const double y0 = values[index - 1] - values[index];
  const double y2 = values[index + 1] - values[index];
  const double det = x0 * x2 * (x0 - x2);
  const double A = (y0 * x2 - y2 * x0) / det;
  const double B = (x0 * x0 * y2 - x2 * x2 * y0) / det;
  if (A == 0.0 || !std::isfinite(A)) return {times[index], values[index]};
  const double xv = std::clamp(-B / (2.0 * A), x0, x2);
  return {times[index] + xv, values[index] + A * xv * xv + B * xv};
}

RefinedPoint refine_extremum(const Trajectory& trajectory, std::size_t index) {
  return refine_extremum(trajectory.times, trajectory.glucose, index);
}

void write_trajectory_csv(std::ostream& os, const Trajectory& trajectory, bool emit_mgdl) {
  os << "time,g_mmol_per_L";
  if (emit_mgdl) os << ",g_mg_per_dL";
  const bool states = trajectory.has_states();
  if (states)
    for (auto name : trajectory.state_names) os << ',' << name;
  if (states) os << ",u,r";
  os << '\n';
  for (std::size_t i = 0; i < trajectory.size(); ++i) {
    os << format_number(trajectory.times[i]) << ',' << format_number(trajectory.glucose[i]);
    if (emit_mgdl) os << ',' << format_number(trajectory.glucose[i] * kMgdlPerMmol);
    if (states) {
      for (double v : trajectory.state(i)) os << ',' << format_number(v);
      os << ',' << format_number(trajectory.input[i]) << ',' << format_number(trajectory.meal[i]);
    }
    os << '\n';
  }
}

}  // namespace bolusopt
