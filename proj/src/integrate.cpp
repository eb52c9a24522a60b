#include "obsgram/integrate.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "obsgram/errors.hpp"

namespace obsgram {
namespace {

std::size_t delay_steps(double delay, double dt) {
  if (delay == 0.0) return 0;
  const double ratio = delay / dt;
  const double rounded = std::round(ratio);
  if (std::abs(ratio - rounded) > 1e-6 * std::max(1.0, ratio)) {
    throw ConfigError("output delay is not a multiple of the time step");
  }
  return static_cast<std::size_t>(rounded);
}

void check_finite(const Eigen::VectorXd& x, std::size_t step) {
  if (!x.allFinite()) {
    throw DivergenceError(
        "integration diverged at step " + std::to_string(step), step);
  }
}

}  // namespace

std::size_t step_count(double t1, double dt) {
  if (!(t1 > 0.0) || !(dt > 0.0) || !std::isfinite(t1) || !std::isfinite(dt)) {
    throw ConfigError("t1 and dt must be positive and finite");
  }
  const double ratio = t1 / dt;
  const double rounded = std::round(ratio);
  if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio)) {
    throw ConfigError("t1 / dt is not an integer");
  }
  return static_cast<std::size_t>(rounded);
}

Trajectory simulate(const DynamicalSystem& system, const Eigen::VectorXd& x0,
                    const InputSignal& input, double t1, double dt,
                    Scheme scheme, const NoiseSpec* noise,
                    const StateKick* kick) {
  system.validate();
  if (x0.size() != system.n_states) {
    throw ConfigError("initial state has " + std::to_string(x0.size()) +
                      " entries, expected " + std::to_string(system.n_states));
  }
  if (input.size() != system.n_inputs) {
    throw ConfigError("input signal dimension does not match the system");
  }
  if (noise != nullptr) {
    noise->validate();
    if (noise->q_diagonal.size() != system.n_noise()) {
      throw ConfigError("noise covariance has " +
                        std::to_string(noise->q_diagonal.size()) +
                        " channels, noise map has " +
                        std::to_string(system.n_noise()));
    }
    if (scheme != Scheme::kEuler) {
      throw ConfigError("noisy integration requires the Euler-Maruyama scheme");
    }
  }

  const std::size_t steps = step_count(t1, dt);
  const std::size_t history = delay_steps(system.output_delay, dt);
  std::size_t kick_step = std::numeric_limits<std::size_t>::max();
  if (kick != nullptr) {
    if (kick->delta.size() != system.n_states) {
      throw ConfigError("state kick has the wrong dimension");
    }
    const double r = kick->time / dt;
    if (r < 0.0 || std::abs(r - std::round(r)) > 1e-9 * std::max(1.0, r) ||
        std::round(r) > static_cast<double>(steps)) {
      throw ConfigError("state kick time must be a grid point inside [0, t1]");
    }
    kick_step = static_cast<std::size_t>(std::round(r));
  }

  Trajectory traj;
  traj.dt = dt;
  traj.first_ready = history;
  traj.times.resize(steps + 1);
  traj.states.reserve(steps + 1);
  traj.outputs.reserve(steps + 1);

  const Eigen::VectorXd not_ready = Eigen::VectorXd::Constant(
      system.n_outputs, std::numeric_limits<double>::quiet_NaN());

  std::optional<CounterRng> rng;
  Eigen::VectorXd noise_sd;
  const auto n_noise = static_cast<std::size_t>(system.n_noise());
  if (noise != nullptr) {
    rng.emplace(noise->master_seed, noise->stream);
    noise_sd = (noise->q_diagonal.array() * dt).sqrt().matrix();
  }

  auto emit_output = [&](std::size_t k) {
    if (k < history) {
      traj.outputs.push_back(not_ready);
      return;
    }
    std::span<const Eigen::VectorXd> window(traj.states.data() + (k - history),
                                            history + 1);
    Eigen::VectorXd y = system.output_map(window, traj.times[k]);
    if (y.size() != system.n_outputs) {
      throw ConfigError("output map returned the wrong dimension");
    }
    traj.outputs.push_back(std::move(y));
  };

  Eigen::VectorXd x = x0;
  if (kick_step == 0) x += kick->delta;
  check_finite(x, 0);
  traj.times[0] = 0.0;
  traj.states.push_back(x);
  emit_output(0);

  Eigen::VectorXd w(static_cast<Eigen::Index>(n_noise));
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    const Eigen::VectorXd u = input(t);
    if (scheme == Scheme::kRk4) {
      const double half = 0.5 * dt;
      const Eigen::VectorXd u_half = input(t + half);
      const Eigen::VectorXd u_next = input(t + dt);
      const Eigen::VectorXd k1 = system.drift(x, u, t);
      const Eigen::VectorXd k2 = system.drift(x + half * k1, u_half, t + half);
      const Eigen::VectorXd k3 = system.drift(x + half * k2, u_half, t + half);
      const Eigen::VectorXd k4 = system.drift(x + dt * k3, u_next, t + dt);
      x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    } else {
      Eigen::VectorXd next = x + dt * system.drift(x, u, t);
      if (rng) {
        for (std::size_t j = 0; j < n_noise; ++j) {
          const auto jj = static_cast<Eigen::Index>(j);
          w[jj] = noise_sd[jj] == 0.0
                      ? 0.0
                      : noise_sd[jj] * rng->normal(k * n_noise + j);
        }
        next += system.noise_map * w;
      }
      x = std::move(next);
    }
    if (k + 1 == kick_step) x += kick->delta;
    check_finite(x, k + 1);
    traj.times[k + 1] = static_cast<double>(k + 1) * dt;
    traj.states.push_back(x);
    emit_output(k + 1);
  }
  return traj;
}

Trajectory integrate_deterministic(const DynamicalSystem& system,
                                   const Eigen::VectorXd& x0,
                                   const InputSignal& input, double t1,
                                   double dt, Scheme scheme) {
  return simulate(system, x0, input, t1, dt, scheme);
}

Trajectory integrate_stochastic(const DynamicalSystem& system,
                                const Eigen::VectorXd& x0,
                                const InputSignal& input,
                                const NoiseSpec& noise, double t1, double dt) {
  return simulate(system, x0, input, t1, dt, Scheme::kEuler, &noise);
}

}  // namespace obsgram
