#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "obsgram/system.hpp"

namespace obsgram {

/// Uniformly sampled simulation result. Outputs earlier than
/// `first_ready` are NaN because the output map needs a full history.
struct Trajectory {
  double dt = 0.0;
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;
  std::vector<Eigen::VectorXd> outputs;
  std::size_t first_ready = 0;

  std::size_t size() const { return times.size(); }
};

enum class Scheme { kRk4, kEuler };

/// Instantaneous state jump applied at a grid time, after which the output
/// at that time is evaluated from the jumped state.
struct StateKick {
  double time = 0.0;
  Eigen::VectorXd delta;
};

/// Number of steps t1 / dt; throws ConfigError unless it is an integer
/// within a 1e-9 relative tolerance.
std::size_t step_count(double t1, double dt);

/// Fixed-step integration on [0, t1]. Noise-free when `noise` is null;
/// with noise the scheme must be kEuler (Euler-Maruyama).
Trajectory simulate(const DynamicalSystem& system, const Eigen::VectorXd& x0,
                    const InputSignal& input, double t1, double dt,
                    Scheme scheme, const NoiseSpec* noise = nullptr,
                    const StateKick* kick = nullptr);

/// Classical RK4 (or explicit Euler when requested) without noise.
Trajectory integrate_deterministic(const DynamicalSystem& system,
                                   const Eigen::VectorXd& x0,
                                   const InputSignal& input, double t1,
                                   double dt, Scheme scheme = Scheme::kRk4);

/// Euler-Maruyama: x += f dt + G (sqrt(dt) sqrt(Q) z_k).
Trajectory integrate_stochastic(const DynamicalSystem& system,
                                const Eigen::VectorXd& x0,
                                const InputSignal& input,
                                const NoiseSpec& noise, double t1, double dt);

}  // namespace obsgram
