#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "obsgram/rng.hpp"

namespace obsgram {

/// State derivative f(x, u, t).
using Drift = std::function<Eigen::VectorXd(
    const Eigen::VectorXd& x, const Eigen::VectorXd& u, double t)>;

/// Output map h. `window` holds the states from t - output_delay up to and
/// including the current one, oldest first; memoryless maps see one state.
using OutputMap = std::function<Eigen::VectorXd(
    std::span<const Eigen::VectorXd> window, double t)>;

/// Plant with additive process noise:  dx = f(x, u, t) dt + G dw,  y = h(.)
struct DynamicalSystem {
  int n_states = 0;
  int n_inputs = 0;
  int n_outputs = 0;
  Drift drift;
  /// G, n_states x n_noise.
  Eigen::MatrixXd noise_map;
  OutputMap output_map;
  /// Length of the state history consumed by `output_map`, seconds.
  double output_delay = 0.0;

  int n_noise() const { return static_cast<int>(noise_map.cols()); }

  /// Throws ConfigError when the declared dimensions are inconsistent.
  void validate() const;
};

/// Exogenous input u(t). Either a callable of time or a zero-order-hold
/// table; an empty signal (n_inputs = 0) is valid.
class InputSignal {
 public:
  InputSignal() = default;

  static InputSignal zero(int n_inputs);
  static InputSignal constant(Eigen::VectorXd value);
  static InputSignal function(int n_inputs,
                              std::function<Eigen::VectorXd(double)> fn);
  /// Holds values[k] on [times[k], times[k+1]); the last value persists.
  static InputSignal zero_order_hold(std::vector<double> times,
                                     std::vector<Eigen::VectorXd> values);

  int size() const { return n_inputs_; }
  Eigen::VectorXd operator()(double t) const;

 private:
  int n_inputs_ = 0;
  std::shared_ptr<const std::function<Eigen::VectorXd(double)>> fn_;
};

/// Diagonal process-noise covariance plus the key of its random stream.
struct NoiseSpec {
  /// Diagonal of Q, one entry per noise channel, all >= 0.
  Eigen::VectorXd q_diagonal;
  std::uint64_t master_seed = 0;
  StreamId stream;

  bool is_zero() const;
  void validate() const;
};

/// Zero-mean Gaussian draws, steps x n_noise, column j with variance Q_jj.
/// Row k is a pure function of (master_seed, stream, k).
Eigen::MatrixXd sample_noise(const NoiseSpec& noise, std::size_t steps);

}  // namespace obsgram
