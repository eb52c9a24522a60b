#include "obsgram/system.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "obsgram/errors.hpp"

namespace obsgram {

void DynamicalSystem::validate() const {
  if (n_states <= 0) throw ConfigError("system must have at least one state");
  if (n_inputs < 0) throw ConfigError("negative input dimension");
  if (n_outputs <= 0) throw ConfigError("system must have at least one output");
  if (!drift) throw ConfigError("system has no drift function");
  if (!output_map) throw ConfigError("system has no output map");
  if (noise_map.rows() != n_states) {
    throw ConfigError("noise map has " + std::to_string(noise_map.rows()) +
                      " rows, expected " + std::to_string(n_states));
  }
  if (!(output_delay >= 0.0)) throw ConfigError("output delay must be >= 0");
}

InputSignal InputSignal::zero(int n_inputs) {
  return constant(Eigen::VectorXd::Zero(n_inputs));
}

InputSignal InputSignal::constant(Eigen::VectorXd value) {
  const int n = static_cast<int>(value.size());
  return function(n, [value = std::move(value)](double) { return value; });
}

InputSignal InputSignal::function(int n_inputs,
                                  std::function<Eigen::VectorXd(double)> fn) {
  InputSignal s;
  s.n_inputs_ = n_inputs;
  s.fn_ = std::make_shared<const std::function<Eigen::VectorXd(double)>>(
      std::move(fn));
  return s;
}

InputSignal InputSignal::zero_order_hold(std::vector<double> times,
                                         std::vector<Eigen::VectorXd> values) {
  if (times.empty() || times.size() != values.size()) {
    throw ConfigError("zero-order-hold table needs matching, non-empty "
                      "time and value lists");
  }
  if (!std::is_sorted(times.begin(), times.end())) {
    throw ConfigError("zero-order-hold times must be sorted");
  }
  const int n = static_cast<int>(values.front().size());
  for (const auto& v : values) {
    if (v.size() != n) throw ConfigError("zero-order-hold values differ in size");
  }
  return function(n, [times = std::move(times),
                      values = std::move(values)](double t) {
    auto it = std::upper_bound(times.begin(), times.end(), t);
    if (it == times.begin()) return values.front();
    return values[static_cast<std::size_t>(it - times.begin()) - 1];
  });
}

Eigen::VectorXd InputSignal::operator()(double t) const {
  if (!fn_) return Eigen::VectorXd(0);
  return (*fn_)(t);
}

bool NoiseSpec::is_zero() const {
  return (q_diagonal.array() == 0.0).all();
}

void NoiseSpec::validate() const {
  for (Eigen::Index j = 0; j < q_diagonal.size(); ++j) {
    if (!(q_diagonal[j] >= 0.0) || !std::isfinite(q_diagonal[j])) {
      throw ConfigError("noise covariance entries must be finite and >= 0");
    }
  }
}

Eigen::MatrixXd sample_noise(const NoiseSpec& noise, std::size_t steps) {
  noise.validate();
  const auto n = static_cast<std::size_t>(noise.q_diagonal.size());
  Eigen::MatrixXd out(static_cast<Eigen::Index>(steps),
                      static_cast<Eigen::Index>(n));
  const CounterRng rng(noise.master_seed, noise.stream);
  for (std::size_t k = 0; k < steps; ++k) {
    for (std::size_t j = 0; j < n; ++j) {
      const double sd = std::sqrt(noise.q_diagonal[static_cast<Eigen::Index>(j)]);
      out(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) =
          sd == 0.0 ? 0.0 : sd * rng.normal(k * n + j);
    }
  }
  return out;
}

}  // namespace obsgram
