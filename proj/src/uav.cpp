#include "obsgram/uav.hpp"

#include <cmath>
#include <numbers>

#include "obsgram/errors.hpp"

namespace obsgram {

DynamicalSystem uav_system(const UavParams& params) {
  if (!(params.speed > 0.0)) throw ConfigError("UAV speed must be positive");
  DynamicalSystem sys;
  sys.n_states = 5;
  sys.n_inputs = 1;
  sys.n_outputs = 2;
  const double v = params.speed;
  sys.drift = [v](const Eigen::VectorXd& x, const Eigen::VectorXd& u, double) {
    Eigen::VectorXd dx(5);
    dx << v * std::cos(x[2]) + x[3], v * std::sin(x[2]) + x[4], u[0], 0.0, 0.0;
    return dx;
  };
  sys.noise_map = Eigen::MatrixXd::Zero(5, 2);
  sys.noise_map(0, 0) = 1.0;
  sys.noise_map(1, 1) = 1.0;
  sys.output_map = [](std::span<const Eigen::VectorXd> window, double) {
    return Eigen::VectorXd(window.back().head<2>());
  };
  return sys;
}

Eigen::VectorXd uav_default_initial_state() {
  Eigen::VectorXd x0(5);
  x0 << 0.0, 0.0, std::numbers::pi / 6.0, 0.35, -0.15;
  return x0;
}

}  // namespace obsgram
