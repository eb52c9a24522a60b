#pragma once

#include <Eigen/Dense>

#include "obsgram/system.hpp"

namespace obsgram {

/// Planar fixed-wing aircraft in a constant wind field.
/// State [x_E, y_N, theta, W_x, W_y], input u = turn rate (rad/s),
/// output (x_E, y_N); process noise acts on the two position channels.
struct UavParams {
  /// Flow-relative speed, m/s.
  double speed = 10.0;
  /// Diagonal of the 2x2 noise covariance on (x_E, y_N).
  Eigen::Vector2d q_diagonal = Eigen::Vector2d::Zero();
};

DynamicalSystem uav_system(const UavParams& params);

/// x0 = [0, 0, pi/6, 0.35, -0.15] used by the noise sweep.
Eigen::VectorXd uav_default_initial_state();

}  // namespace obsgram
