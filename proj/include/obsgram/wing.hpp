#pragma once

#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "obsgram/encoder.hpp"
#include "obsgram/system.hpp"

namespace obsgram {

/// Thin rectangular plate clamped at the root, flapping about the root
/// chord axis while the body rotates at rate omega. SI units unless noted.
struct WingParams {
  double chord = 25e-3;
  double span = 50e-3;
  double thickness = 12.7e-6;
  double youngs_modulus = 0.3e9;
  double poisson = 0.35;
  double density = 1180.0;
  double alpha = 500.0;  ///< mass-proportional damping, 1/s
  double beta = 0.0;     ///< stiffness-proportional damping, s
  double f1 = 25.0;
  double f2 = 50.0;
  double flap_amplitude = std::numbers::pi / 6.0;
  double omega_nominal = 0.02;
  int n_bending = 4;
  int n_torsion = 2;
  /// Process noise on (phi_dot, omega), (rad/s)^2.
  Eigen::Vector2d q_diagonal{1.0, 1e-4};
  /// Strain grid: nodes along the span and across the chord.
  int grid_span_nodes = 50;
  int grid_chord_nodes = 25;

  double wingbeat_period() const { return 1.0 / f1; }
  void validate() const;
};

/// Point on the wing in plot coordinates, centimetres: root at x = 0,
/// tip at x = -span, chord y in [-chord/2, chord/2].
struct Locus {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Locus&, const Locus&) = default;
};

/// 0 before one wingbeat, linear ramp over the second, 1 afterwards.
double ramp_envelope(double t, double wingbeat_period);
double ramp_envelope_rate(double t, double wingbeat_period);

/// Un-enveloped flapping rate A (2 pi f1 cos(2 pi f1 t) + 2 pi f2 / 5 cos(2 pi f2 t)).
double flap_rate_raw(double t, const WingParams& p);
/// Enveloped flapping rate.
double flap_rate(double t, const WingParams& p);
/// Analytic time derivative of flap_rate.
double flap_acceleration(double t, const WingParams& p);

/// Mode curvatures d2(psi)/ds2 and the membrane strain per unit phi_dot^2,
/// sampled on a regular grid; rows follow the chord nodes (y ascending),
/// columns the span nodes (x from 0 to -span).
class ModeShapeTable {
 public:
  ModeShapeTable(std::vector<double> x_nodes, std::vector<double> y_nodes,
                 std::vector<Eigen::MatrixXd> curvature,
                 Eigen::MatrixXd membrane, double half_thickness);

  int n_modes() const { return static_cast<int>(curvature_.size()); }
  const std::vector<double>& x_nodes() const { return x_nodes_; }
  const std::vector<double>& y_nodes() const { return y_nodes_; }
  const Eigen::MatrixXd& curvature(int mode) const { return curvature_[mode]; }
  const Eigen::MatrixXd& membrane() const { return membrane_; }
  double half_thickness() const { return half_thickness_; }

  bool contains(const Locus& l) const;
  /// Bilinearly interpolated mode curvatures; throws ConfigError outside
  /// the wing.
  Eigen::VectorXd curvature_at(const Locus& l) const;
  /// Coefficients c with strain = c . [eta; phi_dot^2]: -(h/2) times the
  /// mode curvatures, then the membrane factor.
  Eigen::VectorXd strain_coefficients(const Locus& l) const;

 private:
  struct Cell {
    int i = 0;
    int j = 0;
    double fx = 0.0;
    double fy = 0.0;
    double apply(const Eigen::MatrixXd& table) const;
  };
  Cell locate(const Locus& l) const;

  std::vector<double> x_nodes_;
  std::vector<double> y_nodes_;
  std::vector<Eigen::MatrixXd> curvature_;
  Eigen::MatrixXd membrane_;
  double half_thickness_;
};

/// Assumed-modes wing surrogate. State [phi_dot, omega, eta, eta_dot]:
///   d(phi_dot) = phi_ddot_ref(t) dt + dw_1
///   d(omega)   = omega_nom * envelope'(t) dt + dw_2
///   eta_ddot   = -K eta - C eta_dot
///                + phi_ddot_ref(t) f_flap + omega phi_dot f_coriolis
/// with mass-normalized modes (M = I) and C = alpha M + beta K.
struct WingModel {
  WingParams params;
  Eigen::MatrixXd mass;
  Eigen::MatrixXd stiffness;
  Eigen::MatrixXd damping;
  /// Modal load per unit flapping acceleration (bending modes only).
  Eigen::VectorXd flap_load;
  /// Modal load per unit omega * phi_dot (torsion modes only).
  Eigen::VectorXd coriolis_load;
  ModeShapeTable modes;
  /// Outputs are the modal amplitudes eta.
  DynamicalSystem system;

  int n_modes() const { return static_cast<int>(mass.rows()); }
  int eta_offset() const { return 2; }
  int eta_dot_offset() const { return 2 + n_modes(); }
  Eigen::VectorXd initial_state() const;
  /// [eta; phi_dot^2], the quantities surface strain is linear in.
  Eigen::VectorXd strain_features(const Eigen::VectorXd& x) const;
  /// 1/2 eta_dot' M eta_dot + 1/2 eta' K eta.
  double modal_energy(const Eigen::VectorXd& x) const;
};

WingModel assemble_wing_system(const WingParams& params);

/// Spanwise surface strain at `locus` for every state in `states`: bending
/// -(h/2) sum_i eta_i d2(psi_i)/ds2 plus the centrifugal membrane strain.
std::vector<double> strain_at(std::span<const Eigen::VectorXd> states,
                              const Locus& locus, const WingModel& model);

/// Wing plant whose outputs are the firing probabilities of encoders at
/// `loci`; its output map needs a history of one encoder window.
DynamicalSystem wing_sensor_system(const WingModel& model,
                                   std::vector<Locus> loci,
                                   const EncoderParams& encoder, double dt);

}  // namespace obsgram
