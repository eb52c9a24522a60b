#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace obsgram {

/// Linear-nonlinear strain encoder: spike-triggered-average filter,
/// normalized projection, sigmoid activation.
struct EncoderParams {
  double delay = 5e-3;          ///< a, seconds
  double width = 4e-3;          ///< b, seconds
  double omega_sta = 1000.0;    ///< rad/s
  double slope = 10.0;          ///< c
  double half_max = 0.5;        ///< d
  double window = 40e-3;        ///< N, seconds
  /// C_xi; when unset the matched-filter constant ||STA||^2 dt is used.
  std::optional<double> c_xi;

  void validate() const;
};

/// STA(t) = cos(omega (a - t)) exp(-(a - t)^2 / b^2) at t = 0, dt, ..., N.
Eigen::VectorXd sta_kernel(const EncoderParams& params, double dt);

/// ||STA||^2 dt.
double matched_filter_constant(const Eigen::VectorXd& kernel, double dt);

/// xi(t) = (1/C_xi) sum_j strain(t - j dt) STA(j dt) dt. `history` is in
/// time order and its last sample is the current one. Returns nullopt
/// (not ready) when fewer than kernel.size() samples are available.
std::optional<double> project_stimulus(std::span<const double> history,
                                       const Eigen::VectorXd& kernel,
                                       double c_xi, double dt);

/// 1 / (1 + exp(-c (xi - d))).
double nla(double xi, const EncoderParams& params);

/// Firing probability per sample. Entries before `first_ready` are NaN.
struct EncodedSeries {
  std::vector<double> p_fire;
  std::size_t first_ready = 0;
};

/// Causal encoding of a uniformly sampled strain series.
EncodedSeries encode(std::span<const double> strain,
                     const EncoderParams& params, double dt);

/// Precomputed kernel and normalization for repeated projections.
class StrainEncoder {
 public:
  StrainEncoder(const EncoderParams& params, double dt);

  const EncoderParams& params() const { return params_; }
  const Eigen::VectorXd& kernel() const { return kernel_; }
  double dt() const { return dt_; }
  double c_xi() const { return c_xi_; }
  /// Samples of history needed for one output (kernel length).
  std::size_t window_samples() const {
    return static_cast<std::size_t>(kernel_.size());
  }

  std::optional<double> project(std::span<const double> history) const;
  double fire(std::span<const double> history) const;

 private:
  EncoderParams params_;
  double dt_;
  Eigen::VectorXd kernel_;
  double c_xi_;
};

}  // namespace obsgram
