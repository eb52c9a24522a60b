#include "obsgram/encoder.hpp"

#include <cmath>
#include <limits>

#include "obsgram/errors.hpp"

namespace obsgram {

void EncoderParams::validate() const {
  if (!(width > 0.0)) throw ConfigError("encoder width b must be > 0");
  if (!(window > 0.0)) throw ConfigError("encoder window N must be > 0");
  if (!(slope > 0.0)) throw ConfigError("encoder slope c must be > 0");
  if (c_xi && !(*c_xi > 0.0)) throw ConfigError("C_xi must be > 0");
}

Eigen::VectorXd sta_kernel(const EncoderParams& params, double dt) {
  params.validate();
  if (!(dt > 0.0)) throw ConfigError("dt must be > 0");
  const double ratio = params.window / dt;
  const double n = std::round(ratio);
  if (std::abs(ratio - n) > 1e-6 * std::max(1.0, ratio)) {
    throw ConfigError("encoder window is not a multiple of dt");
  }
  Eigen::VectorXd k(static_cast<Eigen::Index>(n) + 1);
  for (Eigen::Index j = 0; j < k.size(); ++j) {
    const double lag = params.delay - static_cast<double>(j) * dt;
    k[j] = std::cos(params.omega_sta * lag) *
           std::exp(-(lag * lag) / (params.width * params.width));
  }
  return k;
}

double matched_filter_constant(const Eigen::VectorXd& kernel, double dt) {
  return kernel.squaredNorm() * dt;
}

std::optional<double> project_stimulus(std::span<const double> history,
                                       const Eigen::VectorXd& kernel,
                                       double c_xi, double dt) {
  const auto len = static_cast<std::size_t>(kernel.size());
  if (history.size() < len) return std::nullopt;
  const std::size_t last = history.size() - 1;
  double acc = 0.0;
  for (std::size_t j = 0; j < len; ++j) {
    acc += history[last - j] * kernel[static_cast<Eigen::Index>(j)];
  }
  return acc * dt / c_xi;
}

double nla(double xi, const EncoderParams& params) {
  return 1.0 / (1.0 + std::exp(-params.slope * (xi - params.half_max)));
}

EncodedSeries encode(std::span<const double> strain,
                     const EncoderParams& params, double dt) {
  const StrainEncoder enc(params, dt);
  const std::size_t len = enc.window_samples();
  if (strain.size() < len) {
    throw ConfigError("strain series is shorter than the encoder window");
  }
  EncodedSeries out;
  out.first_ready = len - 1;
  out.p_fire.assign(strain.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t k = out.first_ready; k < strain.size(); ++k) {
    out.p_fire[k] = enc.fire(strain.subspan(k + 1 - len, len));
  }
  return out;
}

StrainEncoder::StrainEncoder(const EncoderParams& params, double dt)
    : params_(params), dt_(dt), kernel_(sta_kernel(params, dt)) {
  c_xi_ = params.c_xi ? *params.c_xi : matched_filter_constant(kernel_, dt);
}

std::optional<double> StrainEncoder::project(
    std::span<const double> history) const {
  return project_stimulus(history, kernel_, c_xi_, dt_);
}

double StrainEncoder::fire(std::span<const double> history) const {
  const std::optional<double> xi = project(history);
  if (!xi) throw ConfigError("encoder history shorter than its window");
  return nla(*xi, params_);
}

}  // namespace obsgram
