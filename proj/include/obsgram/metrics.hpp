#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace obsgram {

/// Eigenvalues at or below kPsdTolerance * trace(W) count as zero.
inline constexpr double kPsdTolerance = 1e-10;

/// Ascending eigenvalues of a symmetric matrix.
Eigen::VectorXd symmetric_eigenvalues(const Eigen::MatrixXd& w);

/// True when lambda_min(W) <= kPsdTolerance * |trace(W)|.
bool is_singular(const Eigen::MatrixXd& w);

/// nu(W) = 1 / lambda_min, +inf when singular.
double unobservability_index(const Eigen::MatrixXd& w);

/// kappa(W) = lambda_max / lambda_min, +inf when singular.
double condition_number(const Eigen::MatrixXd& w);

/// (prod lambda_i)^(1/m) through the mean log-eigenvalue; 0 when singular.
double det_root(const Eigen::MatrixXd& w);

/// kappa(W) + w_nu * nu(W).
double combined_cost(const Eigen::MatrixXd& w, double w_nu);

struct MetricReport {
  int m = 0;
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  double nu = 0.0;
  double kappa = 0.0;
  double det_root = 0.0;
  double w_nu = 0.0;
  double combined = 0.0;

  /// Column order of to_csv_row().
  static std::string csv_header();
  std::string to_csv_row() const;
};

MetricReport evaluate_metrics(const Eigen::MatrixXd& w, double w_nu = 0.0);

/// Scalar Gramian metric j(W) to be minimized.
struct Metric {
  enum class Kind { kUnobservabilityIndex, kConditionNumber, kCombined,
                    kInverseDetRoot };

  Kind kind = Kind::kCombined;
  double w_nu = 0.0;

  static Metric nu() { return {Kind::kUnobservabilityIndex, 0.0}; }
  static Metric kappa() { return {Kind::kConditionNumber, 0.0}; }
  static Metric combined(double w) { return {Kind::kCombined, w}; }
  static Metric inverse_det_root() { return {Kind::kInverseDetRoot, 0.0}; }

  double operator()(const Eigen::MatrixXd& w) const;
  std::string name() const;
};

/// Monte Carlo mean of j over K Gramians. Any infinite sample makes the
/// mean infinite; the raw values are kept either way.
struct MonteCarloCost {
  double mean = 0.0;
  std::vector<double> samples;

  bool infinite() const;
};

MonteCarloCost monte_carlo_cost(std::span<const Eigen::MatrixXd> gramians,
                                const Metric& j);
MonteCarloCost monte_carlo_cost(std::vector<double> samples);

// Summary statistics over finite samples (infinite entries propagate).
double mean(std::span<const double> v);
double median(std::span<const double> v);
/// Unbiased sample variance; 0 for fewer than two samples.
double variance(std::span<const double> v);
double pearson(std::span<const double> a, std::span<const double> b);
/// Pearson correlation of average ranks; +inf sorts last.
double spearman(std::span<const double> a, std::span<const double> b);

}  // namespace obsgram
