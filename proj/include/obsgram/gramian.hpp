#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "obsgram/integrate.hpp"
#include "obsgram/system.hpp"

namespace obsgram {

/// How a set of +/- epsilon initial-condition simulations is run.
struct PerturbationPlan {
  double epsilon = 1e-3;
  /// Zero-based state indices; empty means "all states".
  std::vector<int> perturbed_indices;
  /// Length of the Gramian window, seconds.
  double t1 = 1.0;
  double dt = 1e-3;
  /// Nominal run time before the perturbation is injected. The Gramian
  /// integrates over [perturb_time, perturb_time + t1].
  double perturb_time = 0.0;
  Eigen::VectorXd x0;
  InputSignal input;

  /// Resolved index list (fills in "all states").
  std::vector<int> indices(int n_states) const;
  void validate(int n_states) const;
};

/// One symmetric PSD empirical observability Gramian and its provenance.
struct GramianSample {
  Eigen::MatrixXd w;
  double epsilon = 0.0;
  int run_index = 0;
  std::vector<int> perturbed_indices;
  std::uint64_t master_seed = 0;
  bool stochastic = false;
  /// "rk4" or "euler-maruyama".
  std::string integrator;

  int dimension() const { return static_cast<int>(w.rows()); }
};

/// 1/(4 eps^2) * sum_k w_k Phi_k^T Phi_k over trajectory samples
/// [first, last] with trapezoid weights; column i of Phi is the output
/// difference of plus[i] and minus[i]. Symmetric by construction.
Eigen::MatrixXd assemble_gramian(const std::vector<Trajectory>& plus,
                                 const std::vector<Trajectory>& minus,
                                 double epsilon, std::size_t first,
                                 std::size_t last);

/// Deterministic empirical Gramian from 2m noise-free RK4 simulations.
GramianSample empirical_gramian(const DynamicalSystem& system,
                                const PerturbationPlan& plan);

/// Stochastic empirical Gramian from 2m noisy simulations, each with its
/// own stream (run_index, i, sign). Zero covariance falls back to the RK4
/// path so the result equals empirical_gramian exactly.
GramianSample stochastic_gramian_sample(const DynamicalSystem& system,
                                        const PerturbationPlan& plan,
                                        const Eigen::VectorXd& q_diagonal,
                                        std::uint64_t master_seed,
                                        int run_index);

/// [C; CA; ...; CA^{T-1}].
Eigen::MatrixXd observability_matrix(const Eigen::MatrixXd& a,
                                     const Eigen::MatrixXd& c, int horizon);

/// sum_{t<T} (A^T)^t C^T C A^t.
Eigen::MatrixXd linear_gramian(const Eigen::MatrixXd& a,
                               const Eigen::MatrixXd& c, int horizon);

/// Number of singular values above tol * sigma_max (0 for a zero matrix).
int numerical_rank(const Eigen::MatrixXd& m, double tol);

}  // namespace obsgram
