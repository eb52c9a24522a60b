#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "obsgram/encoder.hpp"
#include "obsgram/metrics.hpp"
#include "obsgram/optimize.hpp"
#include "obsgram/wing.hpp"

namespace obsgram {

/// Source of single-sensor Gramians: one m x m matrix per (locus, run).
/// Runs share their noise realizations across loci (common random
/// numbers), so a placement's cost is a deterministic function of loci.
class SensorField {
 public:
  virtual ~SensorField() = default;

  virtual int runs() const = 0;
  virtual int dimension() const = 0;
  /// Corners of the admissible region.
  virtual Locus lower() const = 0;
  virtual Locus upper() const = 0;
  virtual Eigen::MatrixXd gramian(const Locus& locus, int run) const = 0;
};

/// Settings for the per-locus wing Gramians.
struct WingFieldConfig {
  WingParams wing;
  EncoderParams encoder;
  double dt = 5e-4;
  /// Perturbation injected at the start of the fifth wingbeat.
  double perturb_time = 0.16;
  double t1 = 0.04;
  double epsilon = 0.01;
  /// Perturbed states; default (phi_dot, omega).
  std::vector<int> perturbed_states = {0, 1};
  int runs = 40;
  std::uint64_t master_seed = 1;
  /// Noise covariance; zero runs a single deterministic RK4 set.
  Eigen::Vector2d q_diagonal{1.0, 1e-4};
  int threads = 1;
};

/// Simulates every (run, perturbation, sign) of the wing once and caches
/// the encoder's linear projection of each strain feature. A locus then
/// only needs its interpolated strain coefficients and the sigmoid, which
/// is exactly strain_at + encode by linearity of both.
class WingSensorField : public SensorField {
 public:
  explicit WingSensorField(const WingFieldConfig& config);

  int runs() const override { return static_cast<int>(runs_.size()); }
  int dimension() const override {
    return static_cast<int>(config_.perturbed_states.size());
  }
  Locus lower() const override;
  Locus upper() const override;
  Eigen::MatrixXd gramian(const Locus& locus, int run) const override;

  const WingModel& model() const { return model_; }
  const WingFieldConfig& config() const { return config_; }

 private:
  struct RunCache {
    /// Per perturbation: (n_modes + 1) x samples projected feature series.
    std::vector<Eigen::MatrixXd> plus;
    std::vector<Eigen::MatrixXd> minus;
  };

  WingFieldConfig config_;
  WingModel model_;
  std::vector<RunCache> runs_;
  Eigen::VectorXd sqrt_weights_;
};

/// Placement problem over a SensorField.
struct PlacementProblem {
  int r = 1;
  /// Minimum pairwise sensor distance (cm).
  double d_allowed = 0.1;
  /// Cost of any placement violating d_allowed.
  double sigma = 1e5;
  Metric metric = Metric::combined(0.1);
  /// When non-empty, every locus snaps to its nearest candidate node.
  std::vector<Locus> candidate_nodes;
  PsoSettings pso;
  PatternSearchSettings refine;

  void validate(const SensorField& field) const;
};

/// sum_k gamma_k W_k.
Eigen::MatrixXd aggregate_gramian(const std::vector<Eigen::MatrixXd>& gramians,
                                  const std::vector<bool>& gamma);

/// Packs / unpacks loci as [x1, y1, x2, y2, ...].
Eigen::VectorXd pack_loci(const std::vector<Locus>& loci);
std::vector<Locus> unpack_loci(const Eigen::VectorXd& z);

/// Nearest candidate node (lowest index on ties).
Locus snap_to_candidates(const Locus& l, const std::vector<Locus>& nodes);

double min_pairwise_distance(const std::vector<Locus>& loci);

/// sigma if two sensors are closer than d_allowed, otherwise the mean over
/// runs of j(sum of the per-locus Gramians). Loci are summed in sorted
/// order, so permuting them does not change the result.
double evaluate_placement(const std::vector<Locus>& loci,
                          const PlacementProblem& problem,
                          const SensorField& field);

struct ExhaustiveResult {
  std::vector<int> indices;
  double cost = 0.0;
  long subsets = 0;
};

/// Brute-force selection of r of p candidates. `candidates[k][i]` is the
/// Gramian of candidate k on run i. Ties keep the lexicographically
/// smallest index set. Throws BudgetError when C(p, r) > budget.
ExhaustiveResult exhaustive_select(
    const std::vector<std::vector<Eigen::MatrixXd>>& candidates, int r,
    const Metric& metric, double budget = 1e6);

struct PlacementResult {
  std::vector<Locus> loci;
  double cost = 0.0;
  double pso_cost = 0.0;
  std::vector<double> pso_trace;
  long evaluations = 0;
  /// Single-sensor Monte Carlo cost of each chosen locus.
  std::vector<double> per_locus_cost;
};

/// PSO over the 2r loci coordinates followed by pattern-search refinement.
PlacementResult place_sensors(const PlacementProblem& problem,
                              const SensorField& field);

}  // namespace obsgram
