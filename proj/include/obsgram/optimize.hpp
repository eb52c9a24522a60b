#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace obsgram {

using Objective = std::function<double(const Eigen::VectorXd&)>;

/// Axis-aligned search region.
struct Box {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  int dimension() const { return static_cast<int>(lower.size()); }
  Eigen::VectorXd range() const { return upper - lower; }
  Eigen::VectorXd clamp(const Eigen::VectorXd& x) const;
  bool contains(const Eigen::VectorXd& x) const;
  void validate() const;
};

/// Global-best particle swarm. Defaults are the usual constriction values.
struct PsoSettings {
  int swarm = 40;
  int iterations = 150;
  double inertia = 0.729;
  double cognitive = 1.49445;
  double social = 1.49445;
  /// Velocity limit as a fraction of each coordinate's range.
  double velocity_clamp = 0.2;
  std::uint64_t seed = 0;
  /// Optional starting positions (one per particle); random otherwise.
  std::vector<Eigen::VectorXd> initial_positions;
  /// Random initial velocities within the clamp; zero when false.
  bool random_initial_velocity = true;
  /// Cost substituted when the objective throws or returns NaN.
  double failure_cost = 1e5;
  int threads = 1;
};

struct PsoResult {
  Eigen::VectorXd best;
  double best_cost = 0.0;
  /// Global-best cost after initialization and after every iteration.
  std::vector<double> trace;
  long evaluations = 0;
};

PsoResult pso_optimize(const Objective& objective, const Box& bounds,
                       const PsoSettings& settings);

/// Compass search: poll +/- step along each coordinate, accept the first
/// improvement, halve the steps when no poll improves.
struct PatternSearchSettings {
  double initial_step = 0.1;  ///< fraction of each coordinate range
  double min_step = 1e-7;     ///< stop once every step is below this fraction
  double shrink = 0.5;
  int max_evaluations = 4000;
  double failure_cost = 1e5;
};

struct PatternSearchResult {
  Eigen::VectorXd point;
  double cost = 0.0;
  double start_cost = 0.0;
  int evaluations = 0;
};

/// Bound-constrained refinement; the returned cost never exceeds the cost
/// at `start`.
PatternSearchResult refine_local(const Objective& objective, const Box& bounds,
                                 const Eigen::VectorXd& start,
                                 const PatternSearchSettings& settings = {});

}  // namespace obsgram
