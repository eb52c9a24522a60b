#include "obsgram/optimize.hpp"

#include <algorithm>
#include <cmath>

#include "obsgram/errors.hpp"
#include "obsgram/parallel.hpp"
#include "obsgram/rng.hpp"

namespace obsgram {
namespace {

constexpr std::uint32_t kPsoPurpose = 0x50534Fu;  // "PSO"

double safe_eval(const Objective& f, const Eigen::VectorXd& x,
                 double failure_cost) {
  try {
    const double v = f(x);
    return std::isnan(v) ? failure_cost : v;
  } catch (const Error&) {
    return failure_cost;
  }
}

}  // namespace

Eigen::VectorXd Box::clamp(const Eigen::VectorXd& x) const {
  return x.cwiseMax(lower).cwiseMin(upper);
}

bool Box::contains(const Eigen::VectorXd& x) const {
  return x.size() == lower.size() && (x.array() >= lower.array()).all() &&
         (x.array() <= upper.array()).all();
}

void Box::validate() const {
  if (lower.size() == 0 || lower.size() != upper.size()) {
    throw ConfigError("search bounds must be non-empty and of equal length");
  }
  if (!(lower.array() < upper.array()).all() || !lower.allFinite() ||
      !upper.allFinite()) {
    throw ConfigError("search bounds must be finite with lower < upper");
  }
}

PsoResult pso_optimize(const Objective& objective, const Box& bounds,
                       const PsoSettings& s) {
  bounds.validate();
  if (s.swarm < 2) throw ConfigError("PSO swarm must have >= 2 particles");
  if (s.iterations < 1) throw ConfigError("PSO needs >= 1 iteration");
  if (!s.initial_positions.empty() &&
      static_cast<int>(s.initial_positions.size()) != s.swarm) {
    throw ConfigError("initial_positions must have one entry per particle");
  }
  const int dim = bounds.dimension();
  const auto n = static_cast<std::size_t>(s.swarm);
  const Eigen::VectorXd vmax = s.velocity_clamp * bounds.range();
  const CounterRng rng(s.seed, StreamId{0, 0, 0, kPsoPurpose});
  // Draw index layout: (iteration, particle, coordinate, slot).
  auto draw = [&](std::uint64_t iter, std::uint64_t particle, int d,
                  int slot) {
    const std::uint64_t idx =
        ((iter * n + particle) * static_cast<std::uint64_t>(dim) +
         static_cast<std::uint64_t>(d)) * 2 + static_cast<std::uint64_t>(slot);
    return rng.uniform(idx);
  };

  std::vector<Eigen::VectorXd> pos(n), vel(n), best_pos(n);
  std::vector<double> best_cost(n), cost(n);
  for (std::size_t p = 0; p < n; ++p) {
    if (!s.initial_positions.empty()) {
      if (s.initial_positions[p].size() != dim) {
        throw ConfigError("initial position has the wrong dimension");
      }
      pos[p] = bounds.clamp(s.initial_positions[p]);
    } else {
      pos[p].resize(dim);
      for (int d = 0; d < dim; ++d) {
        pos[p][d] = bounds.lower[d] + draw(0, p, d, 0) * bounds.range()[d];
      }
    }
    vel[p] = Eigen::VectorXd::Zero(dim);
    if (s.random_initial_velocity) {
      for (int d = 0; d < dim; ++d) {
        vel[p][d] = (2.0 * draw(0, p, d, 1) - 1.0) * vmax[d];
      }
    }
  }

  PsoResult result;
  auto evaluate_all = [&] {
    parallel_for(n, s.threads, [&](std::size_t p) {
      cost[p] = safe_eval(objective, pos[p], s.failure_cost);
    });
    result.evaluations += static_cast<long>(n);
  };

  evaluate_all();
  std::size_t g = 0;
  for (std::size_t p = 0; p < n; ++p) {
    best_pos[p] = pos[p];
    best_cost[p] = cost[p];
    if (cost[p] < best_cost[g]) g = p;
  }
  Eigen::VectorXd global = best_pos[g];
  double global_cost = best_cost[g];
  result.trace.push_back(global_cost);

  for (int it = 1; it <= s.iterations; ++it) {
    const auto iter = static_cast<std::uint64_t>(it);
    for (std::size_t p = 0; p < n; ++p) {
      for (int d = 0; d < dim; ++d) {
        double v = s.inertia * vel[p][d] +
                   s.cognitive * draw(iter, p, d, 0) * (best_pos[p][d] - pos[p][d]) +
                   s.social * draw(iter, p, d, 1) * (global[d] - pos[p][d]);
        v = std::clamp(v, -vmax[d], vmax[d]);
        double x = pos[p][d] + v;
        if (x < bounds.lower[d]) {
          x = bounds.lower[d];
          v = 0.0;
        } else if (x > bounds.upper[d]) {
          x = bounds.upper[d];
          v = 0.0;
        }
        pos[p][d] = x;
        vel[p][d] = v;
      }
    }
    evaluate_all();
    // Bookkeeping in particle order keeps results independent of threads.
    for (std::size_t p = 0; p < n; ++p) {
      if (cost[p] < best_cost[p]) {
        best_cost[p] = cost[p];
        best_pos[p] = pos[p];
      }
      if (cost[p] < global_cost) {
        global_cost = cost[p];
        global = pos[p];
      }
    }
    result.trace.push_back(global_cost);
  }
  result.best = global;
  result.best_cost = global_cost;
  return result;
}

PatternSearchResult refine_local(const Objective& objective, const Box& bounds,
                                 const Eigen::VectorXd& start,
                                 const PatternSearchSettings& s) {
  bounds.validate();
  if (!bounds.contains(start)) {
    throw ConfigError("pattern search start point lies outside the bounds");
  }
  if (!(s.shrink > 0.0 && s.shrink < 1.0)) {
    throw ConfigError("pattern search shrink factor must lie in (0, 1)");
  }
  const int dim = bounds.dimension();
  PatternSearchResult r;
  r.point = start;
  r.cost = safe_eval(objective, start, s.failure_cost);
  r.start_cost = r.cost;
  r.evaluations = 1;

  Eigen::VectorXd step = s.initial_step * bounds.range();
  const Eigen::VectorXd min_step = s.min_step * bounds.range();
  while (r.evaluations < s.max_evaluations) {
    bool improved = false;
    for (int d = 0; d < dim && r.evaluations < s.max_evaluations; ++d) {
      for (double dir : {+1.0, -1.0}) {
        Eigen::VectorXd trial = r.point;
        trial[d] = std::clamp(trial[d] + dir * step[d], bounds.lower[d],
                              bounds.upper[d]);
        if (trial[d] == r.point[d]) continue;
        const double c = safe_eval(objective, trial, s.failure_cost);
        ++r.evaluations;
        if (c < r.cost) {
          r.cost = c;
          r.point = std::move(trial);
          improved = true;
          break;
        }
        if (r.evaluations >= s.max_evaluations) break;
      }
    }
    if (!improved) {
      step *= s.shrink;
      if ((step.array() < min_step.array()).all()) break;
    }
  }
  return r;
}

}  // namespace obsgram
