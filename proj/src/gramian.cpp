#include "obsgram/gramian.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "obsgram/errors.hpp"

namespace obsgram {
namespace {

struct PlanGrid {
  double total_time;
  std::size_t first;
  std::size_t last;
};

PlanGrid plan_grid(const PerturbationPlan& plan) {
  const std::size_t window = step_count(plan.t1, plan.dt);
  std::size_t first = 0;
  if (plan.perturb_time > 0.0) first = step_count(plan.perturb_time, plan.dt);
  return {plan.perturb_time + plan.t1, first, first + window};
}

template <typename RunFn>
GramianSample run_pairs(const DynamicalSystem& system,
                        const PerturbationPlan& plan, RunFn&& run) {
  plan.validate(system.n_states);
  const std::vector<int> idx = plan.indices(system.n_states);
  const PlanGrid grid = plan_grid(plan);

  std::vector<Trajectory> plus;
  std::vector<Trajectory> minus;
  plus.reserve(idx.size());
  minus.reserve(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    for (int sign : {+1, -1}) {
      StateKick kick;
      kick.time = plan.perturb_time;
      kick.delta = Eigen::VectorXd::Zero(system.n_states);
      kick.delta[idx[i]] = sign * plan.epsilon;
      try {
        Trajectory t = run(i, sign, grid.total_time, kick);
        (sign > 0 ? plus : minus).push_back(std::move(t));
      } catch (const DivergenceError& e) {
        throw DivergenceError(std::string(e.what()) + " (perturbation " +
                                  (sign > 0 ? "+" : "-") +
                                  std::to_string(idx[i]) + ")",
                              e.step());
      }
    }
  }

  GramianSample sample;
  sample.w = assemble_gramian(plus, minus, plan.epsilon, grid.first, grid.last);
  sample.epsilon = plan.epsilon;
  sample.perturbed_indices = idx;
  return sample;
}

}  // namespace

std::vector<int> PerturbationPlan::indices(int n_states) const {
  if (!perturbed_indices.empty()) return perturbed_indices;
  std::vector<int> all(static_cast<std::size_t>(n_states));
  std::iota(all.begin(), all.end(), 0);
  return all;
}

void PerturbationPlan::validate(int n_states) const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw ConfigError("perturbation epsilon must be positive");
  }
  if (x0.size() != n_states) {
    throw ConfigError("nominal initial state has the wrong dimension");
  }
  if (perturb_time < 0.0) throw ConfigError("perturb_time must be >= 0");
  std::vector<int> sorted = perturbed_indices;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw ConfigError("perturbed state indices contain duplicates");
  }
  for (int i : sorted) {
    if (i < 0 || i >= n_states) {
      throw ConfigError("perturbed state index " + std::to_string(i) +
                        " out of range");
    }
  }
}

Eigen::MatrixXd assemble_gramian(const std::vector<Trajectory>& plus,
                                 const std::vector<Trajectory>& minus,
                                 double epsilon, std::size_t first,
                                 std::size_t last) {
  if (plus.size() != minus.size() || plus.empty()) {
    throw ConfigError("Gramian assembly needs matching +/- trajectory sets");
  }
  const auto m = static_cast<Eigen::Index>(plus.size());
  const double dt = plus.front().dt;
  if (last <= first) throw ConfigError("empty Gramian window");
  for (std::size_t i = 0; i < plus.size(); ++i) {
    for (const Trajectory* t : {&plus[i], &minus[i]}) {
      if (t->size() <= last) throw ConfigError("trajectory shorter than window");
      if (t->first_ready > first) {
        throw ConfigError("outputs are not ready at the start of the Gramian "
                          "window; increase perturb_time");
      }
    }
  }
  const auto p = plus.front().outputs[first].size();

  // Rows of the stacked, sqrt-weighted Phi; W = Phi_s^T Phi_s.
  const auto samples = static_cast<Eigen::Index>(last - first + 1);
  Eigen::MatrixXd phi(samples * p, m);
  for (Eigen::Index s = 0; s < samples; ++s) {
    const std::size_t k = first + static_cast<std::size_t>(s);
    const double weight = (k == first || k == last) ? 0.5 * dt : dt;
    const double root = std::sqrt(weight);
    for (Eigen::Index i = 0; i < m; ++i) {
      const auto ii = static_cast<std::size_t>(i);
      phi.block(s * p, i, p, 1) =
          root * (plus[ii].outputs[k] - minus[ii].outputs[k]);
    }
  }
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(m, m);
  w.selfadjointView<Eigen::Lower>().rankUpdate(phi.transpose());
  w.triangularView<Eigen::StrictlyUpper>() = w.transpose();
  return w / (4.0 * epsilon * epsilon);
}

GramianSample empirical_gramian(const DynamicalSystem& system,
                                const PerturbationPlan& plan) {
  GramianSample s = run_pairs(
      system, plan,
      [&](std::size_t, int, double total, const StateKick& kick) {
        return simulate(system, plan.x0, plan.input, total, plan.dt,
                        Scheme::kRk4, nullptr, &kick);
      });
  s.integrator = "rk4";
  return s;
}

GramianSample stochastic_gramian_sample(const DynamicalSystem& system,
                                        const PerturbationPlan& plan,
                                        const Eigen::VectorXd& q_diagonal,
                                        std::uint64_t master_seed,
                                        int run_index) {
  if (q_diagonal.size() != system.n_noise()) {
    throw ConfigError("noise covariance does not match the noise map");
  }
  if (run_index < 0) throw ConfigError("run index must be >= 0");
  NoiseSpec base;
  base.q_diagonal = q_diagonal;
  base.master_seed = master_seed;
  base.validate();

  GramianSample s;
  if (base.is_zero()) {
    s = empirical_gramian(system, plan);
  } else {
    s = run_pairs(system, plan,
                  [&](std::size_t i, int sign, double total,
                      const StateKick& kick) {
                    NoiseSpec noise = base;
                    noise.stream.run = static_cast<std::uint32_t>(run_index);
                    noise.stream.perturbation = static_cast<std::uint32_t>(i);
                    noise.stream.sign = sign;
                    return simulate(system, plan.x0, plan.input, total,
                                    plan.dt, Scheme::kEuler, &noise, &kick);
                  });
    s.integrator = "euler-maruyama";
  }
  s.stochastic = true;
  s.run_index = run_index;
  s.master_seed = master_seed;
  return s;
}

Eigen::MatrixXd observability_matrix(const Eigen::MatrixXd& a,
                                     const Eigen::MatrixXd& c, int horizon) {
  if (horizon < 1) throw ConfigError("horizon must be >= 1");
  if (a.rows() != a.cols() || c.cols() != a.rows()) {
    throw ConfigError("observability_matrix: A must be n x n and C p x n");
  }
  const Eigen::Index p = c.rows();
  Eigen::MatrixXd o(p * horizon, a.cols());
  Eigen::MatrixXd block = c;
  for (int t = 0; t < horizon; ++t) {
    o.middleRows(t * p, p) = block;
    block = block * a;
  }
  return o;
}

Eigen::MatrixXd linear_gramian(const Eigen::MatrixXd& a,
                               const Eigen::MatrixXd& c, int horizon) {
  if (horizon < 1) throw ConfigError("horizon must be >= 1");
  if (a.rows() != a.cols() || c.cols() != a.rows()) {
    throw ConfigError("linear_gramian: A must be n x n and C p x n");
  }
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(a.rows(), a.cols());
  Eigen::MatrixXd ca = c;
  for (int t = 0; t < horizon; ++t) {
    w.noalias() += ca.transpose() * ca;
    ca = ca * a;
  }
  return 0.5 * (w + w.transpose());
}

int numerical_rank(const Eigen::MatrixXd& m, double tol) {
  if (m.size() == 0) return 0;
  const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues();
  const double smax = sv.size() > 0 ? sv[0] : 0.0;
  if (smax == 0.0) return 0;
  return static_cast<int>((sv.array() > tol * smax).count());
}

}  // namespace obsgram
