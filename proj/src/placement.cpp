#include "obsgram/placement.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "obsgram/errors.hpp"
#include "obsgram/integrate.hpp"
#include "obsgram/parallel.hpp"

namespace obsgram {

WingSensorField::WingSensorField(const WingFieldConfig& config)
    : config_(config), model_(assemble_wing_system(config.wing)) {
  if (config_.runs < 1) throw ConfigError("runs must be >= 1");
  if (!(config_.epsilon > 0.0)) throw ConfigError("epsilon must be > 0");
  if (config_.perturbed_states.empty()) {
    throw ConfigError("at least one wing state must be perturbed");
  }
  for (int s : config_.perturbed_states) {
    if (s < 0 || s >= model_.system.n_states) {
      throw ConfigError("perturbed wing state out of range");
    }
  }
  const StrainEncoder encoder(config_.encoder, config_.dt);
  const std::size_t first = step_count(config_.perturb_time, config_.dt);
  const std::size_t window = step_count(config_.t1, config_.dt);
  const std::size_t taps = encoder.window_samples();
  if (first + 1 < taps) {
    throw ConfigError("perturb_time must be at least one encoder window");
  }
  const auto samples = static_cast<Eigen::Index>(window + 1);
  sqrt_weights_.resize(samples);
  for (Eigen::Index k = 0; k < samples; ++k) {
    const bool edge = k == 0 || k == samples - 1;
    sqrt_weights_[k] = std::sqrt(edge ? 0.5 * config_.dt : config_.dt);
  }

  const bool stochastic = (config_.q_diagonal.array() != 0.0).any();
  const int n_runs = stochastic ? config_.runs : 1;
  const auto m = config_.perturbed_states.size();
  const int n_features = model_.n_modes() + 1;
  const double total = config_.perturb_time + config_.t1;
  const Eigen::VectorXd x0 = model_.initial_state();
  const InputSignal input = InputSignal::zero(0);
  const double scale = config_.dt / encoder.c_xi();

  std::vector<Eigen::MatrixXd> projected(static_cast<std::size_t>(n_runs) * m * 2);
  parallel_for(projected.size(), config_.threads, [&](std::size_t job) {
    const std::size_t run = job / (2 * m);
    const std::size_t pert = (job / 2) % m;
    const int sign = (job % 2 == 0) ? +1 : -1;
    StateKick kick;
    kick.time = config_.perturb_time;
    kick.delta = Eigen::VectorXd::Zero(model_.system.n_states);
    kick.delta[config_.perturbed_states[pert]] = sign * config_.epsilon;
    Trajectory traj;
    if (stochastic) {
      NoiseSpec noise;
      noise.q_diagonal = config_.q_diagonal;
      noise.master_seed = config_.master_seed;
      noise.stream = StreamId{static_cast<std::uint32_t>(run),
                              static_cast<std::uint32_t>(pert), sign, 0};
      traj = simulate(model_.system, x0, input, total, config_.dt,
                      Scheme::kEuler, &noise, &kick);
    } else {
      traj = simulate(model_.system, x0, input, total, config_.dt,
                      Scheme::kRk4, nullptr, &kick);
    }
    Eigen::MatrixXd xi = Eigen::MatrixXd::Zero(n_features, samples);
    for (Eigen::Index s = 0; s < samples; ++s) {
      const std::size_t k = first + static_cast<std::size_t>(s);
      for (std::size_t j = 0; j < taps; ++j) {
        xi.col(s) += encoder.kernel()[static_cast<Eigen::Index>(j)] *
                     model_.strain_features(traj.states[k - j]);
      }
    }
    projected[job] = scale * xi;
  });

  runs_.resize(static_cast<std::size_t>(n_runs));
  for (std::size_t run = 0; run < runs_.size(); ++run) {
    for (std::size_t pert = 0; pert < m; ++pert) {
      runs_[run].plus.push_back(std::move(projected[(run * m + pert) * 2]));
      runs_[run].minus.push_back(std::move(projected[(run * m + pert) * 2 + 1]));
    }
  }
  // A deterministic field repeats its single run.
  while (static_cast<int>(runs_.size()) < config_.runs) runs_.push_back(runs_.front());
}

Locus WingSensorField::lower() const {
  return {model_.modes.x_nodes().back(), model_.modes.y_nodes().front()};
}

Locus WingSensorField::upper() const {
  return {model_.modes.x_nodes().front(), model_.modes.y_nodes().back()};
}

Eigen::MatrixXd WingSensorField::gramian(const Locus& locus, int run) const {
  if (run < 0 || run >= runs()) throw ConfigError("run index out of range");
  const Eigen::VectorXd c = model_.modes.strain_coefficients(locus);
  const RunCache& cache = runs_[static_cast<std::size_t>(run)];
  const auto m = static_cast<Eigen::Index>(cache.plus.size());
  const Eigen::Index samples = sqrt_weights_.size();
  const EncoderParams& enc = config_.encoder;
  Eigen::MatrixXd phi(samples, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto ii = static_cast<std::size_t>(i);
    const Eigen::VectorXd xi_p = cache.plus[ii].transpose() * c;
    const Eigen::VectorXd xi_m = cache.minus[ii].transpose() * c;
    for (Eigen::Index s = 0; s < samples; ++s) {
      phi(s, i) = sqrt_weights_[s] * (nla(xi_p[s], enc) - nla(xi_m[s], enc));
    }
  }
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(m, m);
  w.selfadjointView<Eigen::Lower>().rankUpdate(phi.transpose());
  w.triangularView<Eigen::StrictlyUpper>() = w.transpose();
  return w / (4.0 * config_.epsilon * config_.epsilon);
}

void PlacementProblem::validate(const SensorField& field) const {
  if (r < 1) throw ConfigError("sensor count r must be >= 1");
  if (!(d_allowed >= 0.0)) throw ConfigError("d_allowed must be >= 0");
  if (!(sigma > 0.0)) throw ConfigError("penalty sigma must be > 0");
  if (field.runs() < 1) throw ConfigError("sensor field has no runs");
  if (!candidate_nodes.empty() &&
      static_cast<int>(candidate_nodes.size()) < r) {
    throw ConfigError("fewer candidate nodes than sensors");
  }
}

Eigen::MatrixXd aggregate_gramian(const std::vector<Eigen::MatrixXd>& gramians,
                                  const std::vector<bool>& gamma) {
  if (gramians.size() != gamma.size() || gramians.empty()) {
    throw ConfigError("gamma must have one entry per Gramian");
  }
  const Eigen::Index m = gramians.front().rows();
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(m, m);
  for (std::size_t k = 0; k < gramians.size(); ++k) {
    if (gramians[k].rows() != m || gramians[k].cols() != m) {
      throw ConfigError("Gramians differ in dimension");
    }
    if (gamma[k]) sum += gramians[k];
  }
  return sum;
}

Eigen::VectorXd pack_loci(const std::vector<Locus>& loci) {
  Eigen::VectorXd z(2 * static_cast<Eigen::Index>(loci.size()));
  for (std::size_t i = 0; i < loci.size(); ++i) {
    z[2 * static_cast<Eigen::Index>(i)] = loci[i].x;
    z[2 * static_cast<Eigen::Index>(i) + 1] = loci[i].y;
  }
  return z;
}

std::vector<Locus> unpack_loci(const Eigen::VectorXd& z) {
  if (z.size() % 2 != 0) throw ConfigError("loci vector has odd length");
  std::vector<Locus> loci(static_cast<std::size_t>(z.size() / 2));
  for (std::size_t i = 0; i < loci.size(); ++i) {
    loci[i] = {z[2 * static_cast<Eigen::Index>(i)],
               z[2 * static_cast<Eigen::Index>(i) + 1]};
  }
  return loci;
}

Locus snap_to_candidates(const Locus& l, const std::vector<Locus>& nodes) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const double d = std::hypot(nodes[k].x - l.x, nodes[k].y - l.y);
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return nodes.at(best);
}

double min_pairwise_distance(const std::vector<Locus>& loci) {
  double d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < loci.size(); ++i) {
    for (std::size_t j = i + 1; j < loci.size(); ++j) {
      d = std::min(d, std::hypot(loci[i].x - loci[j].x, loci[i].y - loci[j].y));
    }
  }
  return d;
}

double evaluate_placement(const std::vector<Locus>& loci,
                          const PlacementProblem& problem,
                          const SensorField& field) {
  if (static_cast<int>(loci.size()) != problem.r) {
    throw ConfigError("expected " + std::to_string(problem.r) + " loci, got " +
                      std::to_string(loci.size()));
  }
  std::vector<Locus> placed = loci;
  if (!problem.candidate_nodes.empty()) {
    for (auto& l : placed) l = snap_to_candidates(l, problem.candidate_nodes);
  }
  const Locus lo = field.lower();
  const Locus hi = field.upper();
  for (const auto& l : placed) {
    if (!(l.x >= lo.x && l.x <= hi.x && l.y >= lo.y && l.y <= hi.y)) {
      throw ConfigError("sensor locus lies outside the admissible region");
    }
  }
  if (min_pairwise_distance(placed) < problem.d_allowed) return problem.sigma;

  std::sort(placed.begin(), placed.end(), [](const Locus& a, const Locus& b) {
    return a.x != b.x ? a.x < b.x : a.y < b.y;
  });
  std::vector<double> values(static_cast<std::size_t>(field.runs()));
  for (int run = 0; run < field.runs(); ++run) {
    Eigen::MatrixXd w = field.gramian(placed.front(), run);
    for (std::size_t k = 1; k < placed.size(); ++k) w += field.gramian(placed[k], run);
    values[static_cast<std::size_t>(run)] = problem.metric(w);
  }
  return monte_carlo_cost(std::move(values)).mean;
}

ExhaustiveResult exhaustive_select(
    const std::vector<std::vector<Eigen::MatrixXd>>& candidates, int r,
    const Metric& metric, double budget) {
  const auto p = static_cast<int>(candidates.size());
  if (r < 1 || r > p) throw ConfigError("r must lie in [1, p]");
  const std::size_t runs = candidates.front().size();
  if (runs == 0) throw ConfigError("candidates have no runs");
  for (const auto& c : candidates) {
    if (c.size() != runs) throw ConfigError("candidates differ in run count");
  }
  double subsets = 1.0;
  for (int i = 0; i < r; ++i) subsets = subsets * (p - i) / (i + 1);
  if (subsets > budget) {
    throw BudgetError("C(" + std::to_string(p) + ", " + std::to_string(r) +
                      ") subsets exceed the exhaustive budget");
  }

  ExhaustiveResult best;
  best.cost = std::numeric_limits<double>::infinity();
  std::vector<int> idx(static_cast<std::size_t>(r));
  std::iota(idx.begin(), idx.end(), 0);
  std::vector<double> values(runs);
  while (true) {
    for (std::size_t run = 0; run < runs; ++run) {
      Eigen::MatrixXd w = candidates[static_cast<std::size_t>(idx[0])][run];
      for (int k = 1; k < r; ++k) {
        w += candidates[static_cast<std::size_t>(idx[static_cast<std::size_t>(k)])][run];
      }
      values[run] = metric(w);
    }
    const double cost = monte_carlo_cost(values).mean;
    ++best.subsets;
    if (best.indices.empty() || cost < best.cost) {
      best.cost = cost;
      best.indices = idx;
    }
    // Next combination in lexicographic order.
    int k = r - 1;
    while (k >= 0 && idx[static_cast<std::size_t>(k)] == p - r + k) --k;
    if (k < 0) break;
    ++idx[static_cast<std::size_t>(k)];
    for (int j = k + 1; j < r; ++j) {
      idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
  return best;
}

PlacementResult place_sensors(const PlacementProblem& problem,
                              const SensorField& field) {
  problem.validate(field);
  const Locus lo = field.lower();
  const Locus hi = field.upper();
  Box box;
  box.lower.resize(2 * problem.r);
  box.upper.resize(2 * problem.r);
  for (int i = 0; i < problem.r; ++i) {
    box.lower[2 * i] = lo.x;
    box.lower[2 * i + 1] = lo.y;
    box.upper[2 * i] = hi.x;
    box.upper[2 * i + 1] = hi.y;
  }
  const Objective objective = [&](const Eigen::VectorXd& z) {
    return evaluate_placement(unpack_loci(z), problem, field);
  };

  PsoSettings pso = problem.pso;
  pso.failure_cost = problem.sigma;
  const PsoResult swarm = pso_optimize(objective, box, pso);
  PatternSearchSettings refine = problem.refine;
  refine.failure_cost = problem.sigma;
  const PatternSearchResult polished =
      refine_local(objective, box, swarm.best, refine);

  PlacementResult result;
  result.loci = unpack_loci(polished.point);
  if (!problem.candidate_nodes.empty()) {
    for (auto& l : result.loci) l = snap_to_candidates(l, problem.candidate_nodes);
  }
  result.cost = polished.cost;
  result.pso_cost = swarm.best_cost;
  result.pso_trace = swarm.trace;
  result.evaluations = swarm.evaluations + polished.evaluations;
  PlacementProblem single = problem;
  single.r = 1;
  for (const auto& l : result.loci) {
    result.per_locus_cost.push_back(evaluate_placement({l}, single, field));
  }
  return result;
}

}  // namespace obsgram
