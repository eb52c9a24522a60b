#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>
#include <string>

#include "obsgram/cli.hpp"
#include "obsgram/errors.hpp"
#include "obsgram/gramian.hpp"
#include "obsgram/integrate.hpp"
#include "obsgram/matrix_io.hpp"
#include "obsgram/metrics.hpp"
#include "obsgram/parallel.hpp"
#include "obsgram/placement.hpp"
#include "obsgram/uav.hpp"

namespace obsgram {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::ofstream open_output(const fs::path& dir, const std::string& name) {
  fs::create_directories(dir);
  std::ofstream os(dir / name, std::ios::binary);
  if (!os) throw Error("cannot write " + (dir / name).string());
  return os;
}

// JSON has no infinity; non-finite values are written as strings.
json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

json meta(const RunSpec& spec) {
  return {{"version", kVersion},
          {"spec_hash", spec.hash},
          {"master_seed", spec.master_seed},
          {"experiment", experiment_name(spec.experiment)}};
}

void write_json(const fs::path& dir, const std::string& name, const json& j) {
  std::ofstream os = open_output(dir, name);
  os << j.dump(2) << '\n';
}

std::string label(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

json loci_json(const std::vector<Locus>& loci) {
  json a = json::array();
  for (const auto& l : loci) a.push_back({l.x, l.y});
  return a;
}

json stats_json(const std::vector<double>& v) {
  return {{"mean", number(mean(v))},
          {"median", number(median(v))},
          {"variance", number(variance(v))}};
}

// The plant a spec refers to, with its sensor outputs attached.
struct Setup {
  DynamicalSystem system;
  std::shared_ptr<const WingModel> wing;
};

Setup build_plant(const RunSpec& spec, bool with_sensors) {
  Setup p;
  if (spec.plant == Plant::kUav) {
    UavParams up;
    up.speed = spec.uav_speed;
    p.system = uav_system(up);
    return p;
  }
  p.wing = std::make_shared<const WingModel>(assemble_wing_system(spec.wing));
  p.system = (with_sensors && !spec.loci.empty())
                 ? wing_sensor_system(*p.wing, spec.loci, spec.encoder, spec.dt)
                 : p.wing->system;
  return p;
}

InputSignal build_input(const RunSpec& spec) {
  if (spec.plant == Plant::kWing) return InputSignal::zero(0);
  return InputSignal::constant(Eigen::VectorXd::Constant(1, spec.u));
}

PerturbationPlan build_plan(const RunSpec& spec) {
  PerturbationPlan plan;
  plan.epsilon = spec.epsilon;
  plan.perturbed_indices = spec.perturbed_states;
  plan.t1 = spec.t1;
  plan.dt = spec.dt;
  plan.perturb_time = spec.perturb_time;
  plan.x0 = spec.x0;
  plan.input = build_input(spec);
  return plan;
}

WingFieldConfig field_config(const RunSpec& spec, int threads) {
  WingFieldConfig cfg;
  cfg.wing = spec.wing;
  cfg.encoder = spec.encoder;
  cfg.dt = spec.dt;
  cfg.perturb_time = spec.perturb_time;
  cfg.t1 = spec.t1;
  cfg.epsilon = spec.epsilon;
  cfg.perturbed_states = spec.perturbed_states;
  cfg.runs = spec.runs;
  cfg.master_seed = spec.master_seed;
  cfg.q_diagonal = spec.q;
  cfg.threads = threads;
  return cfg;
}

}  // namespace

void run_simulate(const RunSpec& spec, const fs::path& out, int) {
  const Setup plant = build_plant(spec, true);
  NoiseSpec noise;
  noise.q_diagonal = spec.q;
  noise.master_seed = spec.master_seed;
  noise.stream.run = static_cast<std::uint32_t>(spec.run_index);
  const bool noisy = !noise.is_zero();
  const Trajectory traj =
      simulate(plant.system, spec.x0, build_input(spec), spec.t_end, spec.dt,
               spec.integrator == "rk4" ? Scheme::kRk4 : Scheme::kEuler,
               noisy ? &noise : nullptr);

  std::ofstream os = open_output(out, "trajectory.csv");
  os << provenance_line(spec) << '\n' << 't';
  for (int i = 0; i < plant.system.n_states; ++i) os << ",x" << i;
  for (int i = 0; i < plant.system.n_outputs; ++i) os << ",y" << i;
  os << '\n';
  for (std::size_t k = 0; k < traj.size(); ++k) {
    os << format_double(traj.times[k]);
    for (double v : traj.states[k]) os << ',' << format_double(v);
    for (double v : traj.outputs[k]) os << ',' << format_double(v);
    os << '\n';
  }
}

void run_gramian(const RunSpec& spec, const fs::path& out, int threads) {
  const Setup plant = build_plant(spec, true);
  const PerturbationPlan plan = build_plan(spec);
  std::vector<GramianSample> samples(static_cast<std::size_t>(spec.runs));
  parallel_for(samples.size(), threads, [&](std::size_t i) {
    samples[i] = stochastic_gramian_sample(plant.system, plan, spec.q, spec.master_seed,
                                           spec.run_index + static_cast<int>(i));
  });

  std::ofstream metrics = open_output(out, "metrics.csv");
  metrics << provenance_line(spec) << '\n' << "run," << MetricReport::csv_header() << '\n';
  for (const auto& s : samples) {
    MatrixFile file = to_matrix_file(s);
    file.fields.insert(file.fields.begin(), {{"version", kVersion}, {"spec_hash", spec.hash}});
    char name[32];
    std::snprintf(name, sizeof name, "gramian_%04d.txt", s.run_index);
    std::ofstream os = open_output(out, name);
    write_matrix_file(os, file);
    for (double w : spec.w_nu) {
      metrics << s.run_index << ',' << evaluate_metrics(s.w, w).to_csv_row() << '\n';
    }
  }
}

void run_heatmap(const RunSpec& spec, const fs::path& out, int threads) {
  const WingSensorField field(field_config(spec, threads));
  const ModeShapeTable& modes = field.model().modes;
  const auto& xs = modes.x_nodes();
  const auto& ys = modes.y_nodes();
  const std::size_t nx = xs.size();
  const std::size_t ny = ys.size();
  Eigen::MatrixXd nu(static_cast<Eigen::Index>(ny), static_cast<Eigen::Index>(nx));
  Eigen::MatrixXd kappa(nu.rows(), nu.cols());
  parallel_for(nx * ny, threads, [&](std::size_t node) {
    const std::size_t j = node / nx;
    const std::size_t i = node % nx;
    std::vector<double> v_nu, v_kappa;
    for (int r = 0; r < field.runs(); ++r) {
      const Eigen::MatrixXd w = field.gramian({xs[i], ys[j]}, r);
      v_nu.push_back(unobservability_index(w));
      v_kappa.push_back(condition_number(w));
    }
    nu(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = mean(v_nu);
    kappa(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = mean(v_kappa);
  });

  for (const auto& [name, grid] : {std::pair{"heatmap_nu.csv", &nu},
                                   std::pair{"heatmap_kappa.csv", &kappa}}) {
    std::ofstream os = open_output(out, name);
    os << provenance_line(spec) << '\n';
    for (std::size_t i = 0; i < nx; ++i) os << (i ? "," : "") << "x" << format_double(xs[i]);
    os << '\n';
    for (Eigen::Index j = 0; j < grid->rows(); ++j) {
      for (Eigen::Index i = 0; i < grid->cols(); ++i) {
        os << (i ? "," : "") << format_double((*grid)(j, i));
      }
      os << '\n';
    }
  }
  write_json(out, "heatmap_grid.json",
             {{"meta", meta(spec)},
              {"runs", field.runs()},
              {"rows", "y (cm), ascending"},
              {"columns", "x (cm), root to tip"},
              {"x_cm", xs},
              {"y_cm", ys}});
}

void run_sweep(const RunSpec& spec, const fs::path& out, int threads) {
  const Setup plant = build_plant(spec, true);
  const PerturbationPlan plan = build_plan(spec);
  const auto runs = static_cast<std::size_t>(spec.runs);

  std::ofstream csv = open_output(out, "sweep_samples.csv");
  csv << provenance_line(spec) << '\n'
      << "q,run,lambda_min,lambda_max,nu,kappa,det_root,inv_det_root";
  for (double w : spec.w_nu) csv << ",combined_w" << label(w);
  csv << '\n';

  json levels = json::array();
  for (double q : spec.q_levels) {
    const Eigen::VectorXd qd = Eigen::VectorXd::Constant(plant.system.n_noise(), q);
    std::vector<Eigen::MatrixXd> w(runs);
    parallel_for(runs, threads, [&](std::size_t k) {
      w[k] = stochastic_gramian_sample(plant.system, plan, qd, spec.master_seed,
                                       static_cast<int>(k)).w;
    });
    std::vector<double> nu, kappa, droot, inv_droot;
    std::vector<std::vector<double>> combined(spec.w_nu.size());
    int singular = 0;
    for (std::size_t k = 0; k < runs; ++k) {
      const MetricReport m = evaluate_metrics(w[k]);
      nu.push_back(m.nu);
      kappa.push_back(m.kappa);
      droot.push_back(m.det_root);
      inv_droot.push_back(1.0 / m.det_root);
      singular += is_singular(w[k]) ? 1 : 0;
      csv << format_double(q) << ',' << k << ',' << format_double(m.lambda_min) << ','
          << format_double(m.lambda_max) << ',' << format_double(m.nu) << ','
          << format_double(m.kappa) << ',' << format_double(m.det_root) << ','
          << format_double(inv_droot.back());
      for (std::size_t c = 0; c < spec.w_nu.size(); ++c) {
        combined[c].push_back(m.kappa + spec.w_nu[c] * m.nu);
        csv << ',' << format_double(combined[c].back());
      }
      csv << '\n';
    }
    // Correlation over the samples where both metrics are finite.
    std::vector<double> a, b;
    for (std::size_t k = 0; k < runs; ++k) {
      if (std::isfinite(nu[k]) && std::isfinite(inv_droot[k])) {
        a.push_back(nu[k]);
        b.push_back(inv_droot[k]);
      }
    }
    json comb = json::array();
    for (std::size_t c = 0; c < spec.w_nu.size(); ++c) {
      comb.push_back({{"w_nu", spec.w_nu[c]}, {"mean", number(mean(combined[c]))}});
    }
    levels.push_back({{"q", q},
                      {"runs", spec.runs},
                      {"singular", singular},
                      {"nu", stats_json(nu)},
                      {"kappa", stats_json(kappa)},
                      {"det_root", stats_json(droot)},
                      {"pearson_nu_inv_det_root",
                       a.size() >= 2 ? number(pearson(a, b)) : json("nan")},
                      {"pearson_samples", a.size()},
                      {"combined", comb}});
  }
  write_json(out, "sweep_summary.json",
             {{"meta", meta(spec)},
              {"plant", spec.plant == Plant::kUav ? "uav" : "wing"},
              {"perturbed_states", spec.perturbed_states},
              {"epsilon", spec.epsilon},
              {"t1", spec.t1},
              {"dt", spec.dt},
              {"levels", levels}});
}

void run_place(const RunSpec& spec, const fs::path& out, int threads) {
  const WingSensorField field(field_config(spec, threads));

  std::ofstream traces = open_output(out, "place_traces.csv");
  traces << provenance_line(spec) << '\n' << "w_nu,r,iteration,best_cost\n";
  std::vector<std::vector<double>> costs(spec.w_nu.size());
  json results = json::array();
  for (std::size_t c = 0; c < spec.w_nu.size(); ++c) {
    for (int r = spec.r_min; r <= spec.r_max; ++r) {
      PlacementProblem problem;
      problem.r = r;
      problem.d_allowed = spec.d_allowed;
      problem.sigma = spec.sigma;
      problem.metric = Metric::combined(spec.w_nu[c]);
      problem.candidate_nodes = spec.candidate_nodes;
      problem.pso = spec.pso;
      problem.pso.seed = spec.master_seed;
      problem.pso.threads = threads;
      problem.refine = spec.refine;
      const PlacementResult res = place_sensors(problem, field);
      costs[c].push_back(res.cost);
      for (std::size_t it = 0; it < res.pso_trace.size(); ++it) {
        traces << label(spec.w_nu[c]) << ',' << r << ',' << it << ','
               << format_double(res.pso_trace[it]) << '\n';
      }
      json per_locus = json::array();
      for (double v : res.per_locus_cost) per_locus.push_back(number(v));
      results.push_back({{"w_nu", spec.w_nu[c]},
                         {"r", r},
                         {"loci", loci_json(res.loci)},
                         {"cost", number(res.cost)},
                         {"pso_cost", number(res.pso_cost)},
                         {"penalty_dominates", res.cost < spec.sigma},
                         {"evaluations", res.evaluations},
                         {"per_locus_cost", per_locus}});
    }
  }

  std::ofstream csv = open_output(out, "cost_vs_r.csv");
  csv << provenance_line(spec) << "\nr";
  for (double w : spec.w_nu) csv << ",cost_wnu" << label(w);
  csv << '\n';
  for (int r = spec.r_min; r <= spec.r_max; ++r) {
    csv << r;
    for (const auto& col : costs) {
      csv << ',' << format_double(col[static_cast<std::size_t>(r - spec.r_min)]);
    }
    csv << '\n';
  }

  write_json(out, "placement.json",
             {{"meta", meta(spec)},
              {"runs", field.runs()},
              {"metric", "kappa + w_nu * nu"},
              {"settings",
               {{"d_allowed", spec.d_allowed},
                {"sigma", spec.sigma},
                {"swarm", spec.pso.swarm},
                {"iterations", spec.pso.iterations},
                {"inertia", spec.pso.inertia},
                {"cognitive", spec.pso.cognitive},
                {"social", spec.pso.social},
                {"velocity_clamp", spec.pso.velocity_clamp},
                {"refine_max_evaluations", spec.refine.max_evaluations},
                {"candidate_nodes", loci_json(spec.candidate_nodes)}}},
              {"results", results}});
}

void run_experiment(const RunSpec& spec, const fs::path& out, int threads) {
  switch (spec.experiment) {
    case Experiment::kSimulate: return run_simulate(spec, out, threads);
    case Experiment::kGramian: return run_gramian(spec, out, threads);
    case Experiment::kHeatmap: return run_heatmap(spec, out, threads);
    case Experiment::kSweep: return run_sweep(spec, out, threads);
    case Experiment::kPlace: return run_place(spec, out, threads);
  }
}

}  // namespace obsgram
