#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <set>
#include <string>

#include "obsgram/cli.hpp"
#include "obsgram/errors.hpp"
#include "obsgram/integrate.hpp"
#include "obsgram/uav.hpp"

namespace obsgram {
namespace {

using nlohmann::json;

// Reads typed values out of a flat JSON object and remembers which keys
// were consumed, so anything left over can be reported as unknown.
class Reader {
 public:
  explicit Reader(const json& doc) : doc_(doc) {
    if (!doc_.is_object()) throw ConfigError("spec must be a JSON object");
  }

  bool has(const std::string& key) {
    used_.insert(key);
    return doc_.contains(key);
  }

  double number(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    const json& v = doc_.at(key);
    if (!v.is_number()) throw ConfigError("'" + key + "' must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError("'" + key + "' must be finite");
    return d;
  }

  double positive(const std::string& key, double fallback) {
    const double d = number(key, fallback);
    if (!(d > 0.0)) throw ConfigError("'" + key + "' must be > 0");
    return d;
  }

  std::int64_t integer(const std::string& key, std::int64_t fallback) {
    if (!has(key)) return fallback;
    const json& v = doc_.at(key);
    if (!v.is_number_integer()) {
      throw ConfigError("'" + key + "' must be an integer");
    }
    return v.get<std::int64_t>();
  }

  std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback) {
    if (!has(key)) return fallback;
    const json& v = doc_.at(key);
    if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
      throw ConfigError("'" + key + "' must be a non-negative integer");
    }
    return v.get<std::uint64_t>();
  }

  std::string string(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const json& v = doc_.at(key);
    if (!v.is_string()) throw ConfigError("'" + key + "' must be a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(const std::string& key, std::vector<double> fallback) {
    if (!has(key)) return fallback;
    const json& v = doc_.at(key);
    if (!v.is_array()) throw ConfigError("'" + key + "' must be an array");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) throw ConfigError("'" + key + "' must hold numbers");
      out.push_back(e.get<double>());
      if (!std::isfinite(out.back())) {
        throw ConfigError("'" + key + "' must hold finite numbers");
      }
    }
    return out;
  }

  std::vector<int> integers(const std::string& key, std::vector<int> fallback) {
    if (!has(key)) return fallback;
    const json& v = doc_.at(key);
    if (!v.is_array()) throw ConfigError("'" + key + "' must be an array");
    std::vector<int> out;
    for (const auto& e : v) {
      if (!e.is_number_integer()) {
        throw ConfigError("'" + key + "' must hold integers");
      }
      out.push_back(e.get<int>());
    }
    return out;
  }

  std::vector<Locus> loci(const std::string& key) {
    if (!has(key)) return {};
    const json& v = doc_.at(key);
    if (!v.is_array()) throw ConfigError("'" + key + "' must be an array");
    std::vector<Locus> out;
    for (const auto& e : v) {
      if (!e.is_array() || e.size() != 2 || !e[0].is_number() ||
          !e[1].is_number()) {
        throw ConfigError("'" + key + "' entries must be [x, y] pairs");
      }
      out.push_back({e[0].get<double>(), e[1].get<double>()});
    }
    return out;
  }

  void reject_unknown() const {
    for (const auto& [key, value] : doc_.items()) {
      if (!used_.count(key)) throw ConfigError("unknown spec key '" + key + "'");
    }
  }

 private:
  const json& doc_;
  std::set<std::string> used_;
};

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

void read_wing(Reader& in, WingParams& w) {
  w.chord = in.positive("chord", w.chord);
  w.span = in.positive("span", w.span);
  w.thickness = in.positive("thickness", w.thickness);
  w.youngs_modulus = in.positive("youngs_modulus", w.youngs_modulus);
  w.poisson = in.number("poisson", w.poisson);
  w.density = in.positive("density", w.density);
  w.alpha = in.number("alpha", w.alpha);
  w.beta = in.number("beta", w.beta);
  w.f1 = in.positive("f1", w.f1);
  w.f2 = in.positive("f2", w.f2);
  w.flap_amplitude = in.number("flap_amplitude", w.flap_amplitude);
  w.omega_nominal = in.number("omega_nominal", w.omega_nominal);
  w.n_bending = static_cast<int>(in.integer("n_bending", w.n_bending));
  w.n_torsion = static_cast<int>(in.integer("n_torsion", w.n_torsion));
  w.grid_span_nodes = static_cast<int>(in.integer("grid_span_nodes", w.grid_span_nodes));
  w.grid_chord_nodes =
      static_cast<int>(in.integer("grid_chord_nodes", w.grid_chord_nodes));
}

void read_encoder(Reader& in, EncoderParams& e) {
  e.delay = in.number("sta_delay", e.delay);
  e.width = in.number("sta_width", e.width);
  e.omega_sta = in.number("omega_sta", e.omega_sta);
  e.slope = in.number("nla_slope", e.slope);
  e.half_max = in.number("nla_half_max", e.half_max);
  e.window = in.number("encoder_window", e.window);
  if (in.has("c_xi")) e.c_xi = in.number("c_xi", 1.0);
  e.validate();
}

void check_states(const std::vector<int>& states, int n) {
  if (states.empty()) throw ConfigError("'perturbed_states' must not be empty");
  std::set<int> seen;
  for (int s : states) {
    if (s < 0 || s >= n) throw ConfigError("'perturbed_states' entry out of range");
    if (!seen.insert(s).second) {
      throw ConfigError("'perturbed_states' entries must be distinct");
    }
  }
}

}  // namespace

Experiment parse_experiment(const std::string& name) {
  if (name == "simulate") return Experiment::kSimulate;
  if (name == "gramian") return Experiment::kGramian;
  if (name == "metrics-heatmap") return Experiment::kHeatmap;
  if (name == "sweep") return Experiment::kSweep;
  if (name == "place") return Experiment::kPlace;
  throw ConfigError("unknown experiment '" + name + "'");
}

std::string experiment_name(Experiment e) {
  switch (e) {
    case Experiment::kSimulate: return "simulate";
    case Experiment::kGramian: return "gramian";
    case Experiment::kHeatmap: return "metrics-heatmap";
    case Experiment::kSweep: return "sweep";
    case Experiment::kPlace: return "place";
  }
  return "?";
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

std::string provenance_line(const RunSpec& spec) {
  return std::string("# obsgram version=") + kVersion + " spec_hash=" + spec.hash +
         " master_seed=" + std::to_string(spec.master_seed);
}

RunSpec parse_spec(const json& doc, Experiment experiment,
                   std::optional<std::uint64_t> seed_override) {
  Reader in(doc);
  RunSpec s;
  s.experiment = experiment;
  const std::string declared = in.string("experiment", experiment_name(experiment));
  if (parse_experiment(declared) != experiment) {
    throw ConfigError("spec declares experiment '" + declared + "' but '" +
                      experiment_name(experiment) + "' was requested");
  }
  const bool wing_default =
      experiment == Experiment::kHeatmap || experiment == Experiment::kPlace;
  const std::string plant = in.string("plant", wing_default ? "wing" : "uav");
  if (plant == "uav") {
    s.plant = Plant::kUav;
  } else if (plant == "wing") {
    s.plant = Plant::kWing;
  } else {
    throw ConfigError("'plant' must be \"uav\" or \"wing\"");
  }
  if (wing_default && s.plant != Plant::kWing) {
    throw ConfigError(experiment_name(experiment) + " needs the wing plant");
  }
  s.master_seed = in.unsigned_integer("master_seed", 1);
  if (seed_override) s.master_seed = *seed_override;

  const bool uav = s.plant == Plant::kUav;
  s.uav_speed = in.positive("uav_speed", 10.0);
  read_wing(in, s.wing);
  read_encoder(in, s.encoder);
  s.wing.validate();

  s.epsilon = in.positive("epsilon", uav ? 1e-3 : 0.01);
  s.t1 = in.positive("t1", uav ? 150.0 : 0.04);
  s.dt = in.positive("dt", uav ? 0.01 : 5e-4);
  s.perturb_time = in.number("perturb_time", uav ? 0.0 : 0.16);
  if (s.perturb_time < 0.0) throw ConfigError("'perturb_time' must be >= 0");
  step_count(s.t1, s.dt);
  if (s.perturb_time > 0.0) step_count(s.perturb_time, s.dt);
  const int n_states = uav ? 5 : 2 + 2 * (s.wing.n_bending + s.wing.n_torsion);
  s.perturbed_states =
      in.integers("perturbed_states", uav ? std::vector<int>{2, 3, 4} : std::vector<int>{0, 1});
  check_states(s.perturbed_states, n_states);
  s.x0 = uav ? uav_default_initial_state() : Eigen::VectorXd::Zero(n_states);
  if (in.has("x0")) {
    s.x0 = to_vector(in.numbers("x0", {}));
    if (s.x0.size() != n_states) {
      throw ConfigError("'x0' must have " + std::to_string(n_states) + " entries");
    }
  }
  s.u = in.number("u", 0.0);

  const std::vector<double> q_default =
      uav ? std::vector<double>{0.0, 0.0}
          : std::vector<double>{s.wing.q_diagonal[0], s.wing.q_diagonal[1]};
  s.q = to_vector(in.numbers("q", q_default));
  if (s.q.size() != 2 || (s.q.array() < 0.0).any()) {
    throw ConfigError("'q' must hold two entries >= 0");
  }
  if (!uav) s.wing.q_diagonal = s.q;

  int runs_default = 1;
  if (experiment == Experiment::kSweep) runs_default = 100;
  if (experiment == Experiment::kHeatmap || experiment == Experiment::kPlace) {
    runs_default = 40;
  }
  s.runs = static_cast<int>(in.integer("runs", runs_default));
  if (s.runs < 1) throw ConfigError("'runs' must be >= 1");
  s.run_index = static_cast<int>(in.integer("run_index", 0));
  if (s.run_index < 0) throw ConfigError("'run_index' must be >= 0");

  s.t_end = in.positive("t_end", s.perturb_time + s.t1);
  step_count(s.t_end, s.dt);
  const bool noisy = (s.q.array() > 0.0).any();
  s.integrator = in.string("integrator", noisy ? "euler" : "rk4");
  if (s.integrator != "rk4" && s.integrator != "euler") {
    throw ConfigError("'integrator' must be \"rk4\" or \"euler\"");
  }
  if (noisy && s.integrator == "rk4") {
    throw ConfigError("noisy simulation needs the euler integrator");
  }

  s.q_levels = in.numbers("q_levels", {0.05, 0.1, 0.2, 0.5, 1.0});
  if (s.q_levels.empty()) throw ConfigError("'q_levels' must not be empty");
  for (double q : s.q_levels) {
    if (!(q >= 0.0)) throw ConfigError("'q_levels' entries must be >= 0");
  }
  std::vector<double> w_default = {0.0};
  if (experiment == Experiment::kSweep) w_default = {0.0, 5e8};
  if (experiment == Experiment::kPlace) w_default = {0.0, 0.1};
  s.w_nu = in.numbers("w_nu", w_default);
  if (s.w_nu.empty()) throw ConfigError("'w_nu' must not be empty");
  for (double w : s.w_nu) {
    if (!(w >= 0.0)) throw ConfigError("'w_nu' entries must be >= 0");
  }

  s.loci = in.loci("loci");
  if (!uav && (experiment == Experiment::kGramian || experiment == Experiment::kSweep) &&
      s.loci.empty()) {
    throw ConfigError("wing " + experiment_name(experiment) + " needs 'loci'");
  }

  s.r_min = static_cast<int>(in.integer("r_min", 1));
  s.r_max = static_cast<int>(in.integer("r_max", 20));
  if (s.r_min < 1 || s.r_max < s.r_min) {
    throw ConfigError("need 1 <= r_min <= r_max");
  }
  s.d_allowed = in.number("d_allowed", 0.1);
  if (s.d_allowed < 0.0) throw ConfigError("'d_allowed' must be >= 0");
  s.sigma = in.positive("sigma", 1e30);
  s.pso.swarm = static_cast<int>(in.integer("swarm", s.pso.swarm));
  s.pso.iterations = static_cast<int>(in.integer("iterations", s.pso.iterations));
  s.pso.inertia = in.number("inertia", s.pso.inertia);
  s.pso.cognitive = in.number("cognitive", s.pso.cognitive);
  s.pso.social = in.number("social", s.pso.social);
  s.pso.velocity_clamp = in.positive("velocity_clamp", s.pso.velocity_clamp);
  if (s.pso.swarm < 2 || s.pso.iterations < 1) {
    throw ConfigError("PSO needs swarm >= 2 and iterations >= 1");
  }
  s.refine.initial_step = in.positive("refine_initial_step", s.refine.initial_step);
  s.refine.min_step = in.positive("refine_min_step", s.refine.min_step);
  s.refine.max_evaluations =
      static_cast<int>(in.integer("refine_max_evaluations", s.refine.max_evaluations));
  if (s.refine.max_evaluations < 0) {
    throw ConfigError("'refine_max_evaluations' must be >= 0");
  }
  s.candidate_nodes = in.loci("candidate_nodes");

  in.reject_unknown();

  s.canonical = doc;
  s.canonical["experiment"] = experiment_name(experiment);
  s.canonical["master_seed"] = s.master_seed;
  s.hash = fnv1a_hex(s.canonical.dump());
  return s;
}

}  // namespace obsgram
