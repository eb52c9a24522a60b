#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "obsgram/encoder.hpp"
#include "obsgram/optimize.hpp"
#include "obsgram/wing.hpp"

namespace obsgram {

inline constexpr const char* kVersion = "0.1.0";

enum class Experiment { kSimulate, kGramian, kHeatmap, kSweep, kPlace };
enum class Plant { kUav, kWing };

Experiment parse_experiment(const std::string& name);
std::string experiment_name(Experiment e);

/// Fully resolved experiment description. Built from a flat JSON document
/// by parse_spec; every field has a default that depends on the experiment
/// and the plant.
struct RunSpec {
  Experiment experiment = Experiment::kSweep;
  Plant plant = Plant::kUav;
  std::uint64_t master_seed = 1;

  // Perturbation plan.
  double epsilon = 0.0;
  double t1 = 0.0;
  double dt = 0.0;
  double perturb_time = 0.0;
  std::vector<int> perturbed_states;
  Eigen::VectorXd x0;
  double u = 0.0;  ///< constant UAV turn rate

  Eigen::VectorXd q;  ///< noise diagonal
  int runs = 1;
  int run_index = 0;
  std::string integrator;  ///< simulate only: "rk4" or "euler"
  double t_end = 0.0;      ///< simulate only

  std::vector<double> q_levels;
  std::vector<double> w_nu;

  double uav_speed = 10.0;
  WingParams wing;
  EncoderParams encoder;
  std::vector<Locus> loci;

  // Placement.
  int r_min = 1;
  int r_max = 20;
  double d_allowed = 0.1;
  double sigma = 1e5;
  PsoSettings pso;
  PatternSearchSettings refine;
  std::vector<Locus> candidate_nodes;

  /// Canonical JSON (sorted keys, seed override applied) and its FNV-1a
  /// 64-bit hash in hex.
  nlohmann::json canonical;
  std::string hash;
};

/// Validates `doc` against the flat schema and resolves defaults. Unknown
/// keys, wrong types and invalid values raise ConfigError before any
/// simulation runs.
RunSpec parse_spec(const nlohmann::json& doc, Experiment experiment,
                   std::optional<std::uint64_t> seed_override = std::nullopt);

std::string fnv1a_hex(const std::string& bytes);

/// "# obsgram version=... spec_hash=... master_seed=..."
std::string provenance_line(const RunSpec& spec);

void run_simulate(const RunSpec& spec, const std::filesystem::path& out, int threads);
void run_gramian(const RunSpec& spec, const std::filesystem::path& out, int threads);
void run_heatmap(const RunSpec& spec, const std::filesystem::path& out, int threads);
void run_sweep(const RunSpec& spec, const std::filesystem::path& out, int threads);
void run_place(const RunSpec& spec, const std::filesystem::path& out, int threads);
void run_experiment(const RunSpec& spec, const std::filesystem::path& out, int threads);

/// Entry point of the obsgram tool; returns the process exit code
/// (0 ok, 2 invalid spec, 3 divergence, 4 budget, 1 anything else).
int run_cli(int argc, char** argv);

}  // namespace obsgram
