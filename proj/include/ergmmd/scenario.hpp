#pragma once
// Scenario ingestion and orchestration: JSON config -> domain sampling ->
// optimization -> reports. Scenario files are versionable artifacts; the CLI
// only adds path/seed/verbosity flags on top.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ergmmd/evaluation.hpp"
#include "ergmmd/optimizer.hpp"

namespace ergmmd {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ScenarioConfig {
  enum class DomainSource { mesh, mixture2d, csv };
  enum class ImportanceKind { none, normal_align };

  // domain block
  DomainSource source = DomainSource::mixture2d;
  std::string mesh_path;
  std::string csv_path;
  int csv_dimension = 3;
  Eigen::Vector2d box_lo = Eigen::Vector2d::Zero();
  Eigen::Vector2d box_hi = Eigen::Vector2d::Ones();
  GaussianMixture2d mixture;
  int sample_count = 100;
  std::uint64_t domain_seed = 0;
  ImportanceKind importance = ImportanceKind::none;
  std::vector<Vec3> importance_directions;
  int importance_count = -1;  // -1: keep sample_count
  double buffer = 0.0;

  // kernel block
  KernelFamily family = KernelFamily::rbf_euclidean;
  double sigma = -1.0;  // -1: auto-median
  Vec6 tangent_weight_diag = Vec6::Ones();

  // system block
  DynamicsKind dynamics = DynamicsKind::single_integrator;
  int state_dim = 2;
  int control_dim = 2;
  double dt = 0.1;
  int horizon = 32;
  Eigen::VectorXd x0;
  std::optional<std::pair<Eigen::VectorXd, Eigen::VectorXd>> control_bounds;
  std::optional<std::pair<Eigen::VectorXd, Eigen::VectorXd>> state_bounds;
  std::optional<Eigen::VectorXd> terminal_state;
  ProjectionMap::Kind projection_kind = ProjectionMap::Kind::identity;
  std::vector<int> coordinates;
  SerialChain chain;
  bool has_chain = false;
  Pose chart_base;

  // objective block
  double control_weight = 1e-3;
  double smoothness_weight = 0.0;

  // solver block
  SolverOptions solver;
  std::uint64_t solver_seed = 0;
  std::optional<InitStrategy> init_strategy;  // default depends on projection

  // output block
  std::string output_directory = "out";
  bool plot = true;
  double coverage_radius = -1.0;  // -1: 2 sigma of the active kernel

  nlohmann::ordered_json echo;  // original config text for the report
  std::string base_directory;   // config file location; resolves relative paths
};

ScenarioConfig load_scenario(const std::string& path);

/// The exact sample set the optimizer consumes: source sampling, importance
/// resampling, then the normal offset.
DomainSampleSet build_domain_samples(const ScenarioConfig& cfg);

/// Assembles the problem; resolves an auto-median bandwidth against the
/// built samples.
ProblemSpec build_problem(const ScenarioConfig& cfg, const DomainSampleSet& samples);

InitStrategy default_init_strategy(const ScenarioConfig& cfg);

/// Runs the pipeline and writes trajectory.csv, report.json and optionally
/// plot.svg into the output directory. Returns 0 on convergence, 2 when a
/// result was emitted without convergence, 1 on config/IO errors.
int run_scenario(const std::string& config_path,
                 const std::string& output_override = "",
                 std::optional<std::uint64_t> seed_override = std::nullopt,
                 bool verbose = false);

/// Emits the post-importance, post-offset sample set as CSV. Exit-code
/// convention as run_scenario.
int export_samples(const std::string& config_path, const std::string& out_path,
                   std::optional<std::uint64_t> seed_override = std::nullopt);

/// Benchmark grid; writes `dim,T,M,median_seconds,iqr_seconds` rows.
int run_bench(const std::vector<int>& dims, const std::vector<int>& horizons,
              const std::vector<int>& sample_counts, int repeats,
              std::uint64_t seed, const std::string& out_path);

void write_trajectory_csv(const Trajectory& traj, const ProjectionMap& g,
                          const std::string& path);

}  // namespace ergmmd
