#include "ergmmd/scenario.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace ergmmd {

namespace {

using json = nlohmann::ordered_json;

std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

[[noreturn]] void fail(const std::string& key, const std::string& what) {
  throw ConfigError("config error: " + key + ": " + what);
}

const json* find(const json& j, const std::string& key) {
  auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

const json& require_obj(const json& j, const std::string& key, const std::string& path) {
  const json* v = find(j, key);
  if (!v) fail(path, "missing block");
  if (!v->is_object()) fail(path, "expected an object");
  return *v;
}

double require_number(const json& j, const std::string& key, const std::string& path) {
  const json* v = find(j, key);
  if (!v) fail(path, "missing value");
  if (!v->is_number()) fail(path, "expected a number");
  return v->get<double>();
}

double number_or(const json& j, const std::string& key, const std::string& path,
                 double fallback) {
  const json* v = find(j, key);
  if (!v) return fallback;
  if (!v->is_number()) fail(path, "expected a number");
  return v->get<double>();
}

int int_or(const json& j, const std::string& key, const std::string& path, int fallback) {
  const json* v = find(j, key);
  if (!v) return fallback;
  if (!v->is_number_integer()) fail(path, "expected an integer");
  return v->get<int>();
}

std::string string_or(const json& j, const std::string& key, const std::string& path,
                      const std::string& fallback) {
  const json* v = find(j, key);
  if (!v) return fallback;
  if (!v->is_string()) fail(path, "expected a string");
  return v->get<std::string>();
}

bool bool_or(const json& j, const std::string& key, const std::string& path, bool fallback) {
  const json* v = find(j, key);
  if (!v) return fallback;
  if (!v->is_boolean()) fail(path, "expected a boolean");
  return v->get<bool>();
}

Eigen::VectorXd require_vector(const json& j, const std::string& key,
                               const std::string& path, int expected = -1) {
  const json* v = find(j, key);
  if (!v) fail(path, "missing array");
  if (!v->is_array()) fail(path, "expected an array of numbers");
  Eigen::VectorXd out(v->size());
  for (std::size_t i = 0; i < v->size(); ++i) {
    if (!(*v)[i].is_number()) fail(path, "expected an array of numbers");
    out(i) = (*v)[i].get<double>();
  }
  if (expected >= 0 && out.size() != expected)
    fail(path, "expected " + std::to_string(expected) + " entries, got " +
                   std::to_string(out.size()));
  return out;
}

Pose parse_pose(const json& j, const std::string& path) {
  Pose p;
  if (const json* t = find(j, "translation")) {
    (void)t;
    p.translation = require_vector(j, "translation", path + ".translation", 3);
  }
  if (const json* r = find(j, "rpy")) {
    (void)r;
    Eigen::VectorXd rpy = require_vector(j, "rpy", path + ".rpy", 3);
    p.rotation = axis_angle_rotation(Vec3::UnitZ(), rpy(2)) *
                 axis_angle_rotation(Vec3::UnitY(), rpy(1)) *
                 axis_angle_rotation(Vec3::UnitX(), rpy(0));
  }
  return p;
}

std::string resolve_path(const ScenarioConfig& cfg, const std::string& rel) {
  std::filesystem::path p(rel);
  if (p.is_absolute() || cfg.base_directory.empty()) return rel;
  return (std::filesystem::path(cfg.base_directory) / p).string();
}

void parse_domain(const json& root, ScenarioConfig& cfg) {
  const json& d = require_obj(root, "domain", "domain");
  std::string source = string_or(d, "source", "domain.source", "");
  if (source == "mesh")
    cfg.source = ScenarioConfig::DomainSource::mesh;
  else if (source == "mixture2d")
    cfg.source = ScenarioConfig::DomainSource::mixture2d;
  else if (source == "csv")
    cfg.source = ScenarioConfig::DomainSource::csv;
  else
    fail("domain.source", "expected one of mesh|mixture2d|csv, got '" + source + "'");

  if (cfg.source == ScenarioConfig::DomainSource::mesh) {
    cfg.mesh_path = string_or(d, "mesh", "domain.mesh", "");
    if (cfg.mesh_path.empty()) fail("domain.mesh", "missing mesh path");
  }
  if (cfg.source == ScenarioConfig::DomainSource::csv) {
    cfg.csv_path = string_or(d, "csv", "domain.csv", "");
    if (cfg.csv_path.empty()) fail("domain.csv", "missing csv path");
    cfg.csv_dimension = int_or(d, "dimension", "domain.dimension", 3);
    if (cfg.csv_dimension < 1 || cfg.csv_dimension > 3)
      fail("domain.dimension", "expected 1, 2 or 3");
  }
  if (cfg.source == ScenarioConfig::DomainSource::mixture2d) {
    const json& b = require_obj(d, "bounds", "domain.bounds");
    cfg.box_lo = require_vector(b, "lo", "domain.bounds.lo", 2);
    cfg.box_hi = require_vector(b, "hi", "domain.bounds.hi", 2);
    if (const json* comps = find(d, "components")) {
      if (!comps->is_array()) fail("domain.components", "expected an array");
      for (std::size_t i = 0; i < comps->size(); ++i) {
        const json& c = (*comps)[i];
        std::string cpath = "domain.components[" + std::to_string(i) + "]";
        GaussianMixture2d::Component comp;
        comp.weight = number_or(c, "weight", cpath + ".weight", 1.0);
        comp.mean = require_vector(c, "mean", cpath + ".mean", 2);
        if (const json* cov = find(c, "cov")) {
          if (!cov->is_array() || cov->size() != 2) fail(cpath + ".cov", "expected a 2x2 matrix");
          for (int r = 0; r < 2; ++r) {
            const json& row = (*cov)[r];
            if (!row.is_array() || row.size() != 2)
              fail(cpath + ".cov", "expected a 2x2 matrix");
            for (int cidx = 0; cidx < 2; ++cidx) comp.cov(r, cidx) = row[cidx].get<double>();
          }
        }
        cfg.mixture.components.push_back(comp);
      }
    }
  }

  cfg.sample_count = int_or(d, "count", "domain.count", 100);
  if (cfg.sample_count < 1) fail("domain.count", "must be >= 1");
  cfg.domain_seed = static_cast<std::uint64_t>(int_or(d, "seed", "domain.seed", 0));
  cfg.buffer = number_or(d, "buffer", "domain.buffer", 0.0);

  if (const json* imp = find(d, "importance")) {
    if (!imp->is_object()) fail("domain.importance", "expected an object");
    std::string kind = string_or(*imp, "kind", "domain.importance.kind", "none");
    if (kind == "none") {
      cfg.importance = ScenarioConfig::ImportanceKind::none;
    } else if (kind == "normal_align") {
      cfg.importance = ScenarioConfig::ImportanceKind::normal_align;
      const json* dirs = find(*imp, "directions");
      if (!dirs || !dirs->is_array() || dirs->empty())
        fail("domain.importance.directions", "expected a nonempty array of 3-vectors");
      for (std::size_t i = 0; i < dirs->size(); ++i) {
        const json& arr = (*dirs)[i];
        if (!arr.is_array() || arr.size() != 3)
          fail("domain.importance.directions", "expected 3-vectors");
        cfg.importance_directions.emplace_back(arr[0].get<double>(), arr[1].get<double>(),
                                               arr[2].get<double>());
      }
      cfg.importance_count = int_or(*imp, "count", "domain.importance.count", -1);
    } else {
      fail("domain.importance.kind", "expected none|normal_align, got '" + kind + "'");
    }
  }
}

void parse_kernel(const json& root, ScenarioConfig& cfg) {
  const json& k = require_obj(root, "kernel", "kernel");
  std::string family = string_or(k, "family", "kernel.family", "rbf_euclidean");
  if (family == "rbf_euclidean")
    cfg.family = KernelFamily::rbf_euclidean;
  else if (family == "se3_logmap")
    cfg.family = KernelFamily::se3_logmap;
  else
    fail("kernel.family", "expected rbf_euclidean|se3_logmap, got '" + family + "'");

  const json* s = find(k, "sigma");
  if (!s) fail("kernel.sigma", "missing value (number or \"auto-median\")");
  if (s->is_string()) {
    if (s->get<std::string>() != "auto-median")
      fail("kernel.sigma", "expected a number or \"auto-median\"");
    cfg.sigma = -1.0;
  } else if (s->is_number()) {
    cfg.sigma = s->get<double>();
    if (!(cfg.sigma > 0.0)) fail("kernel.sigma", "must be positive");
  } else {
    fail("kernel.sigma", "expected a number or \"auto-median\"");
  }

  if (find(k, "tangent_weight_diag"))
    cfg.tangent_weight_diag =
        require_vector(k, "tangent_weight_diag", "kernel.tangent_weight_diag", 6);
}

void parse_chain(const json& sys, ScenarioConfig& cfg) {
  const json& c = require_obj(sys, "chain", "system.chain");
  const json* joints = find(c, "joints");
  if (!joints || !joints->is_array() || joints->empty())
    fail("system.chain.joints", "expected a nonempty array");
  for (std::size_t i = 0; i < joints->size(); ++i) {
    const json& jj = (*joints)[i];
    std::string jpath = "system.chain.joints[" + std::to_string(i) + "]";
    Joint joint;
    Eigen::VectorXd axis = require_vector(jj, "axis", jpath + ".axis", 3);
    joint.axis = Vec3(axis(0), axis(1), axis(2)).normalized();
    if (const json* off = find(jj, "offset")) joint.offset = parse_pose(*off, jpath + ".offset");
    if (find(jj, "limits")) {
      Eigen::VectorXd lim = require_vector(jj, "limits", jpath + ".limits", 2);
      joint.lower = lim(0);
      joint.upper = lim(1);
    }
    joint.velocity_limit = number_or(jj, "velocity_limit", jpath + ".velocity_limit", 2.0);
    cfg.chain.joints.push_back(joint);
  }
  if (const json* tip = find(c, "tip")) cfg.chain.tip = parse_pose(*tip, "system.chain.tip");
  cfg.has_chain = true;
}

void parse_system(const json& root, ScenarioConfig& cfg) {
  const json& s = require_obj(root, "system", "system");
  std::string dyn = string_or(s, "dynamics", "system.dynamics", "single_integrator");
  if (dyn == "single_integrator")
    cfg.dynamics = DynamicsKind::single_integrator;
  else if (dyn == "double_integrator")
    cfg.dynamics = DynamicsKind::double_integrator;
  else if (dyn == "joint_velocity_chain")
    cfg.dynamics = DynamicsKind::joint_velocity_chain;
  else if (dyn == "se3_twist_integrator")
    cfg.dynamics = DynamicsKind::se3_twist_integrator;
  else
    fail("system.dynamics", "unknown dynamics kind '" + dyn + "'");

  if (find(s, "chain")) parse_chain(s, cfg);

  if (cfg.dynamics == DynamicsKind::joint_velocity_chain) {
    if (!cfg.has_chain) fail("system.chain", "joint_velocity_chain needs a chain block");
    cfg.state_dim = cfg.control_dim = cfg.chain.joint_count();
  } else if (cfg.dynamics == DynamicsKind::se3_twist_integrator) {
    cfg.state_dim = cfg.control_dim = 6;
  } else {
    cfg.state_dim = int_or(s, "state_dim", "system.state_dim", 2);
    cfg.control_dim = int_or(s, "control_dim", "system.control_dim",
                             cfg.dynamics == DynamicsKind::double_integrator
                                 ? cfg.state_dim / 2
                                 : cfg.state_dim);
  }

  cfg.dt = require_number(s, "dt", "system.dt");
  cfg.horizon = int_or(s, "horizon", "system.horizon", 32);
  if (cfg.horizon < 1) fail("system.horizon", "must be >= 1");
  cfg.x0 = require_vector(s, "x0", "system.x0", cfg.state_dim);

  auto parse_bounds = [&](const char* key) -> std::optional<std::pair<Eigen::VectorXd, Eigen::VectorXd>> {
    const json* b = find(s, key);
    if (!b) return std::nullopt;
    std::string path = std::string("system.") + key;
    if (!b->is_object()) fail(path, "expected an object with lo/hi arrays");
    Eigen::VectorXd lo = require_vector(*b, "lo", path + ".lo");
    Eigen::VectorXd hi = require_vector(*b, "hi", path + ".hi");
    if (lo.size() != hi.size()) fail(path, "lo/hi size mismatch");
    return std::make_pair(lo, hi);
  };
  cfg.control_bounds = parse_bounds("control_bounds");
  cfg.state_bounds = parse_bounds("state_bounds");
  if (find(s, "terminal_state"))
    cfg.terminal_state = require_vector(s, "terminal_state", "system.terminal_state",
                                        cfg.state_dim);

  // Chain limits become box constraints unless the config overrides them.
  if (cfg.dynamics == DynamicsKind::joint_velocity_chain) {
    if (!cfg.state_bounds)
      cfg.state_bounds = std::make_pair(cfg.chain.lower_limits(), cfg.chain.upper_limits());
    if (!cfg.control_bounds)
      cfg.control_bounds =
          std::make_pair(Eigen::VectorXd(-cfg.chain.velocity_limits()),
                         Eigen::VectorXd(cfg.chain.velocity_limits()));
  }

  std::string proj = "identity";
  const json* p = find(s, "projection");
  if (p) {
    if (!p->is_object()) fail("system.projection", "expected an object");
    proj = string_or(*p, "kind", "system.projection.kind", "identity");
  }
  if (proj == "identity") {
    cfg.projection_kind = ProjectionMap::Kind::identity;
  } else if (proj == "select_coordinates") {
    cfg.projection_kind = ProjectionMap::Kind::select_coordinates;
    Eigen::VectorXd idx = require_vector(*p, "coordinates", "system.projection.coordinates");
    for (int i = 0; i < idx.size(); ++i) cfg.coordinates.push_back(static_cast<int>(idx(i)));
  } else if (proj == "serial_chain_fk") {
    cfg.projection_kind = ProjectionMap::Kind::serial_chain_fk;
    if (!cfg.has_chain) fail("system.chain", "serial_chain_fk projection needs a chain block");
  } else if (proj == "se3_exp_chart") {
    cfg.projection_kind = ProjectionMap::Kind::se3_exp_chart;
    if (const json* base = find(*p, "chart_base"))
      cfg.chart_base = parse_pose(*base, "system.projection.chart_base");
  } else {
    fail("system.projection.kind", "unknown projection kind '" + proj + "'");
  }
}

void parse_objective(const json& root, ScenarioConfig& cfg) {
  const json* o = find(root, "objective");
  if (!o) return;
  if (!o->is_object()) fail("objective", "expected an object");
  cfg.control_weight = number_or(*o, "control_weight", "objective.control_weight", 1e-3);
  cfg.smoothness_weight =
      number_or(*o, "smoothness_weight", "objective.smoothness_weight", 0.0);
}

void parse_solver(const json& root, ScenarioConfig& cfg) {
  const json* s = find(root, "solver");
  if (!s) return;
  if (!s->is_object()) fail("solver", "expected an object");
  SolverOptions& o = cfg.solver;
  o.max_outer_iters = int_or(*s, "max_outer_iters", "solver.max_outer_iters", o.max_outer_iters);
  o.max_inner_iters = int_or(*s, "max_inner_iters", "solver.max_inner_iters", o.max_inner_iters);
  o.grad_tol = number_or(*s, "grad_tol", "solver.grad_tol", o.grad_tol);
  o.constraint_tol = number_or(*s, "constraint_tol", "solver.constraint_tol", o.constraint_tol);
  o.penalty_init = number_or(*s, "penalty_init", "solver.penalty_init", o.penalty_init);
  o.penalty_growth = number_or(*s, "penalty_growth", "solver.penalty_growth", o.penalty_growth);
  o.penalty_max = number_or(*s, "penalty_max", "solver.penalty_max", o.penalty_max);
  o.armijo_c1 = number_or(*s, "armijo_c1", "solver.armijo_c1", o.armijo_c1);
  o.backtrack_factor =
      number_or(*s, "backtrack_factor", "solver.backtrack_factor", o.backtrack_factor);
  cfg.solver_seed = static_cast<std::uint64_t>(int_or(*s, "seed", "solver.seed", 0));
  o.seed = cfg.solver_seed;

  std::string init = string_or(*s, "init", "solver.init", "auto");
  if (init == "hold")
    cfg.init_strategy = InitStrategy::hold;
  else if (init == "line_to_centroid")
    cfg.init_strategy = InitStrategy::line_to_centroid;
  else if (init == "perturbed")
    cfg.init_strategy = InitStrategy::perturbed;
  else if (init != "auto")
    fail("solver.init", "expected auto|hold|line_to_centroid|perturbed");
}

void parse_output(const json& root, ScenarioConfig& cfg) {
  const json* o = find(root, "output");
  if (!o) return;
  if (!o->is_object()) fail("output", "expected an object");
  cfg.output_directory = string_or(*o, "directory", "output.directory", cfg.output_directory);
  cfg.plot = bool_or(*o, "plot", "output.plot", cfg.plot);
  const json* r = find(*o, "coverage_radius");
  if (r) {
    if (r->is_string()) {
      if (r->get<std::string>() != "auto")
        fail("output.coverage_radius", "expected a number or \"auto\"");
    } else if (r->is_number()) {
      cfg.coverage_radius = r->get<double>();
      if (!(cfg.coverage_radius > 0.0)) fail("output.coverage_radius", "must be positive");
    } else {
      fail("output.coverage_radius", "expected a number or \"auto\"");
    }
  }
}

}  // namespace

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config error: cannot open config file: " + path);
  json root;
  try {
    root = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config error: " + path + ": " + e.what());
  }

  ScenarioConfig cfg;
  cfg.echo = root;
  cfg.base_directory = std::filesystem::path(path).parent_path().string();
  parse_domain(root, cfg);
  parse_kernel(root, cfg);
  parse_system(root, cfg);
  parse_objective(root, cfg);
  parse_solver(root, cfg);
  parse_output(root, cfg);
  return cfg;
}

DomainSampleSet build_domain_samples(const ScenarioConfig& cfg) {
  DomainSampleSet samples;
  switch (cfg.source) {
    case ScenarioConfig::DomainSource::mesh: {
      std::string path = resolve_path(cfg, cfg.mesh_path);
      if (!std::filesystem::exists(path))
        throw ConfigError("config error: domain.mesh: file does not exist: " + path);
      TriangleMesh mesh = load_mesh(path);
      samples = sample_surface_uniform(mesh, cfg.sample_count, cfg.domain_seed);
      break;
    }
    case ScenarioConfig::DomainSource::mixture2d:
      samples = sample_density_2d(cfg.mixture, cfg.box_lo, cfg.box_hi, cfg.sample_count,
                                  cfg.domain_seed);
      break;
    case ScenarioConfig::DomainSource::csv: {
      std::string path = resolve_path(cfg, cfg.csv_path);
      if (!std::filesystem::exists(path))
        throw ConfigError("config error: domain.csv: file does not exist: " + path);
      samples = load_samples_csv(path);
      if (cfg.csv_dimension < 3) {
        samples.points.conservativeResize(cfg.csv_dimension, Eigen::NoChange);
        samples.normals.reset();
      }
      break;
    }
  }

  if (cfg.importance == ScenarioConfig::ImportanceKind::normal_align) {
    if (!samples.normals)
      throw ConfigError("config error: domain.importance: normal_align needs normals");
    Eigen::VectorXd scores(samples.count());
    for (int j = 0; j < samples.count(); ++j) {
      double best = 0.0;
      for (const Vec3& dir : cfg.importance_directions)
        best = std::max(best, samples.normals->col(j).dot(dir.normalized()));
      scores(j) = best;
    }
    int count = cfg.importance_count > 0 ? cfg.importance_count : cfg.sample_count;
    try {
      samples = importance_filter(samples, scores, count, cfg.domain_seed + 1);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("config error: domain.importance: ") + e.what());
    }
  }

  if (cfg.buffer != 0.0) {
    if (!samples.normals)
      throw ConfigError("config error: domain.buffer: offset needs normals");
    samples = offset_along_normals(samples, cfg.buffer);
  }
  return samples;
}

ProblemSpec build_problem(const ScenarioConfig& cfg, const DomainSampleSet& samples) {
  ProblemSpec problem;
  problem.dynamics.kind = cfg.dynamics;
  problem.dynamics.state_dim = cfg.state_dim;
  problem.dynamics.control_dim = cfg.control_dim;
  problem.dynamics.dt = cfg.dt;
  problem.horizon = cfg.horizon;
  problem.initial_state = cfg.x0;
  problem.control_weight = cfg.control_weight;
  problem.smoothness_weight = cfg.smoothness_weight;
  problem.control_bounds = cfg.control_bounds;
  problem.state_bounds = cfg.state_bounds;
  problem.terminal_state = cfg.terminal_state;
  problem.samples = samples;

  problem.projection.kind = cfg.projection_kind;
  problem.projection.coordinates = cfg.coordinates;
  problem.projection.chain = cfg.chain;
  problem.projection.chart_base = cfg.chart_base;

  problem.kernel.family = cfg.family;
  problem.kernel.tangent_weight = TangentWeight::diagonal(cfg.tangent_weight_diag);
  if (cfg.sigma > 0.0) {
    problem.kernel.sigma = cfg.sigma;
  } else {
    try {
      problem.kernel.sigma = bandwidth_median_heuristic(samples);
    } catch (const std::exception& e) {
      throw ConfigError(std::string("config error: kernel.sigma: auto-median failed: ") +
                        e.what());
    }
  }
  return problem;
}

InitStrategy default_init_strategy(const ScenarioConfig& cfg) {
  if (cfg.init_strategy) return *cfg.init_strategy;
  return (cfg.projection_kind == ProjectionMap::Kind::identity ||
          cfg.projection_kind == ProjectionMap::Kind::select_coordinates)
             ? InitStrategy::line_to_centroid
             : InitStrategy::perturbed;
}

void write_trajectory_csv(const Trajectory& traj, const ProjectionMap& g,
                          const std::string& path) {
  std::string text = "t";
  for (int i = 0; i < traj.state_dim(); ++i) text += ", x_" + std::to_string(i);
  for (int i = 0; i < traj.control_dim(); ++i) text += ", u_" + std::to_string(i);
  text += ", gx, gy, gz\n";
  for (int t = 0; t < traj.horizon(); ++t) {
    text += std::to_string(t);
    for (int i = 0; i < traj.state_dim(); ++i)
      text += ", " + format_double(traj.states(i, t));
    for (int i = 0; i < traj.control_dim(); ++i)
      text += ", " + format_double(traj.controls(i, t));
    Vec3 p = g.project_position(traj.states.col(t));
    for (int i = 0; i < 3; ++i) text += ", " + format_double(p(i));
    text += '\n';
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << text;
}

namespace {

void write_plot_svg(const Trajectory& traj, const ProjectionMap& g,
                    const DomainSampleSet& samples, const std::string& path) {
  const int width = 640, height = 640;
  const double margin = 24.0;

  auto sample_xy = [&](int j) {
    double x = samples.points(0, j);
    double y = samples.dimension() >= 2 ? samples.points(1, j) : 0.0;
    return std::pair<double, double>(x, y);
  };
  std::vector<std::pair<double, double>> traj_xy;
  for (int t = 0; t < traj.horizon(); ++t) {
    Vec3 p = g.project_position(traj.states.col(t));
    traj_xy.emplace_back(p.x(), p.y());
  }

  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  auto grow = [&](double x, double y) {
    xmin = std::min(xmin, x);
    xmax = std::max(xmax, x);
    ymin = std::min(ymin, y);
    ymax = std::max(ymax, y);
  };
  for (int j = 0; j < samples.count(); ++j) {
    auto [x, y] = sample_xy(j);
    grow(x, y);
  }
  for (auto& [x, y] : traj_xy) grow(x, y);
  double span = std::max({xmax - xmin, ymax - ymin, 1e-9});
  auto to_px = [&](double x, double y) {
    double px = margin + (x - xmin) / span * (width - 2 * margin);
    double py = height - margin - (y - ymin) / span * (height - 2 * margin);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3f,%.3f", px, py);
    return std::string(buf);
  };

  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
                    std::to_string(width) + "\" height=\"" + std::to_string(height) +
                    "\" viewBox=\"0 0 " + std::to_string(width) + " " +
                    std::to_string(height) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (int j = 0; j < samples.count(); ++j) {
    auto [x, y] = sample_xy(j);
    std::string xy = to_px(x, y);
    auto comma = xy.find(',');
    svg += "<circle cx=\"" + xy.substr(0, comma) + "\" cy=\"" + xy.substr(comma + 1) +
           "\" r=\"2.5\" fill=\"#9aa0a6\" fill-opacity=\"0.7\"/>\n";
  }
  svg += "<polyline fill=\"none\" stroke=\"#c0392b\" stroke-width=\"1.5\" points=\"";
  for (std::size_t i = 0; i < traj_xy.size(); ++i) {
    if (i) svg += ' ';
    svg += to_px(traj_xy[i].first, traj_xy[i].second);
  }
  svg += "\"/>\n";
  if (!traj_xy.empty()) {
    std::string xy = to_px(traj_xy.front().first, traj_xy.front().second);
    auto comma = xy.find(',');
    svg += "<circle cx=\"" + xy.substr(0, comma) + "\" cy=\"" + xy.substr(comma + 1) +
           "\" r=\"4\" fill=\"#2c3e50\"/>\n";
  }
  svg += "</svg>\n";

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << svg;
}

std::optional<std::uint64_t> env_seed_override() {
  const char* env = std::getenv("ERGMMD_SEED");
  if (!env || !*env) return std::nullopt;
  char* end = nullptr;
  unsigned long long v = std::strtoull(env, &end, 10);
  if (end == env || *end != '\0')
    throw ConfigError("config error: ERGMMD_SEED: expected an unsigned integer");
  return static_cast<std::uint64_t>(v);
}

}  // namespace

int run_scenario(const std::string& config_path, const std::string& output_override,
                 std::optional<std::uint64_t> seed_override, bool verbose) {
  try {
    ScenarioConfig cfg = load_scenario(config_path);
    if (auto env = env_seed_override()) seed_override = env;
    if (seed_override) {
      cfg.domain_seed = *seed_override;
      cfg.solver_seed = *seed_override;
      cfg.solver.seed = *seed_override;
    }
    if (!output_override.empty()) cfg.output_directory = output_override;

    DomainSampleSet samples = build_domain_samples(cfg);
    ProblemSpec problem = build_problem(cfg, samples);
    problem.validate();

    Trajectory init =
        initialize_trajectory(problem, default_init_strategy(cfg), cfg.solver_seed);
    double emmd_initial = emmd(init, samples, problem.kernel, problem.projection);

    if (verbose)
      std::cerr << "ergmmd: M=" << samples.count() << " T=" << cfg.horizon
                << " sigma=" << problem.kernel.sigma << "\n";

    auto t0 = std::chrono::steady_clock::now();
    OptResult result = solve(problem, init, cfg.solver);
    auto t1 = std::chrono::steady_clock::now();

    CoverageReport report;
    report.emmd_initial = emmd_initial;
    report.emmd_final = result.emmd_value;
    report.mmd_squared = result.emmd_value + sample_constant_term(samples, problem.kernel);
    report.wall_time = std::chrono::duration<double>(t1 - t0).count();
    double radius = cfg.coverage_radius > 0.0 ? cfg.coverage_radius
                                              : 2.0 * problem.kernel.sigma;
    report.coverage_percent =
        coverage_percent(result.trajectory, samples, radius, problem.projection);
    report.trajectory_length = trajectory_length(result.trajectory, problem.projection);

    std::filesystem::create_directories(cfg.output_directory);
    std::filesystem::path outdir(cfg.output_directory);
    write_trajectory_csv(result.trajectory, problem.projection,
                         (outdir / "trajectory.csv").string());
    if (cfg.plot)
      write_plot_svg(result.trajectory, problem.projection, samples,
                     (outdir / "plot.svg").string());

    json report_json;
    report_json["coverage_percent"] = report.coverage_percent;
    report_json["coverage_radius"] = radius;
    report_json["emmd_initial"] = report.emmd_initial;
    report_json["emmd_final"] = report.emmd_final;
    report_json["mmd_squared"] = report.mmd_squared;
    report_json["trajectory_length"] = report.trajectory_length;
    report_json["wall_time"] = report.wall_time;
    report_json["converged"] = result.converged;
    report_json["constraint_violation"] = result.constraint_violation;
    report_json["outer_iterations"] = result.outer_iterations;
    report_json["kernel_sigma"] = problem.kernel.sigma;
    report_json["sample_count"] = samples.count();
    report_json["seed"] = {{"domain", cfg.domain_seed}, {"solver", cfg.solver_seed}};
    json hist = json::array();
    for (const auto& h : result.history)
      hist.push_back({{"objective", h.objective},
                      {"violation", h.violation},
                      {"penalty", h.penalty},
                      {"grad_norm", h.grad_norm}});
    report_json["history"] = hist;
    report_json["config"] = cfg.echo;

    std::ofstream rep((outdir / "report.json").string(), std::ios::binary);
    if (!rep) throw std::runtime_error("cannot open for writing: report.json");
    rep << report_json.dump(2) << "\n";
    rep.close();

    if (verbose)
      std::cerr << "ergmmd: emmd " << report.emmd_initial << " -> " << report.emmd_final
                << ", coverage " << report.coverage_percent << "% (radius " << radius
                << ")\n";
    return result.converged ? 0 : 2;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
}

int export_samples(const std::string& config_path, const std::string& out_path,
                   std::optional<std::uint64_t> seed_override) {
  try {
    ScenarioConfig cfg = load_scenario(config_path);
    if (auto env = env_seed_override()) seed_override = env;
    if (seed_override) cfg.domain_seed = *seed_override;
    DomainSampleSet samples = build_domain_samples(cfg);
    save_samples_csv(samples, out_path);
    return 0;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
}

int run_bench(const std::vector<int>& dims, const std::vector<int>& horizons,
              const std::vector<int>& sample_counts, int repeats, std::uint64_t seed,
              const std::string& out_path) {
  try {
    std::vector<BenchRow> rows = scaling_benchmark(dims, horizons, sample_counts,
                                                   repeats, seed);
    write_bench_csv(rows, out_path);
    return 0;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
}

}  // namespace ergmmd
