#pragma once
// Nonlinear conjugate gradient (Polak-Ribiere+ with Armijo backtracking)
// wrapped in an augmented-Lagrangian outer loop for equality and inequality
// constraints, plus the trajectory-level problem assembly on top of it.

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "ergmmd/metric.hpp"
#include "ergmmd/systems.hpp"

namespace ergmmd {

struct SolverOptions {
  int max_outer_iters = 20;
  int max_inner_iters = 300;
  double grad_tol = 1e-5;
  double constraint_tol = 1e-4;
  double penalty_init = 10.0;
  double penalty_growth = 10.0;
  double penalty_max = 1e8;
  double armijo_c1 = 1e-4;
  double backtrack_factor = 0.5;
  std::uint64_t seed = 0;

  void validate() const;
};

/// value = f(x); when grad is non-null it receives df/dx.
using Objective = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd*)>;

struct NcgResult {
  Eigen::VectorXd x;
  double value = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;  // grad_norm <= grad_tol
  bool stalled = false;    // line-search step underflowed below 1e-16
};

/// Polak-Ribiere+ directions with restart to steepest descent every n steps
/// or on loss of descent; Armijo backtracking line search.
NcgResult ncg_minimize(const Objective& f, Eigen::VectorXd x0,
                       const SolverOptions& opts);

/// Flat-vector constraint functions for the augmented-Lagrangian loop.
/// Either side may be absent. jtv maps (z, y) -> J(z)^T y.
struct AlConstraints {
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> equalities;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&)> eq_jtv;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> inequalities;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&)> ineq_jtv;
};

struct OuterRecord {
  double objective = 0.0;
  double violation = 0.0;
  double penalty = 0.0;
  double grad_norm = 0.0;
};

struct AlResult {
  Eigen::VectorXd z;
  double objective = 0.0;
  double violation = 0.0;
  double grad_norm = 0.0;
  int outer_iterations = 0;
  bool converged = false;
  std::vector<OuterRecord> history;
};

AlResult al_minimize(const Objective& f, const AlConstraints& constraints,
                     Eigen::VectorXd z0, const SolverOptions& opts);

/// Everything defining one ergodic trajectory optimization run. The standard
/// constraint set (initial state, dynamics defects, boxes, optional terminal
/// state) is assembled from the declarative fields by build_constraint_set.
struct ProblemSpec {
  DynamicsModel dynamics;
  ProjectionMap projection;
  KernelSpec kernel;
  DomainSampleSet samples;
  int horizon = 16;
  Eigen::VectorXd initial_state;

  double control_weight = 1e-3;    // running cost w_u |u|^2
  double smoothness_weight = 0.0;  // plus w_s |x_{t+1} - x_t|^2

  bool pin_initial_state = true;
  std::optional<Eigen::VectorXd> terminal_state;
  std::optional<std::pair<Eigen::VectorXd, Eigen::VectorXd>> control_bounds;
  std::optional<std::pair<Eigen::VectorXd, Eigen::VectorXd>> state_bounds;
  ConstraintSet extra_constraints;

  void validate() const;
};

ConstraintSet build_constraint_set(const ProblemSpec& problem);

/// emmd + running cost, and its gradient packed as (states, controls).
double problem_objective(const ProblemSpec& problem, const Trajectory& traj,
                         Eigen::MatrixXd* dstates, Eigen::MatrixXd* dcontrols);

struct OptResult {
  Trajectory trajectory;
  double objective = 0.0;
  double emmd_value = 0.0;
  double constraint_violation = 0.0;
  int outer_iterations = 0;
  bool converged = false;
  std::vector<OuterRecord> history;
};

OptResult solve(const ProblemSpec& problem, const Trajectory& init,
                const SolverOptions& opts);

enum class InitStrategy { hold, line_to_centroid, perturbed };

/// hold repeats the initial state; line_to_centroid interpolates the
/// projected coordinates toward the sample centroid with inverse-dynamics
/// controls (euclidean projections only; pose-valued maps fall back to
/// hold); perturbed adds seeded Gaussian noise of scale 1e-2 to the states.
Trajectory initialize_trajectory(const ProblemSpec& problem, InitStrategy strategy,
                                 std::uint64_t seed);

}  // namespace ergmmd
