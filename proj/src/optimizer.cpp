#include "ergmmd/optimizer.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

#include "ergmmd/rng.hpp"

namespace ergmmd {

void SolverOptions::validate() const {
  if (max_outer_iters < 1 || max_inner_iters < 1)
    throw std::invalid_argument("solver: iteration limits must be positive");
  if (!(grad_tol > 0.0) || !(constraint_tol > 0.0))
    throw std::invalid_argument("solver: tolerances must be positive");
  if (!(penalty_init > 0.0) || !(penalty_growth > 1.0) || !(penalty_max >= penalty_init))
    throw std::invalid_argument("solver: penalty schedule is invalid");
  if (!(armijo_c1 > 0.0 && armijo_c1 < 0.5))
    throw std::invalid_argument("solver: armijo_c1 must be in (0, 0.5)");
  if (!(backtrack_factor > 0.0 && backtrack_factor < 1.0))
    throw std::invalid_argument("solver: backtrack_factor must be in (0, 1)");
}

NcgResult ncg_minimize(const Objective& f, Eigen::VectorXd x0,
                       const SolverOptions& opts) {
  opts.validate();
  const int n = static_cast<int>(x0.size());
  constexpr double kStepFloor = 1e-16;

  NcgResult res;
  res.x = std::move(x0);
  Eigen::VectorXd grad(n);
  double value = f(res.x, &grad);
  if (!std::isfinite(value) || !grad.allFinite())
    throw std::invalid_argument("ncg: objective not finite at the initial point");

  Eigen::VectorXd dir = -grad;
  double alpha_prev = 1.0 / std::max(1.0, grad.norm());
  int since_restart = 0;

  for (int iter = 0; iter < opts.max_inner_iters; ++iter) {
    res.grad_norm = grad.norm();
    if (res.grad_norm <= opts.grad_tol) {
      res.converged = true;
      break;
    }

    if (since_restart >= n || grad.dot(dir) >= 0.0) {
      dir = -grad;
      since_restart = 0;
    }
    const double slope = grad.dot(dir);

    // Armijo backtracking; non-finite trial values are treated as failures.
    double alpha = std::clamp(alpha_prev / opts.backtrack_factor, 1e-12, 1e6);
    double trial = std::numeric_limits<double>::infinity();
    bool accepted = false;
    bool first_try = true;
    bool accepted_first = false;
    while (alpha >= kStepFloor) {
      trial = f(res.x + alpha * dir, nullptr);
      if (std::isfinite(trial) && trial <= value + opts.armijo_c1 * alpha * slope) {
        accepted = true;
        accepted_first = first_try;
        break;
      }
      alpha *= opts.backtrack_factor;
      first_try = false;
    }
    if (!accepted) {
      res.stalled = true;
      break;
    }
    if (accepted_first) {
      // The first guess already passed: expand while it keeps paying off.
      for (int k = 0; k < 20; ++k) {
        double alpha2 = alpha / opts.backtrack_factor;
        double trial2 = f(res.x + alpha2 * dir, nullptr);
        if (!std::isfinite(trial2) || trial2 >= trial ||
            trial2 > value + opts.armijo_c1 * alpha2 * slope)
          break;
        alpha = alpha2;
        trial = trial2;
      }
    }

    res.x += alpha * dir;
    Eigen::VectorXd grad_new(n);
    value = f(res.x, &grad_new);
    res.iterations = iter + 1;
    alpha_prev = alpha;

    const double denom = grad.dot(grad);
    double beta = denom > 0.0 ? std::max(0.0, grad_new.dot(grad_new - grad) / denom) : 0.0;
    dir = -grad_new + beta * dir;
    grad = std::move(grad_new);
    ++since_restart;
    res.grad_norm = grad.norm();
    res.converged = res.grad_norm <= opts.grad_tol;
  }
  res.value = value;
  return res;
}

namespace {

double constraint_violation(const Eigen::VectorXd& eq, const Eigen::VectorXd& ineq) {
  double v = 0.0;
  if (eq.size() > 0) v = eq.cwiseAbs().maxCoeff();
  if (ineq.size() > 0) v = std::max(v, std::max(0.0, ineq.maxCoeff()));
  return v;
}

}  // namespace

AlResult al_minimize(const Objective& f, const AlConstraints& constraints,
                     Eigen::VectorXd z0, const SolverOptions& opts) {
  opts.validate();

  auto eval_eq = [&](const Eigen::VectorXd& z) {
    return constraints.equalities ? constraints.equalities(z) : Eigen::VectorXd();
  };
  auto eval_ineq = [&](const Eigen::VectorXd& z) {
    return constraints.inequalities ? constraints.inequalities(z) : Eigen::VectorXd();
  };

  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(eval_eq(z0).size());
  Eigen::VectorXd nu = Eigen::VectorXd::Zero(eval_ineq(z0).size());
  double rho = opts.penalty_init;

  AlResult res;
  res.z = std::move(z0);
  double viol_prev = std::numeric_limits<double>::infinity();
  double best_obj = std::numeric_limits<double>::infinity();
  double best_viol = std::numeric_limits<double>::infinity();
  double best_merit = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_z = res.z;
  bool have_feasible = false;

  for (int outer = 0; outer < opts.max_outer_iters; ++outer) {
    Objective augmented = [&](const Eigen::VectorXd& z, Eigen::VectorXd* grad) {
      double val = f(z, grad);
      if (lambda.size() > 0) {
        Eigen::VectorXd h1 = constraints.equalities(z);
        val += lambda.dot(h1) + 0.5 * rho * h1.squaredNorm();
        if (grad) *grad += constraints.eq_jtv(z, lambda + rho * h1);
      }
      if (nu.size() > 0) {
        Eigen::VectorXd shifted = (nu + rho * constraints.inequalities(z)).cwiseMax(0.0);
        val += (shifted.squaredNorm() - nu.squaredNorm()) / (2.0 * rho);
        if (grad) *grad += constraints.ineq_jtv(z, shifted);
      }
      return val;
    };

    NcgResult inner = ncg_minimize(augmented, res.z, opts);
    res.z = inner.x;
    res.grad_norm = inner.grad_norm;

    Eigen::VectorXd h1 = eval_eq(res.z);
    Eigen::VectorXd h2 = eval_ineq(res.z);
    const double viol = constraint_violation(h1, h2);
    const double obj = f(res.z, nullptr);
    res.history.push_back({obj, viol, rho, inner.grad_norm});
    res.outer_iterations = outer + 1;

    // Best feasible-enough iterate: residual violation still counts at the
    // constraint-tolerance scale, so later (more feasible) iterates are not
    // beaten by ones that buy objective by riding the tolerance.
    const bool feasible_enough = viol <= opts.constraint_tol;
    const double merit = obj + viol / opts.constraint_tol;
    if (feasible_enough && (!have_feasible || merit < best_merit)) {
      have_feasible = true;
      best_obj = obj;
      best_viol = viol;
      best_merit = merit;
      best_z = res.z;
    } else if (!have_feasible && viol < best_viol) {
      best_obj = obj;
      best_viol = viol;
      best_z = res.z;
    }

    if (feasible_enough && inner.grad_norm <= opts.grad_tol) {
      res.converged = true;
      break;
    }

    if (lambda.size() > 0) lambda += rho * h1;
    if (nu.size() > 0) nu = (nu + rho * h2).cwiseMax(0.0);
    // Grow the penalty when the violation failed to halve; once inside the
    // tolerance there is nothing left to buy with a larger penalty.
    if (viol > opts.constraint_tol && viol > 0.5 * viol_prev)
      rho = std::min(rho * opts.penalty_growth, opts.penalty_max);
    viol_prev = viol;
  }

  res.z = best_z;
  res.objective = best_obj;
  res.violation = best_viol;
  return res;
}

void ProblemSpec::validate() const {
  dynamics.validate();
  kernel.validate();
  samples.validate();
  if (horizon < 1) throw std::invalid_argument("problem: horizon must be >= 1");
  projection.validate(dynamics.state_dim);
  if (initial_state.size() != dynamics.state_dim)
    throw std::invalid_argument("problem: initial state dimension mismatch");
  if (control_weight < 0.0 || smoothness_weight < 0.0)
    throw std::invalid_argument("problem: cost weights must be nonnegative");
  if (terminal_state && terminal_state->size() != dynamics.state_dim)
    throw std::invalid_argument("problem: terminal state dimension mismatch");
  if (control_bounds && (control_bounds->first.size() != dynamics.control_dim ||
                         control_bounds->second.size() != dynamics.control_dim))
    throw std::invalid_argument("problem: control bound dimension mismatch");
  if (state_bounds && (state_bounds->first.size() != dynamics.state_dim ||
                       state_bounds->second.size() != dynamics.state_dim))
    throw std::invalid_argument("problem: state bound dimension mismatch");
}

ConstraintSet build_constraint_set(const ProblemSpec& problem) {
  ConstraintSet cs;
  if (problem.pin_initial_state)
    cs.blocks.push_back(initial_state_constraint(problem.initial_state));
  if (problem.horizon >= 2)
    cs.blocks.push_back(dynamics_defect_constraint(problem.dynamics, problem.horizon));
  if (problem.terminal_state)
    cs.blocks.push_back(final_state_constraint(*problem.terminal_state, problem.horizon));
  if (problem.control_bounds)
    cs.blocks.push_back(control_box_constraint(problem.control_bounds->first,
                                               problem.control_bounds->second,
                                               problem.horizon));
  if (problem.state_bounds)
    cs.blocks.push_back(state_box_constraint(problem.state_bounds->first,
                                             problem.state_bounds->second,
                                             problem.horizon));
  for (const auto& b : problem.extra_constraints.blocks) cs.blocks.push_back(b);
  return cs;
}

double problem_objective(const ProblemSpec& problem, const Trajectory& traj,
                         Eigen::MatrixXd* dstates, Eigen::MatrixXd* dcontrols) {
  double value = emmd(traj, problem.samples, problem.kernel, problem.projection);
  value += problem.control_weight * traj.controls.squaredNorm();
  if (problem.smoothness_weight > 0.0 && traj.horizon() >= 2)
    value += smoothness_cost(traj, problem.smoothness_weight);

  if (dstates) {
    *dstates = emmd_gradient(traj, problem.samples, problem.kernel, problem.projection);
    if (problem.smoothness_weight > 0.0 && traj.horizon() >= 2)
      *dstates += smoothness_cost_gradient(traj, problem.smoothness_weight);
  }
  if (dcontrols) *dcontrols = 2.0 * problem.control_weight * traj.controls;
  return value;
}

namespace {

Trajectory unflatten(const Eigen::VectorXd& z, int n, int m, int horizon, double dt) {
  Trajectory traj;
  traj.dt = dt;
  traj.states = Eigen::Map<const Eigen::MatrixXd>(z.data(), n, horizon);
  traj.controls = Eigen::Map<const Eigen::MatrixXd>(z.data() + n * horizon, m, horizon);
  return traj;
}

Eigen::VectorXd flatten(const Eigen::MatrixXd& states, const Eigen::MatrixXd& controls) {
  Eigen::VectorXd z(states.size() + controls.size());
  z.head(states.size()) = Eigen::Map<const Eigen::VectorXd>(states.data(), states.size());
  z.tail(controls.size()) =
      Eigen::Map<const Eigen::VectorXd>(controls.data(), controls.size());
  return z;
}

}  // namespace

OptResult solve(const ProblemSpec& problem, const Trajectory& init,
                const SolverOptions& opts) {
  problem.validate();
  opts.validate();
  init.validate();
  const int n = problem.dynamics.state_dim;
  const int m = problem.dynamics.control_dim;
  const int horizon = problem.horizon;
  const double dt = problem.dynamics.dt;
  if (init.state_dim() != n || init.control_dim() != m || init.horizon() != horizon)
    throw std::invalid_argument("solve: initial trajectory dimensions mismatch");

  ConstraintSet cs = build_constraint_set(problem);

  Objective objective = [&](const Eigen::VectorXd& z, Eigen::VectorXd* grad) {
    Trajectory traj = unflatten(z, n, m, horizon, dt);
    if (!grad) return problem_objective(problem, traj, nullptr, nullptr);
    Eigen::MatrixXd ds, dc;
    double value = problem_objective(problem, traj, &ds, &dc);
    *grad = flatten(ds, dc);
    return value;
  };

  auto stack_residuals = [&, n, m, horizon, dt](const Eigen::VectorXd& z, bool equality) {
    Trajectory traj = unflatten(z, n, m, horizon, dt);
    int total = 0;
    for (const auto& b : cs.blocks)
      if (b.equality == equality) total += b.dimension;
    Eigen::VectorXd r(total);
    int off = 0;
    for (const auto& b : cs.blocks) {
      if (b.equality != equality) continue;
      r.segment(off, b.dimension) = b.residual(traj);
      off += b.dimension;
    }
    return r;
  };
  auto stack_jtv = [&, n, m, horizon, dt](const Eigen::VectorXd& z,
                                          const Eigen::VectorXd& y, bool equality) {
    Trajectory traj = unflatten(z, n, m, horizon, dt);
    Eigen::MatrixXd ds = Eigen::MatrixXd::Zero(n, horizon);
    Eigen::MatrixXd dc = Eigen::MatrixXd::Zero(m, horizon);
    int off = 0;
    for (const auto& b : cs.blocks) {
      if (b.equality != equality) continue;
      b.add_jacobian_transpose(traj, y.segment(off, b.dimension), ds, dc);
      off += b.dimension;
    }
    return flatten(ds, dc);
  };

  AlConstraints alc;
  if (cs.equality_dimension() > 0) {
    alc.equalities = [&](const Eigen::VectorXd& z) { return stack_residuals(z, true); };
    alc.eq_jtv = [&](const Eigen::VectorXd& z, const Eigen::VectorXd& y) {
      return stack_jtv(z, y, true);
    };
  }
  if (cs.inequality_dimension() > 0) {
    alc.inequalities = [&](const Eigen::VectorXd& z) { return stack_residuals(z, false); };
    alc.ineq_jtv = [&](const Eigen::VectorXd& z, const Eigen::VectorXd& y) {
      return stack_jtv(z, y, false);
    };
  }

  AlResult al = al_minimize(objective, alc, flatten(init.states, init.controls), opts);

  OptResult out;
  out.trajectory = unflatten(al.z, n, m, horizon, dt);
  out.objective = al.objective;
  out.emmd_value = emmd(out.trajectory, problem.samples, problem.kernel, problem.projection);
  out.constraint_violation = al.violation;
  out.outer_iterations = al.outer_iterations;
  out.converged = al.converged;
  out.history = std::move(al.history);
  return out;
}

Trajectory initialize_trajectory(const ProblemSpec& problem, InitStrategy strategy,
                                 std::uint64_t seed) {
  problem.validate();
  const int n = problem.dynamics.state_dim;
  const int m = problem.dynamics.control_dim;
  const int horizon = problem.horizon;

  Trajectory traj;
  traj.dt = problem.dynamics.dt;
  traj.states = problem.initial_state.replicate(1, horizon);
  traj.controls = Eigen::MatrixXd::Zero(m, horizon);

  switch (strategy) {
    case InitStrategy::hold:
      break;
    case InitStrategy::perturbed: {
      Rng rng(seed);
      for (int t = 0; t < horizon; ++t)
        for (int i = 0; i < n; ++i) traj.states(i, t) += 1e-2 * rng.normal();
      break;
    }
    case InitStrategy::line_to_centroid: {
      if (problem.projection.pose_valued()) break;  // no centroid in state space
      Eigen::VectorXd centroid = problem.samples.points.rowwise().mean();
      Eigen::VectorXd p0 = problem.projection.project_euclidean(problem.initial_state);
      for (int t = 0; t < horizon; ++t) {
        double a = horizon == 1 ? 0.0 : static_cast<double>(t) / (horizon - 1);
        Eigen::VectorXd pt = p0 + a * (centroid - p0);
        if (problem.projection.kind == ProjectionMap::Kind::identity) {
          traj.states.col(t) = pt;
        } else {
          for (std::size_t i = 0; i < problem.projection.coordinates.size(); ++i)
            traj.states(problem.projection.coordinates[i], t) = pt(i);
        }
      }
      // Inverse-dynamics controls: least squares of x_{t+1} = A x_t + B u_t.
      Eigen::MatrixXd a = problem.dynamics.state_matrix();
      Eigen::MatrixXd b = problem.dynamics.control_matrix();
      auto solver = (b.transpose() * b).ldlt();
      for (int t = 0; t + 1 < horizon; ++t)
        traj.controls.col(t) = solver.solve(
            b.transpose() * (traj.states.col(t + 1) - a * traj.states.col(t)));
      break;
    }
  }
  return traj;
}

}  // namespace ergmmd
