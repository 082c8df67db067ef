#include "ergmmd/systems.hpp"

#include <cmath>

namespace ergmmd {

void DynamicsModel::validate() const {
  if (state_dim < 1 || control_dim < 1)
    throw std::invalid_argument("dynamics: dimensions must be positive");
  if (!(dt > 0.0)) throw std::invalid_argument("dynamics: dt must be positive");
  switch (kind) {
    case DynamicsKind::single_integrator:
    case DynamicsKind::joint_velocity_chain:
      if (state_dim != control_dim)
        throw std::invalid_argument("dynamics: integrator needs state_dim == control_dim");
      break;
    case DynamicsKind::double_integrator:
      if (state_dim != 2 * control_dim)
        throw std::invalid_argument("dynamics: double integrator needs state_dim == 2*control_dim");
      break;
    case DynamicsKind::se3_twist_integrator:
      if (state_dim != 6 || control_dim != 6)
        throw std::invalid_argument("dynamics: twist integrator is 6-dimensional");
      break;
  }
}

Eigen::MatrixXd DynamicsModel::state_matrix() const {
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(state_dim, state_dim);
  if (kind == DynamicsKind::double_integrator) {
    const int d = control_dim;
    a.topRightCorner(d, d) = dt * Eigen::MatrixXd::Identity(d, d);
  }
  return a;
}

Eigen::MatrixXd DynamicsModel::control_matrix() const {
  if (kind == DynamicsKind::double_integrator) {
    const int d = control_dim;
    Eigen::MatrixXd b(state_dim, d);
    b.topRows(d) = dt * dt * Eigen::MatrixXd::Identity(d, d);
    b.bottomRows(d) = dt * Eigen::MatrixXd::Identity(d, d);
    return b;
  }
  return dt * Eigen::MatrixXd::Identity(state_dim, control_dim);
}

Eigen::VectorXd DynamicsModel::step(const Eigen::VectorXd& x,
                                    const Eigen::VectorXd& u) const {
  if (x.size() != state_dim || u.size() != control_dim)
    throw std::invalid_argument("dynamics step: dimension mismatch");
  switch (kind) {
    case DynamicsKind::single_integrator:
    case DynamicsKind::joint_velocity_chain:
    case DynamicsKind::se3_twist_integrator:
      return x + dt * u;
    case DynamicsKind::double_integrator: {
      const int d = control_dim;
      Eigen::VectorXd next(state_dim);
      next.tail(d) = x.tail(d) + dt * u;            // velocity first
      next.head(d) = x.head(d) + dt * next.tail(d); // then position
      return next;
    }
  }
  throw std::logic_error("dynamics step: unknown kind");
}

void SerialChain::validate() const {
  if (joints.empty()) throw std::invalid_argument("chain: no joints");
  for (const auto& j : joints) {
    if (std::abs(j.axis.norm() - 1.0) > 1e-9)
      throw std::invalid_argument("chain: joint axis must be a unit vector");
    if (!(j.lower < j.upper))
      throw std::invalid_argument("chain: joint limits must satisfy lower < upper");
  }
}

Eigen::VectorXd SerialChain::lower_limits() const {
  Eigen::VectorXd v(joint_count());
  for (int i = 0; i < joint_count(); ++i) v(i) = joints[i].lower;
  return v;
}

Eigen::VectorXd SerialChain::upper_limits() const {
  Eigen::VectorXd v(joint_count());
  for (int i = 0; i < joint_count(); ++i) v(i) = joints[i].upper;
  return v;
}

Eigen::VectorXd SerialChain::velocity_limits() const {
  Eigen::VectorXd v(joint_count());
  for (int i = 0; i < joint_count(); ++i) v(i) = joints[i].velocity_limit;
  return v;
}

double SerialChain::reach() const {
  double r = tip.translation.norm();
  for (const auto& j : joints) r += j.offset.translation.norm();
  return r;
}

Pose forward_kinematics(const SerialChain& chain, const Eigen::VectorXd& q) {
  if (q.size() != chain.joint_count())
    throw std::invalid_argument("forward_kinematics: joint vector size mismatch");
  Pose pose;
  for (int i = 0; i < chain.joint_count(); ++i) {
    const Joint& j = chain.joints[i];
    pose = pose * j.offset * Pose(axis_angle_rotation(j.axis, q(i)), Vec3::Zero());
  }
  return pose * chain.tip;
}

Trajectory rollout(const DynamicsModel& model, const Eigen::VectorXd& x0,
                   const Eigen::MatrixXd& controls) {
  model.validate();
  if (controls.rows() != model.control_dim)
    throw std::invalid_argument("rollout: control dimension mismatch");
  if (controls.cols() < 1) throw std::invalid_argument("rollout: no controls");
  if (x0.size() != model.state_dim)
    throw std::invalid_argument("rollout: initial state dimension mismatch");

  const int horizon = static_cast<int>(controls.cols());
  Trajectory traj;
  traj.dt = model.dt;
  traj.states.resize(model.state_dim, horizon);
  traj.controls = controls;
  traj.states.col(0) = x0;
  for (int t = 0; t + 1 < horizon; ++t)
    traj.states.col(t + 1) = model.step(traj.states.col(t), controls.col(t));
  return traj;
}

double smoothness_cost(const Trajectory& traj, double weight) {
  if (traj.horizon() < 2) throw std::invalid_argument("smoothness_cost: horizon must be >= 2");
  double total = 0.0;
  for (int t = 0; t + 1 < traj.horizon(); ++t)
    total += (traj.states.col(t + 1) - traj.states.col(t)).squaredNorm();
  return weight * total;
}

Eigen::MatrixXd smoothness_cost_gradient(const Trajectory& traj, double weight) {
  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(traj.state_dim(), traj.horizon());
  for (int t = 0; t + 1 < traj.horizon(); ++t) {
    Eigen::VectorXd diff = traj.states.col(t + 1) - traj.states.col(t);
    grad.col(t + 1) += 2.0 * weight * diff;
    grad.col(t) -= 2.0 * weight * diff;
  }
  return grad;
}

int ConstraintSet::equality_dimension() const {
  int n = 0;
  for (const auto& b : blocks)
    if (b.equality) n += b.dimension;
  return n;
}

int ConstraintSet::inequality_dimension() const {
  int n = 0;
  for (const auto& b : blocks)
    if (!b.equality) n += b.dimension;
  return n;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> evaluate_constraints(
    const ConstraintSet& cs, const Trajectory& traj) {
  Eigen::VectorXd eq(cs.equality_dimension());
  Eigen::VectorXd ineq(cs.inequality_dimension());
  int eo = 0, io = 0;
  for (const auto& b : cs.blocks) {
    Eigen::VectorXd r = b.residual(traj);
    if (r.size() != b.dimension)
      throw std::logic_error("constraint block '" + b.name + "': residual size mismatch");
    if (b.equality) {
      eq.segment(eo, b.dimension) = r;
      eo += b.dimension;
    } else {
      ineq.segment(io, b.dimension) = r;
      io += b.dimension;
    }
  }
  return {eq, ineq};
}

ConstraintBlock dynamics_defect_constraint(const DynamicsModel& model, int horizon) {
  if (horizon < 2)
    throw std::invalid_argument("dynamics defects: horizon must be >= 2");
  ConstraintBlock block;
  block.name = "dynamics_defect";
  block.equality = true;
  block.dimension = (horizon - 1) * model.state_dim;
  const Eigen::MatrixXd a = model.state_matrix();
  const Eigen::MatrixXd b = model.control_matrix();
  block.residual = [model](const Trajectory& traj) {
    const int n = model.state_dim;
    Eigen::VectorXd r((traj.horizon() - 1) * n);
    for (int t = 0; t + 1 < traj.horizon(); ++t)
      r.segment(t * n, n) =
          traj.states.col(t + 1) - model.step(traj.states.col(t), traj.controls.col(t));
    return r;
  };
  block.add_jacobian_transpose = [a, b, n = model.state_dim](
                                     const Trajectory& traj, const Eigen::VectorXd& y,
                                     Eigen::MatrixXd& dstates, Eigen::MatrixXd& dcontrols) {
    for (int t = 0; t + 1 < traj.horizon(); ++t) {
      Eigen::VectorXd yt = y.segment(t * n, n);
      dstates.col(t + 1) += yt;
      dstates.col(t) -= a.transpose() * yt;
      dcontrols.col(t) -= b.transpose() * yt;
    }
  };
  return block;
}

ConstraintBlock initial_state_constraint(const Eigen::VectorXd& x0) {
  ConstraintBlock block;
  block.name = "initial_state";
  block.equality = true;
  block.dimension = static_cast<int>(x0.size());
  block.residual = [x0](const Trajectory& traj) {
    return Eigen::VectorXd(traj.states.col(0) - x0);
  };
  block.add_jacobian_transpose = [](const Trajectory&, const Eigen::VectorXd& y,
                                    Eigen::MatrixXd& dstates, Eigen::MatrixXd&) {
    dstates.col(0) += y;
  };
  return block;
}

ConstraintBlock final_state_constraint(const Eigen::VectorXd& target, int horizon) {
  ConstraintBlock block;
  block.name = "final_state";
  block.equality = true;
  block.dimension = static_cast<int>(target.size());
  block.residual = [target](const Trajectory& traj) {
    return Eigen::VectorXd(traj.states.col(traj.horizon() - 1) - target);
  };
  block.add_jacobian_transpose = [](const Trajectory& traj, const Eigen::VectorXd& y,
                                    Eigen::MatrixXd& dstates, Eigen::MatrixXd&) {
    dstates.col(traj.horizon() - 1) += y;
  };
  (void)horizon;
  return block;
}

namespace {

// Shared box residual: [v - hi; lo - v] per step, over states or controls.
ConstraintBlock box_constraint(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                               int horizon, bool on_states, const std::string& name) {
  if (lo.size() != hi.size())
    throw std::invalid_argument(name + ": bound size mismatch");
  if (((hi - lo).array() < 0.0).any())
    throw std::invalid_argument(name + ": lower bound exceeds upper bound");
  const int d = static_cast<int>(lo.size());
  ConstraintBlock block;
  block.name = name;
  block.equality = false;
  block.dimension = 2 * d * horizon;
  block.residual = [lo, hi, d, on_states](const Trajectory& traj) {
    const Eigen::MatrixXd& v = on_states ? traj.states : traj.controls;
    Eigen::VectorXd r(2 * d * traj.horizon());
    for (int t = 0; t < traj.horizon(); ++t) {
      r.segment(2 * d * t, d) = v.col(t) - hi;
      r.segment(2 * d * t + d, d) = lo - v.col(t);
    }
    return r;
  };
  block.add_jacobian_transpose = [d, on_states](const Trajectory& traj,
                                                const Eigen::VectorXd& y,
                                                Eigen::MatrixXd& dstates,
                                                Eigen::MatrixXd& dcontrols) {
    Eigen::MatrixXd& dv = on_states ? dstates : dcontrols;
    for (int t = 0; t < traj.horizon(); ++t)
      dv.col(t) += y.segment(2 * d * t, d) - y.segment(2 * d * t + d, d);
  };
  return block;
}

}  // namespace

ConstraintBlock control_box_constraint(const Eigen::VectorXd& lo,
                                       const Eigen::VectorXd& hi, int horizon) {
  return box_constraint(lo, hi, horizon, false, "control_box");
}

ConstraintBlock state_box_constraint(const Eigen::VectorXd& lo,
                                     const Eigen::VectorXd& hi, int horizon) {
  return box_constraint(lo, hi, horizon, true, "state_box");
}

}  // namespace ergmmd
