#pragma once
// Dynamics models, serial-chain forward kinematics, running costs, and the
// constraint blocks that compose one trajectory optimization problem.

#include <Eigen/Core>

#include <functional>
#include <string>
#include <vector>

#include "ergmmd/lie.hpp"
#include "ergmmd/trajectory.hpp"

namespace ergmmd {

enum class DynamicsKind {
  single_integrator,    // x+ = x + dt u
  double_integrator,    // symplectic Euler on (position, velocity)
  joint_velocity_chain, // q+ = q + dt u
  se3_twist_integrator  // xi+ = xi + dt u on the twist chart
};

/// All four kinds are linear: x+ = A x + B u.
struct DynamicsModel {
  DynamicsKind kind = DynamicsKind::single_integrator;
  int state_dim = 2;
  int control_dim = 2;
  double dt = 0.1;

  void validate() const;
  Eigen::MatrixXd state_matrix() const;    // A
  Eigen::MatrixXd control_matrix() const;  // B
  Eigen::VectorXd step(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const;
};

/// One revolute joint: a fixed offset from the previous frame followed by a
/// rotation about a local unit axis.
struct Joint {
  Pose offset;
  Vec3 axis = Vec3::UnitZ();
  double lower = -M_PI;
  double upper = M_PI;
  double velocity_limit = 2.0;  // rad/s
};

/// Product-of-exponentials serial chain; the tip transform follows the last
/// joint.
struct SerialChain {
  std::vector<Joint> joints;
  Pose tip;

  int joint_count() const { return static_cast<int>(joints.size()); }
  void validate() const;
  Eigen::VectorXd lower_limits() const;
  Eigen::VectorXd upper_limits() const;
  Eigen::VectorXd velocity_limits() const;
  double reach() const;  // sum of offset and tip translation lengths
};

Pose forward_kinematics(const SerialChain& chain, const Eigen::VectorXd& q);

/// Applies the dynamics through the horizon; defects are zero by construction.
/// controls supplies T columns; the last one is stored as given but unused.
Trajectory rollout(const DynamicsModel& model, const Eigen::VectorXd& x0,
                   const Eigen::MatrixXd& controls);

/// weight * sum |x_{t+1} - x_t|^2.
double smoothness_cost(const Trajectory& traj, double weight);
/// Gradient of the above with respect to states, one column per step.
Eigen::MatrixXd smoothness_cost_gradient(const Trajectory& traj, double weight);

/// One residual block with an analytic transpose-Jacobian product. For
/// inequalities, a positive residual component means violated.
struct ConstraintBlock {
  std::string name;
  bool equality = true;
  int dimension = 0;
  std::function<Eigen::VectorXd(const Trajectory&)> residual;
  // Adds J^T y into the state/control gradients.
  std::function<void(const Trajectory&, const Eigen::VectorXd& y,
                     Eigen::MatrixXd& dstates, Eigen::MatrixXd& dcontrols)>
      add_jacobian_transpose;
};

struct ConstraintSet {
  std::vector<ConstraintBlock> blocks;

  int equality_dimension() const;
  int inequality_dimension() const;
};

/// Stacked (equalities, inequalities) residuals in block order.
std::pair<Eigen::VectorXd, Eigen::VectorXd> evaluate_constraints(
    const ConstraintSet& cs, const Trajectory& traj);

// Builders for the standard blocks of the transcription.
ConstraintBlock dynamics_defect_constraint(const DynamicsModel& model, int horizon);
ConstraintBlock initial_state_constraint(const Eigen::VectorXd& x0);
ConstraintBlock final_state_constraint(const Eigen::VectorXd& target, int horizon);
ConstraintBlock control_box_constraint(const Eigen::VectorXd& lo,
                                       const Eigen::VectorXd& hi, int horizon);
ConstraintBlock state_box_constraint(const Eigen::VectorXd& lo,
                                     const Eigen::VectorXd& hi, int horizon);

}  // namespace ergmmd
