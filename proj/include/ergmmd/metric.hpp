#pragma once
// The ergodic MMD objective: the empirical MMD between the time-averaged
// trajectory statistics and domain samples, with the sample-only constant
// dropped. V-statistic form throughout (all index pairs, diagonal included),
// which keeps emmd + sample_constant_term nonnegative.

#include <Eigen/Core>

#include <vector>

#include "ergmmd/domain.hpp"
#include "ergmmd/kernel.hpp"
#include "ergmmd/systems.hpp"
#include "ergmmd/trajectory.hpp"

namespace ergmmd {

/// Maps robot states into the search domain: either a Euclidean space
/// (identity, coordinate selection) or SE(3) (forward kinematics, exp chart).
struct ProjectionMap {
  enum class Kind { identity, select_coordinates, serial_chain_fk, se3_exp_chart };

  Kind kind = Kind::identity;
  std::vector<int> coordinates;  // select_coordinates
  SerialChain chain;             // serial_chain_fk
  Pose chart_base;               // se3_exp_chart: world pose = chart_base * exp(xi)

  bool pose_valued() const {
    return kind == Kind::serial_chain_fk || kind == Kind::se3_exp_chart;
  }
  int euclidean_dimension(int state_dim) const;
  void validate(int state_dim) const;

  Eigen::VectorXd project_euclidean(const Eigen::VectorXd& x) const;
  Pose project_pose(const Eigen::VectorXd& x) const;
  /// 3D position for reporting/coverage: Euclidean points are zero-padded or
  /// truncated to three coordinates; poses contribute their translation.
  Vec3 project_position(const Eigen::VectorXd& x) const;

  /// d(chart delta)/d(state) at x for pose-valued maps, 6 x n, by central
  /// finite differences on the right tangent chart at g(x).
  Eigen::MatrixXd chart_jacobian(const Eigen::VectorXd& x) const;
};

Eigen::MatrixXd project_trajectory_euclidean(const Trajectory& traj,
                                             const ProjectionMap& g);
std::vector<Pose> project_trajectory_poses(const Trajectory& traj,
                                           const ProjectionMap& g);

/// Samples viewed as SE(3) elements: the frame looks along -normal when
/// normals are present, identity rotation otherwise.
std::vector<Pose> lift_samples_to_poses(const DomainSampleSet& samples);

/// (1/T^2) sum_tt' k(g x_t, g x_t') - (2/TM) sum_tj k(g x_t, w_j).
/// May be negative; adding sample_constant_term recovers the squared MMD.
double emmd(const Trajectory& traj, const DomainSampleSet& samples,
            const KernelSpec& spec, const ProjectionMap& g);

/// (1/M^2) sum_jj' k(w_j, w_j').
double sample_constant_term(const DomainSampleSet& samples, const KernelSpec& spec);

/// Full three-term biased estimator between two point sets; >= -1e-12.
double mmd_empirical(const Eigen::MatrixXd& xs, const Eigen::MatrixXd& ys,
                     const KernelSpec& spec);
double mmd_empirical(const std::vector<Pose>& xs, const std::vector<Pose>& ys,
                     const KernelSpec& spec);

/// d(emmd)/d(x_t) for every t, one column per step. Analytic for the RBF
/// family; chart finite differences composed with the projection Jacobian
/// for SE(3).
Eigen::MatrixXd emmd_gradient(const Trajectory& traj, const DomainSampleSet& samples,
                              const KernelSpec& spec, const ProjectionMap& g);

}  // namespace ergmmd
