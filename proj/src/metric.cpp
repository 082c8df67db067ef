#include "ergmmd/metric.hpp"

#include <cmath>

namespace ergmmd {

int ProjectionMap::euclidean_dimension(int state_dim) const {
  switch (kind) {
    case Kind::identity:
      return state_dim;
    case Kind::select_coordinates:
      return static_cast<int>(coordinates.size());
    default:
      throw std::invalid_argument("projection: pose-valued map has no euclidean dimension");
  }
}

void ProjectionMap::validate(int state_dim) const {
  switch (kind) {
    case Kind::identity:
      break;
    case Kind::select_coordinates:
      if (coordinates.empty())
        throw std::invalid_argument("projection: no coordinates selected");
      for (int c : coordinates)
        if (c < 0 || c >= state_dim)
          throw std::invalid_argument("projection: coordinate index out of range");
      break;
    case Kind::serial_chain_fk:
      chain.validate();
      if (chain.joint_count() != state_dim)
        throw std::invalid_argument("projection: chain joint count must match state dim");
      break;
    case Kind::se3_exp_chart:
      if (state_dim != 6)
        throw std::invalid_argument("projection: exp chart needs 6-dimensional states");
      break;
  }
}

Eigen::VectorXd ProjectionMap::project_euclidean(const Eigen::VectorXd& x) const {
  switch (kind) {
    case Kind::identity:
      return x;
    case Kind::select_coordinates: {
      Eigen::VectorXd out(coordinates.size());
      for (std::size_t i = 0; i < coordinates.size(); ++i) out(i) = x(coordinates[i]);
      return out;
    }
    default:
      throw std::invalid_argument("projection: pose-valued map, use project_pose");
  }
}

Pose ProjectionMap::project_pose(const Eigen::VectorXd& x) const {
  switch (kind) {
    case Kind::serial_chain_fk:
      return forward_kinematics(chain, x);
    case Kind::se3_exp_chart:
      if (x.size() != 6)
        throw std::invalid_argument("projection: exp chart needs 6-dimensional states");
      return chart_base * se3_exp(Twist::from_vector(x));
    default:
      throw std::invalid_argument("projection: euclidean map, use project_euclidean");
  }
}

Vec3 ProjectionMap::project_position(const Eigen::VectorXd& x) const {
  if (pose_valued()) return project_pose(x).translation;
  Eigen::VectorXd p = project_euclidean(x);
  Vec3 out = Vec3::Zero();
  for (int i = 0; i < std::min<int>(3, static_cast<int>(p.size())); ++i) out(i) = p(i);
  return out;
}

Eigen::MatrixXd ProjectionMap::chart_jacobian(const Eigen::VectorXd& x) const {
  if (!pose_valued())
    throw std::invalid_argument("projection: chart jacobian is for pose-valued maps");
  const int n = static_cast<int>(x.size());
  const Pose base_inv = project_pose(x).inverse();
  Eigen::MatrixXd jac(6, n);
  Eigen::VectorXd xp = x;
  for (int i = 0; i < n; ++i) {
    const double h = 1e-6 * std::max(1.0, std::abs(x(i)));
    xp(i) = x(i) + h;
    Vec6 plus = se3_log(base_inv * project_pose(xp)).to_vector();
    xp(i) = x(i) - h;
    Vec6 minus = se3_log(base_inv * project_pose(xp)).to_vector();
    xp(i) = x(i);
    jac.col(i) = (plus - minus) / (2.0 * h);
  }
  return jac;
}

Eigen::MatrixXd project_trajectory_euclidean(const Trajectory& traj,
                                             const ProjectionMap& g) {
  const int d = g.euclidean_dimension(traj.state_dim());
  Eigen::MatrixXd out(d, traj.horizon());
  for (int t = 0; t < traj.horizon(); ++t)
    out.col(t) = g.project_euclidean(traj.states.col(t));
  return out;
}

std::vector<Pose> project_trajectory_poses(const Trajectory& traj,
                                           const ProjectionMap& g) {
  std::vector<Pose> out;
  out.reserve(traj.horizon());
  for (int t = 0; t < traj.horizon(); ++t) out.push_back(g.project_pose(traj.states.col(t)));
  return out;
}

std::vector<Pose> lift_samples_to_poses(const DomainSampleSet& samples) {
  if (samples.dimension() != 3)
    throw std::invalid_argument("sample lift: SE(3) domains need 3D sample points");
  std::vector<Pose> out;
  out.reserve(samples.count());
  for (int j = 0; j < samples.count(); ++j) {
    if (samples.normals)
      out.push_back(frame_at_surface_point(samples.points.col(j), samples.normals->col(j)));
    else
      out.emplace_back(Mat3::Identity(), samples.points.col(j));
  }
  return out;
}

namespace {

// V-statistic self sum over all ordered pairs; the diagonal is exactly the
// point count since k(p, p) = 1 for both families.
double gram_self_sum(const Eigen::MatrixXd& pts, const KernelSpec& spec) {
  const int n = static_cast<int>(pts.cols());
  double s = static_cast<double>(n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      s += 2.0 * kernel_eval(spec, pts.col(i), pts.col(j));
  return s;
}

double gram_self_sum(const std::vector<Pose>& pts, const KernelSpec& spec) {
  const int n = static_cast<int>(pts.size());
  double s = static_cast<double>(n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) s += 2.0 * kernel_eval(spec, pts[i], pts[j]);
  return s;
}

double gram_cross_sum(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                      const KernelSpec& spec) {
  double s = 0.0;
  for (int i = 0; i < a.cols(); ++i)
    for (int j = 0; j < b.cols(); ++j) s += kernel_eval(spec, a.col(i), b.col(j));
  return s;
}

double gram_cross_sum(const std::vector<Pose>& a, const std::vector<Pose>& b,
                      const KernelSpec& spec) {
  double s = 0.0;
  for (const Pose& pa : a)
    for (const Pose& pb : b) s += kernel_eval(spec, pa, pb);
  return s;
}

void check_euclidean_dims(const ProjectionMap& g, const Trajectory& traj,
                          const DomainSampleSet& samples) {
  int d = g.euclidean_dimension(traj.state_dim());
  if (d != samples.dimension())
    throw std::invalid_argument(
        "emmd: projection codomain dimension " + std::to_string(d) +
        " does not match sample dimension " + std::to_string(samples.dimension()));
}

}  // namespace

double emmd(const Trajectory& traj, const DomainSampleSet& samples,
            const KernelSpec& spec, const ProjectionMap& g) {
  traj.validate();
  spec.validate();
  g.validate(traj.state_dim());
  const double t = traj.horizon();
  const double m = samples.count();

  if (spec.family == KernelFamily::rbf_euclidean) {
    if (g.pose_valued())
      throw std::invalid_argument("emmd: rbf kernel needs a euclidean projection");
    check_euclidean_dims(g, traj, samples);
    Eigen::MatrixXd pts = project_trajectory_euclidean(traj, g);
    return gram_self_sum(pts, spec) / (t * t) -
           2.0 * gram_cross_sum(pts, samples.points, spec) / (t * m);
  }

  if (!g.pose_valued())
    throw std::invalid_argument("emmd: se3 kernel needs a pose-valued projection");
  std::vector<Pose> pts = project_trajectory_poses(traj, g);
  std::vector<Pose> omega = lift_samples_to_poses(samples);
  return gram_self_sum(pts, spec) / (t * t) -
         2.0 * gram_cross_sum(pts, omega, spec) / (t * m);
}

double sample_constant_term(const DomainSampleSet& samples, const KernelSpec& spec) {
  samples.validate();
  spec.validate();
  const double m = samples.count();
  if (spec.family == KernelFamily::rbf_euclidean)
    return gram_self_sum(samples.points, spec) / (m * m);
  return gram_self_sum(lift_samples_to_poses(samples), spec) / (m * m);
}

double mmd_empirical(const Eigen::MatrixXd& xs, const Eigen::MatrixXd& ys,
                     const KernelSpec& spec) {
  if (xs.cols() < 1 || ys.cols() < 1)
    throw std::invalid_argument("mmd_empirical: empty point set");
  const double n = xs.cols();
  const double m = ys.cols();
  return gram_self_sum(xs, spec) / (n * n) -
         2.0 * gram_cross_sum(xs, ys, spec) / (n * m) +
         gram_self_sum(ys, spec) / (m * m);
}

double mmd_empirical(const std::vector<Pose>& xs, const std::vector<Pose>& ys,
                     const KernelSpec& spec) {
  if (xs.empty() || ys.empty())
    throw std::invalid_argument("mmd_empirical: empty point set");
  const double n = static_cast<double>(xs.size());
  const double m = static_cast<double>(ys.size());
  return gram_self_sum(xs, spec) / (n * n) -
         2.0 * gram_cross_sum(xs, ys, spec) / (n * m) +
         gram_self_sum(ys, spec) / (m * m);
}

namespace {

// Euclidean case: analytic pair gradients, exploiting grad1 k(a,b) = -grad1 k(b,a).
Eigen::MatrixXd emmd_gradient_euclidean(const Trajectory& traj,
                                        const DomainSampleSet& samples,
                                        const KernelSpec& spec, const ProjectionMap& g) {
  const int horizon = traj.horizon();
  const double t = horizon;
  const double m = samples.count();
  const double inv_sigma2 = 1.0 / (spec.sigma * spec.sigma);

  Eigen::MatrixXd pts = project_trajectory_euclidean(traj, g);
  const int d = static_cast<int>(pts.rows());
  Eigen::MatrixXd dom(d, horizon);  // gradient in domain space
  dom.setZero();

  Eigen::VectorXd diff(d);  // reused: the pair loops are the hot path
  const double self_coeff = 2.0 / (t * t);
  for (int i = 0; i < horizon; ++i) {
    for (int j = i + 1; j < horizon; ++j) {
      diff = pts.col(i) - pts.col(j);
      double k = std::exp(-0.5 * diff.squaredNorm() * inv_sigma2);
      double scale = self_coeff * (-inv_sigma2 * k);  // grad1 k(p_i, p_j)
      dom.col(i) += scale * diff;
      dom.col(j) -= scale * diff;
    }
  }
  const double cross_coeff = 2.0 / (t * m);
  for (int i = 0; i < horizon; ++i) {
    for (int j = 0; j < samples.count(); ++j) {
      diff = pts.col(i) - samples.points.col(j);
      double k = std::exp(-0.5 * diff.squaredNorm() * inv_sigma2);
      dom.col(i) -= (cross_coeff * (-inv_sigma2 * k)) * diff;
    }
  }

  if (g.kind == ProjectionMap::Kind::identity) return dom;
  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(traj.state_dim(), horizon);
  for (int c = 0; c < horizon; ++c)
    for (std::size_t i = 0; i < g.coordinates.size(); ++i)
      grad(g.coordinates[i], c) += dom(i, c);
  return grad;
}

Eigen::MatrixXd emmd_gradient_se3(const Trajectory& traj, const DomainSampleSet& samples,
                                  const KernelSpec& spec, const ProjectionMap& g) {
  const int horizon = traj.horizon();
  const double t = horizon;
  const double m = samples.count();

  std::vector<Pose> pts = project_trajectory_poses(traj, g);
  std::vector<Pose> omega = lift_samples_to_poses(samples);

  Eigen::MatrixXd grad(traj.state_dim(), horizon);
  for (int i = 0; i < horizon; ++i) {
    Vec6 w = Vec6::Zero();
    for (int j = 0; j < horizon; ++j) {
      if (j == i) continue;  // k(p, p) is constant 1
      w += (2.0 / (t * t)) * kernel_grad_first(spec, pts[i], pts[j]);
    }
    for (const Pose& s : omega)
      w -= (2.0 / (t * m)) * kernel_grad_first(spec, pts[i], s);
    grad.col(i) = g.chart_jacobian(traj.states.col(i)).transpose() * w;
  }
  return grad;
}

}  // namespace

Eigen::MatrixXd emmd_gradient(const Trajectory& traj, const DomainSampleSet& samples,
                              const KernelSpec& spec, const ProjectionMap& g) {
  traj.validate();
  spec.validate();
  g.validate(traj.state_dim());
  if (spec.family == KernelFamily::rbf_euclidean) {
    if (g.pose_valued())
      throw std::invalid_argument("emmd_gradient: rbf kernel needs a euclidean projection");
    check_euclidean_dims(g, traj, samples);
    return emmd_gradient_euclidean(traj, samples, spec, g);
  }
  if (!g.pose_valued())
    throw std::invalid_argument("emmd_gradient: se3 kernel needs a pose-valued projection");
  return emmd_gradient_se3(traj, samples, spec, g);
}

}  // namespace ergmmd
