#pragma once
// SE(3)/SO(3) exponential and logarithm maps, twists, and weighted tangent
// norms. Closed-form Rodrigues expressions with series fallbacks near zero
// angle; the logarithm rejects the antipodal branch (angle ~ pi).

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>

namespace ergmmd {

using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat6 = Eigen::Matrix<double, 6, 6>;

/// Thrown by se3_log when the rotation angle is within 1e-6 of pi, where the
/// principal branch is not defined. Callers must perturb the input instead.
struct BranchSingularityError : std::domain_error {
  using std::domain_error::domain_error;
};

inline Mat3 skew(const Vec3& v) {
  Mat3 s;
  // clang-format off
  s <<     0.0, -v.z(),  v.y(),
         v.z(),    0.0, -v.x(),
        -v.y(),  v.x(),    0.0;
  // clang-format on
  return s;
}

/// Element of se(3): angular part first, linear part second.
struct Twist {
  Vec3 angular = Vec3::Zero();  // radians
  Vec3 linear = Vec3::Zero();   // meters

  Twist() = default;
  Twist(const Vec3& ang, const Vec3& lin) : angular(ang), linear(lin) {}

  static Twist from_vector(const Vec6& v) { return {v.head<3>(), v.tail<3>()}; }
  Vec6 to_vector() const {
    Vec6 v;
    v << angular, linear;
    return v;
  }
  bool all_finite() const { return angular.allFinite() && linear.allFinite(); }
};

/// Rigid transform in SE(3), stored as rotation matrix plus translation.
struct Pose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  Pose() = default;
  Pose(const Mat3& rot, const Vec3& trans) : rotation(rot), translation(trans) {}

  static Pose identity() { return {}; }

  Pose inverse() const {
    Mat3 rt = rotation.transpose();
    return {rt, -(rt * translation)};
  }

  Pose operator*(const Pose& other) const {
    return {rotation * other.rotation,
            rotation * other.translation + translation};
  }

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }

  /// Orthogonality and det(+1) check, tolerance 1e-9 by default.
  bool is_valid(double tol = 1e-9) const {
    if (!rotation.allFinite() || !translation.allFinite()) return false;
    Mat3 err = rotation.transpose() * rotation - Mat3::Identity();
    return err.cwiseAbs().maxCoeff() < tol &&
           std::abs(rotation.determinant() - 1.0) < tol;
  }
};

/// Symmetric positive-definite 6x6 weight for tangent-space norms.
/// Validated once at construction so hot loops can trust it.
class TangentWeight {
 public:
  TangentWeight() : weights_(Mat6::Identity()) {}

  explicit TangentWeight(const Mat6& w) : weights_(w) {
    if (!w.allFinite()) throw std::invalid_argument("tangent weight: non-finite entries");
    if ((w - w.transpose()).cwiseAbs().maxCoeff() > 1e-12)
      throw std::invalid_argument("tangent weight: matrix is not symmetric");
    Eigen::SelfAdjointEigenSolver<Mat6> es(w, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() <= 0.0)
      throw std::invalid_argument("tangent weight: matrix is not positive-definite");
  }

  static TangentWeight identity() { return TangentWeight(); }
  static TangentWeight diagonal(const Vec6& d) { return TangentWeight(Mat6(d.asDiagonal())); }

  const Mat6& matrix() const { return weights_; }

 private:
  Mat6 weights_;
};

/// xi' W xi. Zero iff xi is zero (W is positive-definite by construction).
inline double weighted_tangent_norm_sq(const Twist& xi, const TangentWeight& w) {
  Vec6 v = xi.to_vector();
  return v.dot(w.matrix() * v);
}

/// Rodrigues rotation about a unit axis.
inline Mat3 axis_angle_rotation(const Vec3& unit_axis, double angle) {
  Mat3 ax = skew(unit_axis);
  return Mat3::Identity() + std::sin(angle) * ax + (1.0 - std::cos(angle)) * ax * ax;
}

/// Principal rotation angle in [0, pi].
inline double rotation_angle(const Mat3& r) {
  double c = 0.5 * (r.trace() - 1.0);
  return std::acos(std::clamp(c, -1.0, 1.0));
}

namespace detail {
constexpr double kSmallAngle = 1e-6;
}

/// SE(3) exponential map. Continuous through zero angle via 2-term Taylor
/// expansions of the Rodrigues coefficients.
inline Pose se3_exp(const Twist& xi) {
  if (!xi.all_finite()) throw std::invalid_argument("se3_exp: non-finite twist");

  const Vec3& w = xi.angular;
  const double theta = w.norm();
  const double theta2 = theta * theta;

  double a, b, c;  // sin(t)/t, (1-cos(t))/t^2, (t-sin(t))/t^3
  if (theta < detail::kSmallAngle) {
    a = 1.0 - theta2 / 6.0;
    b = 0.5 - theta2 / 24.0;
    c = 1.0 / 6.0 - theta2 / 120.0;
  } else {
    a = std::sin(theta) / theta;
    b = (1.0 - std::cos(theta)) / theta2;
    c = (theta - std::sin(theta)) / (theta2 * theta);
  }

  Mat3 wx = skew(w);
  Mat3 wx2 = wx * wx;
  Mat3 rot = Mat3::Identity() + a * wx + b * wx2;
  Mat3 v = Mat3::Identity() + b * wx + c * wx2;
  return {rot, v * xi.linear};
}

/// SE(3) logarithm (principal branch). Round-trips se3_exp to 1e-9 for
/// angles below pi - 1e-3; throws BranchSingularityError within 1e-6 of pi.
inline Twist se3_log(const Pose& p) {
  if (!p.rotation.allFinite() || !p.translation.allFinite())
    throw std::invalid_argument("se3_log: non-finite pose");

  const double theta = rotation_angle(p.rotation);
  if (theta >= M_PI - detail::kSmallAngle)
    throw BranchSingularityError("se3_log: rotation angle within 1e-6 of pi");

  const Mat3& r = p.rotation;
  Vec3 skew_part(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));

  Vec3 w;
  double d;  // coefficient of wx^2 in V^{-1}
  const double theta2 = theta * theta;
  if (theta < detail::kSmallAngle) {
    w = 0.5 * (1.0 + theta2 / 6.0) * skew_part;
    d = 1.0 / 12.0 + theta2 / 720.0;
  } else {
    const double s = std::sin(theta);
    w = (theta / (2.0 * s)) * skew_part;
    d = 1.0 / theta2 - (1.0 + std::cos(theta)) / (2.0 * theta * s);
  }

  Mat3 wx = skew(w);
  Mat3 v_inv = Mat3::Identity() - 0.5 * wx + d * wx * wx;
  return {w, v_inv * p.translation};
}

/// Orthonormal frame anchored at a surface point: the z axis looks into the
/// surface (along -normal); the tangent axes are completed deterministically.
/// Used to lift point+normal samples into SE(3).
inline Pose frame_at_surface_point(const Vec3& point, const Vec3& normal) {
  Vec3 z = -normal.normalized();
  Vec3 ref = std::abs(z.x()) < 0.7 ? Vec3::UnitX() : Vec3::UnitY();
  Vec3 x = ref.cross(z).normalized();
  Vec3 y = z.cross(x);
  Mat3 rot;
  rot.col(0) = x;
  rot.col(1) = y;
  rot.col(2) = z;
  return {rot, point};
}

}  // namespace ergmmd
