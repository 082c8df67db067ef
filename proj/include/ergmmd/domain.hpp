#pragma once
// Domain sampling: triangle meshes, analytic 2D densities, and point-cloud
// CSV files all reduce to a DomainSampleSet, which is the only domain
// knowledge the ergodic metric consumes.

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ergmmd/lie.hpp"

namespace ergmmd {

struct DegenerateDomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PathologicalDensityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MeshParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> faces;

  double face_area(std::size_t f) const;
  Vec3 face_normal(std::size_t f) const;
  double total_area() const;

  /// Index ranges, distinct vertices per face, positive total area.
  void validate() const;
};

/// M points drawn from the utility measure, with optional unit normals and
/// optional per-point weights summing to one. Points are columns.
struct DomainSampleSet {
  Eigen::MatrixXd points;                      // d x M
  std::optional<Eigen::Matrix3Xd> normals;     // 3 x M, unit length
  std::optional<Eigen::VectorXd> weights;      // nonnegative, sums to 1

  int dimension() const { return static_cast<int>(points.rows()); }
  int count() const { return static_cast<int>(points.cols()); }

  void validate() const;
};

/// Reads the ASCII OBJ subset (v/f records; faces with more than three
/// vertices are fan-triangulated, 1-based indices). Unknown records are
/// skipped.
TriangleMesh load_mesh(const std::string& path);

/// Area-weighted face choice plus uniform barycentric sampling; normals are
/// the face normals. Bit-reproducible under a fixed seed.
DomainSampleSet sample_surface_uniform(const TriangleMesh& mesh, int count,
                                       std::uint64_t seed);

/// Resamples count_out points with replacement, probability proportional to
/// the per-sample score. Output weights are uniform (reset to none) so the
/// equal-weight metric sums apply unchanged.
DomainSampleSet importance_filter(const DomainSampleSet& samples,
                                  const Eigen::VectorXd& scores, int count_out,
                                  std::uint64_t seed);

/// Translates each point by buffer * normal; normals are preserved.
DomainSampleSet offset_along_normals(const DomainSampleSet& samples,
                                     double buffer);

struct GaussianMixture2d {
  struct Component {
    double weight = 1.0;
    Eigen::Vector2d mean = Eigen::Vector2d::Zero();
    Eigen::Matrix2d cov = Eigen::Matrix2d::Identity();
  };
  std::vector<Component> components;  // empty means uniform over the bounds
};

/// Rejection sampling of the mixture density restricted to the box; an empty
/// mixture falls back to the uniform density. Throws PathologicalDensityError
/// if the acceptance rate stays below 1e-4 after 1e7 proposals.
DomainSampleSet sample_density_2d(const GaussianMixture2d& mixture,
                                  const Eigen::Vector2d& lo,
                                  const Eigen::Vector2d& hi, int count,
                                  std::uint64_t seed);

/// CSV schema: header `x,y,z[,nx,ny,nz][,w]`. Two-dimensional sets are
/// written with z = 0.
void save_samples_csv(const DomainSampleSet& samples, const std::string& path);
DomainSampleSet load_samples_csv(const std::string& path);

}  // namespace ergmmd
