#pragma once
// Shared helpers for the test binaries: temp directories, file helpers, and
// independent oracles kept deliberately separate from the library code paths
// they check.

#include <Eigen/Dense>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "ergmmd/metric.hpp"

namespace ergmmd::testing {

struct TempDir {
  std::filesystem::path path;

  TempDir() {
    auto base = std::filesystem::temp_directory_path();
    for (int i = 0; i < 10000; ++i) {
      auto candidate = base / ("ergmmd_test_" + std::to_string(::getpid()) + "_" +
                               std::to_string(counter() + i));
      std::error_code ec;
      if (std::filesystem::create_directory(candidate, ec)) {
        path = candidate;
        counter() += i + 1;
        return;
      }
    }
    throw std::runtime_error("could not create temp directory");
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::string file(const std::string& name) const { return (path / name).string(); }

 private:
  static int& counter() {
    static int c = 0;
    return c;
  }
};

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

// Independent Rodrigues evaluation in outer-product form (the library uses
// the matrix-series form).
inline Eigen::Matrix3d rodrigues_oracle(const Eigen::Vector3d& w) {
  double theta = w.norm();
  if (theta == 0.0) return Eigen::Matrix3d::Identity();
  Eigen::Vector3d a = w / theta;
  double c = std::cos(theta), s = std::sin(theta);
  Eigen::Matrix3d r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r(i, j) = (i == j ? c : 0.0) + (1.0 - c) * a(i) * a(j);
  r(0, 1) += -s * a(2);
  r(0, 2) += s * a(1);
  r(1, 0) += s * a(2);
  r(1, 2) += -s * a(0);
  r(2, 0) += -s * a(1);
  r(2, 1) += s * a(0);
  return r;
}

// Straightforward double-sum emmd, written independently of the library's
// pair-symmetric accumulation.
inline double emmd_brute_force(const Eigen::MatrixXd& traj_pts,
                               const Eigen::MatrixXd& sample_pts, double sigma) {
  const double t = traj_pts.cols(), m = sample_pts.cols();
  double self = 0.0, cross = 0.0;
  for (int i = 0; i < traj_pts.cols(); ++i) {
    for (int j = 0; j < traj_pts.cols(); ++j)
      self += std::exp(-(traj_pts.col(i) - traj_pts.col(j)).squaredNorm() /
                       (2.0 * sigma * sigma));
    for (int j = 0; j < sample_pts.cols(); ++j)
      cross += std::exp(-(traj_pts.col(i) - sample_pts.col(j)).squaredNorm() /
                        (2.0 * sigma * sigma));
  }
  return self / (t * t) - 2.0 * cross / (t * m);
}

// Central finite differences of emmd over every state coordinate.
inline Eigen::MatrixXd emmd_gradient_fd(const Trajectory& traj,
                                        const DomainSampleSet& samples,
                                        const KernelSpec& spec, const ProjectionMap& g,
                                        double h = 1e-6) {
  Eigen::MatrixXd grad(traj.state_dim(), traj.horizon());
  Trajectory work = traj;
  for (int t = 0; t < traj.horizon(); ++t) {
    for (int i = 0; i < traj.state_dim(); ++i) {
      double orig = work.states(i, t);
      work.states(i, t) = orig + h;
      double plus = emmd(work, samples, spec, g);
      work.states(i, t) = orig - h;
      double minus = emmd(work, samples, spec, g);
      work.states(i, t) = orig;
      grad(i, t) = (plus - minus) / (2.0 * h);
    }
  }
  return grad;
}

// Small synthetic chains for kinematics-based instances.
inline SerialChain planar_two_link(double l1 = 1.0, double l2 = 1.0) {
  SerialChain chain;
  Joint j1;
  j1.axis = Eigen::Vector3d::UnitZ();
  Joint j2;
  j2.axis = Eigen::Vector3d::UnitZ();
  j2.offset.translation = Eigen::Vector3d(l1, 0, 0);
  chain.joints = {j1, j2};
  chain.tip.translation = Eigen::Vector3d(l2, 0, 0);
  return chain;
}

inline SerialChain random_chain(int joints, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  SerialChain chain;
  for (int i = 0; i < joints; ++i) {
    Joint j;
    j.axis = (i % 2 == 0) ? Eigen::Vector3d::UnitZ() : Eigen::Vector3d::UnitY();
    j.offset.translation = Eigen::Vector3d(0.1 * uni(rng), 0.1 * uni(rng), 0.3 + 0.1 * uni(rng));
    chain.joints.push_back(j);
  }
  chain.tip.translation = Eigen::Vector3d(0, 0, 0.1);
  return chain;
}

}  // namespace ergmmd::testing
