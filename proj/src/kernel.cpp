#include "ergmmd/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "ergmmd/rng.hpp"

namespace ergmmd {

double kernel_eval(const KernelSpec& spec, const Eigen::VectorXd& a,
                   const Eigen::VectorXd& b) {
  if (spec.family != KernelFamily::rbf_euclidean)
    throw std::invalid_argument("kernel_eval: euclidean points need the rbf family");
  if (a.size() != b.size())
    throw std::invalid_argument("kernel_eval: point dimension mismatch");
  return std::exp(-(a - b).squaredNorm() / (2.0 * spec.sigma * spec.sigma));
}

double kernel_eval(const KernelSpec& spec, const Pose& a, const Pose& b) {
  if (spec.family != KernelFamily::se3_logmap)
    throw std::invalid_argument("kernel_eval: poses need the se3_logmap family");
  Twist xi = se3_log(a.inverse() * b);
  double d2 = weighted_tangent_norm_sq(xi, spec.tangent_weight);
  return std::exp(-d2 / (2.0 * spec.sigma * spec.sigma));
}

Eigen::VectorXd kernel_grad_first(const KernelSpec& spec, const Eigen::VectorXd& a,
                                  const Eigen::VectorXd& b) {
  double k = kernel_eval(spec, a, b);
  return (-(a - b) / (spec.sigma * spec.sigma)) * k;
}

Vec6 kernel_grad_first(const KernelSpec& spec, const Pose& a, const Pose& b) {
  Twist xi0 = se3_log(a.inverse() * b);
  const double h = 1e-6 * std::max(1.0, xi0.to_vector().norm());

  Vec6 grad;
  for (int i = 0; i < 6; ++i) {
    Vec6 delta = Vec6::Zero();
    delta(i) = h;
    double plus = kernel_eval(spec, a * se3_exp(Twist::from_vector(delta)), b);
    delta(i) = -h;
    double minus = kernel_eval(spec, a * se3_exp(Twist::from_vector(delta)), b);
    grad(i) = (plus - minus) / (2.0 * h);
  }
  return grad;
}

double bandwidth_median_heuristic(const DomainSampleSet& samples) {
  samples.validate();
  const int m = samples.count();
  if (m < 2)
    throw std::invalid_argument("bandwidth heuristic: need at least two samples");

  // Subset of at most 1000 samples; the subset draw uses a fixed seed so the
  // heuristic is a pure function of its input.
  constexpr int kMaxSubset = 1000;
  std::vector<int> idx(m);
  std::iota(idx.begin(), idx.end(), 0);
  int n = m;
  if (m > kMaxSubset) {
    Rng rng(0x9e3779b97f4a7c15ull);
    for (int i = 0; i < kMaxSubset; ++i) {
      std::size_t j = i + rng.index(m - i);
      std::swap(idx[i], idx[j]);
    }
    n = kMaxSubset;
  }

  std::vector<double> dists;
  dists.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      dists.push_back((samples.points.col(idx[i]) - samples.points.col(idx[j])).norm());

  std::sort(dists.begin(), dists.end());
  const std::size_t c = dists.size();
  double median = (c % 2 == 1) ? dists[c / 2]
                               : 0.5 * (dists[c / 2 - 1] + dists[c / 2]);
  if (!(median > 0.0))
    throw DegenerateDomainError("bandwidth heuristic: median pairwise distance is zero");
  return median / std::sqrt(2.0);
}

}  // namespace ergmmd
