#pragma once
// Positive-definite kernels on Euclidean space and SE(3). Both families are
// bounded in (0, 1] and continuous; the Euclidean RBF is characteristic on
// compact domains, so the induced MMD is a proper metric there.

#include <Eigen/Core>

#include "ergmmd/domain.hpp"
#include "ergmmd/lie.hpp"

namespace ergmmd {

enum class KernelFamily { rbf_euclidean, se3_logmap };

struct KernelSpec {
  KernelFamily family = KernelFamily::rbf_euclidean;
  double sigma = 1.0;                       // bandwidth, domain units
  TangentWeight tangent_weight;             // se3 family only

  void validate() const {
    if (!(sigma > 0.0)) throw std::invalid_argument("kernel: sigma must be positive");
  }
};

/// RBF: exp(-|a-b|^2 / (2 sigma^2)).
double kernel_eval(const KernelSpec& spec, const Eigen::VectorXd& a,
                   const Eigen::VectorXd& b);

/// SE(3): exp(-|log(a^-1 b)|^2_W / (2 sigma^2)) with W the tangent weight.
/// Throws BranchSingularityError when a^-1 b is within 1e-6 of the antipode.
double kernel_eval(const KernelSpec& spec, const Pose& a, const Pose& b);

/// d/da of the RBF kernel: -(a - b) / sigma^2 * k(a, b).
Eigen::VectorXd kernel_grad_first(const KernelSpec& spec, const Eigen::VectorXd& a,
                                  const Eigen::VectorXd& b);

/// Derivative of the SE(3) kernel on the right tangent chart at a, i.e. of
/// delta -> k(a * exp(delta), b) at delta = 0, by central finite differences
/// with step 1e-6 * max(1, |log(a^-1 b)|).
Vec6 kernel_grad_first(const KernelSpec& spec, const Pose& a, const Pose& b);

/// Median of pairwise distances over a subset of at most 1000 samples
/// (mean-of-middle-two for even counts), divided by sqrt(2). Deterministic.
double bandwidth_median_heuristic(const DomainSampleSet& samples);

}  // namespace ergmmd
