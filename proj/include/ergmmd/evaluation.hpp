#pragma once
// Coverage reporting, baseline planners, and computational-scaling benchmarks.

#include <cstdint>
#include <string>
#include <vector>

#include "ergmmd/optimizer.hpp"

namespace ergmmd {

struct CoverageReport {
  double coverage_percent = 0.0;
  double emmd_final = 0.0;
  double emmd_initial = 0.0;
  double mmd_squared = 0.0;  // emmd_final + sample constant term
  double trajectory_length = 0.0;
  double wall_time = 0.0;  // seconds
};

/// 100 * fraction of samples within `radius` of at least one projected
/// trajectory point. Euclidean domains compare full points; SE(3) domains
/// compare translations.
double coverage_percent(const Trajectory& traj, const DomainSampleSet& samples,
                        double radius, const ProjectionMap& g);

/// Length of the projected path (positions; pose translations).
double trajectory_length(const Trajectory& traj, const ProjectionMap& g);

/// Greedy nearest-neighbor tour visiting every sample exactly once, starting
/// at start_index; ties break toward the lowest index.
std::vector<int> tsp_nearest_neighbor(const DomainSampleSet& samples, int start_index);

double tour_length(const DomainSampleSet& samples, const std::vector<int>& order);

/// Myopic baseline: at each step picks the control, from a grid over the
/// problem's control box, that minimizes the one-step-extended emmd of the
/// trajectory so far. The grid always contains zero.
Trajectory greedy_mmd_controller(const ProblemSpec& problem, const Eigen::VectorXd& x0,
                                 int horizon, int grid_per_dim = 5);

struct BenchRow {
  int dim = 0;
  int horizon = 0;
  int samples = 0;
  double median_seconds = 0.0;
  double iqr_seconds = 0.0;
};

/// Median wall time of one emmd + gradient evaluation per configuration,
/// over `repeats` timed runs on seeded random instances. Single-threaded.
std::vector<BenchRow> scaling_benchmark(const std::vector<int>& dims,
                                        const std::vector<int>& horizons,
                                        const std::vector<int>& sample_counts,
                                        int repeats, std::uint64_t seed);

/// Header: dim,T,M,median_seconds,iqr_seconds
void write_bench_csv(const std::vector<BenchRow>& rows, const std::string& path);

}  // namespace ergmmd
