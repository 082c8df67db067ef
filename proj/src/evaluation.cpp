#include "ergmmd/evaluation.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>

#include "ergmmd/rng.hpp"

namespace ergmmd {

namespace {

// Projected comparison points: full Euclidean coordinates, or translations
// for pose-valued maps (matching the pose lift of the samples).
Eigen::MatrixXd comparison_points(const Trajectory& traj, const ProjectionMap& g) {
  if (!g.pose_valued()) return project_trajectory_euclidean(traj, g);
  Eigen::MatrixXd pts(3, traj.horizon());
  for (int t = 0; t < traj.horizon(); ++t)
    pts.col(t) = g.project_pose(traj.states.col(t)).translation;
  return pts;
}

}  // namespace

double coverage_percent(const Trajectory& traj, const DomainSampleSet& samples,
                        double radius, const ProjectionMap& g) {
  if (!(radius > 0.0)) throw std::invalid_argument("coverage: radius must be positive");
  traj.validate();
  samples.validate();
  Eigen::MatrixXd pts = comparison_points(traj, g);
  if (pts.rows() != samples.points.rows())
    throw std::invalid_argument("coverage: dimension mismatch between projection and samples");

  const double r2 = radius * radius;
  int covered = 0;
  for (int j = 0; j < samples.count(); ++j) {
    for (int t = 0; t < pts.cols(); ++t) {
      if ((pts.col(t) - samples.points.col(j)).squaredNorm() <= r2) {
        ++covered;
        break;
      }
    }
  }
  return 100.0 * static_cast<double>(covered) / static_cast<double>(samples.count());
}

double trajectory_length(const Trajectory& traj, const ProjectionMap& g) {
  Eigen::MatrixXd pts = comparison_points(traj, g);
  double len = 0.0;
  for (int t = 0; t + 1 < pts.cols(); ++t) len += (pts.col(t + 1) - pts.col(t)).norm();
  return len;
}

std::vector<int> tsp_nearest_neighbor(const DomainSampleSet& samples, int start_index) {
  samples.validate();
  const int m = samples.count();
  if (m < 2) throw std::invalid_argument("tsp: need at least two samples");
  if (start_index < 0 || start_index >= m)
    throw std::invalid_argument("tsp: start index out of range");

  std::vector<bool> visited(m, false);
  std::vector<int> order;
  order.reserve(m);
  int current = start_index;
  visited[current] = true;
  order.push_back(current);
  for (int step = 1; step < m; ++step) {
    double best = std::numeric_limits<double>::infinity();
    int next = -1;
    for (int j = 0; j < m; ++j) {
      if (visited[j]) continue;
      double d = (samples.points.col(current) - samples.points.col(j)).squaredNorm();
      if (d < best) {  // strict: ties keep the lowest index
        best = d;
        next = j;
      }
    }
    visited[next] = true;
    order.push_back(next);
    current = next;
  }
  return order;
}

double tour_length(const DomainSampleSet& samples, const std::vector<int>& order) {
  double len = 0.0;
  for (std::size_t i = 0; i + 1 < order.size(); ++i)
    len += (samples.points.col(order[i]) - samples.points.col(order[i + 1])).norm();
  return len;
}

Trajectory greedy_mmd_controller(const ProblemSpec& problem, const Eigen::VectorXd& x0,
                                 int horizon, int grid_per_dim) {
  problem.validate();
  if (horizon < 1) throw std::invalid_argument("greedy controller: horizon must be >= 1");
  if (!problem.control_bounds)
    throw std::invalid_argument("greedy controller: problem needs control bounds");
  if (grid_per_dim < 2 || grid_per_dim % 2 == 0)
    throw std::invalid_argument("greedy controller: grid_per_dim must be odd and >= 3");

  const int m = problem.dynamics.control_dim;
  const Eigen::VectorXd& lo = problem.control_bounds->first;
  const Eigen::VectorXd& hi = problem.control_bounds->second;

  // Control candidates: a regular grid over the box. The midpoint of an odd
  // grid is (lo+hi)/2, which is zero for symmetric bounds, so standing still
  // is always available there.
  long total = 1;
  for (int i = 0; i < m; ++i) total *= grid_per_dim;
  std::vector<Eigen::VectorXd> candidates;
  candidates.reserve(total);
  for (long c = 0; c < total; ++c) {
    Eigen::VectorXd u(m);
    long rem = c;
    for (int i = 0; i < m; ++i) {
      int gi = rem % grid_per_dim;
      rem /= grid_per_dim;
      u(i) = lo(i) + (hi(i) - lo(i)) * static_cast<double>(gi) / (grid_per_dim - 1);
    }
    candidates.push_back(u);
  }

  const KernelSpec& spec = problem.kernel;
  const ProjectionMap& g = problem.projection;
  const bool poses = g.pose_valued();
  const double m_samples = problem.samples.count();

  std::vector<Pose> pose_pts, pose_omega;
  Eigen::MatrixXd euc_pts;
  if (poses) {
    pose_omega = lift_samples_to_poses(problem.samples);
  } else {
    euc_pts.resize(g.euclidean_dimension(problem.dynamics.state_dim), horizon);
  }

  Trajectory traj;
  traj.dt = problem.dynamics.dt;
  traj.states.resize(problem.dynamics.state_dim, horizon);
  traj.controls = Eigen::MatrixXd::Zero(m, horizon);
  traj.states.col(0) = x0;

  // Running sums of the V-statistic: self over chosen points, cross against
  // the samples. Extending by one point only needs its kernel row.
  double self_sum = 1.0;
  double cross_sum = 0.0;
  if (poses) {
    pose_pts.push_back(g.project_pose(x0));
    for (const Pose& s : pose_omega) cross_sum += kernel_eval(spec, pose_pts[0], s);
  } else {
    euc_pts.col(0) = g.project_euclidean(x0);
    for (int j = 0; j < problem.samples.count(); ++j)
      cross_sum += kernel_eval(spec, euc_pts.col(0), problem.samples.points.col(j));
  }

  for (int t = 1; t < horizon; ++t) {
    double best_score = std::numeric_limits<double>::infinity();
    Eigen::VectorXd best_u;
    double best_self = 0.0, best_cross = 0.0;
    const double tt = static_cast<double>(t + 1);
    for (const Eigen::VectorXd& u : candidates) {
      Eigen::VectorXd xn = problem.dynamics.step(traj.states.col(t - 1), u);
      double self_add = 1.0, cross_add = 0.0;
      if (poses) {
        Pose pn = g.project_pose(xn);
        for (int s = 0; s < t; ++s)
          self_add += 2.0 * kernel_eval(spec, pn, pose_pts[s]);
        for (const Pose& s : pose_omega) cross_add += kernel_eval(spec, pn, s);
      } else {
        Eigen::VectorXd pn = g.project_euclidean(xn);
        for (int s = 0; s < t; ++s)
          self_add += 2.0 * kernel_eval(spec, pn, euc_pts.col(s));
        for (int j = 0; j < problem.samples.count(); ++j)
          cross_add += kernel_eval(spec, pn, problem.samples.points.col(j));
      }
      double score = (self_sum + self_add) / (tt * tt) -
                     2.0 * (cross_sum + cross_add) / (tt * m_samples);
      if (score < best_score) {
        best_score = score;
        best_u = u;
        best_self = self_add;
        best_cross = cross_add;
      }
    }
    traj.controls.col(t - 1) = best_u;
    traj.states.col(t) = problem.dynamics.step(traj.states.col(t - 1), best_u);
    self_sum += best_self;
    cross_sum += best_cross;
    if (poses) pose_pts.push_back(g.project_pose(traj.states.col(t)));
    else euc_pts.col(t) = g.project_euclidean(traj.states.col(t));
  }
  return traj;
}

std::vector<BenchRow> scaling_benchmark(const std::vector<int>& dims,
                                        const std::vector<int>& horizons,
                                        const std::vector<int>& sample_counts,
                                        int repeats, std::uint64_t seed) {
  if (repeats < 1) throw std::invalid_argument("benchmark: repeats must be >= 1");
  for (int v : dims)
    if (v < 1) throw std::invalid_argument("benchmark: dims must be >= 1");
  for (int v : horizons)
    if (v < 1) throw std::invalid_argument("benchmark: horizons must be >= 1");
  for (int v : sample_counts)
    if (v < 1) throw std::invalid_argument("benchmark: sample counts must be >= 1");

  struct Cell {
    int dim, horizon, samples;
    Trajectory traj;
    DomainSampleSet set;
    std::vector<double> times;
  };
  std::vector<Cell> cells;
  Rng rng(seed);
  for (int d : dims) {
    for (int horizon : horizons) {
      for (int m : sample_counts) {
        Cell cell{d, horizon, m, {}, {}, {}};
        cell.traj.dt = 0.1;
        cell.traj.states.resize(d, horizon);
        cell.traj.controls = Eigen::MatrixXd::Zero(d, horizon);
        for (int t = 0; t < horizon; ++t)
          for (int i = 0; i < d; ++i) cell.traj.states(i, t) = rng.uniform01();
        cell.set.points.resize(d, m);
        for (int j = 0; j < m; ++j)
          for (int i = 0; i < d; ++i) cell.set.points(i, j) = rng.uniform01();
        cells.push_back(std::move(cell));
      }
    }
  }

  KernelSpec spec;
  spec.sigma = 0.3;
  ProjectionMap g;  // identity
  volatile double sink = 0.0;
  auto run_once = [&](Cell& cell) {
    auto t0 = std::chrono::steady_clock::now();
    sink = sink + emmd(cell.traj, cell.set, spec, g);
    sink = sink + emmd_gradient(cell.traj, cell.set, spec, g)(0, 0);
    auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(t1 - t0).count();
  };

  for (Cell& cell : cells) run_once(cell);  // untimed warmup
  // interleave repeats across cells so load and clock drift spread evenly
  for (int r = 0; r < repeats; ++r)
    for (Cell& cell : cells) cell.times.push_back(run_once(cell));

  std::vector<BenchRow> rows;
  for (Cell& cell : cells) {
    std::sort(cell.times.begin(), cell.times.end());
    double median = repeats % 2 == 1
                        ? cell.times[repeats / 2]
                        : 0.5 * (cell.times[repeats / 2 - 1] + cell.times[repeats / 2]);
    double q1 = cell.times[repeats / 4];
    double q3 = cell.times[(3 * repeats) / 4];
    rows.push_back({cell.dim, cell.horizon, cell.samples, median, q3 - q1});
  }
  return rows;
}

void write_bench_csv(const std::vector<BenchRow>& rows, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "dim,T,M,median_seconds,iqr_seconds\n";
  char buf[32];
  for (const auto& r : rows) {
    out << r.dim << ',' << r.horizon << ',' << r.samples << ',';
    auto res = std::to_chars(buf, buf + sizeof(buf), r.median_seconds);
    out.write(buf, res.ptr - buf);
    out << ',';
    res = std::to_chars(buf, buf + sizeof(buf), r.iqr_seconds);
    out.write(buf, res.ptr - buf);
    out << '\n';
  }
}

}  // namespace ergmmd
