#include "ergmmd/domain.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ergmmd/rng.hpp"

namespace ergmmd {

double TriangleMesh::face_area(std::size_t f) const {
  const auto& tri = faces[f];
  Vec3 e1 = vertices[tri[1]] - vertices[tri[0]];
  Vec3 e2 = vertices[tri[2]] - vertices[tri[0]];
  return 0.5 * e1.cross(e2).norm();
}

Vec3 TriangleMesh::face_normal(std::size_t f) const {
  const auto& tri = faces[f];
  Vec3 e1 = vertices[tri[1]] - vertices[tri[0]];
  Vec3 e2 = vertices[tri[2]] - vertices[tri[0]];
  Vec3 n = e1.cross(e2);
  double len = n.norm();
  if (len == 0.0) return Vec3::Zero();
  return n / len;
}

double TriangleMesh::total_area() const {
  double area = 0.0;
  for (std::size_t f = 0; f < faces.size(); ++f) area += face_area(f);
  return area;
}

void TriangleMesh::validate() const {
  if (vertices.empty() || faces.empty())
    throw MeshParseError("mesh: empty vertex or face list");
  const int nv = static_cast<int>(vertices.size());
  for (const auto& tri : faces) {
    for (int idx : tri)
      if (idx < 0 || idx >= nv)
        throw MeshParseError("mesh: face index out of range");
    if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2])
      throw MeshParseError("mesh: face with repeated vertex");
  }
  if (!(total_area() > 0.0)) throw DegenerateDomainError("mesh: total area is zero");
}

void DomainSampleSet::validate() const {
  if (count() < 1) throw std::invalid_argument("sample set: empty");
  if (!points.allFinite()) throw std::invalid_argument("sample set: non-finite point");
  if (normals) {
    if (normals->cols() != points.cols())
      throw std::invalid_argument("sample set: normal count mismatch");
    for (int j = 0; j < normals->cols(); ++j)
      if (std::abs(normals->col(j).norm() - 1.0) > 1e-9)
        throw std::invalid_argument("sample set: normal is not unit length");
  }
  if (weights) {
    if (weights->size() != points.cols())
      throw std::invalid_argument("sample set: weight count mismatch");
    if (weights->minCoeff() < 0.0)
      throw std::invalid_argument("sample set: negative weight");
    if (std::abs(weights->sum() - 1.0) > 1e-12)
      throw std::invalid_argument("sample set: weights do not sum to 1");
  }
}

namespace {

// Leading integer of an OBJ face token ("7", "7/1", "7//2", "7/1/2").
int parse_face_index(const std::string& token, int line_no) {
  std::size_t slash = token.find('/');
  std::string head = token.substr(0, slash);
  int value = 0;
  auto res = std::from_chars(head.data(), head.data() + head.size(), value);
  if (res.ec != std::errc() || res.ptr != head.data() + head.size())
    throw MeshParseError("obj parse error at line " + std::to_string(line_no) +
                         ": bad face index '" + token + "'");
  return value;
}

}  // namespace

TriangleMesh load_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MeshParseError("cannot open mesh file: " + path);

  TriangleMesh mesh;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ss(line);
    std::string tag;
    if (!(ss >> tag) || tag[0] == '#') continue;
    if (tag == "v") {
      Vec3 v;
      if (!(ss >> v.x() >> v.y() >> v.z()))
        throw MeshParseError("obj parse error at line " + std::to_string(line_no) +
                             ": vertex needs three coordinates");
      mesh.vertices.push_back(v);
    } else if (tag == "f") {
      std::vector<int> idx;
      std::string token;
      while (ss >> token) {
        int one_based = parse_face_index(token, line_no);
        if (one_based < 1 || one_based > static_cast<int>(mesh.vertices.size()))
          throw MeshParseError("obj parse error at line " + std::to_string(line_no) +
                               ": face index " + std::to_string(one_based) +
                               " out of range (OBJ is 1-indexed)");
        idx.push_back(one_based - 1);
      }
      if (idx.size() < 3)
        throw MeshParseError("obj parse error at line " + std::to_string(line_no) +
                             ": face needs at least three vertices");
      for (std::size_t k = 1; k + 1 < idx.size(); ++k)  // fan triangulation
        mesh.faces.push_back({idx[0], idx[k], idx[k + 1]});
    }
    // vn/vt/o/g/s/usemtl/mtllib are skipped
  }
  mesh.validate();
  return mesh;
}

DomainSampleSet sample_surface_uniform(const TriangleMesh& mesh, int count,
                                       std::uint64_t seed) {
  if (count < 1) throw std::invalid_argument("sample_surface_uniform: count must be >= 1");
  mesh.validate();

  std::vector<double> areas(mesh.faces.size());
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) areas[f] = mesh.face_area(f);
  DiscreteSampler faces(areas);

  Rng rng(seed);
  DomainSampleSet out;
  out.points.resize(3, count);
  Eigen::Matrix3Xd normals(3, count);
  for (int i = 0; i < count; ++i) {
    std::size_t f = faces.sample(rng);
    const auto& tri = mesh.faces[f];
    double u = rng.uniform01();
    double v = rng.uniform01();
    if (u + v > 1.0) {
      u = 1.0 - u;
      v = 1.0 - v;
    }
    const Vec3& a = mesh.vertices[tri[0]];
    out.points.col(i) = a + u * (mesh.vertices[tri[1]] - a) + v * (mesh.vertices[tri[2]] - a);
    normals.col(i) = mesh.face_normal(f);
  }
  out.normals = std::move(normals);
  return out;
}

DomainSampleSet importance_filter(const DomainSampleSet& samples,
                                  const Eigen::VectorXd& scores, int count_out,
                                  std::uint64_t seed) {
  samples.validate();
  if (scores.size() != samples.count())
    throw std::invalid_argument("importance_filter: score count mismatch");
  if (count_out < 1) throw std::invalid_argument("importance_filter: count_out must be >= 1");
  if (!scores.allFinite() || scores.minCoeff() < 0.0)
    throw std::invalid_argument("importance_filter: scores must be finite and nonnegative");
  if (scores.maxCoeff() <= 0.0)
    throw std::invalid_argument("importance_filter: all scores are zero");

  std::vector<double> w(scores.data(), scores.data() + scores.size());
  DiscreteSampler sampler(w);
  Rng rng(seed);

  DomainSampleSet out;
  out.points.resize(samples.points.rows(), count_out);
  if (samples.normals) out.normals = Eigen::Matrix3Xd(3, count_out);
  for (int i = 0; i < count_out; ++i) {
    std::size_t j = sampler.sample(rng);
    out.points.col(i) = samples.points.col(j);
    if (samples.normals) out.normals->col(i) = samples.normals->col(j);
  }
  return out;  // uniform weights: field left unset
}

DomainSampleSet offset_along_normals(const DomainSampleSet& samples, double buffer) {
  if (!samples.normals)
    throw std::invalid_argument("offset_along_normals: samples carry no normals");
  samples.validate();
  if (samples.dimension() != 3)
    throw std::invalid_argument("offset_along_normals: requires 3D points");
  DomainSampleSet out = samples;
  out.points += buffer * (*samples.normals);
  return out;
}

DomainSampleSet sample_density_2d(const GaussianMixture2d& mixture,
                                  const Eigen::Vector2d& lo,
                                  const Eigen::Vector2d& hi, int count,
                                  std::uint64_t seed) {
  if (count < 1) throw std::invalid_argument("sample_density_2d: count must be >= 1");
  if (!((hi - lo).minCoeff() > 0.0))
    throw std::invalid_argument("sample_density_2d: degenerate bounds");

  struct Prepared {
    double weight;
    Eigen::Vector2d mean;
    Eigen::Matrix2d cov_inv;
    double norm_const;
  };
  std::vector<Prepared> comps;
  double wsum = 0.0;
  for (const auto& c : mixture.components) {
    if (!(c.weight > 0.0))
      throw std::invalid_argument("sample_density_2d: mixture weights must be positive");
    double det = c.cov.determinant();
    if (!(det > 0.0) || (c.cov - c.cov.transpose()).cwiseAbs().maxCoeff() > 1e-12 ||
        c.cov(0, 0) <= 0.0)
      throw std::invalid_argument("sample_density_2d: covariance is not positive-definite");
    comps.push_back({c.weight, c.mean, c.cov.inverse(),
                     1.0 / (2.0 * M_PI * std::sqrt(det))});
    wsum += c.weight;
  }

  auto density = [&](const Eigen::Vector2d& x) {
    if (comps.empty()) return 1.0;
    double f = 0.0;
    for (const auto& c : comps) {
      Eigen::Vector2d d = x - c.mean;
      f += (c.weight / wsum) * c.norm_const * std::exp(-0.5 * d.dot(c.cov_inv * d));
    }
    return f;
  };
  double bound = 0.0;
  if (comps.empty()) {
    bound = 1.0;
  } else {
    for (const auto& c : comps) bound += (c.weight / wsum) * c.norm_const;
  }

  Rng rng(seed);
  DomainSampleSet out;
  out.points.resize(2, count);
  constexpr std::int64_t kMaxProposals = 10'000'000;
  std::int64_t proposals = 0;
  int accepted = 0;
  while (accepted < count) {
    Eigen::Vector2d x(rng.uniform(lo.x(), hi.x()), rng.uniform(lo.y(), hi.y()));
    double u = rng.uniform01();
    ++proposals;
    if (u * bound <= density(x)) {
      out.points.col(accepted++) = x;
    }
    if (proposals >= kMaxProposals &&
        static_cast<double>(accepted) / static_cast<double>(proposals) < 1e-4)
      throw PathologicalDensityError(
          "sample_density_2d: acceptance rate below 1e-4 after 1e7 proposals");
  }
  return out;
}

namespace {

void append_double(std::string& s, double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  s.append(buf, res.ptr);
}

}  // namespace

void save_samples_csv(const DomainSampleSet& samples, const std::string& path) {
  samples.validate();
  const int d = samples.dimension();
  if (d < 1 || d > 3)
    throw std::invalid_argument("save_samples_csv: only 1-3 dimensional points");

  std::string text = "x,y,z";
  if (samples.normals) text += ",nx,ny,nz";
  if (samples.weights) text += ",w";
  text += "\n";
  for (int j = 0; j < samples.count(); ++j) {
    for (int r = 0; r < 3; ++r) {
      if (r) text += ',';
      append_double(text, r < d ? samples.points(r, j) : 0.0);
    }
    if (samples.normals) {
      for (int r = 0; r < 3; ++r) {
        text += ',';
        append_double(text, (*samples.normals)(r, j));
      }
    }
    if (samples.weights) {
      text += ',';
      append_double(text, (*samples.weights)(j));
    }
    text += '\n';
  }

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << text;
}

DomainSampleSet load_samples_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open samples csv: " + path);

  std::string header;
  if (!std::getline(in, header)) throw std::runtime_error("samples csv: empty file: " + path);
  bool has_normals = false, has_weights = false;
  if (header == "x,y,z") {
  } else if (header == "x,y,z,nx,ny,nz") {
    has_normals = true;
  } else if (header == "x,y,z,w") {
    has_weights = true;
  } else if (header == "x,y,z,nx,ny,nz,w") {
    has_normals = has_weights = true;
  } else {
    throw std::runtime_error("samples csv: unrecognized header '" + header + "' in " + path);
  }

  std::vector<double> values;
  const int cols = 3 + (has_normals ? 3 : 0) + (has_weights ? 1 : 0);
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string cell;
    int got = 0;
    while (std::getline(ss, cell, ',')) {
      values.push_back(std::stod(cell));
      ++got;
    }
    if (got != cols)
      throw std::runtime_error("samples csv: row with " + std::to_string(got) +
                               " fields, expected " + std::to_string(cols));
    ++rows;
  }
  if (rows == 0) throw std::runtime_error("samples csv: no data rows in " + path);

  DomainSampleSet out;
  out.points.resize(3, rows);
  if (has_normals) out.normals = Eigen::Matrix3Xd(3, rows);
  if (has_weights) out.weights = Eigen::VectorXd(rows);
  for (int j = 0; j < rows; ++j) {
    const double* row = values.data() + static_cast<std::size_t>(j) * cols;
    out.points.col(j) = Eigen::Vector3d(row[0], row[1], row[2]);
    if (has_normals) out.normals->col(j) = Eigen::Vector3d(row[3], row[4], row[5]);
    if (has_weights) (*out.weights)(j) = row[3 + (has_normals ? 3 : 0)];
  }
  out.validate();
  return out;
}

}  // namespace ergmmd
