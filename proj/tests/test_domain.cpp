#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <random>

#include "ergmmd/domain.hpp"
#include "support.hpp"

using namespace ergmmd;
using ergmmd::testing::TempDir;
using ergmmd::testing::write_file;

namespace {

// Axis-aligned unit cube [0,1]^3, outward winding.
std::string cube_obj() {
  return R"(# unit cube
v 0 0 0
v 1 0 0
v 1 1 0
v 0 1 0
v 0 0 1
v 1 0 1
v 1 1 1
v 0 1 1
f 1 4 3
f 1 3 2
f 5 6 7
f 5 7 8
f 1 2 6
f 1 6 5
f 2 3 7
f 2 7 6
f 3 4 8
f 3 8 7
f 4 1 5
f 4 5 8
)";
}

}  // namespace

TEST_CASE("load_mesh parses the obj subset") {
  TempDir dir;
  SUBCASE("single triangle") {
    write_file(dir.file("tri.obj"), "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n");
    TriangleMesh mesh = load_mesh(dir.file("tri.obj"));
    CHECK(mesh.vertices.size() == 3);
    CHECK(mesh.faces.size() == 1);
  }
  SUBCASE("quad faces are fan-triangulated") {
    write_file(dir.file("quad.obj"),
               "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n");
    TriangleMesh mesh = load_mesh(dir.file("quad.obj"));
    CHECK(mesh.faces.size() == 2);
    CHECK(mesh.total_area() == doctest::Approx(1.0));
  }
  SUBCASE("slash-form face tokens") {
    write_file(dir.file("slash.obj"),
               "v 0 0 0\nv 1 0 0\nv 0 1 0\nvn 0 0 1\nf 1//1 2//1 3//1\n");
    CHECK(load_mesh(dir.file("slash.obj")).faces.size() == 1);
  }
  SUBCASE("zero index is rejected (obj is 1-indexed)") {
    write_file(dir.file("bad.obj"), "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 0 1 2\n");
    CHECK_THROWS_AS(load_mesh(dir.file("bad.obj")), MeshParseError);
  }
  SUBCASE("out-of-range index is rejected") {
    write_file(dir.file("oob.obj"), "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 4\n");
    CHECK_THROWS_AS(load_mesh(dir.file("oob.obj")), MeshParseError);
  }
  SUBCASE("empty mesh is rejected") {
    write_file(dir.file("empty.obj"), "# nothing\n");
    CHECK_THROWS_AS(load_mesh(dir.file("empty.obj")), MeshParseError);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_mesh(dir.file("nope.obj")), MeshParseError);
  }
}

TEST_CASE("surface sampling") {
  SUBCASE("single triangle: samples satisfy the plane equation") {
    TriangleMesh mesh;
    mesh.vertices = {Vec3(0, 0, 0.5), Vec3(1, 0, 0.5), Vec3(0, 1, 0.5)};
    mesh.faces = {{0, 1, 2}};
    DomainSampleSet s = sample_surface_uniform(mesh, 100, 42);
    REQUIRE(s.count() == 100);
    REQUIRE(s.normals.has_value());
    for (int j = 0; j < s.count(); ++j) {
      CHECK(std::abs(s.points(2, j) - 0.5) < 1e-9);  // plane z = 0.5
      CHECK(std::abs(s.normals->col(j).norm() - 1.0) < 1e-12);
      // inside the triangle
      CHECK(s.points(0, j) >= -1e-12);
      CHECK(s.points(1, j) >= -1e-12);
      CHECK(s.points(0, j) + s.points(1, j) <= 1.0 + 1e-12);
    }
  }
  SUBCASE("area-weighted face choice") {
    // areas 1 and 3; binomial 3-sigma band around 0.75 at M=10000
    TriangleMesh mesh;
    mesh.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 2, 0),
                     Vec3(0, 0, 1), Vec3(3, 0, 1), Vec3(0, 2, 1)};
    mesh.faces = {{0, 1, 2}, {3, 4, 5}};
    CHECK(mesh.face_area(0) == doctest::Approx(1.0));
    CHECK(mesh.face_area(1) == doctest::Approx(3.0));
    DomainSampleSet s = sample_surface_uniform(mesh, 10000, 1);
    int on_large = 0;
    for (int j = 0; j < s.count(); ++j)
      if (s.points(2, j) > 0.5) ++on_large;
    double frac = on_large / 10000.0;
    CHECK(frac == doctest::Approx(0.75).epsilon(0.02 / 0.75));
  }
  SUBCASE("single sample") {
    TriangleMesh mesh;
    mesh.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)};
    mesh.faces = {{0, 1, 2}};
    DomainSampleSet s = sample_surface_uniform(mesh, 1, 3);
    CHECK(s.count() == 1);
    CHECK(std::abs(s.normals->col(0).norm() - 1.0) < 1e-12);
  }
  SUBCASE("bit-reproducible under a fixed seed") {
    TriangleMesh mesh;
    mesh.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(1, 1, 1)};
    mesh.faces = {{0, 1, 2}, {1, 3, 2}};
    DomainSampleSet a = sample_surface_uniform(mesh, 500, 9);
    DomainSampleSet b = sample_surface_uniform(mesh, 500, 9);
    CHECK(a.points == b.points);
    CHECK(*a.normals == *b.normals);
  }
  SUBCASE("degenerate mesh") {
    TriangleMesh mesh;
    mesh.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(2, 0, 0)};
    mesh.faces = {{0, 1, 2}};  // collinear, zero area
    CHECK_THROWS_AS(sample_surface_uniform(mesh, 10, 0), DegenerateDomainError);
  }
}

TEST_CASE("importance filter") {
  SUBCASE("equal scores keep the distribution uniform (chi-square)") {
    const int n_in = 20, n_out = 10000;
    DomainSampleSet s;
    s.points.resize(1, n_in);
    for (int j = 0; j < n_in; ++j) s.points(0, j) = j;
    DomainSampleSet out = importance_filter(s, Eigen::VectorXd::Ones(n_in), n_out, 4);
    std::map<int, int> counts;
    for (int j = 0; j < out.count(); ++j) counts[static_cast<int>(out.points(0, j))]++;
    double chi2 = 0.0;
    const double expected = static_cast<double>(n_out) / n_in;
    for (int j = 0; j < n_in; ++j) {
      double d = counts[j] - expected;
      chi2 += d * d / expected;
    }
    CHECK(chi2 < 43.82);  // 19 dof at alpha = 0.001
  }
  SUBCASE("zero scores never survive") {
    DomainSampleSet s;
    s.points.resize(2, 3);
    s.points << 0, 1, 2, 0, 1, 2;
    Eigen::VectorXd scores(3);
    scores << 1, 0, 0;
    DomainSampleSet out = importance_filter(s, scores, 50, 7);
    for (int j = 0; j < out.count(); ++j) {
      CHECK(out.points(0, j) == 0.0);
      CHECK(out.points(1, j) == 0.0);
    }
  }
  SUBCASE("normal-alignment scores isolate the top cube face") {
    TempDir dir;
    write_file(dir.file("cube.obj"), cube_obj());
    TriangleMesh mesh = load_mesh(dir.file("cube.obj"));
    DomainSampleSet s = sample_surface_uniform(mesh, 600, 5);
    Eigen::VectorXd scores(s.count());
    for (int j = 0; j < s.count(); ++j)
      scores(j) = std::max(0.0, s.normals->col(j).dot(Vec3::UnitZ()));
    DomainSampleSet out = importance_filter(s, scores, 200, 6);
    for (int j = 0; j < out.count(); ++j) {
      CHECK((out.normals->col(j) - Vec3::UnitZ()).norm() < 1e-12);
      CHECK(out.points(2, j) == doctest::Approx(1.0));
    }
  }
  SUBCASE("support is preserved") {
    std::mt19937_64 rng(15);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    DomainSampleSet s;
    s.points.resize(2, 30);
    for (int j = 0; j < 30; ++j) s.points.col(j) = Eigen::Vector2d(uni(rng), uni(rng));
    Eigen::VectorXd scores(30);
    for (int j = 0; j < 30; ++j) scores(j) = uni(rng);
    DomainSampleSet out = importance_filter(s, scores, 100, 8);
    for (int j = 0; j < out.count(); ++j) {
      bool found = false;
      for (int i = 0; i < s.count(); ++i)
        if (out.points.col(j) == s.points.col(i)) found = true;
      CHECK(found);
    }
    CHECK_FALSE(out.weights.has_value());  // uniform weights
  }
  SUBCASE("all-zero scores are an error") {
    DomainSampleSet s;
    s.points = Eigen::MatrixXd::Random(2, 4);
    CHECK_THROWS_AS(importance_filter(s, Eigen::VectorXd::Zero(4), 10, 0),
                    std::invalid_argument);
  }
}

TEST_CASE("offset along normals") {
  DomainSampleSet s;
  s.points.resize(3, 4);
  s.points << 0, 1, 2, 3, 0, 0, 0, 0, 1, 1, 1, 1;
  Eigen::Matrix3Xd normals(3, 4);
  for (int j = 0; j < 4; ++j) normals.col(j) = Vec3::UnitZ();
  s.normals = normals;

  SUBCASE("zero buffer is the identity") {
    DomainSampleSet out = offset_along_normals(s, 0.0);
    CHECK(out.points == s.points);
  }
  SUBCASE("unit-z normals raise z by the buffer") {
    DomainSampleSet out = offset_along_normals(s, 0.1);
    for (int j = 0; j < 4; ++j) {
      CHECK(out.points(2, j) == doctest::Approx(1.1).epsilon(1e-15));
      CHECK(out.points(0, j) == s.points(0, j));
    }
  }
  SUBCASE("round trip") {
    DomainSampleSet out = offset_along_normals(offset_along_normals(s, 0.37), -0.37);
    CHECK((out.points - s.points).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("missing normals") {
    DomainSampleSet bare;
    bare.points = s.points;
    CHECK_THROWS_AS(offset_along_normals(bare, 0.1), std::invalid_argument);
  }
}

TEST_CASE("2d density sampling") {
  SUBCASE("gaussian mean recovery (CLT bound)") {
    GaussianMixture2d mix;
    GaussianMixture2d::Component c;
    c.mean = Eigen::Vector2d(0.5, 0.5);
    c.cov = 0.01 * Eigen::Matrix2d::Identity();
    mix.components.push_back(c);
    const int m = 10000;
    DomainSampleSet s =
        sample_density_2d(mix, Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 1), m, 12);
    Eigen::Vector2d mean = s.points.rowwise().mean();
    double tol = 3.0 * 0.1 / std::sqrt(static_cast<double>(m));
    CHECK(std::abs(mean.x() - 0.5) < tol);
    CHECK(std::abs(mean.y() - 0.5) < tol);
  }
  SUBCASE("uniform fallback passes a KS test per axis") {
    GaussianMixture2d mix;  // no components
    const int m = 4000;
    DomainSampleSet s =
        sample_density_2d(mix, Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 1), m, 13);
    for (int axis = 0; axis < 2; ++axis) {
      std::vector<double> v(s.points.row(axis).begin(), s.points.row(axis).end());
      std::sort(v.begin(), v.end());
      double ks = 0.0;
      for (int i = 0; i < m; ++i) {
        double ecdf_hi = static_cast<double>(i + 1) / m;
        double ecdf_lo = static_cast<double>(i) / m;
        ks = std::max({ks, std::abs(ecdf_hi - v[i]), std::abs(v[i] - ecdf_lo)});
      }
      CHECK(ks < 1.63 / std::sqrt(static_cast<double>(m)));
    }
  }
  SUBCASE("single sample stays in bounds") {
    GaussianMixture2d mix;
    DomainSampleSet s =
        sample_density_2d(mix, Eigen::Vector2d(-2, 3), Eigen::Vector2d(-1, 4), 1, 14);
    CHECK(s.count() == 1);
    CHECK(s.points(0, 0) >= -2.0);
    CHECK(s.points(0, 0) <= -1.0);
    CHECK(s.points(1, 0) >= 3.0);
    CHECK(s.points(1, 0) <= 4.0);
  }
  SUBCASE("pathological density is detected") {
    GaussianMixture2d mix;
    GaussianMixture2d::Component c;
    c.mean = Eigen::Vector2d(500, 500);
    c.cov = 1e-8 * Eigen::Matrix2d::Identity();
    mix.components.push_back(c);
    CHECK_THROWS_AS(sample_density_2d(mix, Eigen::Vector2d(0, 0),
                                      Eigen::Vector2d(1000, 1000), 10, 15),
                    PathologicalDensityError);
  }
  SUBCASE("deterministic under seed") {
    GaussianMixture2d mix;
    GaussianMixture2d::Component c;
    c.mean = Eigen::Vector2d(0.3, 0.7);
    c.cov = 0.05 * Eigen::Matrix2d::Identity();
    mix.components.push_back(c);
    DomainSampleSet a =
        sample_density_2d(mix, Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 1), 250, 16);
    DomainSampleSet b =
        sample_density_2d(mix, Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 1), 250, 16);
    CHECK(a.points == b.points);
  }
}

TEST_CASE("samples csv round trip") {
  TempDir dir;
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  DomainSampleSet s;
  const int m = 10;
  s.points.resize(3, m);
  Eigen::Matrix3Xd normals(3, m);
  Eigen::VectorXd w(m);
  for (int j = 0; j < m; ++j) {
    s.points.col(j) = Vec3(uni(rng), uni(rng), uni(rng));
    normals.col(j) = Vec3(uni(rng), uni(rng), uni(rng)).normalized();
    w(j) = 1.0 + uni(rng);
  }
  s.normals = normals;
  s.weights = w / w.sum();

  std::string path = dir.file("samples.csv");
  save_samples_csv(s, path);

  SUBCASE("header and row count") {
    std::string text = ergmmd::testing::read_file(path);
    CHECK(text.rfind("x,y,z,nx,ny,nz,w\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == m + 1);
  }
  SUBCASE("round trip is exact") {
    DomainSampleSet back = load_samples_csv(path);
    CHECK(back.points == s.points);
    CHECK(*back.normals == *s.normals);
    CHECK(((*back.weights) - (*s.weights)).cwiseAbs().maxCoeff() < 1e-17);
  }
  SUBCASE("points-only schema") {
    DomainSampleSet bare;
    bare.points = s.points;
    save_samples_csv(bare, dir.file("bare.csv"));
    std::string text = ergmmd::testing::read_file(dir.file("bare.csv"));
    CHECK(text.rfind("x,y,z\n", 0) == 0);
    DomainSampleSet back = load_samples_csv(dir.file("bare.csv"));
    CHECK_FALSE(back.normals.has_value());
    CHECK(back.points == bare.points);
  }
}
