#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "doctest.h"
#include "lsflow/surface.hpp"
#include "test_util.hpp"

using namespace lsflow;

namespace {

double sphere_sdf(const Vec3& x, double r) { return x.norm() - r; }

// 12-triangle unit cube [0,1]^3, outward orientation
TriMesh unit_cube() {
  TriMesh m;
  for (int i = 0; i < 8; ++i)
    m.vertices.emplace_back(i & 1 ? 1.0 : 0.0, i & 2 ? 1.0 : 0.0, i & 4 ? 1.0 : 0.0);
  m.triangles = {{0, 2, 1}, {1, 2, 3}, {4, 5, 6}, {5, 7, 6},   // z=0 (down), z=1 (up)
                 {0, 1, 4}, {1, 5, 4}, {2, 6, 3}, {3, 6, 7},   // y faces
                 {0, 4, 2}, {2, 4, 6}, {1, 3, 5}, {3, 7, 5}};  // x faces
  return m;
}

int euler_characteristic(const TriMesh& m) {
  std::set<std::pair<int, int>> edges;
  for (const auto& t : m.triangles)
    for (int e = 0; e < 3; ++e) {
      const int a = t[static_cast<std::size_t>(e)];
      const int b = t[static_cast<std::size_t>((e + 1) % 3)];
      edges.insert({std::min(a, b), std::max(a, b)});
    }
  return static_cast<int>(m.vertices.size()) - static_cast<int>(edges.size()) +
         static_cast<int>(m.triangles.size());
}

}  // namespace

TEST_CASE("marching cubes reconstructs a sphere to grid accuracy") {
  const double r = 0.5;
  const TriMesh m = marching_cubes([&](const Vec3& x) { return sphere_sdf(x, r); }, 64);
  REQUIRE(!m.empty());
  double worst = 0.0;
  for (const Vec3& v : m.vertices) worst = std::max(worst, std::abs(v.norm() - r));
  CHECK(worst <= 2.0 / 64);

  // genus 0, closed, outward oriented, volume within 1%
  CHECK(euler_characteristic(m) == 2);
  const double vol = mesh_volume(m);
  const double exact = 4.0 / 3.0 * M_PI * r * r * r;
  CHECK(vol > 0.0);
  CHECK(std::abs(vol - exact) / exact < 0.01);
}

TEST_CASE("marching cubes of an all-positive field is empty") {
  const TriMesh m = marching_cubes([](const Vec3&) { return 1.0; }, 16);
  CHECK(m.empty());
  CHECK(m.vertices.empty());
}

TEST_CASE("marching cubes puts plane vertices on the plane") {
  const TriMesh m = marching_cubes([](const Vec3& x) { return x.x(); }, 32);
  REQUIRE(!m.empty());
  for (const Vec3& v : m.vertices) CHECK(std::abs(v.x()) <= 1e-6);
  // open surface: volume must refuse and name the boundary edge count
  try {
    mesh_volume(m);
    FAIL("expected mesh_volume to throw on an open mesh");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("boundary") != std::string::npos);
  }
}

TEST_CASE("marching cubes volume error decreases monotonically with resolution") {
  const double exact = 4.0 / 3.0 * M_PI * std::pow(0.6, 3);
  double prev = 1e100;
  for (int res : {32, 64, 128}) {
    const TriMesh m = marching_cubes([&](const Vec3& x) { return sphere_sdf(x, 0.6); }, res);
    const double err = std::abs(mesh_volume(m) - exact);
    CHECK(err < prev);
    prev = err;
  }
}

TEST_CASE("marching cubes handles a union of blobs (closed, many cases)") {
  // min-of-spheres union exercises a wide range of cube configurations
  const std::vector<Vec3> centers = {{0.2, 0.1, -0.1}, {-0.25, 0.2, 0.15}, {0.0, -0.3, 0.1}};
  const std::vector<double> radii = {0.35, 0.3, 0.25};
  auto f = [&](const Vec3& x) {
    double d = 1e100;
    for (std::size_t i = 0; i < centers.size(); ++i)
      d = std::min(d, (x - centers[i]).norm() - radii[i]);
    return d;
  };
  for (int res : {23, 32, 47}) {
    const TriMesh m = marching_cubes(f, res);
    REQUIRE(!m.empty());
    CHECK(mesh_volume(m) > 0.0);  // implies closed + consistently oriented
  }
}

TEST_CASE("marching cubes stays closed when the surface hits grid points exactly") {
  // r = 0.5 with res 32 puts the six axis poles exactly on grid points
  const TriMesh m = marching_cubes([](const Vec3& x) { return x.norm() - 0.5; }, 32);
  REQUIRE(!m.empty());
  const double exact = 4.0 / 3.0 * M_PI * 0.125;
  CHECK(std::abs(mesh_volume(m) - exact) / exact < 0.01);
  for (const auto& t : m.triangles) {
    CHECK(t[0] != t[1]);
    CHECK(t[1] != t[2]);
    CHECK(t[0] != t[2]);
  }
}

TEST_CASE("extract_mesh vertex field values stay within a cell diagonal") {
  const ImplicitField F = testutil::random_implicit(2, {32, 32}, 77);
  const int res = 16;
  const TriMesh m = extract_mesh(F, 0.5, res);
  const double diag = std::sqrt(3.0) * 2.0 / res;
  for (const Vec3& v : m.vertices) CHECK(std::abs(sdf(F, {v, 0.5})) <= diag);
  CHECK_THROWS_AS(extract_mesh(F, 0.5, 4), ConfigError);
}

TEST_CASE("mesh_volume of the unit cube is 1 and negates under flip") {
  TriMesh m = unit_cube();
  CHECK(mesh_volume(m) == doctest::Approx(1.0).epsilon(1e-12));
  for (auto& t : m.triangles) std::swap(t[1], t[2]);
  CHECK(mesh_volume(m) == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("mesh_volume rejects meshes with boundary or bad indices") {
  TriMesh m = unit_cube();
  m.triangles.pop_back();  // open a hole: 3 boundary edges
  try {
    mesh_volume(m);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("3 boundary edges") != std::string::npos);
  }
  TriMesh bad = unit_cube();
  bad.triangles[0][0] = 99;
  CHECK_THROWS_AS(mesh_volume(bad), DimensionError);
}

TEST_CASE("icosphere volume approaches the analytic ball volume") {
  const TriMesh m = icosphere(1.0, 4);
  const double exact = 4.0 / 3.0 * M_PI;
  CHECK(euler_characteristic(m) == 2);
  CHECK(std::abs(mesh_volume(m) - exact) / exact < 0.01);
  // every vertex on the sphere by construction
  for (const Vec3& v : m.vertices) CHECK(v.norm() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(icosphere(-1.0, 2), ConfigError);
}

TEST_CASE("chamfer and hausdorff match on identical and shifted sets") {
  std::vector<Vec3> A = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  CHECK(chamfer(A, A) == 0.0);
  CHECK(hausdorff(A, A) == 0.0);
  const std::vector<Vec3> B = {{1, 0, 0}};
  const std::vector<Vec3> O = {{0, 0, 0}};
  CHECK(chamfer(O, B) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(hausdorff(O, B) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(chamfer({}, A), ConfigError);
  CHECK_THROWS_AS(hausdorff(A, {}), ConfigError);
}

TEST_CASE("chamfer and hausdorff equal the brute-force definition and are symmetric") {
  Rng rng(123);
  std::vector<Vec3> A, B;
  for (int i = 0; i < 500; ++i) {
    A.emplace_back(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
    B.emplace_back(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
  }
  // independent O(n^2) recomputation
  auto dmin = [](const Vec3& p, const std::vector<Vec3>& S) {
    double best = 1e100;
    for (const Vec3& q : S) best = std::min(best, (p - q).norm());
    return best;
  };
  double mean_ab = 0, mean_ba = 0, max_ab = 0, max_ba = 0;
  for (const Vec3& a : A) {
    const double d = dmin(a, B);
    mean_ab += d;
    max_ab = std::max(max_ab, d);
  }
  for (const Vec3& b : B) {
    const double d = dmin(b, A);
    mean_ba += d;
    max_ba = std::max(max_ba, d);
  }
  mean_ab /= static_cast<double>(A.size());
  mean_ba /= static_cast<double>(B.size());

  CHECK(std::abs(chamfer(A, B) - 0.5 * (mean_ab + mean_ba)) < 1e-12);
  CHECK(std::abs(hausdorff(A, B) - std::max(max_ab, max_ba)) < 1e-12);
  CHECK(chamfer(A, B) == chamfer(B, A));
  CHECK(hausdorff(A, B) == hausdorff(B, A));

  const MetricReport r = compare_point_sets(A, B);
  CHECK(r.cd == doctest::Approx(chamfer(A, B)).epsilon(1e-15));
  CHECK(r.hd == doctest::Approx(hausdorff(A, B)).epsilon(1e-15));
  CHECK(r.cd_scaled() == doctest::Approx(r.cd * 1e3));
  CHECK(r.hd_scaled() == doctest::Approx(r.hd * 1e2));
}

TEST_CASE("sample_mesh_surface stays on the mesh and weights by area") {
  TriMesh tri;
  tri.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  tri.triangles = {{0, 1, 2}};
  const PointCloud P = sample_mesh_surface(tri, 500, 7);
  REQUIRE(P.size() == 500);
  REQUIRE(P.has_normals());
  for (std::size_t i = 0; i < P.size(); ++i) {
    const Vec3& p = P.points[i];
    CHECK(p.z() == 0.0);
    CHECK(p.x() >= -1e-12);
    CHECK(p.y() >= -1e-12);
    CHECK(p.x() + p.y() <= 1.0 + 1e-12);
    CHECK(P.normals[i].isApprox(Vec3(0, 0, 1), 1e-12));
  }

  // area ratio 9:1 -> binomial split
  TriMesh two;  // areas 9 and 1
  two.vertices = {{0, 0, 0}, {3, 0, 0}, {0, 6, 0}, {10, 0, 0}, {12, 0, 0}, {10, 1, 0}};
  two.triangles = {{0, 1, 2}, {3, 4, 5}};
  const int n = 4000;
  const PointCloud Q = sample_mesh_surface(two, n, 8);
  int in_big = 0;
  for (const Vec3& p : Q.points) in_big += p.x() < 9.0 ? 1 : 0;
  const double frac = static_cast<double>(in_big) / n;
  CHECK(frac > 0.86);  // expected 0.9, binomial sd ~ 0.005
  CHECK(frac < 0.94);

  const PointCloud R1 = sample_mesh_surface(two, 100, 11);
  const PointCloud R2 = sample_mesh_surface(two, 100, 11);
  for (std::size_t i = 0; i < R1.size(); ++i) CHECK(R1.points[i] == R2.points[i]);
  CHECK_THROWS_AS(sample_mesh_surface(TriMesh{}, 10, 1), ConfigError);
}
