#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "lsflow/fields.hpp"
#include "lsflow/rng.hpp"
#include "lsflow/types.hpp"

namespace lsflow {

using ScalarField = std::function<double(const Vec3&)>;

// Marching cubes over a regular grid on [lo, hi] with `resolution` cells per
// axis. Shared edge vertices are welded; triangles with area <= 1e-12 are
// suppressed. An all-same-sign grid produces an empty mesh.
TriMesh marching_cubes(const ScalarField& field, int resolution, double iso = 0.0,
                       const Vec3& lo = Vec3(-1.0, -1.0, -1.0),
                       const Vec3& hi = Vec3(1.0, 1.0, 1.0));

// Zero level set of f(., t) on the normalized domain [-1,1]^3.
TriMesh extract_mesh(const ImplicitField& F, double t, int resolution);

// Signed volume (1/6)·sum det[v0 v1 v2]; positive for outward orientation.
// Requires a closed, consistently oriented mesh: every undirected edge shared
// by exactly two triangles with opposite directions.
double mesh_volume(const TriMesh& mesh);

double chamfer(const std::vector<Vec3>& A, const std::vector<Vec3>& B);
double hausdorff(const std::vector<Vec3>& A, const std::vector<Vec3>& B);

struct MetricReport {
  double cd = 0.0;
  double hd = 0.0;
  double cd_scaled() const { return cd * 1e3; }
  double hd_scaled() const { return hd * 1e2; }
};

MetricReport compare_point_sets(const std::vector<Vec3>& A, const std::vector<Vec3>& B);

// Area-weighted uniform surface samples with per-face normals.
PointCloud sample_mesh_surface(const TriMesh& mesh, int n, std::uint64_t seed);

// Unit-style icosphere: 12-vertex icosahedron refined by midpoint subdivision,
// vertices projected onto the sphere of the given radius. Outward orientation.
TriMesh icosphere(double radius, int subdivisions);

}  // namespace lsflow
