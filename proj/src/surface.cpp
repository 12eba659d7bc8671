#include "lsflow/surface.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>
#include <utility>

namespace lsflow {

namespace {

#include "mc_tables.inc"

// Cube corner offsets and the edge -> (corner, corner) incidence used by the
// case tables.
constexpr int kCorner[8][3] = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
                               {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}};
constexpr int kEdgeCorner[12][2] = {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {4, 5}, {5, 6},
                                    {6, 7}, {7, 4}, {0, 4}, {1, 5}, {2, 6}, {3, 7}};

double tri_area(const Vec3& a, const Vec3& b, const Vec3& c) {
  return 0.5 * (b - a).cross(c - a).norm();
}

}  // namespace

TriMesh marching_cubes(const ScalarField& field, int resolution, double iso,
                       const Vec3& lo, const Vec3& hi) {
  if (resolution < 1) throw ConfigError("marching_cubes: resolution must be >= 1");
  const int n = resolution + 1;
  const Vec3 step = (hi - lo) / static_cast<double>(resolution);

  std::vector<double> val(static_cast<std::size_t>(n) * n * n);
  std::vector<Vec3> pos(val.size());
  auto gid = [n](int i, int j, int k) {
    return (static_cast<std::size_t>(i) * n + j) * n + k;
  };
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const Vec3 p = lo + Vec3(i * step.x(), j * step.y(), k * step.z());
        const double v = field(p);
        if (!std::isfinite(v)) throw NumericError("marching_cubes: non-finite field value");
        pos[gid(i, j, k)] = p;
        val[gid(i, j, k)] = v;
      }

  TriMesh mesh;
  std::unordered_map<std::uint64_t, int> weld;  // 4 slots per grid point: 3 edges + the point

  auto weld_vertex = [&](std::uint64_t key, const Vec3& p) {
    auto it = weld.find(key);
    if (it != weld.end()) return it->second;
    const int idx = static_cast<int>(mesh.vertices.size());
    mesh.vertices.push_back(p);
    weld.emplace(key, idx);
    return idx;
  };

  // Vertex on the grid edge starting at grid point (i,j,k) along +axis.
  // Crossings that land (numerically) on a grid point are welded by the point
  // itself so that all incident edges agree on one vertex index; otherwise
  // exact-zero corner values produce coincident duplicates and crack the mesh.
  constexpr double kSnap = 1e-9;
  auto edge_vertex = [&](int i, int j, int k, int axis) {
    const std::size_t a = gid(i, j, k);
    const std::size_t b = gid(i + (axis == 0), j + (axis == 1), k + (axis == 2));
    const double va = val[a], vb = val[b];
    double t = vb == va ? 0.5 : (iso - va) / (vb - va);
    t = std::clamp(t, 0.0, 1.0);
    if (t <= kSnap) return weld_vertex(a * 4 + 3, pos[a]);
    if (t >= 1.0 - kSnap) return weld_vertex(b * 4 + 3, pos[b]);
    return weld_vertex(a * 4 + axis, pos[a] + t * (pos[b] - pos[a]));
  };

  for (int i = 0; i < resolution; ++i)
    for (int j = 0; j < resolution; ++j)
      for (int k = 0; k < resolution; ++k) {
        int cube = 0;
        for (int c = 0; c < 8; ++c)
          if (val[gid(i + kCorner[c][0], j + kCorner[c][1], k + kCorner[c][2])] < iso)
            cube |= 1 << c;
        if (kEdgeTable[cube] == 0) continue;

        int vid[12];
        for (int e = 0; e < 12; ++e) {
          if (!(kEdgeTable[cube] & (1 << e))) continue;
          const int ca = kEdgeCorner[e][0];
          const int cb = kEdgeCorner[e][1];
          int axis = 0;
          while (kCorner[ca][axis] == kCorner[cb][axis]) ++axis;
          const int(&o)[3] = kCorner[ca][axis] == 0 ? kCorner[ca] : kCorner[cb];
          vid[e] = edge_vertex(i + o[0], j + o[1], k + o[2], axis);
        }

        for (int t = 0; kTriTable[cube][t] != -1; t += 3) {
          // table winding faces the negative side; reverse for outward normals
          const int a = vid[kTriTable[cube][t]];
          const int b = vid[kTriTable[cube][t + 2]];
          const int c = vid[kTriTable[cube][t + 1]];
          if (a == b || b == c || a == c) continue;
          if (tri_area(mesh.vertices[static_cast<std::size_t>(a)],
                       mesh.vertices[static_cast<std::size_t>(b)],
                       mesh.vertices[static_cast<std::size_t>(c)]) <= 1e-12)
            continue;
          mesh.triangles.push_back({a, b, c});
        }
      }
  return mesh;
}

TriMesh extract_mesh(const ImplicitField& F, double t, int resolution) {
  if (resolution < 8) throw ConfigError("extract_mesh: resolution must be >= 8");
  F.validate();
  return marching_cubes([&](const Vec3& x) { return sdf(F, {x, t}); }, resolution);
}

double mesh_volume(const TriMesh& mesh) {
  const int nv = static_cast<int>(mesh.vertices.size());
  std::map<std::pair<int, int>, std::pair<int, int>> dir;  // undirected -> (forward, reverse)
  for (const auto& tr : mesh.triangles) {
    for (int e = 0; e < 3; ++e) {
      const int a = tr[static_cast<std::size_t>(e)];
      const int b = tr[static_cast<std::size_t>((e + 1) % 3)];
      if (a < 0 || b < 0 || a >= nv || b >= nv)
        throw DimensionError("mesh_volume: triangle index out of range");
      auto& d = dir[{std::min(a, b), std::max(a, b)}];
      (a < b ? d.first : d.second) += 1;
    }
  }
  int boundary = 0;
  for (const auto& [e, d] : dir)
    if (d.first != 1 || d.second != 1) ++boundary;
  if (boundary > 0)
    throw Error("mesh_volume: mesh is not closed (" + std::to_string(boundary) +
                " boundary edges)");

  double six_vol = 0.0;
  for (const auto& tr : mesh.triangles) {
    const Vec3& a = mesh.vertices[static_cast<std::size_t>(tr[0])];
    const Vec3& b = mesh.vertices[static_cast<std::size_t>(tr[1])];
    const Vec3& c = mesh.vertices[static_cast<std::size_t>(tr[2])];
    six_vol += a.dot(b.cross(c));
  }
  return six_vol / 6.0;
}

namespace {

// mean and max of a -> nearest-b distances
std::pair<double, double> directed_stats(const std::vector<Vec3>& A,
                                         const std::vector<Vec3>& B) {
  double sum = 0.0, worst = 0.0;
  for (const Vec3& a : A) {
    double best = std::numeric_limits<double>::infinity();
    for (const Vec3& b : B) best = std::min(best, (a - b).squaredNorm());
    const double d = std::sqrt(best);
    sum += d;
    worst = std::max(worst, d);
  }
  return {sum / static_cast<double>(A.size()), worst};
}

}  // namespace

double chamfer(const std::vector<Vec3>& A, const std::vector<Vec3>& B) {
  if (A.empty() || B.empty()) throw ConfigError("chamfer: empty point set");
  return 0.5 * (directed_stats(A, B).first + directed_stats(B, A).first);
}

double hausdorff(const std::vector<Vec3>& A, const std::vector<Vec3>& B) {
  if (A.empty() || B.empty()) throw ConfigError("hausdorff: empty point set");
  return std::max(directed_stats(A, B).second, directed_stats(B, A).second);
}

MetricReport compare_point_sets(const std::vector<Vec3>& A, const std::vector<Vec3>& B) {
  if (A.empty() || B.empty()) throw ConfigError("compare_point_sets: empty point set");
  MetricReport r;
  const auto ab = directed_stats(A, B);
  const auto ba = directed_stats(B, A);
  r.cd = 0.5 * (ab.first + ba.first);
  r.hd = std::max(ab.second, ba.second);
  return r;
}

PointCloud sample_mesh_surface(const TriMesh& mesh, int n, std::uint64_t seed) {
  if (n < 0) throw ConfigError("sample_mesh_surface: n must be >= 0");
  if (mesh.empty()) throw ConfigError("sample_mesh_surface: empty mesh");

  std::vector<double> cum(mesh.triangles.size());
  double total = 0.0;
  for (std::size_t i = 0; i < mesh.triangles.size(); ++i) {
    const auto& tr = mesh.triangles[i];
    total += tri_area(mesh.vertices[static_cast<std::size_t>(tr[0])],
                      mesh.vertices[static_cast<std::size_t>(tr[1])],
                      mesh.vertices[static_cast<std::size_t>(tr[2])]);
    cum[i] = total;
  }
  if (total <= 0.0) throw ConfigError("sample_mesh_surface: zero total area");

  Rng rng(seed);
  PointCloud out;
  out.points.reserve(static_cast<std::size_t>(n));
  out.normals.reserve(static_cast<std::size_t>(n));
  for (int s = 0; s < n; ++s) {
    const double u = rng.uniform() * total;
    const std::size_t ti =
        static_cast<std::size_t>(std::lower_bound(cum.begin(), cum.end(), u) - cum.begin());
    const auto& tr = mesh.triangles[std::min(ti, mesh.triangles.size() - 1)];
    const Vec3& a = mesh.vertices[static_cast<std::size_t>(tr[0])];
    const Vec3& b = mesh.vertices[static_cast<std::size_t>(tr[1])];
    const Vec3& c = mesh.vertices[static_cast<std::size_t>(tr[2])];
    double r1 = rng.uniform(), r2 = rng.uniform();
    if (r1 + r2 > 1.0) {
      r1 = 1.0 - r1;
      r2 = 1.0 - r2;
    }
    out.points.push_back(a + r1 * (b - a) + r2 * (c - a));
    const Vec3 fn = (b - a).cross(c - a);
    const double fnn = fn.norm();
    out.normals.push_back(fnn > 0.0 ? Vec3(fn / fnn) : Vec3(0.0, 0.0, 1.0));
  }
  return out;
}

TriMesh icosphere(double radius, int subdivisions) {
  if (radius <= 0.0) throw ConfigError("icosphere: radius must be positive");
  if (subdivisions < 0 || subdivisions > 8)
    throw ConfigError("icosphere: subdivisions must be in [0, 8]");

  const double p = (1.0 + std::sqrt(5.0)) / 2.0;
  TriMesh m;
  m.vertices = {{-1, p, 0}, {1, p, 0},   {-1, -p, 0}, {1, -p, 0},
                {0, -1, p}, {0, 1, p},   {0, -1, -p}, {0, 1, -p},
                {p, 0, -1}, {p, 0, 1},   {-p, 0, -1}, {-p, 0, 1}};
  m.triangles = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                 {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                 {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                 {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (Vec3& v : m.vertices) v = radius * v.normalized();

  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      const auto key = std::make_pair(std::min(a, b), std::max(a, b));
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      const int idx = static_cast<int>(m.vertices.size());
      m.vertices.push_back(
          radius * (m.vertices[static_cast<std::size_t>(a)] + m.vertices[static_cast<std::size_t>(b)])
                       .normalized());
      midpoint.emplace(key, idx);
      return idx;
    };
    std::vector<std::array<int, 3>> next;
    next.reserve(m.triangles.size() * 4);
    for (const auto& tr : m.triangles) {
      const int ab = mid(tr[0], tr[1]);
      const int bc = mid(tr[1], tr[2]);
      const int ca = mid(tr[2], tr[0]);
      next.push_back({tr[0], ab, ca});
      next.push_back({tr[1], bc, ab});
      next.push_back({tr[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    m.triangles = std::move(next);
  }
  return m;
}

}  // namespace lsflow
