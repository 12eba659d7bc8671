#include "lsflow/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace lsflow {

namespace {

// Partial Fisher-Yates: first m entries of a shuffled 0..n-1.
std::vector<int> draw_without_replacement(int n, int m, Rng& rng) {
  std::vector<int> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = 0; i < m; ++i) {
    const int j = i + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(n - i)));
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  }
  idx.resize(static_cast<std::size_t>(m));
  return idx;
}

}  // namespace

NormalizedPair normalize_pair(const PointCloud& P0, const PointCloud& P1) {
  P0.validate();
  P1.validate();
  const std::size_t n = P0.size() + P1.size();
  if (P0.size() == 0 || P1.size() == 0)
    throw ConfigError("normalize_pair: empty point cloud");

  Vec3 center = Vec3::Zero();
  for (const Vec3& p : P0.points) center += p;
  for (const Vec3& p : P1.points) center += p;
  center /= static_cast<double>(n);

  double max_r = 0.0;
  for (const Vec3& p : P0.points) max_r = std::max(max_r, (p - center).norm());
  for (const Vec3& p : P1.points) max_r = std::max(max_r, (p - center).norm());
  if (max_r < 1e-12)
    throw ConfigError("normalize_pair: degenerate clouds (all points identical)");

  NormalizedPair out;
  out.transform.center = center;
  out.transform.scale = 0.9 / max_r;
  out.P0 = P0;
  out.P1 = P1;
  for (Vec3& p : out.P0.points) p = out.transform.apply(p);
  for (Vec3& p : out.P1.points) p = out.transform.apply(p);
  // uniform scaling: unit normals are unchanged
  return out;
}

std::vector<Vec3> sample_space(int n, const PointCloud& P0, const PointCloud& P1,
                               double sigma_near, double rho_near, Rng& rng) {
  if (n < 0) throw ConfigError("sample_space: n must be >= 0");
  if (rho_near < 0.0 || rho_near > 1.0)
    throw ConfigError("sample_space: rho_near must be in [0,1]");
  if (sigma_near < 0.0) throw ConfigError("sample_space: sigma_near must be >= 0");
  const std::size_t n_cloud = P0.size() + P1.size();
  if (rho_near > 0.0 && n_cloud == 0)
    throw ConfigError("sample_space: near-surface sampling from empty clouds");

  const int n_near = static_cast<int>(std::lround(rho_near * n));
  std::vector<Vec3> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n_near; ++i) {
    const std::uint64_t u = rng.uniform_index(n_cloud);
    const Vec3& base = u < P0.size() ? P0.points[u] : P1.points[u - P0.size()];
    out.push_back(base + sigma_near * Vec3(rng.normal(), rng.normal(), rng.normal()));
  }
  for (int i = n_near; i < n; ++i)
    out.emplace_back(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
  return out;
}

std::vector<double> sample_time(int n, int T, double jitter, Rng& rng) {
  if (n < 0) throw ConfigError("sample_time: n must be >= 0");
  if (T < 1) throw ConfigError("sample_time: T must be >= 1");
  if (jitter < 0.0) throw ConfigError("sample_time: jitter must be >= 0");
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const int k = i % (T + 1);
    double t = static_cast<double>(k) / static_cast<double>(T);
    if (jitter > 0.0) {
      t += jitter * (rng.uniform() - 0.5) / static_cast<double>(T);
      t = std::clamp(t, 0.0, 1.0);
    }
    out.push_back(t);
  }
  return out;
}

CorrespondenceSet select_correspondences(const CorrespondenceSet& C_full,
                                         double fraction, Rng& rng) {
  if (fraction < 0.0 || fraction > 1.0)
    throw ConfigError("select_correspondences: fraction must be in [0,1]");
  const int n = static_cast<int>(C_full.size());
  const int m = static_cast<int>(std::lround(fraction * n));
  if (m <= 0)
    throw ConfigError("select_correspondences: selection is empty");

  CorrespondenceSet out;
  out.pairs.reserve(static_cast<std::size_t>(m));
  for (int s : draw_without_replacement(n, m, rng))
    out.pairs.push_back(C_full.pairs[static_cast<std::size_t>(s)]);
  return out;
}

CorrespondenceSet perturb_correspondences(const CorrespondenceSet& C,
                                          const PointCloud& P1, PerturbMode mode,
                                          double fraction, int k, Rng& rng) {
  if (fraction < 0.0 || fraction > 1.0)
    throw ConfigError("perturb_correspondences: fraction must be in [0,1]");
  const int n = static_cast<int>(C.size());
  for (const Correspondence& c : C.pairs)
    if (c.j < 0 || static_cast<std::size_t>(c.j) >= P1.size())
      throw DimensionError("perturb_correspondences: target index out of range");

  const int m = static_cast<int>(std::lround(fraction * n));
  CorrespondenceSet out = C;
  if (m == 0) return out;

  std::vector<int> sel = draw_without_replacement(n, m, rng);

  if (mode == PerturbMode::LocalKSwap) {
    if (k < 1) throw ConfigError("perturb_correspondences: k must be >= 1");
    if (k > n - 1)
      throw ConfigError("perturb_correspondences: k exceeds available neighbors");
    for (int s : sel) {
      const Vec3& y = P1.points[static_cast<std::size_t>(C.pairs[static_cast<std::size_t>(s)].j)];
      // k-th nearest among the other correspondence targets
      std::vector<std::pair<double, int>> d;
      d.reserve(static_cast<std::size_t>(n - 1));
      for (int r = 0; r < n; ++r) {
        if (r == s) continue;
        const Vec3& yr = P1.points[static_cast<std::size_t>(C.pairs[static_cast<std::size_t>(r)].j)];
        d.emplace_back((yr - y).squaredNorm(), r);
      }
      std::nth_element(d.begin(), d.begin() + (k - 1), d.end());
      const int r = d[static_cast<std::size_t>(k - 1)].second;
      out.pairs[static_cast<std::size_t>(s)].j = C.pairs[static_cast<std::size_t>(r)].j;
    }
  } else {
    // uniform permutation of the selected targets
    std::sort(sel.begin(), sel.end());
    std::vector<int> targets;
    targets.reserve(sel.size());
    for (int s : sel) targets.push_back(C.pairs[static_cast<std::size_t>(s)].j);
    for (std::size_t i = targets.size(); i > 1; --i) {
      const std::size_t j = rng.uniform_index(i);
      std::swap(targets[i - 1], targets[j]);
    }
    for (std::size_t i = 0; i < sel.size(); ++i)
      out.pairs[static_cast<std::size_t>(sel[i])].j = targets[i];
  }
  return out;
}

}  // namespace lsflow
