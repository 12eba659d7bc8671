#pragma once

#include <span>
#include <vector>

#include "lsflow/rng.hpp"
#include "lsflow/types.hpp"

namespace lsflow {

// Joint rigid centering + uniform scaling that puts P0 ∪ P1 inside the ball
// of radius 0.9. One transform for both clouds; invertible for de-normalizing
// extracted meshes.
struct NormalizationTransform {
  Vec3 center = Vec3::Zero();
  double scale = 1.0;

  Vec3 apply(const Vec3& x) const { return (x - center) * scale; }
  Vec3 invert(const Vec3& y) const { return y / scale + center; }
};

struct NormalizedPair {
  PointCloud P0;
  PointCloud P1;
  NormalizationTransform transform;
};

NormalizedPair normalize_pair(const PointCloud& P0, const PointCloud& P1);

// Spatial batch for the PDE / velocity integrals: round(n * rho_near) samples
// are cloud points (drawn from the union) with isotropic Gaussian noise of
// std sigma_near; the rest are uniform in [-1,1]^3.
std::vector<Vec3> sample_space(int n, const PointCloud& P0, const PointCloud& P1,
                               double sigma_near, double rho_near, Rng& rng);

// Times stratified over the T+1 Euler knots k/T with uniform jitter of width
// jitter/T around each knot, clamped to [0,1]. jitter = 0 returns the knots
// cyclically.
std::vector<double> sample_time(int n, int T, double jitter, Rng& rng);

// Uniform subset without replacement, size round(fraction * |C|).
CorrespondenceSet select_correspondences(const CorrespondenceSet& C_full,
                                         double fraction, Rng& rng);

enum class PerturbMode { LocalKSwap, GlobalSwap };

// Noise-injection protocols: `fraction` of the pairs are selected; in local
// mode each selected pair's target is replaced by the target of its k-th
// nearest neighboring correspondence (distance between target points); in
// global mode the selected targets are permuted uniformly.
CorrespondenceSet perturb_correspondences(const CorrespondenceSet& C,
                                          const PointCloud& P1, PerturbMode mode,
                                          double fraction, int k, Rng& rng);

}  // namespace lsflow
