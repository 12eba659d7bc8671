#pragma once

#include <array>
#include <iosfwd>
#include <span>
#include <vector>

#include "lsflow/autodiff.hpp"
#include "lsflow/fields.hpp"

namespace lsflow {

// Forward-Euler particle path through the velocity field on t in [0,1]:
// points[k] approximates phi(x0, k/T).
struct Trajectory {
  std::vector<Vec3> points;
  int T = 0;

  double dt() const { return 1.0 / T; }
  const Vec3& endpoint() const { return points.back(); }
};

// x_{k+1} = x_k + V(x_k)/T. Throws NumericError naming the step when the
// velocity turns non-finite.
Trajectory integrate_trajectory(const VelocityField& Vf, const Vec3& x0, int T);

// Forward with V, then backward with -V from the endpoint; returns the
// round-trip error ||x_roundtrip - x0|| (diffeomorphism diagnostic, O(dt)).
double inverse_consistency(const VelocityField& Vf, const Vec3& x0, int T);

// Tape version for the matching loss: endpoint coordinates as tape variables,
// differentiable w.r.t. the velocity parameters through every Euler step.
std::array<Var, 3> integrate_endpoint(Tape& tape, const VelocityField& Vf,
                                      const Vec3& x0, int T);

// CSV dump: "seed,k,x,y,z" per line, header included.
void write_trajectories_csv(std::ostream& os, std::span<const Trajectory> trajectories);

}  // namespace lsflow
