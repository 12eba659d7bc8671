#include "lsflow/flow.hpp"

#include <ostream>
#include <string>

namespace lsflow {

Trajectory integrate_trajectory(const VelocityField& Vf, const Vec3& x0, int T) {
  if (T < 1) throw ConfigError("integrate_trajectory: T must be >= 1");
  Trajectory tr;
  tr.T = T;
  tr.points.reserve(T + 1);
  tr.points.push_back(x0);
  const double dt = 1.0 / T;
  Vec3 x = x0;
  for (int k = 0; k < T; ++k) {
    const Vec3 v = velocity(Vf, x);
    if (!v.allFinite())
      throw NumericError("integrate_trajectory: non-finite velocity at step " +
                         std::to_string(k));
    x += dt * v;
    tr.points.push_back(x);
  }
  return tr;
}

double inverse_consistency(const VelocityField& Vf, const Vec3& x0, int T) {
  if (T < 1) throw ConfigError("inverse_consistency: T must be >= 1");
  const double dt = 1.0 / T;
  Vec3 x = x0;
  for (int k = 0; k < T; ++k) x += dt * velocity(Vf, x);
  for (int k = 0; k < T; ++k) x -= dt * velocity(Vf, x);
  return (x - x0).norm();
}

std::array<Var, 3> integrate_endpoint(Tape& tape, const VelocityField& Vf,
                                      const Vec3& x0, int T) {
  if (T < 1) throw ConfigError("integrate_endpoint: T must be >= 1");
  tape.push_context("trajectory integration");
  const double dt = 1.0 / T;
  std::vector<Var> x(3);
  for (int i = 0; i < 3; ++i) x[i] = tape.constant(x0[i]);
  for (int k = 0; k < T; ++k) {
    const auto v = tape.eval_net_value(Vf.params, x, &Vf.enc);
    for (int i = 0; i < 3; ++i) x[i] = x[i] + dt * v[i];
  }
  tape.pop_context();
  return {x[0], x[1], x[2]};
}

void write_trajectories_csv(std::ostream& os, std::span<const Trajectory> trajectories) {
  os << "seed,k,x,y,z\n";
  for (std::size_t s = 0; s < trajectories.size(); ++s) {
    const Trajectory& tr = trajectories[s];
    for (std::size_t k = 0; k < tr.points.size(); ++k) {
      const Vec3& p = tr.points[k];
      os << s << ',' << k << ',' << p.x() << ',' << p.y() << ',' << p.z() << '\n';
    }
  }
}

}  // namespace lsflow
