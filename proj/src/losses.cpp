#include "lsflow/losses.hpp"

#include <cmath>

namespace lsflow {

void LossWeights::validate() const {
  if (lambda_f < 0 || lambda_v < 0 || lambda_m < 0 || lambda_l < 0 || lambda_div < 0)
    throw ConfigError("loss weights: lambdas must be nonnegative");
  if (lambda_v > 0 && (alpha <= 0 || gamma <= 0))
    throw ConfigError("loss weights: alpha and gamma must be positive while the "
                      "velocity loss is active");
}

// ---------------------------------------------------------------------------

double mlse_residual(const ImplicitField& F, const VelocityField& Vf,
                     const SpaceTimeSample& s, double lambda_l,
                     int* degenerate_counter) {
  const ImplicitEval e = implicit_eval(F, s, true, false);
  const double lse = e.dt + velocity(Vf, s.x).dot(e.grad);
  const double gn = e.grad.norm();
  if (gn <= kEpsGrad) {
    if (degenerate_counter) ++*degenerate_counter;
    return lse;  // R := 0
  }
  const Vec3 n = e.grad / gn;
  const double R = -n.dot(velocity_jacobian(Vf, s.x) * n);
  return lse + lambda_l * e.f * R;
}

OlseResiduals olse_residuals(const ImplicitField& F, const VelocityField& Vf,
                             const SpaceTimeSample& s) {
  const ImplicitEval e = implicit_eval(F, s, true, false);
  OlseResiduals r;
  r.lse = e.dt + velocity(Vf, s.x).dot(e.grad);
  r.eikonal = std::abs(e.grad.norm() - 1.0);
  return r;
}

// ---------------------------------------------------------------------------

Var pde_loss_tape(Tape& tape, const ImplicitField& F, const VelocityField& Vf,
                  std::span<const SpaceTimeSample> samples, const LossWeights& w,
                  int* degenerate_counter) {
  if (samples.empty()) throw DimensionError("pde loss: empty batch");
  tape.push_context("pde loss");
  const bool mlse = w.mode == EikonalMode::MLSE;
  Var sum = tape.constant(0.0);
  for (const SpaceTimeSample& s : samples) {
    const ImplicitVars iv = eval_implicit(tape, F, s, true);
    const VelocityVars vv = eval_velocity(tape, Vf, s.x, mlse, false);
    Var lse = iv.dt;
    for (int c = 0; c < 3; ++c) lse = lse + vv.v[c] * iv.grad[c];
    if (mlse) {
      Var gn2 = tape.square(iv.grad[0]) + tape.square(iv.grad[1]) + tape.square(iv.grad[2]);
      if (std::sqrt(tape.value(gn2)) <= kEpsGrad) {
        if (degenerate_counter) ++*degenerate_counter;
        sum = sum + abs(lse);
        continue;
      }
      Var gn = sqrt(gn2);
      std::array<Var, 3> n;
      for (int c = 0; c < 3; ++c) n[c] = iv.grad[c] / gn;
      Var R = tape.constant(0.0);
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) R = R - n[r] * vv.jac[r][c] * n[c];
      sum = sum + abs(lse + w.lambda_l * iv.f * R);
    } else {
      Var gn = sqrt(tape.square(iv.grad[0]) + tape.square(iv.grad[1]) +
                    tape.square(iv.grad[2]));
      sum = sum + abs(lse) + abs(gn - 1.0);
    }
  }
  tape.pop_context();
  return sum * (1.0 / static_cast<double>(samples.size()));
}

Var velocity_loss_tape(Tape& tape, const VelocityField& Vf, std::span<const Vec3> batch,
                       const LossWeights& w, double* smooth_out, double* div_out) {
  if (batch.empty()) throw DimensionError("velocity loss: empty batch");
  tape.push_context("velocity loss");
  const bool with_div = w.lambda_div > 0.0;
  Var smooth_sum = tape.constant(0.0);
  Var div_sum = tape.constant(0.0);
  for (const Vec3& x : batch) {
    const VelocityVars vv = eval_velocity(tape, Vf, x, true, true);
    Var sq = tape.constant(0.0);
    for (int i = 0; i < 3; ++i)
      sq = sq + tape.square(w.gamma * vv.v[i] - w.alpha * vv.lap[i]);
    smooth_sum = smooth_sum + sqrt(sq);
    if (with_div) div_sum = div_sum + abs(vv.jac[0][0] + vv.jac[1][1] + vv.jac[2][2]);
  }
  tape.pop_context();
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  Var out = smooth_sum * inv_n;
  if (smooth_out) *smooth_out = tape.value(out);
  if (div_out) *div_out = with_div ? tape.value(div_sum) * inv_n : 0.0;
  if (with_div) out = out + div_sum * (w.lambda_div * inv_n);
  return out;
}

Var matching_loss_tape(Tape& tape, const ImplicitField& F, const VelocityField& Vf,
                       const PointCloud& P0, const PointCloud& P1,
                       const CorrespondenceSet& C, int T, double* f0_out,
                       double* f1_out, double* traj_out) {
  if (P0.points.empty() || P1.points.empty())
    throw DimensionError("matching loss: empty cloud");
  C.validate(P0.size(), P1.size());
  tape.push_context("matching loss");

  Var sum0 = tape.constant(0.0);
  for (const Vec3& x : P0.points)
    sum0 = sum0 + abs(eval_implicit(tape, F, {x, 0.0}, false).f);
  Var f0 = sum0 * (1.0 / static_cast<double>(P0.size()));
  Var sum1 = tape.constant(0.0);
  for (const Vec3& x : P1.points)
    sum1 = sum1 + abs(eval_implicit(tape, F, {x, 1.0}, false).f);
  Var f1 = sum1 * (1.0 / static_cast<double>(P1.size()));
  if (f0_out) *f0_out = tape.value(f0);
  if (f1_out) *f1_out = tape.value(f1);
  Var out = f0 + f1;

  if (traj_out) *traj_out = 0.0;
  if (!C.empty()) {
    Var traj_sum = tape.constant(0.0);
    for (const Correspondence& c : C.pairs) {
      const auto endv = integrate_endpoint(tape, Vf, P0.points[c.i], T);
      const Vec3& x1 = P1.points[c.j];
      Var sq = tape.constant(0.0);
      for (int d = 0; d < 3; ++d) sq = sq + tape.square(endv[d] - x1[d]);
      traj_sum = traj_sum + sqrt(sq);
    }
    Var traj = traj_sum * (1.0 / static_cast<double>(C.size()));
    if (traj_out) *traj_out = tape.value(traj);
    out = out + traj;
  }
  tape.pop_context();
  return out;
}

Var normal_loss_tape(Tape& tape, const ImplicitField& F, const PointCloud& P, double t) {
  if (P.points.empty()) throw DimensionError("normal loss: empty cloud");
  if (!P.has_normals())
    throw ConfigError("normal loss: cloud carries no normals");
  tape.push_context("normal loss");
  Var sum = tape.constant(0.0);
  for (std::size_t i = 0; i < P.size(); ++i) {
    const ImplicitVars iv = eval_implicit(tape, F, {P.points[i], t}, true);
    Var gn2 = tape.square(iv.grad[0]) + tape.square(iv.grad[1]) + tape.square(iv.grad[2]);
    if (std::sqrt(tape.value(gn2)) <= kEpsGrad) {
      // undefined field normal: worst-case misalignment, no gradient signal
      sum = sum + 1.0;
      continue;
    }
    Var gn = sqrt(gn2);
    const Vec3& n = P.normals[i];
    Var dot = tape.constant(0.0);
    for (int c = 0; c < 3; ++c) dot = dot + iv.grad[c] * n[c];
    sum = sum + abs(1.0 - dot / gn);
  }
  tape.pop_context();
  return sum * (1.0 / static_cast<double>(P.size()));
}

// ---------------------------------------------------------------------------

double velocity_loss(const VelocityField& Vf, std::span<const Vec3> batch,
                     const LossWeights& w) {
  Tape tape;
  return tape.value(velocity_loss_tape(tape, Vf, batch, w));
}

double matching_loss(const ImplicitField& F, const VelocityField& Vf,
                     const PointCloud& P0, const PointCloud& P1,
                     const CorrespondenceSet& C, int T) {
  Tape tape;
  return tape.value(matching_loss_tape(tape, F, Vf, P0, P1, C, T));
}

double normal_loss(const ImplicitField& F, const PointCloud& P, double t) {
  Tape tape;
  return tape.value(normal_loss_tape(tape, F, P, t));
}

// ---------------------------------------------------------------------------

Var total_loss_tape(Tape& tape, const ImplicitField& F, const VelocityField& Vf,
                    const TotalLossInputs& in, const LossWeights& w,
                    LossBreakdown* breakdown) {
  w.validate();
  LossBreakdown bd;
  Var total = tape.constant(0.0);

  if (w.lambda_f > 0.0) {
    Var pde = pde_loss_tape(tape, F, Vf, in.pde_samples, w, &bd.degenerate);
    bd.pde = tape.value(pde);
    total = total + w.lambda_f * pde;
  }
  if (w.lambda_v > 0.0) {
    Var vel = velocity_loss_tape(tape, Vf, in.velocity_points, w, &bd.smooth, &bd.div);
    total = total + w.lambda_v * vel;
  }
  if (w.lambda_m > 0.0) {
    if (!in.P0 || !in.P1 || !in.C)
      throw DimensionError("total loss: matching inputs missing");
    Var match = matching_loss_tape(tape, F, Vf, *in.P0, *in.P1, *in.C, in.T,
                                   &bd.match_f0, &bd.match_f1, &bd.match_traj);
    Var m_total = match;
    if (in.use_normals) {
      Var n0 = normal_loss_tape(tape, F, *in.P0, 0.0);
      Var n1 = normal_loss_tape(tape, F, *in.P1, 1.0);
      Var n = (n0 + n1) * 0.5;
      bd.normal = tape.value(n);
      m_total = m_total + n;
    }
    total = total + w.lambda_m * m_total;
  }

  bd.total = tape.value(total);
  if (breakdown) *breakdown = bd;
  return total;
}

LossBreakdown total_loss(const ImplicitField& F, const VelocityField& Vf,
                         const TotalLossInputs& in, const LossWeights& w) {
  Tape tape;
  LossBreakdown bd;
  (void)total_loss_tape(tape, F, Vf, in, w, &bd);
  return bd;
}

}  // namespace lsflow
