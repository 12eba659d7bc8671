#include "lsflow/fields.hpp"

#include <cmath>

namespace lsflow {

void ImplicitField::validate() const {
  params.validate();
  if (params.in_dim() != expected_in_dim())
    throw DimensionError("implicit field: input dim " + std::to_string(params.in_dim()) +
                         " != 3(2m+1)+1 = " + std::to_string(expected_in_dim()));
  if (params.out_dim() != 1)
    throw DimensionError("implicit field: output dim must be 1");
}

void VelocityField::validate() const {
  params.validate();
  if (params.in_dim() != expected_in_dim())
    throw DimensionError("velocity field: input dim " + std::to_string(params.in_dim()) +
                         " != 3(2m+1) = " + std::to_string(expected_in_dim()));
  if (params.out_dim() != 3)
    throw DimensionError("velocity field: output dim must be 3");
}

void SpaceTimeSample::validate() const {
  if (!x.allFinite() || !std::isfinite(t))
    throw NumericError("space-time sample: non-finite coordinates");
  if (t < 0.0 || t > 1.0)
    throw DimensionError("space-time sample: t outside [0,1]");
  if (x.cwiseAbs().maxCoeff() > 1.0 + 1e-9)
    throw DimensionError("space-time sample: point outside the domain box");
}

// ---------------------------------------------------------------------------

InputSeed implicit_input_seed(const Vec3& x, double t, const EncodingConfig& enc) {
  Vec gamma, dg, ddg;
  positional_encode_derivs(x, enc, gamma, dg, ddg);
  const int ed = static_cast<int>(gamma.size());
  InputSeed seed;
  seed.h0.resize(ed + 1);
  seed.h0.head(ed) = gamma;
  seed.h0[ed] = t;
  seed.U0 = Mat::Zero(ed + 1, 4);
  for (int i = 0; i < ed; ++i) seed.U0(i, encoding_coord_of(i, enc)) = dg[i];
  seed.U0(ed, 3) = 1.0;
  seed.S0 = Vec::Zero(ed + 1);
  seed.S0.head(ed) = ddg;
  seed.ns2 = 3;  // laplacian over the spatial directions only
  return seed;
}

InputSeed implicit_normal_seed(const Vec3& x, double t, const EncodingConfig& enc,
                               const Vec3& d) {
  Vec gamma, dg, ddg;
  positional_encode_derivs(x, enc, gamma, dg, ddg);
  const int ed = static_cast<int>(gamma.size());
  InputSeed seed;
  seed.h0.resize(ed + 1);
  seed.h0.head(ed) = gamma;
  seed.h0[ed] = t;
  seed.U0 = Mat::Zero(ed + 1, 1);
  seed.S0 = Vec::Zero(ed + 1);
  for (int i = 0; i < ed; ++i) {
    const double dc = d[encoding_coord_of(i, enc)];
    seed.U0(i, 0) = dg[i] * dc;
    seed.S0[i] = ddg[i] * dc * dc;  // encoding is componentwise, no cross terms
  }
  seed.ns2 = 1;
  return seed;
}

InputSeed velocity_input_seed(const Vec3& x, const EncodingConfig& enc) {
  Vec gamma, dg, ddg;
  positional_encode_derivs(x, enc, gamma, dg, ddg);
  const int ed = static_cast<int>(gamma.size());
  InputSeed seed;
  seed.h0 = gamma;
  seed.U0 = Mat::Zero(ed, 3);
  for (int i = 0; i < ed; ++i) seed.U0(i, encoding_coord_of(i, enc)) = dg[i];
  seed.S0 = ddg;
  seed.ns2 = 3;
  return seed;
}

// ---------------------------------------------------------------------------

ImplicitEval implicit_eval(const ImplicitField& F, const SpaceTimeSample& s,
                           bool want_derivs, bool want_lap) {
  ImplicitEval out;
  if (!want_derivs && !want_lap) {
    Vec in(F.params.in_dim());
    in.head(in.size() - 1) = positional_encode(s.x, F.enc);
    in[in.size() - 1] = s.t;
    out.f = mlp_forward(F.params, in)[0];
    return out;
  }
  const InputSeed seed = implicit_input_seed(s.x, s.t, F.enc);
  const EvalResult r = mlp_eval(F.params, seed, true, want_lap, nullptr);
  out.f = r.value[0];
  out.grad = Vec3(r.jac(0, 0), r.jac(0, 1), r.jac(0, 2));
  out.dt = r.jac(0, 3);
  if (want_lap) out.lap = r.lap[0];
  return out;
}

VelocityEval velocity_eval(const VelocityField& Vf, const Vec3& x, bool want_jac,
                           bool want_lap) {
  VelocityEval out;
  if (!want_jac && !want_lap) {
    out.v = mlp_forward(Vf.params, positional_encode(x, Vf.enc));
    return out;
  }
  const InputSeed seed = velocity_input_seed(x, Vf.enc);
  const EvalResult r = mlp_eval(Vf.params, seed, true, want_lap, nullptr);
  out.v = r.value;
  out.jac = r.jac;
  if (want_lap) out.lap = r.lap;
  return out;
}

// ---------------------------------------------------------------------------

double sdf(const ImplicitField& F, const SpaceTimeSample& s) {
  return implicit_eval(F, s, false, false).f;
}

Vec3 sdf_spatial_grad(const ImplicitField& F, const SpaceTimeSample& s) {
  return implicit_eval(F, s, true, false).grad;
}

double sdf_time_deriv(const ImplicitField& F, const SpaceTimeSample& s) {
  return implicit_eval(F, s, true, false).dt;
}

Vec3 normal(const ImplicitField& F, const SpaceTimeSample& s) {
  const Vec3 g = sdf_spatial_grad(F, s);
  const double n = g.norm();
  if (n <= kEpsGrad)
    throw DegenerateGradientError("normal: ||grad f|| = " + std::to_string(n) +
                                  " below threshold");
  return g / n;
}

double curvature(const ImplicitField& F, const SpaceTimeSample& s) {
  const ImplicitEval e = implicit_eval(F, s, true, true);
  const double gn = e.grad.norm();
  if (gn <= kEpsGrad)
    throw DegenerateGradientError("curvature: ||grad f|| below threshold");
  const Vec3 n = e.grad / gn;
  const InputSeed seed = implicit_normal_seed(s.x, s.t, F.enc, n);
  const EvalResult r = mlp_eval(F.params, seed, true, true, nullptr);
  const double fnn = r.lap[0];  // second derivative along n
  return (e.lap - fnn) / gn;
}

Vec3 velocity(const VelocityField& Vf, const Vec3& x) {
  return velocity_eval(Vf, x, false, false).v;
}

Mat3 velocity_jacobian(const VelocityField& Vf, const Vec3& x) {
  return velocity_eval(Vf, x, true, false).jac;
}

double velocity_divergence(const VelocityField& Vf, const Vec3& x) {
  return velocity_jacobian(Vf, x).trace();
}

Vec3 velocity_laplacian(const VelocityField& Vf, const Vec3& x) {
  return velocity_eval(Vf, x, true, true).lap;
}

double stretch_rate(const ImplicitField& F, const VelocityField& Vf,
                    const SpaceTimeSample& s) {
  const Vec3 n = normal(F, s);
  const Mat3 J = velocity_jacobian(Vf, s.x);
  return -n.dot(J * n);
}

// ---------------------------------------------------------------------------

ImplicitVars eval_implicit(Tape& tape, const ImplicitField& F, const SpaceTimeSample& s,
                           bool want_derivs) {
  ImplicitVars out;
  if (!want_derivs) {
    Vec in(F.params.in_dim());
    in.head(in.size() - 1) = positional_encode(s.x, F.enc);
    in[in.size() - 1] = s.t;
    InputSeed seed;
    seed.h0 = in;
    auto o = tape.eval_net(F.params, seed, false, false);
    out.f = o.value_at(0);
    return out;
  }
  const InputSeed seed = implicit_input_seed(s.x, s.t, F.enc);
  auto o = tape.eval_net(F.params, seed, true, false);
  out.f = o.value_at(0);
  for (int c = 0; c < 3; ++c) out.grad[c] = o.jac_at(0, c);
  out.dt = o.jac_at(0, 3);
  out.has_derivs = true;
  return out;
}

VelocityVars eval_velocity(Tape& tape, const VelocityField& Vf, const Vec3& x,
                           bool want_jac, bool want_lap) {
  VelocityVars out;
  if (!want_jac && !want_lap) {
    InputSeed seed;
    seed.h0 = positional_encode(x, Vf.enc);
    auto o = tape.eval_net(Vf.params, seed, false, false);
    for (int i = 0; i < 3; ++i) out.v[i] = o.value_at(i);
    return out;
  }
  const InputSeed seed = velocity_input_seed(x, Vf.enc);
  auto o = tape.eval_net(Vf.params, seed, true, want_lap);
  for (int i = 0; i < 3; ++i) out.v[i] = o.value_at(i);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out.jac[i][j] = o.jac_at(i, j);
  out.has_jac = true;
  if (want_lap) {
    for (int i = 0; i < 3; ++i) out.lap[i] = o.lap_at(i);
    out.has_lap = true;
  }
  return out;
}

}  // namespace lsflow
