#pragma once

#include <array>

#include "lsflow/autodiff.hpp"
#include "lsflow/mlp.hpp"
#include "lsflow/types.hpp"

namespace lsflow {

// degenerate-gradient threshold for normal / stretch-rate computations
inline constexpr double kEpsGrad = 1e-6;

// Time-varying implicit field f(x,t). Input layout: encoded spatial
// coordinates concatenated with raw (unencoded) time.
struct ImplicitField {
  MlpParams params;
  EncodingConfig enc;

  int expected_in_dim() const { return enc.encoded_dim(3) + 1; }
  void validate() const;
};

// Stationary velocity field V(x); input is the encoded spatial coordinates.
struct VelocityField {
  MlpParams params;
  EncodingConfig enc;

  int expected_in_dim() const { return enc.encoded_dim(3); }
  void validate() const;
};

struct SpaceTimeSample {
  Vec3 x;
  double t = 0.0;

  void validate() const;
};

// ---------------------------------------------------------------------------
// Seed builders: express the encoded network input as a function of the
// underlying directions so the augmented pass differentiates the composition.
//   implicit_input_seed    directions (x1, x2, x3, t), ns2 = 3 -> spatial laplacian
//   implicit_normal_seed   single spatial direction d, ns2 = 1 -> d^T H d
//   velocity_input_seed    directions (x1, x2, x3), ns2 = 3
InputSeed implicit_input_seed(const Vec3& x, double t, const EncodingConfig& enc);
InputSeed implicit_normal_seed(const Vec3& x, double t, const EncodingConfig& enc,
                               const Vec3& d);
InputSeed velocity_input_seed(const Vec3& x, const EncodingConfig& enc);

// ---------------------------------------------------------------------------
// Plain (non-tape) evaluation bundles.
struct ImplicitEval {
  double f = 0.0;
  Vec3 grad = Vec3::Zero();  // spatial gradient
  double dt = 0.0;           // time derivative
  double lap = 0.0;          // spatial laplacian, when requested
};

ImplicitEval implicit_eval(const ImplicitField& F, const SpaceTimeSample& s,
                           bool want_derivs = true, bool want_lap = false);

struct VelocityEval {
  Vec3 v = Vec3::Zero();
  Mat3 jac = Mat3::Zero();  // d V_i / d x_j, when requested
  Vec3 lap = Vec3::Zero();  // componentwise spatial laplacian, when requested
};

VelocityEval velocity_eval(const VelocityField& Vf, const Vec3& x,
                           bool want_jac = true, bool want_lap = false);

// ---------------------------------------------------------------------------
// Field operators.
double sdf(const ImplicitField& F, const SpaceTimeSample& s);
Vec3 sdf_spatial_grad(const ImplicitField& F, const SpaceTimeSample& s);
double sdf_time_deriv(const ImplicitField& F, const SpaceTimeSample& s);

// grad / ||grad||; throws DegenerateGradientError when ||grad|| <= kEpsGrad
Vec3 normal(const ImplicitField& F, const SpaceTimeSample& s);

// div(grad f / ||grad f||) = (lap f - n^T H n) / ||grad f||   (diagnostic)
double curvature(const ImplicitField& F, const SpaceTimeSample& s);

Vec3 velocity(const VelocityField& Vf, const Vec3& x);
Mat3 velocity_jacobian(const VelocityField& Vf, const Vec3& x);
double velocity_divergence(const VelocityField& Vf, const Vec3& x);
Vec3 velocity_laplacian(const VelocityField& Vf, const Vec3& x);

// R = -n^T (grad V) n; degenerate gradient throws as in normal
double stretch_rate(const ImplicitField& F, const VelocityField& Vf,
                    const SpaceTimeSample& s);

// ---------------------------------------------------------------------------
// Tape-level evaluation for loss assembly: outputs are tape variables, so
// parameter gradients flow through every term built from them.
struct ImplicitVars {
  Var f;
  std::array<Var, 3> grad;
  Var dt;
  bool has_derivs = false;
};

ImplicitVars eval_implicit(Tape& tape, const ImplicitField& F, const SpaceTimeSample& s,
                           bool want_derivs);

struct VelocityVars {
  std::array<Var, 3> v;
  std::array<std::array<Var, 3>, 3> jac;  // [i][j] = d V_i / d x_j
  std::array<Var, 3> lap;
  bool has_jac = false;
  bool has_lap = false;
};

VelocityVars eval_velocity(Tape& tape, const VelocityField& Vf, const Vec3& x,
                           bool want_jac, bool want_lap);

}  // namespace lsflow
