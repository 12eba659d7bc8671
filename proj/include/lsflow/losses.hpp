#pragma once

#include <span>

#include "lsflow/fields.hpp"
#include "lsflow/flow.hpp"

namespace lsflow {

enum class EikonalMode { MLSE, OLSE };

struct LossWeights {
  double lambda_f = 100.0;
  double lambda_v = 20.0;
  double lambda_m = 200.0;
  double lambda_l = 10.0;
  double lambda_div = 0.0;  // 0 disables volume preservation
  double alpha = 0.01;
  double gamma = 1.0;
  EikonalMode mode = EikonalMode::MLSE;

  void validate() const;
};

// Per-term values (unweighted) of one loss evaluation, for logging.
struct LossBreakdown {
  double pde = 0.0;        // mean |MLSE residual|  (or mean(|LSE| + eikonal) in OLSE mode)
  double smooth = 0.0;     // mean ||(-alpha lap + gamma) V||
  double div = 0.0;        // mean |div V|
  double match_f0 = 0.0;   // mean |f(.,0)| over P0
  double match_f1 = 0.0;   // mean |f(.,1)| over P1
  double match_traj = 0.0; // mean ||phi(x,1) - x1||
  double normal = 0.0;     // mean |1 - <grad f/||grad f||, n>| (0 when disabled)
  double total = 0.0;
  int degenerate = 0;      // samples where R was zeroed for ||grad f|| <= eps
};

// ---------------------------------------------------------------------------
// Single-sample residuals (diagnostics and tests).

// dt f + V.grad f + lambda_l * f * R. On a degenerate gradient R := 0 and
// *degenerate_counter is incremented; training never aborts on this.
double mlse_residual(const ImplicitField& F, const VelocityField& Vf,
                     const SpaceTimeSample& s, double lambda_l,
                     int* degenerate_counter = nullptr);

struct OlseResiduals {
  double lse = 0.0;      // dt f + V.grad f
  double eikonal = 0.0;  // | ||grad f|| - 1 |
};

OlseResiduals olse_residuals(const ImplicitField& F, const VelocityField& Vf,
                             const SpaceTimeSample& s);

// ---------------------------------------------------------------------------
// Batch terms on the tape (training path; gradients flow to both networks).

Var pde_loss_tape(Tape& tape, const ImplicitField& F, const VelocityField& Vf,
                  std::span<const SpaceTimeSample> samples, const LossWeights& w,
                  int* degenerate_counter = nullptr);

Var velocity_loss_tape(Tape& tape, const VelocityField& Vf, std::span<const Vec3> batch,
                       const LossWeights& w, double* smooth_out = nullptr,
                       double* div_out = nullptr);

Var matching_loss_tape(Tape& tape, const ImplicitField& F, const VelocityField& Vf,
                       const PointCloud& P0, const PointCloud& P1,
                       const CorrespondenceSet& C, int T, double* f0_out = nullptr,
                       double* f1_out = nullptr, double* traj_out = nullptr);

Var normal_loss_tape(Tape& tape, const ImplicitField& F, const PointCloud& P, double t);

// ---------------------------------------------------------------------------
// Plain evaluations (thin wrappers over the tape versions).

double velocity_loss(const VelocityField& Vf, std::span<const Vec3> batch,
                     const LossWeights& w);

double matching_loss(const ImplicitField& F, const VelocityField& Vf,
                     const PointCloud& P0, const PointCloud& P1,
                     const CorrespondenceSet& C, int T);

double normal_loss(const ImplicitField& F, const PointCloud& P, double t);

// ---------------------------------------------------------------------------
// Weighted total: L = lambda_f L_f + lambda_v L_v + lambda_m L_m, with the
// normal term folded into L_m when enabled (it is a data-fit term on the
// clouds). Schedule-resolved lambdas arrive inside `w`. Terms with a zero
// lambda are skipped entirely.
struct TotalLossInputs {
  std::span<const SpaceTimeSample> pde_samples;
  std::span<const Vec3> velocity_points;
  const PointCloud* P0 = nullptr;  // matching sub-batch
  const PointCloud* P1 = nullptr;
  const CorrespondenceSet* C = nullptr;
  int T = 25;
  bool use_normals = false;  // requires normals on both clouds
};

Var total_loss_tape(Tape& tape, const ImplicitField& F, const VelocityField& Vf,
                    const TotalLossInputs& in, const LossWeights& w,
                    LossBreakdown* breakdown = nullptr);

LossBreakdown total_loss(const ImplicitField& F, const VelocityField& Vf,
                         const TotalLossInputs& in, const LossWeights& w);

}  // namespace lsflow
