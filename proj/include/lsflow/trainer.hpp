#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "lsflow/fields.hpp"
#include "lsflow/losses.hpp"
#include "lsflow/sampler.hpp"

namespace lsflow {

struct TrainConfig {
  int epochs = 10000;
  int batch_size = 4000;
  double lr = 0.005;
  double lr_decay = 0.5;
  int lr_decay_interval = 2000;
  int warmup_epochs = 2000;
  int ramp_end = 5000;              // λ_f reaches its target here
  int velocity_freeze_epoch = 8000; // velocity net trains through this epoch
  LossWeights weights;
  int T = 25;
  EncodingConfig enc{3};
  double beta = 100.0;
  double sphere_radius = 0.5;
  std::uint64_t seed = 0;

  int implicit_width = 512;
  int implicit_depth = 8;  // weight layers
  int velocity_width = 256;
  int velocity_depth = 8;

  double sigma_near = 0.05;
  double rho_near = 0.5;
  double time_jitter = 1.0;
  double grad_clip = 10.0;  // global-norm clip per network, 0 disables
  bool strict_freeze = false;
  bool use_normals = false;

  // Per-term batch sizes; 0 derives from batch_size (PDE: batch_size,
  // velocity: /4, matching points: /4, matching pairs: /8).
  int pde_batch = 0;
  int velocity_batch = 0;
  int match_points = 0;
  int match_pairs = 0;

  int checkpoint_interval = 1000;

  void validate() const;
};

struct ResolvedLambdas {
  double lambda_f = 0.0;
  double lambda_v = 0.0;
  double lambda_m = 0.0;
};

// Warm-up / ramp / freeze schedule: λ_f is 0 before warmup_epochs, ramps
// linearly to its target at ramp_end; λ_v drops to 0 after
// velocity_freeze_epoch; λ_m runs at half weight during warm-up.
ResolvedLambdas lambda_schedule(int k, const TrainConfig& cfg);

double lr_at(int k, const TrainConfig& cfg);  // lr · decay^⌊k/interval⌋

// ---------------------------------------------------------------------------
// Geometric initialization: the returned net approximates ‖x‖ - r at every
// time (time-input columns are zeroed, so the init is time-constant).
MlpParams sphere_init(const EncodingConfig& enc, int width, int depth, double beta,
                      double r, std::uint64_t seed);

// Hidden layers random, final layer zero: V ≡ 0 at initialization.
MlpParams velocity_init(const EncodingConfig& enc, int width, int depth, double beta,
                        std::uint64_t seed);

// ---------------------------------------------------------------------------
struct AdamState {
  MlpTensors m;
  MlpTensors v;
  long long t = 0;
};

AdamState make_adam_state(const MlpParams& p);

// Standard bias-corrected Adam (β₁ = 0.9, β₂ = 0.999, ε = 1e-8). A non-finite
// gradient skips the step (params and moments untouched) and returns false.
bool adam_step(MlpParams& p, const MlpTensors& g, AdamState& st, double lr_k);

// ---------------------------------------------------------------------------
struct MetricsRow {
  int epoch = 0;
  double lr = 0.0;
  double lambda_f = 0.0;
  double lambda_v = 0.0;
  double lambda_m = 0.0;
  LossBreakdown loss;
  int skipped_steps = 0;  // Adam steps skipped this epoch
};

std::string metrics_csv_header();
std::string metrics_csv_row(const MetricsRow& r);

struct TrainState {
  ImplicitField F;
  VelocityField Vf;
  AdamState adam_f;
  AdamState adam_v;
  NormalizationTransform transform;
  TrainConfig cfg;
  int epoch = 0;  // next epoch to run
  long long skipped_steps = 0;
  long long degenerate_total = 0;
};

TrainState init_train_state(const TrainConfig& cfg,
                            const NormalizationTransform& transform = {});

using EpochCallback = std::function<void(const MetricsRow&)>;

// Runs up to run_epochs epochs (negative: through cfg.epochs) on normalized
// clouds. Appends one row per epoch to metrics. Aborts with DivergenceError
// after 10 consecutive non-finite epochs; the state keeps the last finite
// parameters (failed epochs never update).
void train(TrainState& st, const PointCloud& P0, const PointCloud& P1,
           const CorrespondenceSet& C, int run_epochs = -1,
           std::vector<MetricsRow>* metrics = nullptr,
           const EpochCallback& on_epoch = {});

// Versioned binary checkpoint: config, epoch counters, transform, both nets,
// both Adam states. Reload + continue is bit-identical on the same build.
void save_checkpoint(const std::string& path, const TrainState& st);
TrainState load_checkpoint(const std::string& path);

}  // namespace lsflow
