#include "lsflow/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>

#include "lsflow/autodiff.hpp"

namespace lsflow {

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("config: epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("config: batch_size must be >= 1");
  if (!(lr > 0.0)) throw ConfigError("config: lr must be positive");
  if (!(lr_decay > 0.0)) throw ConfigError("config: lr_decay must be positive");
  if (lr_decay_interval < 1) throw ConfigError("config: lr_decay_interval must be >= 1");
  if (warmup_epochs < 0) throw ConfigError("config: warmup_epochs must be >= 0");
  if (!(warmup_epochs < ramp_end && ramp_end <= epochs))
    throw ConfigError("config: need warmup_epochs < ramp_end <= epochs");
  if (velocity_freeze_epoch < 0) throw ConfigError("config: velocity_freeze_epoch must be >= 0");
  if (T < 1) throw ConfigError("config: T must be >= 1");
  if (enc.m < 0) throw ConfigError("config: encoding m must be >= 0");
  if (!(beta > 0.0)) throw ConfigError("config: beta must be positive");
  if (!(sphere_radius > 0.0 && sphere_radius < 1.0))
    throw ConfigError("config: sphere_radius must be in (0,1)");
  if (implicit_width < 1 || velocity_width < 1 || implicit_depth < 2 || velocity_depth < 2)
    throw ConfigError("config: network sizes must have width >= 1 and depth >= 2");
  if (sigma_near < 0.0 || rho_near < 0.0 || rho_near > 1.0 || time_jitter < 0.0)
    throw ConfigError("config: invalid sampling parameters");
  if (grad_clip < 0.0) throw ConfigError("config: grad_clip must be >= 0");
  if (pde_batch < 0 || velocity_batch < 0 || match_points < 0 || match_pairs < 0)
    throw ConfigError("config: batch overrides must be >= 0");
  if (checkpoint_interval < 1) throw ConfigError("config: checkpoint_interval must be >= 1");
  weights.validate();
}

ResolvedLambdas lambda_schedule(int k, const TrainConfig& cfg) {
  if (k < 0 || k >= cfg.epochs) throw ConfigError("lambda_schedule: epoch out of range");
  ResolvedLambdas r;
  const int w = cfg.warmup_epochs;
  const int n = cfg.ramp_end;
  if (k < w)
    r.lambda_f = 0.0;
  else if (k < n)
    r.lambda_f = cfg.weights.lambda_f * static_cast<double>(k - w) / static_cast<double>(n - w);
  else
    r.lambda_f = cfg.weights.lambda_f;
  r.lambda_v = k > cfg.velocity_freeze_epoch ? 0.0 : cfg.weights.lambda_v;
  r.lambda_m = k < w ? 0.5 * cfg.weights.lambda_m : cfg.weights.lambda_m;
  return r;
}

double lr_at(int k, const TrainConfig& cfg) {
  return cfg.lr * std::pow(cfg.lr_decay, k / cfg.lr_decay_interval);
}

// ---------------------------------------------------------------------------

namespace {

Mat normal_matrix(int rows, int cols, double mean, double stddev, Rng& rng) {
  Mat W(rows, cols);
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < rows; ++r) W(r, c) = mean + stddev * rng.normal();
  return W;
}

// Quasi-uniform unit directions: a Fibonacci sphere rotated by a seeded
// random orthonormal frame.
std::vector<Vec3> fibonacci_directions(int n, Rng& rng) {
  Vec3 e0 = rng.unit_vector();
  Vec3 e1 = rng.unit_vector();
  e1 -= e0 * e0.dot(e1);
  if (e1.norm() < 1e-9) e1 = Vec3(-e0.y(), e0.x(), 0.0);  // pick any perpendicular
  e1.normalize();
  const Vec3 e2(e0.y() * e1.z() - e0.z() * e1.y(), e0.z() * e1.x() - e0.x() * e1.z(),
                e0.x() * e1.y() - e0.y() * e1.x());

  const double golden = M_PI * (3.0 - std::sqrt(5.0));
  std::vector<Vec3> dirs(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double z = 1.0 - (2.0 * i + 1.0) / static_cast<double>(n);
    const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * static_cast<double>(i);
    dirs[static_cast<std::size_t>(i)] =
        rho * std::cos(phi) * e0 + rho * std::sin(phi) * e1 + z * e2;
  }
  return dirs;
}

}  // namespace

MlpParams sphere_init(const EncodingConfig& enc, int width, int depth, double beta,
                      double r, std::uint64_t seed) {
  if (!(r > 0.0 && r < 1.0)) throw ConfigError("sphere_init: r must be in (0,1)");
  if (width < 1 || depth < 2) throw ConfigError("sphere_init: need width >= 1, depth >= 2");
  const int in_dim = enc.encoded_dim(3) + 1;

  // Geometric initialization by spherical quadrature: for quasi-uniform unit
  // directions u_i, (4/n)·Σ_i relu(u_i·x) ≈ ‖x‖ because the spherical mean of
  // relu(u·x̂) is 1/4. Hidden layers pass the rectified features through
  // unchanged; the softplus smoothing and the dead-unit floor it introduces
  // are removed below by an affine calibration of the read-out layer.
  Rng rng(seed);
  const std::vector<Vec3> dirs = fibonacci_directions(width, rng);

  MlpParams p;
  p.beta = beta;
  p.layers.reserve(static_cast<std::size_t>(depth));
  {
    // Row i reads u_i·x from the raw-coordinate columns of the encoding; the
    // oscillatory and time columns stay zero (the init is time-constant).
    Layer lay;
    lay.W = Mat::Zero(width, in_dim);
    lay.b = Vec::Zero(width);
    const int pc = enc.dim_per_coord();
    const double inv_s = 1.0 / enc.scale();
    for (int i = 0; i < width; ++i)
      for (int c = 0; c < 3; ++c) lay.W(i, c * pc) = dirs[static_cast<std::size_t>(i)][c] * inv_s;
    p.layers.push_back(std::move(lay));
  }
  for (int l = 1; l < depth - 1; ++l) {
    Layer lay;
    lay.W = Mat::Identity(width, width);
    lay.b = Vec::Zero(width);
    p.layers.push_back(std::move(lay));
  }
  {
    Layer lay;
    lay.W = Mat::Constant(1, width, 4.0 / static_cast<double>(width));
    lay.b = Vec::Zero(1);
    p.layers.push_back(std::move(lay));
  }

  // Calibrate slope and offset at the target radius against the realized net,
  // so that the shell mean of f(r·u, 0) vanishes and the radial slope there
  // is one. Both corrections act on the linear read-out, hence are exact.
  const ImplicitField probe{p, enc};
  const std::vector<Vec3> probe_dirs = fibonacci_directions(128, rng);
  const auto shell_mean = [&](double rho) {
    double s = 0.0;
    for (const Vec3& u : probe_dirs) s += sdf(probe, {rho * u, 0.0});
    return s / static_cast<double>(probe_dirs.size());
  };
  const double h = std::min(0.05, 0.5 * r);
  double slope = (shell_mean(r + h) - shell_mean(r - h)) / (2.0 * h);
  if (!std::isfinite(slope) || slope < 0.1) slope = 1.0;  // defensive; slope ≈ 1 by design
  const double offset = shell_mean(r);
  p.layers.back().W /= slope;
  p.layers.back().b = Vec::Constant(1, -offset / slope);
  return p;
}

MlpParams velocity_init(const EncodingConfig& enc, int width, int depth, double beta,
                        std::uint64_t seed) {
  if (width < 1 || depth < 2) throw ConfigError("velocity_init: need width >= 1, depth >= 2");
  const int in_dim = enc.encoded_dim(3);

  Rng rng(seed);
  MlpParams p;
  p.beta = beta;
  for (int l = 0; l < depth; ++l) {
    const int rows = l == depth - 1 ? 3 : width;
    const int cols = l == 0 ? in_dim : width;
    Layer lay;
    if (l == depth - 1) {
      lay.W = Mat::Zero(rows, cols);  // V ≡ 0 at init: interpolation starts at rest
      lay.b = Vec::Zero(rows);
    } else {
      lay.W = normal_matrix(rows, cols, 0.0,
                            std::sqrt(2.0) / std::sqrt(static_cast<double>(rows)), rng);
      lay.b = Vec::Zero(rows);
    }
    p.layers.push_back(std::move(lay));
  }
  return p;
}

// ---------------------------------------------------------------------------

AdamState make_adam_state(const MlpParams& p) {
  AdamState st;
  st.m = zero_like(p);
  st.v = zero_like(p);
  st.t = 0;
  return st;
}

bool adam_step(MlpParams& p, const MlpTensors& g, AdamState& st, double lr_k) {
  if (g.size() != p.layers.size() || st.m.size() != p.layers.size())
    throw DimensionError("adam_step: tensor shape mismatch");
  for (const Layer& l : g)
    if (!l.W.allFinite() || !l.b.allFinite()) return false;

  constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  st.t += 1;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(st.t));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(st.t));
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    auto update = [&](auto& param, const auto& grad, auto& m, auto& v) {
      m = b1 * m + (1.0 - b1) * grad;
      v = (b2 * v.array() + (1.0 - b2) * grad.array().square()).matrix();
      param.array() -= lr_k * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
    };
    update(p.layers[l].W, g[l].W, st.m[l].W, st.v[l].W);
    update(p.layers[l].b, g[l].b, st.m[l].b, st.v[l].b);
  }
  return true;
}

// ---------------------------------------------------------------------------

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string metrics_csv_header() {
  return "epoch,lr,lambda_f,lambda_v,lambda_m,pde,smooth,div,match_f0,match_f1,"
         "match_traj,normal,total,degenerate,skipped";
}

std::string metrics_csv_row(const MetricsRow& r) {
  std::string out = std::to_string(r.epoch);
  for (double v : {r.lr, r.lambda_f, r.lambda_v, r.lambda_m, r.loss.pde, r.loss.smooth,
                   r.loss.div, r.loss.match_f0, r.loss.match_f1, r.loss.match_traj,
                   r.loss.normal, r.loss.total})
    out += "," + fmt(v);
  out += "," + std::to_string(r.loss.degenerate);
  out += "," + std::to_string(r.skipped_steps);
  return out;
}

// ---------------------------------------------------------------------------

TrainState init_train_state(const TrainConfig& cfg, const NormalizationTransform& transform) {
  cfg.validate();
  TrainState st;
  st.cfg = cfg;
  st.transform = transform;
  st.F.enc = cfg.enc;
  st.F.params = sphere_init(cfg.enc, cfg.implicit_width, cfg.implicit_depth, cfg.beta,
                            cfg.sphere_radius, derive_seed(cfg.seed, 0x5f));
  st.Vf.enc = cfg.enc;
  st.Vf.params = velocity_init(cfg.enc, cfg.velocity_width, cfg.velocity_depth, cfg.beta,
                               derive_seed(cfg.seed, 0x76));
  st.adam_f = make_adam_state(st.F.params);
  st.adam_v = make_adam_state(st.Vf.params);
  st.epoch = 0;
  return st;
}

namespace {

void clip_gradient(MlpTensors& g, double max_norm) {
  if (max_norm <= 0.0) return;
  const double n = std::sqrt(tensors_squared_norm(g));
  if (n > max_norm) tensors_scale(g, max_norm / n);
}

std::vector<int> draw_indices(int n, int m, Rng& rng) {
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

void train(TrainState& st, const PointCloud& P0, const PointCloud& P1,
           const CorrespondenceSet& C, int run_epochs, std::vector<MetricsRow>* metrics,
           const EpochCallback& on_epoch) {
  const TrainConfig& cfg = st.cfg;
  cfg.validate();
  P0.validate();
  P1.validate();
  if (P0.size() == 0 || P1.size() == 0) throw ConfigError("train: empty point cloud");
  C.validate(P0.size(), P1.size());
  for (const Vec3& p : P0.points)
    if (p.norm() > 1.0 + 1e-9) throw ConfigError("train: clouds must be normalized");
  for (const Vec3& p : P1.points)
    if (p.norm() > 1.0 + 1e-9) throw ConfigError("train: clouds must be normalized");
  if (cfg.use_normals && (!P0.has_normals() || !P1.has_normals()))
    throw ConfigError("train: use_normals requires normals on both clouds");

  const int n_pde = cfg.pde_batch > 0 ? cfg.pde_batch : cfg.batch_size;
  const int n_vel = cfg.velocity_batch > 0 ? cfg.velocity_batch
                                           : std::max(1, cfg.batch_size / 4);
  const int n_pairs = std::min<int>(static_cast<int>(C.size()),
                                    cfg.match_pairs > 0 ? cfg.match_pairs
                                                        : std::max(1, cfg.batch_size / 8));
  const int n_pts_cfg = cfg.match_points > 0 ? cfg.match_points
                                             : std::max(1, cfg.batch_size / 4);

  const int end = run_epochs < 0 ? cfg.epochs
                                 : std::min(cfg.epochs, st.epoch + run_epochs);
  int consecutive_bad = 0;

  for (int k = st.epoch; k < end; ++k) {
    const ResolvedLambdas lam = lambda_schedule(k, cfg);
    const double lr_k = lr_at(k, cfg);
    Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(k)));

    // --- assemble the epoch batches (fixed draw order for determinism)
    std::vector<SpaceTimeSample> pde;
    if (lam.lambda_f > 0.0) {
      const std::vector<Vec3> xs =
          sample_space(n_pde, P0, P1, cfg.sigma_near, cfg.rho_near, rng);
      const std::vector<double> ts = sample_time(n_pde, cfg.T, cfg.time_jitter, rng);
      pde.reserve(xs.size());
      for (std::size_t i = 0; i < xs.size(); ++i) pde.push_back({xs[i], ts[i]});
    }

    std::vector<Vec3> vel;
    if (lam.lambda_v > 0.0)
      vel = sample_space(n_vel, P0, P1, cfg.sigma_near, cfg.rho_near, rng);

    // matching sub-batch: selected pairs become identity correspondences at
    // the head of the epoch clouds, filled up with random cloud points
    PointCloud sub0, sub1;
    CorrespondenceSet subC;
    {
      const int n0 = std::max(n_pairs, std::min<int>(static_cast<int>(P0.size()), n_pts_cfg));
      const int n1 = std::max(n_pairs, std::min<int>(static_cast<int>(P1.size()), n_pts_cfg));
      for (int s : draw_indices(static_cast<int>(C.size()), n_pairs, rng)) {
        const Correspondence& c = C.pairs[static_cast<std::size_t>(s)];
        sub0.points.push_back(P0.points[static_cast<std::size_t>(c.i)]);
        sub1.points.push_back(P1.points[static_cast<std::size_t>(c.j)]);
        if (cfg.use_normals) {
          sub0.normals.push_back(P0.normals[static_cast<std::size_t>(c.i)]);
          sub1.normals.push_back(P1.normals[static_cast<std::size_t>(c.j)]);
        }
        subC.pairs.push_back({static_cast<int>(sub0.points.size()) - 1,
                              static_cast<int>(sub1.points.size()) - 1});
      }
      for (int s : draw_indices(static_cast<int>(P0.size()),
                                std::max(0, n0 - n_pairs), rng)) {
        sub0.points.push_back(P0.points[static_cast<std::size_t>(s)]);
        if (cfg.use_normals) sub0.normals.push_back(P0.normals[static_cast<std::size_t>(s)]);
      }
      for (int s : draw_indices(static_cast<int>(P1.size()),
                                std::max(0, n1 - n_pairs), rng)) {
        sub1.points.push_back(P1.points[static_cast<std::size_t>(s)]);
        if (cfg.use_normals) sub1.normals.push_back(P1.normals[static_cast<std::size_t>(s)]);
      }
    }

    LossWeights w = cfg.weights;
    w.lambda_f = lam.lambda_f;
    w.lambda_v = lam.lambda_v;
    w.lambda_m = lam.lambda_m;

    TotalLossInputs in;
    in.pde_samples = pde;
    in.velocity_points = vel;
    in.P0 = &sub0;
    in.P1 = &sub1;
    in.C = &subC;
    in.T = cfg.T;
    in.use_normals = cfg.use_normals;

    MetricsRow row;
    row.epoch = k;
    row.lr = lr_k;
    row.lambda_f = lam.lambda_f;
    row.lambda_v = lam.lambda_v;
    row.lambda_m = lam.lambda_m;

    Tape tape;
    bool finite_epoch = true;
    try {
      const Var total = total_loss_tape(tape, st.F, st.Vf, in, w, &row.loss);
      tape.backward(total);
    } catch (const NumericError&) {
      finite_epoch = false;
    }

    if (!finite_epoch) {
      row.loss = LossBreakdown{};
      row.loss.total = std::numeric_limits<double>::quiet_NaN();
      if (++consecutive_bad >= 10) {
        st.epoch = k + 1;
        throw DivergenceError("train: loss non-finite for 10 consecutive epochs (epoch " +
                              std::to_string(k) + "); state holds last finite parameters");
      }
    } else {
      consecutive_bad = 0;
      MlpTensors gf = tape.grad_buffer(st.F.params);  // copies: clipping mutates
      MlpTensors gv = tape.grad_buffer(st.Vf.params);
      clip_gradient(gf, cfg.grad_clip);
      clip_gradient(gv, cfg.grad_clip);

      const bool update_implicit = !(cfg.strict_freeze && k < cfg.warmup_epochs);
      const bool update_velocity = k <= cfg.velocity_freeze_epoch;
      if (update_implicit && !adam_step(st.F.params, gf, st.adam_f, lr_k))
        row.skipped_steps += 1;
      if (update_velocity && !adam_step(st.Vf.params, gv, st.adam_v, lr_k))
        row.skipped_steps += 1;
    }

    st.skipped_steps += row.skipped_steps;
    st.degenerate_total += row.loss.degenerate;
    st.epoch = k + 1;
    if (metrics) metrics->push_back(row);
    if (on_epoch) on_epoch(row);
  }
}

// ---------------------------------------------------------------------------
// Checkpoint format (little-endian binary):
//   magic "LSFCKP01", u32 version, config block, counters, transform,
//   implicit net, velocity net, Adam moments for both.

namespace {

constexpr char kMagic[8] = {'L', 'S', 'F', 'C', 'K', 'P', '0', '1'};

void put_i64(std::ostream& os, long long v) { os.write(reinterpret_cast<const char*>(&v), 8); }
void put_f64(std::ostream& os, double v) { os.write(reinterpret_cast<const char*>(&v), 8); }

long long get_i64(std::istream& is) {
  long long v = 0;
  is.read(reinterpret_cast<char*>(&v), 8);
  return v;
}
double get_f64(std::istream& is) {
  double v = 0;
  is.read(reinterpret_cast<char*>(&v), 8);
  return v;
}

void put_tensors(std::ostream& os, const MlpTensors& t) {
  put_i64(os, static_cast<long long>(t.size()));
  for (const Layer& l : t) {
    put_i64(os, l.W.rows());
    put_i64(os, l.W.cols());
    os.write(reinterpret_cast<const char*>(l.W.data()),
             static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(l.W.size())));
    os.write(reinterpret_cast<const char*>(l.b.data()),
             static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(l.b.size())));
  }
}

MlpTensors get_tensors(std::istream& is) {
  const long long n = get_i64(is);
  if (n < 0 || n > 1024) throw IoError("checkpoint: corrupt tensor count");
  MlpTensors t(static_cast<std::size_t>(n));
  for (Layer& l : t) {
    const long long r = get_i64(is);
    const long long c = get_i64(is);
    if (r < 0 || c < 0 || r > 1 << 20 || c > 1 << 20)
      throw IoError("checkpoint: corrupt tensor shape");
    l.W.resize(r, c);
    l.b.resize(r);
    is.read(reinterpret_cast<char*>(l.W.data()),
            static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(l.W.size())));
    is.read(reinterpret_cast<char*>(l.b.data()),
            static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(l.b.size())));
  }
  return t;
}

void put_config(std::ostream& os, const TrainConfig& c) {
  put_i64(os, c.epochs);
  put_i64(os, c.batch_size);
  put_f64(os, c.lr);
  put_f64(os, c.lr_decay);
  put_i64(os, c.lr_decay_interval);
  put_i64(os, c.warmup_epochs);
  put_i64(os, c.ramp_end);
  put_i64(os, c.velocity_freeze_epoch);
  put_f64(os, c.weights.lambda_f);
  put_f64(os, c.weights.lambda_v);
  put_f64(os, c.weights.lambda_m);
  put_f64(os, c.weights.lambda_l);
  put_f64(os, c.weights.lambda_div);
  put_f64(os, c.weights.alpha);
  put_f64(os, c.weights.gamma);
  put_i64(os, c.weights.mode == EikonalMode::OLSE ? 1 : 0);
  put_i64(os, c.T);
  put_i64(os, c.enc.m);
  put_f64(os, c.beta);
  put_f64(os, c.sphere_radius);
  put_i64(os, static_cast<long long>(c.seed));
  put_i64(os, c.implicit_width);
  put_i64(os, c.implicit_depth);
  put_i64(os, c.velocity_width);
  put_i64(os, c.velocity_depth);
  put_f64(os, c.sigma_near);
  put_f64(os, c.rho_near);
  put_f64(os, c.time_jitter);
  put_f64(os, c.grad_clip);
  put_i64(os, c.strict_freeze ? 1 : 0);
  put_i64(os, c.use_normals ? 1 : 0);
  put_i64(os, c.pde_batch);
  put_i64(os, c.velocity_batch);
  put_i64(os, c.match_points);
  put_i64(os, c.match_pairs);
  put_i64(os, c.checkpoint_interval);
}

TrainConfig get_config(std::istream& is) {
  TrainConfig c;
  c.epochs = static_cast<int>(get_i64(is));
  c.batch_size = static_cast<int>(get_i64(is));
  c.lr = get_f64(is);
  c.lr_decay = get_f64(is);
  c.lr_decay_interval = static_cast<int>(get_i64(is));
  c.warmup_epochs = static_cast<int>(get_i64(is));
  c.ramp_end = static_cast<int>(get_i64(is));
  c.velocity_freeze_epoch = static_cast<int>(get_i64(is));
  c.weights.lambda_f = get_f64(is);
  c.weights.lambda_v = get_f64(is);
  c.weights.lambda_m = get_f64(is);
  c.weights.lambda_l = get_f64(is);
  c.weights.lambda_div = get_f64(is);
  c.weights.alpha = get_f64(is);
  c.weights.gamma = get_f64(is);
  c.weights.mode = get_i64(is) == 1 ? EikonalMode::OLSE : EikonalMode::MLSE;
  c.T = static_cast<int>(get_i64(is));
  c.enc.m = static_cast<int>(get_i64(is));
  c.beta = get_f64(is);
  c.sphere_radius = get_f64(is);
  c.seed = static_cast<std::uint64_t>(get_i64(is));
  c.implicit_width = static_cast<int>(get_i64(is));
  c.implicit_depth = static_cast<int>(get_i64(is));
  c.velocity_width = static_cast<int>(get_i64(is));
  c.velocity_depth = static_cast<int>(get_i64(is));
  c.sigma_near = get_f64(is);
  c.rho_near = get_f64(is);
  c.time_jitter = get_f64(is);
  c.grad_clip = get_f64(is);
  c.strict_freeze = get_i64(is) == 1;
  c.use_normals = get_i64(is) == 1;
  c.pde_batch = static_cast<int>(get_i64(is));
  c.velocity_batch = static_cast<int>(get_i64(is));
  c.match_points = static_cast<int>(get_i64(is));
  c.match_pairs = static_cast<int>(get_i64(is));
  c.checkpoint_interval = static_cast<int>(get_i64(is));
  return c;
}

}  // namespace

void save_checkpoint(const std::string& path, const TrainState& st) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("checkpoint: cannot open for writing: " + path);
  os.write(kMagic, 8);
  put_i64(os, 1);  // version
  put_config(os, st.cfg);
  put_i64(os, st.epoch);
  put_i64(os, st.skipped_steps);
  put_i64(os, st.degenerate_total);
  for (int i = 0; i < 3; ++i) put_f64(os, st.transform.center[i]);
  put_f64(os, st.transform.scale);
  write_mlp(os, st.F.params, st.F.enc);
  write_mlp(os, st.Vf.params, st.Vf.enc);
  put_i64(os, st.adam_f.t);
  put_tensors(os, st.adam_f.m);
  put_tensors(os, st.adam_f.v);
  put_i64(os, st.adam_v.t);
  put_tensors(os, st.adam_v.m);
  put_tensors(os, st.adam_v.v);
  if (!os) throw IoError("checkpoint: write failed: " + path);
}

TrainState load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("checkpoint: cannot open: " + path);
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kMagic, 8) != 0)
    throw IoError("checkpoint: bad magic in " + path);
  if (get_i64(is) != 1) throw IoError("checkpoint: unsupported version in " + path);

  TrainState st;
  st.cfg = get_config(is);
  st.epoch = static_cast<int>(get_i64(is));
  st.skipped_steps = get_i64(is);
  st.degenerate_total = get_i64(is);
  for (int i = 0; i < 3; ++i) st.transform.center[i] = get_f64(is);
  st.transform.scale = get_f64(is);
  read_mlp(is, st.F.params, st.F.enc);
  read_mlp(is, st.Vf.params, st.Vf.enc);
  st.adam_f.t = get_i64(is);
  st.adam_f.m = get_tensors(is);
  st.adam_f.v = get_tensors(is);
  st.adam_v.t = get_i64(is);
  st.adam_v.m = get_tensors(is);
  st.adam_v.v = get_tensors(is);
  if (!is) throw IoError("checkpoint: truncated file: " + path);
  st.F.validate();
  st.Vf.validate();
  return st;
}

}  // namespace lsflow
