#include "lsflow/mlp.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace lsflow {

namespace {

double logistic(double y) {
  if (y >= 0.0) return 1.0 / (1.0 + std::exp(-y));
  const double e = std::exp(y);
  return e / (1.0 + e);
}

}  // namespace

double softplus(double z, double beta) {
  const double y = beta * z;
  if (y > 30.0) return z;
  if (y < -30.0) return std::exp(y) / beta;
  return std::log1p(std::exp(y)) / beta;
}

double softplus_d1(double z, double beta) {
  const double y = beta * z;
  if (y > 30.0) return 1.0;
  if (y < -30.0) return std::exp(y);
  return logistic(y);
}

double softplus_d2(double z, double beta) {
  const double y = beta * z;
  if (y > 30.0) return 0.0;
  if (y < -30.0) return beta * std::exp(y);
  const double s = logistic(y);
  return beta * s * (1.0 - s);
}

double softplus_d3(double z, double beta) {
  const double y = beta * z;
  if (y > 30.0) return 0.0;
  if (y < -30.0) return beta * beta * std::exp(y);
  const double s = logistic(y);
  return beta * beta * s * (1.0 - s) * (1.0 - 2.0 * s);
}

// ---------------------------------------------------------------------------

double EncodingConfig::scale() const { return 1.0 / std::sqrt(2.0 * m + 1.0); }

Vec positional_encode(const Vec& x, const EncodingConfig& cfg) {
  const int d = static_cast<int>(x.size());
  const int pc = cfg.dim_per_coord();
  const double s = cfg.scale();
  Vec out(d * pc);
  for (int i = 0; i < d; ++i) {
    int a = i * pc;
    out[a++] = s * x[i];
    for (int k = 0; k < cfg.m; ++k) {
      const double w = std::pow(2.0, k) * M_PI;
      out[a++] = s * std::cos(w * x[i]) / w;
      out[a++] = s * std::sin(w * x[i]) / w;
    }
  }
  return out;
}

void positional_encode_derivs(const Vec& x, const EncodingConfig& cfg, Vec& gamma,
                              Vec& dgamma, Vec& ddgamma) {
  const int d = static_cast<int>(x.size());
  const int pc = cfg.dim_per_coord();
  const double s = cfg.scale();
  gamma.resize(d * pc);
  dgamma.resize(d * pc);
  ddgamma.resize(d * pc);
  for (int i = 0; i < d; ++i) {
    int a = i * pc;
    gamma[a] = s * x[i];
    dgamma[a] = s;
    ddgamma[a] = 0.0;
    ++a;
    for (int k = 0; k < cfg.m; ++k) {
      const double w = std::pow(2.0, k) * M_PI;
      const double c = std::cos(w * x[i]);
      const double sn = std::sin(w * x[i]);
      gamma[a] = s * c / w;
      dgamma[a] = -s * sn;
      ddgamma[a] = -s * w * c;
      ++a;
      gamma[a] = s * sn / w;
      dgamma[a] = s * c;
      ddgamma[a] = -s * w * sn;
      ++a;
    }
  }
}

int encoding_coord_of(int component, const EncodingConfig& cfg) {
  return component / cfg.dim_per_coord();
}

// ---------------------------------------------------------------------------

void MlpParams::validate() const {
  if (layers.empty()) throw DimensionError("mlp: no layers");
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const Layer& l = layers[k];
    if (l.W.rows() != l.b.size())
      throw DimensionError("mlp: layer " + std::to_string(k) + " weight/bias mismatch");
    if (k > 0 && layers[k - 1].W.rows() != l.W.cols())
      throw DimensionError("mlp: layer " + std::to_string(k) + " input dim breaks the chain");
    if (!l.W.allFinite() || !l.b.allFinite())
      throw NumericError("mlp: non-finite entries in layer " + std::to_string(k));
  }
  if (!(beta > 0.0)) throw ConfigError("mlp: beta must be positive");
}

MlpTensors zero_like(const MlpParams& p) {
  MlpTensors t;
  t.reserve(p.layers.size());
  for (const Layer& l : p.layers)
    t.push_back({Mat::Zero(l.W.rows(), l.W.cols()), Vec::Zero(l.b.size())});
  return t;
}

double tensors_squared_norm(const MlpTensors& t) {
  double s = 0.0;
  for (const Layer& l : t) s += l.W.squaredNorm() + l.b.squaredNorm();
  return s;
}

void tensors_scale(MlpTensors& t, double s) {
  for (Layer& l : t) {
    l.W *= s;
    l.b *= s;
  }
}

// ---------------------------------------------------------------------------
// Augmented pass. Per layer (sigma = softplus on hidden, identity on output):
//   A = W h_prev + b          h = sigma(A)
//   P = W U_prev              U = sigma'(A) o P          (columnwise)
//   Z = W S_prev              S = sigma''(A) o Q + sigma'(A) o Z
// with Q = sum_{c<ns2} P[:,c]^2. U starts at U0, S at S0.

InputSeed identity_seed(const Vec& x) {
  InputSeed seed;
  seed.h0 = x;
  seed.U0 = Mat::Identity(x.size(), x.size());
  seed.S0 = Vec::Zero(x.size());
  seed.ns2 = static_cast<int>(x.size());
  return seed;
}

EvalResult mlp_eval(const MlpParams& p, const InputSeed& seed, bool want_jac,
                    bool want_lap, EvalStash* stash) {
  const int L = static_cast<int>(p.layers.size());
  if (L == 0) throw DimensionError("mlp_eval: empty network");
  if (seed.h0.size() != p.layers.front().W.cols())
    throw DimensionError("mlp_eval: input dim " + std::to_string(seed.h0.size()) +
                         " != first layer in dim " +
                         std::to_string(p.layers.front().W.cols()));
  if (want_lap && !want_jac) throw Error("mlp_eval: laplacian requires jacobian");
  if (want_lap && (seed.ns2 < 0 || seed.ns2 > seed.U0.cols()))
    throw DimensionError("mlp_eval: ns2 out of range");

  const double beta = p.beta;
  Vec h = seed.h0;
  Mat U = seed.U0;
  Vec S = seed.S0;
  const int ns2 = seed.ns2;

  if (stash) {
    stash->net = &p;
    stash->A.assign(L, Vec());
    stash->h.assign(L, Vec());
    stash->U.assign(want_jac ? L : 0, Mat());
    stash->P.assign(want_jac ? L : 0, Mat());
    stash->S.assign(want_lap ? L : 0, Vec());
    stash->Z.assign(want_lap ? L : 0, Vec());
    stash->ns2 = ns2;
    stash->has_jac = want_jac;
    stash->has_lap = want_lap;
  }

  for (int k = 0; k < L; ++k) {
    const Layer& l = p.layers[k];
    const bool hidden = k + 1 < L;
    if (stash) stash->h[k] = h;

    Vec A = l.W * h + l.b;
    Mat P;
    Vec Z;
    if (want_jac) {
      if (stash) stash->U[k] = U;
      P = l.W * U;
    }
    if (want_lap) {
      if (stash) stash->S[k] = S;
      Z = l.W * S;
    }
    if (stash) {
      stash->A[k] = A;
      if (want_jac) stash->P[k] = P;
      if (want_lap) stash->Z[k] = Z;
    }

    if (hidden) {
      const int n = static_cast<int>(A.size());
      Vec d1(n);
      for (int r = 0; r < n; ++r) d1[r] = softplus_d1(A[r], beta);
      if (want_lap) {
        Vec q = Vec::Zero(n);
        for (int c = 0; c < ns2; ++c) q.array() += P.col(c).array().square();
        Vec d2(n);
        for (int r = 0; r < n; ++r) d2[r] = softplus_d2(A[r], beta);
        S = d2.cwiseProduct(q) + d1.cwiseProduct(Z);
      }
      if (want_jac) U = (P.array().colwise() * d1.array()).matrix();
      h.resize(n);
      for (int r = 0; r < n; ++r) h[r] = softplus(A[r], beta);
    } else {
      h = std::move(A);
      if (want_jac) U = std::move(P);
      if (want_lap) S = std::move(Z);
    }
  }

  EvalResult out;
  out.value = std::move(h);
  if (want_jac) out.jac = std::move(U);
  if (want_lap) out.lap = std::move(S);
  return out;
}

Vec mlp_eval_backward(const EvalStash& stash, const Vec& value_bar, const Mat& jac_bar,
                      const Vec& lap_bar, MlpTensors& grad) {
  const MlpParams& p = *stash.net;
  const int L = static_cast<int>(p.layers.size());
  if (static_cast<int>(grad.size()) != L)
    throw DimensionError("mlp_eval_backward: grad buffer layer count mismatch");
  if (jac_bar.size() != 0 && !stash.has_jac)
    throw Error("mlp_eval_backward: jacobian adjoint without jacobian forward");
  if (lap_bar.size() != 0 && !stash.has_lap)
    throw Error("mlp_eval_backward: laplacian adjoint without laplacian forward");
  const double beta = p.beta;

  Vec hb = value_bar;
  Mat Ub = jac_bar;
  Vec Sb = lap_bar;

  for (int k = L - 1; k >= 0; --k) {
    const Layer& l = p.layers[k];
    const bool hidden = k + 1 < L;
    const Vec& A = stash.A[k];
    const int n = static_cast<int>(A.size());

    if (hb.size() == 0) hb = Vec::Zero(n);

    Vec Ab;
    Mat Pb;
    Vec Zb;
    if (hidden) {
      Vec d1(n), d2(n);
      for (int r = 0; r < n; ++r) {
        d1[r] = softplus_d1(A[r], beta);
        d2[r] = softplus_d2(A[r], beta);
      }
      Vec d1b = Vec::Zero(n);
      Vec d2b;

      if (Sb.size() != 0) {
        const Mat& P = stash.P[k];
        const Vec& Z = stash.Z[k];
        Vec q = Vec::Zero(n);
        for (int c = 0; c < stash.ns2; ++c) q.array() += P.col(c).array().square();
        d2b = Sb.cwiseProduct(q);
        d1b += Sb.cwiseProduct(Z);
        Zb = Sb.cwiseProduct(d1);
        const Vec qb = Sb.cwiseProduct(d2);
        Pb = Mat::Zero(P.rows(), P.cols());
        for (int c = 0; c < stash.ns2; ++c)
          Pb.col(c) = 2.0 * qb.cwiseProduct(P.col(c));
      }
      if (Ub.size() != 0) {
        const Mat& P = stash.P[k];
        d1b += (Ub.array() * P.array()).rowwise().sum().matrix();
        if (Pb.size() == 0) Pb = Mat::Zero(P.rows(), P.cols());
        Pb += (Ub.array().colwise() * d1.array()).matrix();
      }

      Ab = hb.cwiseProduct(d1) + d1b.cwiseProduct(d2);
      if (d2b.size() != 0) {
        Vec d3(n);
        for (int r = 0; r < n; ++r) d3[r] = softplus_d3(A[r], beta);
        Ab += d2b.cwiseProduct(d3);
      }
    } else {
      Ab = hb;
      if (Ub.size() != 0) Pb = Ub;
      if (Sb.size() != 0) Zb = Sb;
    }

    Layer& g = grad[k];
    if (Zb.size() != 0) {
      g.W.noalias() += Zb * stash.S[k].transpose();
      Sb = l.W.transpose() * Zb;
    } else {
      Sb.resize(0);
    }
    if (Pb.size() != 0) {
      g.W.noalias() += Pb * stash.U[k].transpose();
      Ub = l.W.transpose() * Pb;
    } else {
      Ub.resize(0, 0);
    }
    g.W.noalias() += Ab * stash.h[k].transpose();
    g.b += Ab;
    hb = l.W.transpose() * Ab;
  }
  return hb;
}

// ---------------------------------------------------------------------------

Vec mlp_forward(const MlpParams& p, const Vec& x) {
  InputSeed seed;
  seed.h0 = x;
  return mlp_eval(p, seed, false, false, nullptr).value;
}

Mat mlp_input_jacobian(const MlpParams& p, const Vec& x) {
  return mlp_eval(p, identity_seed(x), true, false, nullptr).jac;
}

Vec mlp_input_laplacian(const MlpParams& p, const Vec& x) {
  return mlp_eval(p, identity_seed(x), true, true, nullptr).lap;
}

// ---------------------------------------------------------------------------

namespace {

constexpr char kMlpMagic[8] = {'L', 'S', 'F', 'M', 'L', 'P', '\0', '\0'};
constexpr std::uint32_t kMlpVersion = 1;

template <typename T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  T v;
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw IoError("checkpoint: truncated stream");
  return v;
}

}  // namespace

void write_mlp(std::ostream& os, const MlpParams& p, const EncodingConfig& enc) {
  os.write(kMlpMagic, sizeof(kMlpMagic));
  put<std::uint32_t>(os, kMlpVersion);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(p.layers.size()));
  put<double>(os, p.beta);
  put<std::int32_t>(os, enc.m);
  for (const Layer& l : p.layers) {
    put<std::uint32_t>(os, static_cast<std::uint32_t>(l.W.rows()));
    put<std::uint32_t>(os, static_cast<std::uint32_t>(l.W.cols()));
    os.write(reinterpret_cast<const char*>(l.W.data()),
             static_cast<std::streamsize>(sizeof(double) * l.W.size()));
    os.write(reinterpret_cast<const char*>(l.b.data()),
             static_cast<std::streamsize>(sizeof(double) * l.b.size()));
  }
}

void read_mlp(std::istream& is, MlpParams& p, EncodingConfig& enc) {
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMlpMagic, sizeof(magic)) != 0)
    throw IoError("checkpoint: bad magic, not an mlp parameter block");
  const auto version = get<std::uint32_t>(is);
  if (version != kMlpVersion)
    throw IoError("checkpoint: unsupported mlp version " + std::to_string(version));
  const auto n_layers = get<std::uint32_t>(is);
  p.layers.clear();
  p.beta = get<double>(is);
  enc.m = get<std::int32_t>(is);
  for (std::uint32_t k = 0; k < n_layers; ++k) {
    const auto rows = get<std::uint32_t>(is);
    const auto cols = get<std::uint32_t>(is);
    if (rows == 0 || cols == 0 || rows > (1u << 20) || cols > (1u << 20))
      throw IoError("checkpoint: implausible layer dims");
    Layer l;
    l.W.resize(rows, cols);
    is.read(reinterpret_cast<char*>(l.W.data()),
            static_cast<std::streamsize>(sizeof(double) * l.W.size()));
    l.b.resize(rows);
    is.read(reinterpret_cast<char*>(l.b.data()),
            static_cast<std::streamsize>(sizeof(double) * l.b.size()));
    if (!is) throw IoError("checkpoint: truncated parameter block");
    p.layers.push_back(std::move(l));
  }
  p.validate();
}

void save_mlp(const std::string& path, const MlpParams& p, const EncodingConfig& enc) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open for writing: " + path);
  write_mlp(os, p, enc);
  if (!os) throw IoError("write failed: " + path);
}

void load_mlp(const std::string& path, MlpParams& p, EncodingConfig& enc) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open: " + path);
  read_mlp(is, p, enc);
}

}  // namespace lsflow
