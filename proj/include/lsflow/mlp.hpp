#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lsflow/types.hpp"

namespace lsflow {

// ---------------------------------------------------------------------------
// Softplus with sharpness beta, stabilized for large |beta*z|:
//   beta*z >  30 : z
//   beta*z < -30 : exp(beta*z)/beta
// Derivative chain is consistent with the branch taken.
double softplus(double z, double beta);
double softplus_d1(double z, double beta);  // logistic(beta*z)
double softplus_d2(double z, double beta);
double softplus_d3(double z, double beta);

// ---------------------------------------------------------------------------
// Lipschitz positional encoding. Per input coordinate x_i the encoding emits
//   ( x_i, cos(2^k pi x_i)/(2^k pi), sin(2^k pi x_i)/(2^k pi) )  k = 0..m-1
// scaled by 1/sqrt(2m+1). m = 0 is the identity.
struct EncodingConfig {
  int m = 3;

  int dim_per_coord() const { return 2 * m + 1; }
  int encoded_dim(int spatial_dim) const { return spatial_dim * dim_per_coord(); }
  double scale() const;
};

Vec positional_encode(const Vec& x, const EncodingConfig& cfg);

// Componentwise first/second derivatives of the encoding. Each encoded
// component depends on exactly one input coordinate, so the derivatives are
// stored flat, parallel to the encoded vector.
void positional_encode_derivs(const Vec& x, const EncodingConfig& cfg, Vec& gamma,
                              Vec& dgamma, Vec& ddgamma);

// index of the raw coordinate each encoded component belongs to
int encoding_coord_of(int component, const EncodingConfig& cfg);

// ---------------------------------------------------------------------------
// MLP with Softplus hidden activations and a linear output layer.
struct Layer {
  Mat W;
  Vec b;
};

struct MlpParams {
  std::vector<Layer> layers;
  double beta = 100.0;

  int in_dim() const { return layers.empty() ? 0 : static_cast<int>(layers.front().W.cols()); }
  int out_dim() const { return layers.empty() ? 0 : static_cast<int>(layers.back().W.rows()); }

  // consecutive dims chain, all entries finite
  void validate() const;
};

// Gradient / moment buffers share the layer shapes of MlpParams.
using MlpTensors = std::vector<Layer>;

MlpTensors zero_like(const MlpParams& p);
double tensors_squared_norm(const MlpTensors& t);
void tensors_scale(MlpTensors& t, double s);

// ---------------------------------------------------------------------------
// Augmented evaluation: propagates value, input-Jacobian and summed pure
// second derivatives through the layers in one pass. The seed describes the
// inputs as functions of nd underlying directions:
//   h0      value (dim D)
//   U0      D x nd, d h0 / d s_c
//   S0      D, sum over the first ns2 directions of d^2 h0 / d s_c^2
// For a raw evaluation the seed is (x, I, 0).
struct InputSeed {
  Vec h0;
  Mat U0;
  Vec S0;
  int ns2 = 0;
};

InputSeed identity_seed(const Vec& x);

struct EvalResult {
  Vec value;
  Mat jac;  // out x nd, when requested
  Vec lap;  // out, when requested: sum_c<ns2 d^2 y / d s_c^2
};

// Intermediates kept for the backward pass.
struct EvalStash {
  const MlpParams* net = nullptr;
  std::vector<Vec> A;  // preactivations, layer 1..L
  std::vector<Vec> h;  // h[0] = h0, h[k] = layer-k output, size L (inputs to each layer)
  std::vector<Mat> U;  // inputs to each layer (jacobian path)
  std::vector<Mat> P;  // W * U per layer
  std::vector<Vec> S;  // inputs to each layer (laplacian path)
  std::vector<Vec> Z;  // W * S per layer
  int ns2 = 0;
  bool has_jac = false;
  bool has_lap = false;
};

// want_lap requires want_jac (the quadratic term needs P).
EvalResult mlp_eval(const MlpParams& p, const InputSeed& seed, bool want_jac,
                    bool want_lap, EvalStash* stash);

// Reverse sweep. Adjoints may be empty (size 0) meaning zero. Parameter
// gradients accumulate into grad; the return value is the adjoint of h0
// (nonzero only through the value path unless jac/lap adjoints are set,
// in which case it is still exact for h0 but U0/S0 adjoints are discarded —
// callers differentiate w.r.t. inputs only through value outputs).
Vec mlp_eval_backward(const EvalStash& stash, const Vec& value_bar, const Mat& jac_bar,
                      const Vec& lap_bar, MlpTensors& grad);

// ---------------------------------------------------------------------------
// diffnet surface: plain evaluations of the raw network (no encoding).
Vec mlp_forward(const MlpParams& p, const Vec& x);
Mat mlp_input_jacobian(const MlpParams& p, const Vec& x);
Vec mlp_input_laplacian(const MlpParams& p, const Vec& x);

// ---------------------------------------------------------------------------
// Parameter checkpoint file (versioned binary, little-endian):
//   magic "LSFMLP\0\0", u32 version, u32 n_layers, f64 beta, i32 enc_m,
//   then per layer u32 rows, u32 cols, W column-major f64, b f64.
void save_mlp(const std::string& path, const MlpParams& p, const EncodingConfig& enc);
void load_mlp(const std::string& path, MlpParams& p, EncodingConfig& enc);

void write_mlp(std::ostream& os, const MlpParams& p, const EncodingConfig& enc);
void read_mlp(std::istream& is, MlpParams& p, EncodingConfig& enc);

}  // namespace lsflow
