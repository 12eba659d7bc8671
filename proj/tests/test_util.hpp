#pragma once

#include <vector>

#include "lsflow/fields.hpp"
#include "lsflow/mlp.hpp"
#include "lsflow/rng.hpp"

namespace testutil {

inline lsflow::MlpParams random_mlp(const std::vector<int>& dims, double beta,
                                    std::uint64_t seed, double weight_scale = 0.8) {
  lsflow::Rng rng(seed);
  lsflow::MlpParams p;
  p.beta = beta;
  for (std::size_t k = 0; k + 1 < dims.size(); ++k) {
    lsflow::Layer l;
    l.W.resize(dims[k + 1], dims[k]);
    l.b.resize(dims[k + 1]);
    const double s = weight_scale / std::sqrt(static_cast<double>(dims[k]));
    for (int i = 0; i < l.W.rows(); ++i)
      for (int j = 0; j < l.W.cols(); ++j) l.W(i, j) = s * rng.normal();
    for (int i = 0; i < l.b.size(); ++i) l.b[i] = 0.2 * rng.normal();
    p.layers.push_back(std::move(l));
  }
  return p;
}

inline lsflow::Vec random_vec(int n, std::uint64_t seed, double lo = -0.5,
                              double hi = 0.5) {
  lsflow::Rng rng(seed);
  lsflow::Vec x(n);
  for (int i = 0; i < n; ++i) x[i] = lo + (hi - lo) * rng.uniform();
  return x;
}

// f(x,t) = w . (x, t) + c as an ImplicitField with m = 0 (identity encoding)
inline lsflow::ImplicitField linear_implicit(const Eigen::Vector4d& w, double c) {
  lsflow::ImplicitField F;
  F.enc.m = 0;
  F.params.beta = 100.0;
  lsflow::Layer l;
  l.W = w.transpose();
  l.b.resize(1);
  l.b << c;
  F.params.layers.push_back(std::move(l));
  return F;
}

// V(x) = A x + b as a VelocityField with m = 0
inline lsflow::VelocityField linear_velocity(const lsflow::Mat3& A, const lsflow::Vec3& b) {
  lsflow::VelocityField V;
  V.enc.m = 0;
  V.params.beta = 100.0;
  V.params.layers.push_back({A, b});
  return V;
}

inline lsflow::ImplicitField random_implicit(int m, const std::vector<int>& hidden,
                                             std::uint64_t seed, double beta = 10.0) {
  lsflow::ImplicitField F;
  F.enc.m = m;
  std::vector<int> dims;
  dims.push_back(F.enc.encoded_dim(3) + 1);
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(1);
  F.params = random_mlp(dims, beta, seed);
  return F;
}

inline lsflow::VelocityField random_velocity(int m, const std::vector<int>& hidden,
                                             std::uint64_t seed, double beta = 10.0) {
  lsflow::VelocityField V;
  V.enc.m = m;
  std::vector<int> dims;
  dims.push_back(V.enc.encoded_dim(3));
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(3);
  V.params = random_mlp(dims, beta, seed);
  return V;
}

// independent straightforward evaluator in extended precision
inline std::vector<long double> forward_longdouble(const lsflow::MlpParams& p,
                                                   const lsflow::Vec& x) {
  std::vector<long double> h(x.data(), x.data() + x.size());
  for (std::size_t k = 0; k < p.layers.size(); ++k) {
    const lsflow::Layer& l = p.layers[k];
    std::vector<long double> a(l.W.rows());
    for (int i = 0; i < l.W.rows(); ++i) {
      long double s = l.b[i];
      for (int j = 0; j < l.W.cols(); ++j) s += static_cast<long double>(l.W(i, j)) * h[j];
      a[i] = s;
    }
    if (k + 1 < p.layers.size())
      for (auto& v : a) v = std::log1p(std::exp(static_cast<long double>(p.beta) * v)) /
                            static_cast<long double>(p.beta);
    h = std::move(a);
  }
  return h;
}

}  // namespace testutil
