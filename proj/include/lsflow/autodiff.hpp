#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <span>
#include <vector>

#include "lsflow/mlp.hpp"
#include "lsflow/types.hpp"

namespace lsflow {

// Reverse-mode tape for the scalar arithmetic that assembles losses from
// network evaluations. Network evaluations enter as fused leaf groups: their
// forward pass runs the layerwise engine in mlp.hpp, their reverse pass the
// matching adjoint rules, so parameter gradients are exact through value,
// input-jacobian and input-laplacian outputs (third-order mixed derivatives
// included). Every node value is checked finite at creation; the failure
// message names the innermost context set via push_context().
class Tape;

struct Var {
  Tape* tape = nullptr;
  int id = -1;

  bool valid() const { return tape != nullptr && id >= 0; }
};

class Tape {
 public:
  Tape();

  Var constant(double v);
  Var leaf(double v);  // like constant; kept distinct for readability at call sites

  double value(Var v) const { return nodes_[v.id].val; }
  double adjoint(Var v) const { return adj_[v.id]; }

  // context stack for non-finite diagnostics
  void push_context(const char* name);
  void pop_context();

  // scalar ops
  Var add(Var a, Var b);
  Var add(Var a, double b);
  Var sub(Var a, Var b);
  Var sub(double a, Var b);
  Var mul(Var a, Var b);
  Var mul(Var a, double b);
  Var div(Var a, Var b);
  Var div(double a, Var b);
  Var neg(Var a);
  Var abs(Var a);    // subgradient 0 at 0
  Var sqrt(Var a);   // derivative clamped to 0 at 0
  Var exp(Var a);
  Var log(Var a);
  Var square(Var a);

  // Fixed-input network evaluation: x is constant, outputs become tape
  // leaves backed by the layerwise pullback. Derivative outputs are only
  // available through this entry point.
  struct NetOutputs {
    Var value_at(int r) const;
    Var jac_at(int r, int c) const;
    Var lap_at(int r) const;

    int out_dim = 0;
    int n_dirs = 0;
    bool has_jac = false;
    bool has_lap = false;
    int base = -1;  // first tape node of the group
    Tape* tape = nullptr;
  };

  NetOutputs eval_net(const MlpParams& net, const InputSeed& seed, bool want_jac,
                      bool want_lap);

  // Variable-input network evaluation (value outputs only): the inputs are
  // tape variables; the reverse sweep pushes adjoints into them through the
  // network's input jacobian. Used for trajectory integration.
  std::vector<Var> eval_net_value(const MlpParams& net, std::span<const Var> inputs,
                                  const EncodingConfig* enc);

  // Runs the reverse sweep from the given scalar. Parameter gradients
  // accumulate into the per-network buffers registered via grad_buffer().
  void backward(Var loss);

  // Gradient buffer registration: one buffer per distinct network.
  MlpTensors& grad_buffer(const MlpParams& net);
  bool has_grad_buffer(const MlpParams& net) const;

  std::size_t num_nodes() const { return nodes_.size(); }

 private:
  struct Node {
    double val;
    int pa, pb;
    double wa, wb;
    int ctx;
  };

  struct EvalRecord {
    const MlpParams* net;
    EvalStash stash;
    int base = 0;       // first node id of output group
    int count = 0;      // number of output nodes
    int out_dim = 0;
    int n_dirs = 0;
    bool has_jac = false;
    bool has_lap = false;
    // variable-input case: tape ids of raw inputs plus encoding derivative
    // (d gamma / d x) to chain the input adjoint; empty for fixed inputs
    std::vector<int> input_ids;
    Vec enc_dgamma;  // per encoded component, empty when no encoding
    EncodingConfig enc;
    bool encoded = false;
  };

  Var make(double v, int pa, int pb, double wa, double wb, const char* op);
  void check_finite(double v, const char* op) const;

  std::vector<Node> nodes_;
  std::vector<double> adj_;
  std::vector<EvalRecord> records_;
  std::vector<const char*> ctx_stack_;
  std::map<const MlpParams*, MlpTensors> grads_;
};

// operator sugar
inline Var operator+(Var a, Var b) { return a.tape->add(a, b); }
inline Var operator+(Var a, double b) { return a.tape->add(a, b); }
inline Var operator+(double a, Var b) { return b.tape->add(b, a); }
inline Var operator-(Var a, Var b) { return a.tape->sub(a, b); }
inline Var operator-(Var a, double b) { return a.tape->add(a, -b); }
inline Var operator-(double a, Var b) { return b.tape->sub(a, b); }
inline Var operator-(Var a) { return a.tape->neg(a); }
inline Var operator*(Var a, Var b) { return a.tape->mul(a, b); }
inline Var operator*(Var a, double b) { return a.tape->mul(a, b); }
inline Var operator*(double a, Var b) { return b.tape->mul(b, a); }
inline Var operator/(Var a, Var b) { return a.tape->div(a, b); }
inline Var operator/(Var a, double b) { return a.tape->mul(a, 1.0 / b); }
inline Var operator/(double a, Var b) { return b.tape->div(a, b); }
inline Var abs(Var a) { return a.tape->abs(a); }
inline Var sqrt(Var a) { return a.tape->sqrt(a); }

// ---------------------------------------------------------------------------
// param_gradient: evaluates a scalar loss built on a fresh tape and returns
// the exact gradients for the listed networks, shaped like their parameters.
std::vector<MlpTensors> param_gradient(
    const std::function<Var(Tape&)>& loss_fn,
    std::span<const MlpParams* const> nets);

}  // namespace lsflow
