#include "lsflow/autodiff.hpp"

#include <cmath>

namespace lsflow {

Tape::Tape() { nodes_.reserve(1 << 14); }

void Tape::check_finite(double v, const char* op) const {
  if (std::isfinite(v)) return;
  std::string msg = "tape: non-finite value from ";
  msg += op;
  if (!ctx_stack_.empty()) {
    msg += " in ";
    msg += ctx_stack_.back();
  }
  throw NumericError(msg);
}

Var Tape::make(double v, int pa, int pb, double wa, double wb, const char* op) {
  check_finite(v, op);
  nodes_.push_back(Node{v, pa, pb, wa, wb, 0});
  return Var{this, static_cast<int>(nodes_.size()) - 1};
}

Var Tape::constant(double v) { return make(v, -1, -1, 0.0, 0.0, "constant"); }
Var Tape::leaf(double v) { return make(v, -1, -1, 0.0, 0.0, "leaf"); }

void Tape::push_context(const char* name) { ctx_stack_.push_back(name); }
void Tape::pop_context() { ctx_stack_.pop_back(); }

Var Tape::add(Var a, Var b) {
  return make(nodes_[a.id].val + nodes_[b.id].val, a.id, b.id, 1.0, 1.0, "add");
}
Var Tape::add(Var a, double b) {
  return make(nodes_[a.id].val + b, a.id, -1, 1.0, 0.0, "add");
}
Var Tape::sub(Var a, Var b) {
  return make(nodes_[a.id].val - nodes_[b.id].val, a.id, b.id, 1.0, -1.0, "sub");
}
Var Tape::sub(double a, Var b) {
  return make(a - nodes_[b.id].val, b.id, -1, -1.0, 0.0, "sub");
}
Var Tape::mul(Var a, Var b) {
  const double av = nodes_[a.id].val, bv = nodes_[b.id].val;
  return make(av * bv, a.id, b.id, bv, av, "mul");
}
Var Tape::mul(Var a, double b) {
  return make(nodes_[a.id].val * b, a.id, -1, b, 0.0, "mul");
}
Var Tape::div(Var a, Var b) {
  const double av = nodes_[a.id].val, bv = nodes_[b.id].val;
  return make(av / bv, a.id, b.id, 1.0 / bv, -av / (bv * bv), "div");
}
Var Tape::div(double a, Var b) {
  const double bv = nodes_[b.id].val;
  return make(a / bv, b.id, -1, -a / (bv * bv), 0.0, "div");
}
Var Tape::neg(Var a) { return make(-nodes_[a.id].val, a.id, -1, -1.0, 0.0, "neg"); }
Var Tape::abs(Var a) {
  const double v = nodes_[a.id].val;
  const double s = v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
  return make(std::fabs(v), a.id, -1, s, 0.0, "abs");
}
Var Tape::sqrt(Var a) {
  const double v = nodes_[a.id].val;
  const double r = std::sqrt(v);
  return make(r, a.id, -1, v > 0.0 ? 0.5 / r : 0.0, 0.0, "sqrt");
}
Var Tape::exp(Var a) {
  const double e = std::exp(nodes_[a.id].val);
  return make(e, a.id, -1, e, 0.0, "exp");
}
Var Tape::log(Var a) {
  const double v = nodes_[a.id].val;
  return make(std::log(v), a.id, -1, 1.0 / v, 0.0, "log");
}
Var Tape::square(Var a) {
  const double v = nodes_[a.id].val;
  return make(v * v, a.id, -1, 2.0 * v, 0.0, "square");
}

// ---------------------------------------------------------------------------

Var Tape::NetOutputs::value_at(int r) const { return Var{tape, base + r}; }
Var Tape::NetOutputs::jac_at(int r, int c) const {
  return Var{tape, base + out_dim + r * n_dirs + c};
}
Var Tape::NetOutputs::lap_at(int r) const {
  return Var{tape, base + out_dim + (has_jac ? out_dim * n_dirs : 0) + r};
}

MlpTensors& Tape::grad_buffer(const MlpParams& net) {
  auto it = grads_.find(&net);
  if (it == grads_.end()) it = grads_.emplace(&net, zero_like(net)).first;
  return it->second;
}

bool Tape::has_grad_buffer(const MlpParams& net) const {
  return grads_.count(&net) != 0;
}

Tape::NetOutputs Tape::eval_net(const MlpParams& net, const InputSeed& seed,
                                bool want_jac, bool want_lap) {
  grad_buffer(net);
  EvalRecord rec;
  rec.net = &net;
  const EvalResult r = mlp_eval(net, seed, want_jac, want_lap, &rec.stash);
  rec.base = static_cast<int>(nodes_.size());
  rec.out_dim = static_cast<int>(r.value.size());
  rec.n_dirs = want_jac ? static_cast<int>(r.jac.cols()) : 0;
  rec.has_jac = want_jac;
  rec.has_lap = want_lap;

  for (int i = 0; i < rec.out_dim; ++i) make(r.value[i], -1, -1, 0.0, 0.0, "net value");
  if (want_jac)
    for (int i = 0; i < rec.out_dim; ++i)
      for (int c = 0; c < rec.n_dirs; ++c) make(r.jac(i, c), -1, -1, 0.0, 0.0, "net jacobian");
  if (want_lap)
    for (int i = 0; i < rec.out_dim; ++i) make(r.lap[i], -1, -1, 0.0, 0.0, "net laplacian");
  rec.count = static_cast<int>(nodes_.size()) - rec.base;

  NetOutputs out;
  out.out_dim = rec.out_dim;
  out.n_dirs = rec.n_dirs;
  out.has_jac = want_jac;
  out.has_lap = want_lap;
  out.base = rec.base;
  out.tape = this;
  records_.push_back(std::move(rec));
  return out;
}

std::vector<Var> Tape::eval_net_value(const MlpParams& net, std::span<const Var> inputs,
                                      const EncodingConfig* enc) {
  grad_buffer(net);
  EvalRecord rec;
  rec.net = &net;
  Vec x(inputs.size());
  rec.input_ids.reserve(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    x[static_cast<int>(i)] = nodes_[inputs[i].id].val;
    rec.input_ids.push_back(inputs[i].id);
  }

  InputSeed seed;
  if (enc) {
    Vec ddg;
    positional_encode_derivs(x, *enc, seed.h0, rec.enc_dgamma, ddg);
    rec.enc = *enc;
    rec.encoded = true;
  } else {
    seed.h0 = x;
  }

  const EvalResult r = mlp_eval(net, seed, false, false, &rec.stash);
  rec.base = static_cast<int>(nodes_.size());
  rec.out_dim = static_cast<int>(r.value.size());
  for (int i = 0; i < rec.out_dim; ++i) make(r.value[i], -1, -1, 0.0, 0.0, "net value");
  rec.count = rec.out_dim;

  std::vector<Var> out(rec.out_dim);
  for (int i = 0; i < rec.out_dim; ++i) out[i] = Var{this, rec.base + i};
  records_.push_back(std::move(rec));
  return out;
}

void Tape::backward(Var loss) {
  if (loss.tape != this || loss.id < 0 || loss.id >= static_cast<int>(nodes_.size()))
    throw Error("tape: backward from a variable not on this tape");
  adj_.assign(nodes_.size(), 0.0);
  adj_[loss.id] = 1.0;

  int ri = static_cast<int>(records_.size()) - 1;
  for (int id = static_cast<int>(nodes_.size()) - 1; id >= 0; --id) {
    if (ri >= 0) {
      const EvalRecord& rec = records_[ri];
      if (id == rec.base + rec.count - 1) {
        // all adjoints of the group's outputs are final; pull back the net
        Vec vbar = Vec::Zero(rec.out_dim);
        bool any_v = false;
        for (int i = 0; i < rec.out_dim; ++i) {
          vbar[i] = adj_[rec.base + i];
          any_v = any_v || vbar[i] != 0.0;
        }
        Mat jbar;
        Vec lbar;
        int off = rec.out_dim;
        if (rec.has_jac) {
          jbar.setZero(rec.out_dim, rec.n_dirs);
          bool any = false;
          for (int r = 0; r < rec.out_dim; ++r)
            for (int c = 0; c < rec.n_dirs; ++c) {
              jbar(r, c) = adj_[rec.base + off + r * rec.n_dirs + c];
              any = any || jbar(r, c) != 0.0;
            }
          if (!any) jbar.resize(0, 0);
          off += rec.out_dim * rec.n_dirs;
        }
        if (rec.has_lap) {
          lbar.setZero(rec.out_dim);
          bool any = false;
          for (int r = 0; r < rec.out_dim; ++r) {
            lbar[r] = adj_[rec.base + off + r];
            any = any || lbar[r] != 0.0;
          }
          if (!any) lbar.resize(0);
        }

        if (any_v || jbar.size() != 0 || lbar.size() != 0) {
          if (!any_v) vbar.resize(0);
          Vec h0b = mlp_eval_backward(rec.stash, vbar, jbar, lbar, grads_.at(rec.net));
          if (!rec.input_ids.empty() && h0b.size() != 0) {
            if (rec.encoded) {
              for (int i = 0; i < h0b.size(); ++i)
                adj_[rec.input_ids[encoding_coord_of(i, rec.enc)]] +=
                    h0b[i] * rec.enc_dgamma[i];
            } else {
              for (int i = 0; i < h0b.size(); ++i) adj_[rec.input_ids[i]] += h0b[i];
            }
          }
        }
        id = rec.base;  // loop step lands on base - 1
        --ri;
        continue;
      }
    }
    const double a = adj_[id];
    if (a == 0.0) continue;
    const Node& nd = nodes_[id];
    if (nd.pa >= 0) adj_[nd.pa] += nd.wa * a;
    if (nd.pb >= 0) adj_[nd.pb] += nd.wb * a;
  }
}

// ---------------------------------------------------------------------------

std::vector<MlpTensors> param_gradient(const std::function<Var(Tape&)>& loss_fn,
                                       std::span<const MlpParams* const> nets) {
  Tape tape;
  const Var loss = loss_fn(tape);
  tape.backward(loss);
  std::vector<MlpTensors> out;
  out.reserve(nets.size());
  for (const MlpParams* net : nets)
    out.push_back(tape.has_grad_buffer(*net) ? tape.grad_buffer(*net) : zero_like(*net));
  return out;
}

}  // namespace lsflow
