#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "duet/kernels.h"
#include "duet/rng.h"

// Reverse-mode engine with exactly the ops the duet networks need. Tensors
// store 32-bit floats in production (Tensor alias below); every op is
// templated so gradient checks can run the identical graph in 64-bit.

namespace duet {

template <class T>
struct BasicTensor {
  std::vector<int> shape;
  std::vector<T> data;
  std::vector<T> grad;  // allocated on first accumulation
  bool requires_grad = false;
  bool from_op = false;  // produced by a recorded op
  std::string name;

  size_t size() const { return data.size(); }
  int dim(int i) const { return shape[static_cast<size_t>(i)]; }

  bool needs_grad() const { return requires_grad || from_op; }

  void ensure_grad() {
    if (grad.empty()) grad.assign(data.size(), T(0));
  }
  void zero_grad() {
    if (!grad.empty()) std::fill(grad.begin(), grad.end(), T(0));
  }

  std::string shape_str() const {
    std::ostringstream ss;
    ss << '[';
    for (size_t i = 0; i < shape.size(); ++i) ss << (i ? "x" : "") << shape[i];
    ss << ']';
    return ss.str();
  }
};

template <class T>
using TensorPtr = std::shared_ptr<BasicTensor<T>>;

template <class T>
TensorPtr<T> make_tensor(std::vector<int> shape, bool requires_grad = false,
                         std::string name = "") {
  auto t = std::make_shared<BasicTensor<T>>();
  size_t n = 1;
  for (int d : shape) {
    if (d <= 0) throw std::invalid_argument("make_tensor: non-positive dimension");
    n *= static_cast<size_t>(d);
  }
  t->shape = std::move(shape);
  t->data.assign(n, T(0));
  t->requires_grad = requires_grad;
  t->name = std::move(name);
  return t;
}

template <class T>
TensorPtr<T> make_tensor(std::vector<int> shape, std::vector<T> data, bool requires_grad = false) {
  auto t = make_tensor<T>(std::move(shape), requires_grad);
  if (data.size() != t->size()) throw std::invalid_argument("make_tensor: data/shape mismatch");
  t->data = std::move(data);
  return t;
}

// Records backward closures in forward order; backward() replays them in
// exact reverse. One tape per loss evaluation.
template <class T>
class Tape {
 public:
  void record(std::function<void()> fn) { ops_.push_back(std::move(fn)); }

  void backward(const TensorPtr<T>& loss) { backward_seeded(loss, T(1)); }

  // Seeds d(loss)/d(loss) with `seed` instead of 1; the trainer uses 1/B to
  // get mean-loss gradients without an extra scale node.
  void backward_seeded(const TensorPtr<T>& loss, T seed) {
    if (backward_done_) {
      throw std::logic_error("Tape::backward called twice without reset");
    }
    if (loss->size() != 1) throw std::invalid_argument("backward: loss must be scalar");
    backward_done_ = true;
    loss->ensure_grad();
    loss->grad[0] += seed;
    for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) (*it)();
  }

  void reset() {
    ops_.clear();
    backward_done_ = false;
  }

  size_t recorded_ops() const { return ops_.size(); }

 private:
  std::vector<std::function<void()>> ops_;
  bool backward_done_ = false;
};

namespace detail {

template <class T>
TensorPtr<T> op_output(Tape<T>* tape, std::vector<int> shape) {
  auto out = make_tensor<T>(std::move(shape));
  out->from_op = tape != nullptr;
  return out;
}

// True when a backward closure has gradient to propagate.
template <class T>
bool has_grad(const TensorPtr<T>& t) {
  return !t->grad.empty();
}

}  // namespace detail

// y = xW + b. x is flattened to a vector of length in_dim.
template <class T>
TensorPtr<T> affine(Tape<T>* tape, const TensorPtr<T>& x, const TensorPtr<T>& w,
                    const TensorPtr<T>& b) {
  if (w->shape.size() != 2) throw std::invalid_argument("affine: W must be 2-D, got " + w->shape_str());
  const int in_dim = w->dim(0);
  const int out_dim = w->dim(1);
  if (static_cast<size_t>(in_dim) != x->size() || static_cast<size_t>(out_dim) != b->size()) {
    throw std::invalid_argument("affine: shape mismatch x" + x->shape_str() + " W" +
                                w->shape_str() + " b" + b->shape_str());
  }
  auto y = detail::op_output(tape, {out_dim});
  kernels::affine_forward(x->data.data(), w->data.data(), b->data.data(), y->data.data(), in_dim,
                          out_dim);
  if (tape) {
    tape->record([x, w, b, y, in_dim, out_dim]() {
      if (!detail::has_grad(y)) return;
      T* dx = nullptr;
      T* dw = nullptr;
      T* db = nullptr;
      if (x->needs_grad()) {
        x->ensure_grad();
        dx = x->grad.data();
      }
      if (w->requires_grad) {
        w->ensure_grad();
        dw = w->grad.data();
      }
      if (b->requires_grad) {
        b->ensure_grad();
        db = b->grad.data();
      }
      kernels::affine_backward(x->data.data(), w->data.data(), y->grad.data(), dx, dw, db, in_dim,
                               out_dim);
    });
  }
  return y;
}

// x: [c, L]; kernels: [F, c, w] spanning the full channel height and
// sliding along the sequence axis with stride 1; bias per filter.
// Output [F, L - w + 1]. No nonlinearity.
template <class T>
TensorPtr<T> conv_seq(Tape<T>* tape, const TensorPtr<T>& x, const TensorPtr<T>& k,
                      const TensorPtr<T>& b) {
  if (x->shape.size() != 2 || k->shape.size() != 3) {
    throw std::invalid_argument("conv_seq: need x [c,L] and kernels [F,c,w], got x" +
                                x->shape_str() + " k" + k->shape_str());
  }
  const int c = x->dim(0), len = x->dim(1);
  const int f = k->dim(0), kc = k->dim(1), w = k->dim(2);
  if (kc != c) {
    throw std::invalid_argument("conv_seq: channel mismatch x" + x->shape_str() + " k" +
                                k->shape_str());
  }
  if (len < w) {
    throw std::invalid_argument("conv_seq: input length " + std::to_string(len) +
                                " shorter than window " + std::to_string(w));
  }
  if (static_cast<size_t>(f) != b->size()) {
    throw std::invalid_argument("conv_seq: bias size mismatch k" + k->shape_str() + " b" +
                                b->shape_str());
  }
  auto y = detail::op_output(tape, {f, len - w + 1});
  kernels::conv_forward(x->data.data(), k->data.data(), b->data.data(), y->data.data(), c, len, w,
                        f);
  if (tape) {
    tape->record([x, k, b, y, c, len, w, f]() {
      if (!detail::has_grad(y)) return;
      if (k->requires_grad) {
        k->ensure_grad();
        b->ensure_grad();
        kernels::conv_backward_kernels(x->data.data(), y->grad.data(), k->grad.data(),
                                       b->grad.data(), c, len, w, f);
      }
      if (x->needs_grad()) {
        x->ensure_grad();
        kernels::conv_backward_input(k->data.data(), y->grad.data(), x->grad.data(), c, len, w, f);
      }
    });
  }
  return y;
}

// Per-channel sliding max, stride 1. Gradient goes to the earliest argmax.
template <class T>
TensorPtr<T> maxpool_seq(Tape<T>* tape, const TensorPtr<T>& x, int window) {
  if (x->shape.size() != 2) throw std::invalid_argument("maxpool_seq: need [c,L], got " + x->shape_str());
  const int c = x->dim(0), len = x->dim(1);
  if (len < window || window < 1) {
    throw std::invalid_argument("maxpool_seq: window " + std::to_string(window) +
                                " does not fit length " + std::to_string(len));
  }
  auto y = detail::op_output(tape, {c, len - window + 1});
  auto argmax = std::make_shared<std::vector<int32_t>>(y->size());
  kernels::maxpool_forward(x->data.data(), y->data.data(), argmax->data(), c, len, window);
  if (tape) {
    tape->record([x, y, argmax, c, len, window]() {
      if (!detail::has_grad(y) || !x->needs_grad()) return;
      x->ensure_grad();
      kernels::maxpool_backward(argmax->data(), y->grad.data(), x->grad.data(), c, len, window);
    });
  }
  return y;
}

template <class T>
TensorPtr<T> tanh_act(Tape<T>* tape, const TensorPtr<T>& x) {
  auto y = detail::op_output(tape, x->shape);
  kernels::tanh_forward(x->data.data(), y->data.data(), x->size());
  if (tape) {
    tape->record([x, y]() {
      if (!detail::has_grad(y) || !x->needs_grad()) return;
      x->ensure_grad();
      kernels::tanh_backward(y->data.data(), y->grad.data(), x->grad.data(), x->size());
    });
  }
  return y;
}

enum class RunMode { train, eval };

// Inverted dropout: train mode zeroes elements with probability `rate` and
// scales survivors by 1/(1-rate); eval mode is the identity.
template <class T>
TensorPtr<T> dropout(Tape<T>* tape, const TensorPtr<T>& x, double rate, RunMode mode, Rng* rng) {
  if (rate < 0.0 || rate >= 1.0) throw std::invalid_argument("dropout: rate must be in [0,1)");
  if (mode == RunMode::eval || rate == 0.0) return x;
  if (!rng) throw std::invalid_argument("dropout: train mode needs an rng");
  auto y = detail::op_output(tape, x->shape);
  auto mask = std::make_shared<std::vector<T>>(x->size());
  const T scale = T(1.0 / (1.0 - rate));
  for (size_t i = 0; i < x->size(); ++i) {
    (*mask)[i] = rng->bernoulli(rate) ? T(0) : scale;
    y->data[i] = x->data[i] * (*mask)[i];
  }
  if (tape) {
    tape->record([x, y, mask]() {
      if (!detail::has_grad(y) || !x->needs_grad()) return;
      x->ensure_grad();
      for (size_t i = 0; i < x->size(); ++i) x->grad[i] += (*mask)[i] * y->grad[i];
    });
  }
  return y;
}

// Column m of the output is q (c values) times column m of d.
template <class T>
TensorPtr<T> hadamard_broadcast(Tape<T>* tape, const TensorPtr<T>& q, const TensorPtr<T>& d) {
  if (d->shape.size() != 2) throw std::invalid_argument("hadamard_broadcast: d must be [c,M]");
  const int c = d->dim(0), m = d->dim(1);
  if (q->size() != static_cast<size_t>(c)) {
    throw std::invalid_argument("hadamard_broadcast: channel mismatch q" + q->shape_str() + " d" +
                                d->shape_str());
  }
  auto y = detail::op_output(tape, {c, m});
  kernels::hadamard_forward(q->data.data(), d->data.data(), y->data.data(), c, m);
  if (tape) {
    tape->record([q, d, y, c, m]() {
      if (!detail::has_grad(y)) return;
      T* dq = nullptr;
      T* dd = nullptr;
      if (q->needs_grad()) {
        q->ensure_grad();
        dq = q->grad.data();
      }
      if (d->needs_grad()) {
        d->ensure_grad();
        dd = d->grad.data();
      }
      kernels::hadamard_backward(q->data.data(), d->data.data(), y->grad.data(), dq, dd, c, m);
    });
  }
  return y;
}

// Elementwise sum of two same-shape tensors.
template <class T>
TensorPtr<T> add(Tape<T>* tape, const TensorPtr<T>& a, const TensorPtr<T>& b) {
  if (a->shape != b->shape) {
    throw std::invalid_argument("add: shape mismatch " + a->shape_str() + " vs " + b->shape_str());
  }
  auto y = detail::op_output(tape, a->shape);
  for (size_t i = 0; i < y->size(); ++i) y->data[i] = a->data[i] + b->data[i];
  if (tape) {
    tape->record([a, b, y]() {
      if (!detail::has_grad(y)) return;
      for (const auto& t : {a, b}) {
        if (t->needs_grad()) {
          t->ensure_grad();
          for (size_t i = 0; i < y->size(); ++i) t->grad[i] += y->grad[i];
        }
      }
    });
  }
  return y;
}

// Stacks scalar tensors into one vector; used to gather per-document scores
// for the listwise loss.
template <class T>
TensorPtr<T> concat_scalars(Tape<T>* tape, const std::vector<TensorPtr<T>>& xs) {
  if (xs.empty()) throw std::invalid_argument("concat_scalars: empty input");
  auto y = detail::op_output(tape, {static_cast<int>(xs.size())});
  for (size_t i = 0; i < xs.size(); ++i) {
    if (xs[i]->size() != 1) throw std::invalid_argument("concat_scalars: inputs must be scalar");
    y->data[i] = xs[i]->data[0];
  }
  if (tape) {
    tape->record([xs, y]() {
      if (!detail::has_grad(y)) return;
      for (size_t i = 0; i < xs.size(); ++i) {
        if (xs[i]->needs_grad()) {
          xs[i]->ensure_grad();
          xs[i]->grad[0] += y->grad[i];
        }
      }
    });
  }
  return y;
}

// Listwise loss over scores [1 + numneg] with the positive at index 0:
// -log softmax(scores)[0], max-subtracted. Gradient is softmax - onehot(0).
// When `probs_out` is given, the posterior components are copied there.
template <class T>
TensorPtr<T> softmax_nll(Tape<T>* tape, const TensorPtr<T>& scores,
                         std::vector<T>* probs_out = nullptr) {
  const size_t n = scores->size();
  if (n < 2) throw std::invalid_argument("softmax_nll: need at least 2 scores");
  double mx = scores->data[0];
  for (size_t i = 1; i < n; ++i) mx = std::max(mx, static_cast<double>(scores->data[i]));
  double denom = 0.0;
  auto probs = std::make_shared<std::vector<T>>(n);
  for (size_t i = 0; i < n; ++i) denom += std::exp(static_cast<double>(scores->data[i]) - mx);
  for (size_t i = 0; i < n; ++i) {
    (*probs)[i] = static_cast<T>(std::exp(static_cast<double>(scores->data[i]) - mx) / denom);
  }
  auto loss = detail::op_output(tape, {1});
  loss->data[0] = static_cast<T>(-(static_cast<double>(scores->data[0]) - mx - std::log(denom)));
  if (probs_out) *probs_out = *probs;
  if (tape) {
    tape->record([scores, probs, loss]() {
      if (!detail::has_grad(loss) || !scores->needs_grad()) return;
      scores->ensure_grad();
      const T dl = loss->grad[0];
      for (size_t i = 0; i < scores->size(); ++i) {
        scores->grad[i] += ((*probs)[i] - (i == 0 ? T(1) : T(0))) * dl;
      }
    });
  }
  return loss;
}

// Glorot-style uniform init in +-sqrt(6/(fan_in+fan_out)); biases stay zero.
template <class T>
void init_uniform(BasicTensor<T>& t, int fan_in, int fan_out, Rng& rng) {
  const float bound = std::sqrt(6.0f / static_cast<float>(fan_in + fan_out));
  for (auto& v : t.data) v = static_cast<T>(rng.next_symmetric(bound));
}

// Central-difference check of d(f)/dx against the engine's gradient.
// f builds a fresh graph over x each call, recording on the given tape when
// non-null, and returns the scalar loss. Returns the max over coordinates
// of |analytic - numeric| / max(|analytic|, |numeric|, 1e-8).
template <class T>
double gradient_check(const std::function<TensorPtr<T>(Tape<T>*)>& f, const TensorPtr<T>& x,
                      T eps = static_cast<T>(1e-3)) {
  x->zero_grad();
  Tape<T> tape;
  auto loss = f(&tape);
  tape.backward(loss);
  x->ensure_grad();
  std::vector<T> analytic = x->grad;

  double max_rel = 0.0;
  for (size_t i = 0; i < x->size(); ++i) {
    const T orig = x->data[i];
    x->data[i] = orig + eps;
    const double lp = static_cast<double>(f(nullptr)->data[0]);
    x->data[i] = orig - eps;
    const double lm = static_cast<double>(f(nullptr)->data[0]);
    x->data[i] = orig;
    const double numeric = (lp - lm) / (2.0 * static_cast<double>(eps));
    const double a = static_cast<double>(analytic[i]);
    const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-8});
    max_rel = std::max(max_rel, rel);
  }
  return max_rel;
}

using Tensor = BasicTensor<float>;
using FloatTensorPtr = TensorPtr<float>;

}  // namespace duet
