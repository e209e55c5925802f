#pragma once

#include <optional>
#include <string>
#include <vector>

#include "duet/autodiff.h"
#include "duet/featurize.h"

namespace duet {

// Full-size default dimensions; desk.cfg shrinks them for fast runs.
struct ModelConfig {
  int query_len = 10;     // n_q
  int doc_len = 1000;     // n_d
  int local_filters = 300;
  int vocab_size = 2000;  // distributed input rows
  int conv_window = 3;
  int dist_filters = 300;
  int doc_pool = 100;
  int hidden = 300;
  double dropout_rate = 0.20;
  int numneg = 4;
  int max_ngraph = 5;

  int query_conv_len() const { return query_len - conv_window + 1; }
  int doc_conv_len() const { return doc_len - conv_window + 1; }
  int doc_pooled_len() const { return doc_conv_len() - doc_pool + 1; }

  void validate() const;
};

enum class ModelMode { duet, local_only, distributed_only };

std::string to_string(ModelMode mode);
ModelMode model_mode_from_string(const std::string& s);

// Named parameter set. Solo modes instantiate only their branch; the other
// branch's tensors stay null and contribute a hard zero to the sum.
template <class T>
struct DuetParams {
  ModelMode mode = ModelMode::duet;

  TensorPtr<T> l_conv_k, l_conv_b;
  TensorPtr<T> l_fc1_w, l_fc1_b;
  TensorPtr<T> l_fc2_w, l_fc2_b;
  TensorPtr<T> l_out_w, l_out_b;

  TensorPtr<T> d_qconv_k, d_qconv_b;
  TensorPtr<T> d_dconv_k, d_dconv_b;
  TensorPtr<T> d_qfc_w, d_qfc_b;
  TensorPtr<T> d_dconv2_k, d_dconv2_b;
  TensorPtr<T> d_fc1_w, d_fc1_b;
  TensorPtr<T> d_fc2_w, d_fc2_b;
  TensorPtr<T> d_out_w, d_out_b;

  bool has_local() const { return l_conv_k != nullptr; }
  bool has_distributed() const { return d_qconv_k != nullptr; }

  // Registration order; defines checkpoint layout.
  std::vector<TensorPtr<T>> all() const {
    std::vector<TensorPtr<T>> out;
    for (const auto& t :
         {l_conv_k, l_conv_b, l_fc1_w, l_fc1_b, l_fc2_w, l_fc2_b, l_out_w, l_out_b,
          d_qconv_k, d_qconv_b, d_dconv_k, d_dconv_b, d_qfc_w, d_qfc_b, d_dconv2_k, d_dconv2_b,
          d_fc1_w, d_fc1_b, d_fc2_w, d_fc2_b, d_out_w, d_out_b}) {
      if (t) out.push_back(t);
    }
    return out;
  }

  void zero_grads() const {
    for (const auto& t : all()) t->zero_grad();
  }
};

namespace detail {

template <class T>
TensorPtr<T> param(std::vector<int> shape, int fan_in, int fan_out, Rng& rng,
                   const std::string& name) {
  auto t = make_tensor<T>(std::move(shape), true, name);
  init_uniform(*t, fan_in, fan_out, rng);
  return t;
}

template <class T>
TensorPtr<T> zero_param(std::vector<int> shape, const std::string& name) {
  return make_tensor<T>(std::move(shape), true, name);
}

}  // namespace detail

template <class T>
DuetParams<T> init_params(const ModelConfig& cfg, ModelMode mode, Rng& rng) {
  cfg.validate();
  DuetParams<T> p;
  p.mode = mode;
  const int nq = cfg.query_len, nd = cfg.doc_len, cl = cfg.local_filters;
  const int k = cfg.vocab_size, w = cfg.conv_window, f = cfg.dist_filters, h = cfg.hidden;
  const int m = cfg.doc_pooled_len();
  using detail::param;
  using detail::zero_param;
  if (mode != ModelMode::distributed_only) {
    p.l_conv_k = param<T>({cl, nd, 1}, nd, cl, rng, "local.conv.k");
    p.l_conv_b = zero_param<T>({cl}, "local.conv.b");
    p.l_fc1_w = param<T>({cl * nq, h}, cl * nq, h, rng, "local.fc1.w");
    p.l_fc1_b = zero_param<T>({h}, "local.fc1.b");
    p.l_fc2_w = param<T>({h, h}, h, h, rng, "local.fc2.w");
    p.l_fc2_b = zero_param<T>({h}, "local.fc2.b");
    p.l_out_w = param<T>({h, 1}, h, 1, rng, "local.out.w");
    p.l_out_b = zero_param<T>({1}, "local.out.b");
  }
  if (mode != ModelMode::local_only) {
    p.d_qconv_k = param<T>({f, k, w}, k * w, f, rng, "dist.qconv.k");
    p.d_qconv_b = zero_param<T>({f}, "dist.qconv.b");
    p.d_dconv_k = param<T>({f, k, w}, k * w, f, rng, "dist.dconv.k");
    p.d_dconv_b = zero_param<T>({f}, "dist.dconv.b");
    p.d_qfc_w = param<T>({f, f}, f, f, rng, "dist.qfc.w");
    p.d_qfc_b = zero_param<T>({f}, "dist.qfc.b");
    p.d_dconv2_k = param<T>({f, f, 1}, f, f, rng, "dist.dconv2.k");
    p.d_dconv2_b = zero_param<T>({f}, "dist.dconv2.b");
    p.d_fc1_w = param<T>({f * m, h}, f * m, h, rng, "dist.fc1.w");
    p.d_fc1_b = zero_param<T>({h}, "dist.fc1.b");
    p.d_fc2_w = param<T>({h, h}, h, h, rng, "dist.fc2.w");
    p.d_fc2_b = zero_param<T>({h}, "dist.fc2.b");
    p.d_out_w = param<T>({h, 1}, h, 1, rng, "dist.out.w");
    p.d_out_b = zero_param<T>({1}, "dist.out.b");
  }
  return p;
}

// Everything one scoring pass needs besides inputs and weights.
template <class T>
struct ScoreContext {
  Tape<T>* tape = nullptr;
  RunMode mode = RunMode::eval;
  Rng* rng = nullptr;  // dropout draws, train mode only
};

template <class T>
TensorPtr<T> interaction_tensor(const InteractionMatrix& m) {
  std::vector<T> data(m.values.begin(), m.values.end());
  return make_tensor<T>({m.doc_len, m.query_len}, std::move(data));
}

template <class T>
TensorPtr<T> ngraph_tensor(const NGraphMatrix& m) {
  std::vector<T> data(m.values.begin(), m.values.end());
  return make_tensor<T>({m.vocab_size, m.seq_len}, std::move(data));
}

namespace detail {

// Shared tail: two hidden layers, dropout, scalar output, tanh throughout.
template <class T>
TensorPtr<T> scoring_head(ScoreContext<T>& ctx, const TensorPtr<T>& x, const TensorPtr<T>& fc1_w,
                          const TensorPtr<T>& fc1_b, const TensorPtr<T>& fc2_w,
                          const TensorPtr<T>& fc2_b, const TensorPtr<T>& out_w,
                          const TensorPtr<T>& out_b, double rate) {
  auto h1 = tanh_act(ctx.tape, affine(ctx.tape, x, fc1_w, fc1_b));
  auto h2 = tanh_act(ctx.tape, affine(ctx.tape, h1, fc2_w, fc2_b));
  auto dropped = dropout(ctx.tape, h2, rate, ctx.mode, ctx.rng);
  return tanh_act(ctx.tape, affine(ctx.tape, dropped, out_w, out_b));
}

}  // namespace detail

// Exact-match branch over the interaction matrix [n_d, n_q].
template <class T>
TensorPtr<T> local_score(ScoreContext<T>& ctx, const TensorPtr<T>& x, const DuetParams<T>& p,
                         const ModelConfig& cfg) {
  if (!p.has_local()) throw std::invalid_argument("local_score: local branch not instantiated");
  if (x->shape != std::vector<int>{cfg.doc_len, cfg.query_len}) {
    throw std::invalid_argument("local_score: interaction matrix " + x->shape_str() +
                                " does not match config [" + std::to_string(cfg.doc_len) + "x" +
                                std::to_string(cfg.query_len) + "]");
  }
  auto conv = tanh_act(ctx.tape, conv_seq(ctx.tape, x, p.l_conv_k, p.l_conv_b));
  return detail::scoring_head(ctx, conv, p.l_fc1_w, p.l_fc1_b, p.l_fc2_w, p.l_fc2_b, p.l_out_w,
                              p.l_out_b, cfg.dropout_rate);
}

// Embedding branch over the query/document n-graph matrices.
template <class T>
TensorPtr<T> distributed_score(ScoreContext<T>& ctx, const TensorPtr<T>& q, const TensorPtr<T>& d,
                               const DuetParams<T>& p, const ModelConfig& cfg) {
  if (!p.has_distributed()) {
    throw std::invalid_argument("distributed_score: distributed branch not instantiated");
  }
  if (q->dim(0) != cfg.vocab_size || d->dim(0) != cfg.vocab_size) {
    throw std::invalid_argument("distributed_score: vocabulary size mismatch q" + q->shape_str() +
                                " d" + d->shape_str() + " vs config K=" +
                                std::to_string(cfg.vocab_size));
  }
  if (q->dim(1) != cfg.query_len || d->dim(1) != cfg.doc_len) {
    throw std::invalid_argument("distributed_score: sequence length mismatch q" + q->shape_str() +
                                " d" + d->shape_str());
  }
  // Query: conv, global max over positions, one dense layer.
  auto qc = tanh_act(ctx.tape, conv_seq(ctx.tape, q, p.d_qconv_k, p.d_qconv_b));
  auto qp = maxpool_seq(ctx.tape, qc, cfg.query_conv_len());
  auto qe = tanh_act(ctx.tape, affine(ctx.tape, qp, p.d_qfc_w, p.d_qfc_b));
  // Document: conv, window max-pool keeping positions, 1-wide conv.
  auto dc = tanh_act(ctx.tape, conv_seq(ctx.tape, d, p.d_dconv_k, p.d_dconv_b));
  auto dp = maxpool_seq(ctx.tape, dc, cfg.doc_pool);
  auto de = tanh_act(ctx.tape, conv_seq(ctx.tape, dp, p.d_dconv2_k, p.d_dconv2_b));
  auto matched = hadamard_broadcast(ctx.tape, qe, de);
  return detail::scoring_head(ctx, matched, p.d_fc1_w, p.d_fc1_b, p.d_fc2_w, p.d_fc2_b, p.d_out_w,
                              p.d_out_b, cfg.dropout_rate);
}

// Sum of the two branch scores; solo modes return their branch directly.
template <class T>
TensorPtr<T> duet_score(ScoreContext<T>& ctx, const TensorPtr<T>& x, const TensorPtr<T>& q,
                        const TensorPtr<T>& d, const DuetParams<T>& p, const ModelConfig& cfg) {
  switch (p.mode) {
    case ModelMode::local_only:
      return local_score(ctx, x, p, cfg);
    case ModelMode::distributed_only:
      return distributed_score(ctx, q, d, p, cfg);
    case ModelMode::duet:
      return add(ctx.tape, local_score(ctx, x, p, cfg), distributed_score(ctx, q, d, p, cfg));
  }
  throw std::logic_error("duet_score: bad mode");
}

using Params = DuetParams<float>;

// Rebuilds a parameter set from checkpoint tensors, inferring the mode from
// the names present and validating every shape against the config.
Params params_from_tensors(const ModelConfig& cfg, const std::vector<FloatTensorPtr>& tensors);

// Eval-mode scoring of one featurized pair, no tape.
float score_pair(const Params& params, const ModelConfig& cfg, const TermSequence& query,
                 const TermSequence& doc, const NGraphVocabulary& vocab);

struct AblationEntry {
  std::string term;
  int position = 0;
  double local_drop = 0.0;
  double distributed_drop = 0.0;
  double duet_drop = 0.0;
};

// Replaces each non-pad document term with the pad sentinel in turn,
// re-featurizes and reports the score drop per branch and for the sum.
std::vector<AblationEntry> term_ablation(const Params& params, const ModelConfig& cfg,
                                         const TermSequence& query, const TermSequence& doc,
                                         const NGraphVocabulary& vocab);

}  // namespace duet
