#include "duet/models.h"

#include <map>

namespace duet {

void ModelConfig::validate() const {
  auto positive = [](int v, const char* what) {
    if (v <= 0) throw std::invalid_argument(std::string("ModelConfig: ") + what + " must be positive");
  };
  positive(query_len, "query_len");
  positive(doc_len, "doc_len");
  positive(local_filters, "local_filters");
  positive(vocab_size, "vocab_size");
  positive(conv_window, "conv_window");
  positive(dist_filters, "dist_filters");
  positive(doc_pool, "doc_pool");
  positive(hidden, "hidden");
  positive(numneg, "numneg");
  positive(max_ngraph, "max_ngraph");
  if (dropout_rate < 0.0 || dropout_rate >= 1.0) {
    throw std::invalid_argument("ModelConfig: dropout_rate must be in [0,1)");
  }
  if (query_conv_len() < 1) throw std::invalid_argument("ModelConfig: query_len < conv_window");
  if (doc_conv_len() < 1) throw std::invalid_argument("ModelConfig: doc_len < conv_window");
  if (doc_pooled_len() < 1) {
    throw std::invalid_argument("ModelConfig: doc pool window leaves no positions");
  }
}

std::string to_string(ModelMode mode) {
  switch (mode) {
    case ModelMode::duet: return "duet";
    case ModelMode::local_only: return "local";
    case ModelMode::distributed_only: return "distributed";
  }
  return "?";
}

ModelMode model_mode_from_string(const std::string& s) {
  if (s == "duet") return ModelMode::duet;
  if (s == "local" || s == "local-only") return ModelMode::local_only;
  if (s == "distributed" || s == "distributed-only") return ModelMode::distributed_only;
  throw DataError("unknown model mode: " + s + " (want duet|local|distributed)");
}

Params params_from_tensors(const ModelConfig& cfg, const std::vector<FloatTensorPtr>& tensors) {
  bool has_local = false, has_dist = false;
  for (const auto& t : tensors) {
    if (t->name.rfind("local.", 0) == 0) has_local = true;
    if (t->name.rfind("dist.", 0) == 0) has_dist = true;
  }
  if (!has_local && !has_dist) throw DataError("checkpoint holds no recognizable parameters");
  ModelMode mode = has_local && has_dist ? ModelMode::duet
                   : has_local          ? ModelMode::local_only
                                        : ModelMode::distributed_only;

  Rng rng(0);  // shapes only; data is overwritten below
  Params params = init_params<float>(cfg, mode, rng);
  std::map<std::string, FloatTensorPtr> by_name;
  for (const auto& t : params.all()) by_name[t->name] = t;

  for (const auto& loaded : tensors) {
    auto it = by_name.find(loaded->name);
    if (it == by_name.end()) throw DataError("checkpoint tensor not in model: " + loaded->name);
    if (it->second->shape != loaded->shape) {
      throw DataError("checkpoint tensor " + loaded->name + " has shape " + loaded->shape_str() +
                      ", config implies " + it->second->shape_str());
    }
    it->second->data = loaded->data;
    by_name.erase(it);
  }
  if (!by_name.empty()) {
    throw DataError("checkpoint missing tensor: " + by_name.begin()->first);
  }
  return params;
}

namespace {

struct PairScores {
  float local = 0.0f;
  float distributed = 0.0f;
  float total() const { return local + distributed; }
};

PairScores score_branches(const Params& params, const ModelConfig& cfg, const TermSequence& query,
                          const TermSequence& doc, const NGraphVocabulary& vocab) {
  ScoreContext<float> ctx;  // eval, no tape
  PairScores s;
  if (params.has_local()) {
    auto x = interaction_tensor<float>(interaction_matrix(query, doc));
    s.local = local_score(ctx, x, params, cfg)->data[0];
  }
  if (params.has_distributed()) {
    auto q = ngraph_tensor<float>(ngraph_matrix(query, vocab));
    auto d = ngraph_tensor<float>(ngraph_matrix(doc, vocab));
    s.distributed = distributed_score(ctx, q, d, params, cfg)->data[0];
  }
  return s;
}

}  // namespace

float score_pair(const Params& params, const ModelConfig& cfg, const TermSequence& query,
                 const TermSequence& doc, const NGraphVocabulary& vocab) {
  return score_branches(params, cfg, query, doc, vocab).total();
}

std::vector<AblationEntry> term_ablation(const Params& params, const ModelConfig& cfg,
                                         const TermSequence& query, const TermSequence& doc,
                                         const NGraphVocabulary& vocab) {
  const PairScores base = score_branches(params, cfg, query, doc, vocab);
  std::vector<AblationEntry> out;
  for (int i = 0; i < doc.target_len; ++i) {
    if (is_pad(doc.terms[i])) continue;
    TermSequence ablated = doc;
    ablated.terms[i] = kPadToken;  // interior pad on purpose
    const PairScores s = score_branches(params, cfg, query, ablated, vocab);
    AblationEntry e;
    e.term = doc.terms[i];
    e.position = i;
    e.local_drop = static_cast<double>(base.local) - s.local;
    e.distributed_drop = static_cast<double>(base.distributed) - s.distributed;
    e.duet_drop = static_cast<double>(base.total()) - s.total();
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace duet
