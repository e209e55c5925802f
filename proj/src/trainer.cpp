#include "duet/trainer.h"

#include <chrono>
#include <cmath>
#include <sstream>
#include <unordered_map>

namespace duet {

void TrainConfig::validate() const {
  if (learning_rate <= 0.0) throw std::invalid_argument("TrainConfig: learning_rate must be > 0");
  if (minibatch < 1) throw std::invalid_argument("TrainConfig: minibatch must be >= 1");
  if (epochs < 1) throw std::invalid_argument("TrainConfig: epochs must be >= 1");
}

namespace {

uint64_t sequence_key(const TermSequence& seq) {
  uint64_t h = fnv1a64("seq");
  for (const auto& t : seq.terms) {
    h = fnv1a64(t, h);
    h = fnv1a64("\x1f", h);
  }
  return h;
}

// Featurized views of one instance's documents, shared across epochs.
class FeatureCache {
 public:
  FeatureCache(const NGraphVocabulary& vocab, bool want_ngraphs)
      : vocab_(vocab), want_ngraphs_(want_ngraphs) {}

  FloatTensorPtr ngraphs(const TermSequence& seq) {
    uint64_t key = sequence_key(seq);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    auto t = ngraph_tensor<float>(ngraph_matrix(seq, vocab_));
    // Bound resident feature memory; oldest-first eviction is fine since
    // epochs revisit instances in shuffled order anyway.
    if (bytes_ + t->size() * sizeof(float) > kMaxBytes && !order_.empty()) {
      size_t drop = order_.size() / 2;
      for (size_t i = 0; i < drop; ++i) {
        auto dropped = cache_.find(order_[i]);
        if (dropped != cache_.end()) {
          bytes_ -= dropped->second->size() * sizeof(float);
          cache_.erase(dropped);
        }
      }
      order_.erase(order_.begin(), order_.begin() + static_cast<ptrdiff_t>(drop));
    }
    bytes_ += t->size() * sizeof(float);
    cache_.emplace(key, t);
    order_.push_back(key);
    return t;
  }

  bool want_ngraphs() const { return want_ngraphs_; }

 private:
  static constexpr size_t kMaxBytes = 512ull << 20;
  const NGraphVocabulary& vocab_;
  bool want_ngraphs_;
  std::unordered_map<uint64_t, FloatTensorPtr> cache_;
  std::vector<uint64_t> order_;
  size_t bytes_ = 0;
};

FloatTensorPtr instance_scores(Tape<float>* tape, const TrainingInstance& inst,
                               const Params& params, const ModelConfig& mcfg, FeatureCache& cache,
                               RunMode mode, Rng* rng) {
  ScoreContext<float> ctx{tape, mode, rng};
  const bool local = params.has_local();
  const bool dist = params.has_distributed();
  FloatTensorPtr qng;
  if (dist) qng = cache.ngraphs(inst.query);

  std::vector<FloatTensorPtr> scores;
  scores.reserve(1 + inst.negatives.size());
  auto score_doc = [&](const TermSequence& doc) {
    FloatTensorPtr x, dng;
    if (local) x = interaction_tensor<float>(interaction_matrix(inst.query, doc));
    if (dist) dng = cache.ngraphs(doc);
    scores.push_back(duet_score(ctx, x, qng, dng, params, mcfg));
  };
  score_doc(inst.positive);
  for (const auto& neg : inst.negatives) score_doc(neg);
  return concat_scalars(tape, scores);
}

}  // namespace

void sgd_step(Params& params, double learning_rate) {
  const float lr = static_cast<float>(learning_rate);
  for (const auto& t : params.all()) {
    if (t->grad.empty()) continue;
    for (size_t i = 0; i < t->size(); ++i) t->data[i] -= lr * t->grad[i];
    t->zero_grad();
  }
}

double validation_ndcg1(const std::vector<TrainingInstance>& instances, const Params& params,
                        const ModelConfig& mcfg, const NGraphVocabulary& vocab) {
  if (instances.empty()) return 0.0;
  FeatureCache cache(vocab, params.has_distributed());
  int wins = 0;
  for (const auto& inst : instances) {
    auto scores = instance_scores(nullptr, inst, params, mcfg, cache, RunMode::eval, nullptr);
    bool positive_on_top = true;
    for (size_t i = 1; i < scores->size(); ++i) {
      if (scores->data[i] >= scores->data[0]) {
        positive_on_top = false;
        break;
      }
    }
    wins += positive_on_top ? 1 : 0;
  }
  return static_cast<double>(wins) / static_cast<double>(instances.size());
}

TrainReport train(const std::vector<TrainingInstance>& instances, Params& params,
                  const ModelConfig& mcfg, const TrainConfig& tcfg, const NGraphVocabulary& vocab,
                  const std::vector<TrainingInstance>* validation, const StepCallback& on_step) {
  tcfg.validate();
  if (instances.empty()) throw DataError("train: no training instances");
  const auto t0 = std::chrono::steady_clock::now();

  std::vector<size_t> order(instances.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(tcfg.seed);
  if (tcfg.max_instances > 0 && tcfg.max_instances < order.size()) {
    // Size sweeps subsample from the same shuffled stream so smaller sets
    // nest inside larger ones.
    rng.shuffle(order);
    order.resize(tcfg.max_instances);
  }

  FeatureCache cache(vocab, params.has_distributed());
  TrainReport report;
  report.instances_used = order.size();
  int step = 0;

  for (int epoch = 1; epoch <= tcfg.epochs; ++epoch) {
    rng.shuffle(order);
    double loss_sum = 0.0;
    size_t pos = 0;
    while (pos < order.size()) {
      const size_t batch = std::min(static_cast<size_t>(tcfg.minibatch), order.size() - pos);
      const float seed_grad = 1.0f / static_cast<float>(batch);
      for (size_t b = 0; b < batch; ++b) {
        const TrainingInstance& inst = instances[order[pos + b]];
        Tape<float> tape;
        auto scores = instance_scores(&tape, inst, params, mcfg, cache, RunMode::train, &rng);
        auto loss = softmax_nll(&tape, scores);
        const double loss_value = loss->data[0];
        if (!std::isfinite(loss_value)) {
          throw DataError("train: non-finite loss at instance query_id=" + inst.query_id +
                          " positive=" + inst.positive_id);
        }
        loss_sum += loss_value;
        tape.backward_seeded(loss, seed_grad);
      }
      sgd_step(params, tcfg.learning_rate);
      ++step;
      if (on_step) on_step(step);
      pos += batch;
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.mean_loss = loss_sum / static_cast<double>(order.size());
    if (validation && !validation->empty()) {
      stats.val_ndcg1 = validation_ndcg1(*validation, params, mcfg, vocab);
    }
    report.epochs.push_back(stats);
  }

  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

std::string train_report_tsv(const TrainReport& report) {
  std::ostringstream out;
  for (const auto& e : report.epochs) {
    out << e.epoch << '\t' << e.mean_loss << '\t';
    if (e.val_ndcg1) out << *e.val_ndcg1;
    else out << '-';
    out << '\n';
  }
  return out.str();
}

}  // namespace duet
