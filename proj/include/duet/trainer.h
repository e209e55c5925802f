#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "duet/corpus.h"
#include "duet/models.h"

namespace duet {

struct TrainConfig {
  double learning_rate = 0.01;
  int minibatch = 8;
  int epochs = 1;
  uint64_t seed = 0;
  ModelMode mode = ModelMode::duet;
  NegativeMode negatives = NegativeMode::judged;
  size_t max_instances = 0;  // 0 = use all; >0 subsamples for size sweeps

  void validate() const;
};

struct EpochStats {
  int epoch = 0;
  double mean_loss = 0.0;
  std::optional<double> val_ndcg1;
};

struct TrainReport {
  std::vector<EpochStats> epochs;
  size_t instances_used = 0;
  double wall_seconds = 0.0;
};

// Called after every optimizer step; used for periodic checkpoints.
using StepCallback = std::function<void(int step)>;

// Minibatched SGD over the listwise softmax loss. Instance order is
// reshuffled each epoch from the seeded stream; the loss seed per instance
// is 1/B so a step uses the batch mean gradient. Deterministic given
// (instances, params init, seed).
TrainReport train(const std::vector<TrainingInstance>& instances, Params& params,
                  const ModelConfig& mcfg, const TrainConfig& tcfg, const NGraphVocabulary& vocab,
                  const std::vector<TrainingInstance>* validation = nullptr,
                  const StepCallback& on_step = {});

// theta -= lr * grad for every parameter with an allocated gradient, then
// zeroes the gradients.
void sgd_step(Params& params, double learning_rate);

// Fraction of instances whose positive outscores every negative, as NDCG@1
// of the 1+numneg ranking with binary labels. Ties count against the
// positive so an untrained constant scorer reports 0, not 1.
double validation_ndcg1(const std::vector<TrainingInstance>& instances, const Params& params,
                        const ModelConfig& mcfg, const NGraphVocabulary& vocab);

// epoch<TAB>mean_loss<TAB>val_ndcg1 per line; "-" when no validation.
std::string train_report_tsv(const TrainReport& report);

}  // namespace duet
