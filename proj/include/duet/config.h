#pragma once

#include <cstdint>
#include <string>

#include "duet/models.h"
#include "duet/trainer.h"

namespace duet {

// Flat `key = value` experiment file. Every model/train knob plus data
// paths; unknown keys are rejected so typos fail loudly.
struct ExperimentConfig {
  // data
  std::string docs;
  std::string queries;
  std::string qrels;
  std::string val_qrels;  // optional validation split
  std::string vocab;      // vocab.tsv path
  std::string out_dir;
  // model
  ModelConfig model;
  // training
  TrainConfig train;
  int checkpoint_every = 0;  // minibatches; 0 disables periodic saves

  // Parses and resolves over defaults; throws DataError on unknown keys or
  // malformed lines (with line numbers).
  static ExperimentConfig parse_file(const std::string& path);
  static ExperimentConfig parse_text(const std::string& text, const std::string& origin);

  // Canonical serialized form: every key, sorted, resolved values.
  std::string serialize() const;
  uint64_t digest() const { return fnv1a64(serialize()); }
};

}  // namespace duet
