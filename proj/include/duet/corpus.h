#pragma once

#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "duet/common.h"

namespace duet {

// Ratings: bad=0, fair=1, good=2, excellent=3, perfect=4.
enum Rating : int {
  kBad = 0,
  kFair = 1,
  kGood = 2,
  kExcellent = 3,
  kPerfect = 4,
};

struct RawDocument {
  std::string doc_id;
  std::string body;
};

struct Judgment {
  std::string query_id;
  std::string doc_id;
  int rating = 0;
};

// Fixed-length token list, truncated or right-padded with the empty
// sentinel. Padding never matches a real term and never precedes one.
struct TermSequence {
  std::vector<std::string> terms;
  int target_len = 0;
  int pad_count = 0;

  int real_len() const { return target_len - pad_count; }
};

enum class NegativeMode { judged, random };

struct TrainingInstance {
  std::string query_id;
  std::string positive_id;
  std::vector<std::string> negative_ids;
  TermSequence query;
  TermSequence positive;
  std::vector<TermSequence> negatives;
  NegativeMode provenance = NegativeMode::judged;
};

struct DocumentStore {
  std::vector<RawDocument> docs;
  std::unordered_map<std::string, size_t> by_id;

  static DocumentStore from(std::vector<RawDocument> items);
  const RawDocument& get(const std::string& doc_id) const;
  bool contains(const std::string& doc_id) const { return by_id.count(doc_id) > 0; }
};

struct Collection {
  DocumentStore queries;  // query_id + text, same shape as docs
  DocumentStore docs;
  std::vector<Judgment> judgments;

  const RawDocument& query(const std::string& query_id) const { return queries.get(query_id); }
  // Judgments grouped by query, keyed in sorted query order.
  std::map<std::string, std::vector<Judgment>> judgments_by_query() const;
};

// Lowercase; every non-alphanumeric byte acts as a separator. Alphanumeric
// means ASCII [a-z0-9] after down-casing, so "U.S.A." -> {u, s, a}.
std::vector<std::string> normalize_text(const std::string& raw);

TermSequence to_term_sequence(const std::vector<std::string>& tokens, int target_len);

// documents.tsv / queries.tsv: id<TAB>text. qrels.tsv: qid<TAB>did<TAB>rating.
std::vector<RawDocument> load_id_text_tsv(const std::string& path);
std::vector<Judgment> load_qrels_tsv(const std::string& path);

// Loads all three files and checks referential integrity of the judgments.
Collection load_collection(const std::string& docs_path, const std::string& queries_path,
                           const std::string& qrels_path);

struct InstanceBuildReport {
  int emitted = 0;
  int queries_with_judgments = 0;
  int queries_without_positive = 0;  // had judgments, no qualifying positive
  int pattern_excellent_fair = 0;
  int pattern_excellent_bad = 0;
  int pattern_good_bad = 0;
};

// Emits at most one instance per query of each pattern:
//   (excellent, numneg x fair), (excellent, numneg x bad), (good, numneg x bad).
// Perfect-rated documents are dropped before pattern matching. A pattern is
// skipped outright when fewer than numneg negatives of the grade exist.
// In random mode the instance skeletons (query, positive, pattern) are the
// same as judged mode but negatives are redrawn uniformly without
// replacement from the whole store, excluding the positive.
std::vector<TrainingInstance> build_training_instances(
    const Collection& collection, NegativeMode mode, int numneg, int query_len, int doc_len,
    uint64_t seed, InstanceBuildReport* report = nullptr);

}  // namespace duet
