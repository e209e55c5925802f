#include "duet/corpus.h"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "duet/rng.h"

namespace duet {

DocumentStore DocumentStore::from(std::vector<RawDocument> items) {
  DocumentStore store;
  store.docs = std::move(items);
  for (size_t i = 0; i < store.docs.size(); ++i) {
    if (store.docs[i].doc_id.empty()) throw DataError("empty doc_id");
    if (!store.by_id.emplace(store.docs[i].doc_id, i).second) {
      throw DataError("duplicate doc_id: " + store.docs[i].doc_id);
    }
  }
  return store;
}

const RawDocument& DocumentStore::get(const std::string& doc_id) const {
  auto it = by_id.find(doc_id);
  if (it == by_id.end()) throw DataError("unknown doc_id: " + doc_id);
  return docs[it->second];
}

std::map<std::string, std::vector<Judgment>> Collection::judgments_by_query() const {
  std::map<std::string, std::vector<Judgment>> grouped;
  for (const auto& j : judgments) grouped[j.query_id].push_back(j);
  return grouped;
}

std::vector<std::string> normalize_text(const std::string& raw) {
  std::vector<std::string> tokens;
  std::string cur;
  for (unsigned char c : raw) {
    char lc = 0;
    if (c >= 'a' && c <= 'z') lc = static_cast<char>(c);
    else if (c >= 'A' && c <= 'Z') lc = static_cast<char>(c - 'A' + 'a');
    else if (c >= '0' && c <= '9') lc = static_cast<char>(c);
    if (lc != 0) {
      cur.push_back(lc);
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

TermSequence to_term_sequence(const std::vector<std::string>& tokens, int target_len) {
  if (target_len <= 0) throw std::invalid_argument("to_term_sequence: target_len must be positive");
  TermSequence seq;
  seq.target_len = target_len;
  size_t keep = std::min(tokens.size(), static_cast<size_t>(target_len));
  seq.terms.assign(tokens.begin(), tokens.begin() + keep);
  seq.pad_count = target_len - static_cast<int>(keep);
  seq.terms.resize(static_cast<size_t>(target_len), kPadToken);
  return seq;
}

namespace {

// Parses a TSV file line by line, reporting file:line on malformed input.
template <class Fn>
void for_each_tsv_line(const std::string& path, size_t min_fields, Fn&& fn) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path);
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split(line, '\t');
    if (fields.size() < min_fields || fields[0].empty()) {
      throw DataError(path + ":" + std::to_string(lineno) + ": malformed line");
    }
    fn(fields, lineno);
  }
}

}  // namespace

std::vector<RawDocument> load_id_text_tsv(const std::string& path) {
  std::vector<RawDocument> out;
  std::unordered_map<std::string, size_t> seen;
  for_each_tsv_line(path, 2, [&](const std::vector<std::string>& f, size_t lineno) {
    if (seen.count(f[0])) {
      throw DataError(path + ":" + std::to_string(lineno) + ": duplicate id " + f[0]);
    }
    seen[f[0]] = out.size();
    out.push_back({f[0], f[1]});
  });
  return out;
}

std::vector<Judgment> load_qrels_tsv(const std::string& path) {
  std::vector<Judgment> out;
  std::unordered_map<std::string, int> seen;  // "qid\tdid" -> line
  for_each_tsv_line(path, 3, [&](const std::vector<std::string>& f, size_t lineno) {
    Judgment j;
    j.query_id = f[0];
    j.doc_id = f[1];
    try {
      size_t pos = 0;
      j.rating = std::stoi(f[2], &pos);
      if (pos != f[2].size()) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw DataError(path + ":" + std::to_string(lineno) + ": bad rating '" + f[2] + "'");
    }
    if (j.rating < 0 || j.rating > 4) {
      throw DataError(path + ":" + std::to_string(lineno) + ": rating out of range 0..4: " + f[2]);
    }
    std::string key = j.query_id + "\t" + j.doc_id;
    if (seen.count(key)) {
      throw DataError(path + ":" + std::to_string(lineno) + ": duplicate judgment for " + key);
    }
    seen[key] = 1;
    out.push_back(std::move(j));
  });
  return out;
}

Collection load_collection(const std::string& docs_path, const std::string& queries_path,
                           const std::string& qrels_path) {
  Collection c;
  c.docs = DocumentStore::from(load_id_text_tsv(docs_path));
  c.queries = DocumentStore::from(load_id_text_tsv(queries_path));
  c.judgments = load_qrels_tsv(qrels_path);

  std::string dangling;
  int dangling_count = 0;
  for (const auto& j : c.judgments) {
    if (!c.docs.contains(j.doc_id) || !c.queries.contains(j.query_id)) {
      ++dangling_count;
      if (dangling_count <= 10) dangling += " (" + j.query_id + "," + j.doc_id + ")";
    }
  }
  if (dangling_count > 0) {
    throw DataError("qrels reference " + std::to_string(dangling_count) +
                    " unknown query/doc ids:" + dangling);
  }
  return c;
}

namespace {

struct PatternSpec {
  int positive_rating;
  int negative_rating;
};

}  // namespace

std::vector<TrainingInstance> build_training_instances(const Collection& collection,
                                                       NegativeMode mode, int numneg,
                                                       int query_len, int doc_len, uint64_t seed,
                                                       InstanceBuildReport* report) {
  if (numneg < 1) throw std::invalid_argument("build_training_instances: numneg must be >= 1");
  InstanceBuildReport local_report;
  Rng rng(seed);

  // Term sequences are shared by many instances of the same doc; memoize.
  std::unordered_map<std::string, TermSequence> doc_seq_cache;
  auto doc_seq = [&](const std::string& doc_id) -> const TermSequence& {
    auto it = doc_seq_cache.find(doc_id);
    if (it != doc_seq_cache.end()) return it->second;
    auto tokens = normalize_text(collection.docs.get(doc_id).body);
    return doc_seq_cache.emplace(doc_id, to_term_sequence(tokens, doc_len)).first->second;
  };

  // Sorted doc id list for random-mode sampling, excluding nothing yet.
  std::vector<std::string> all_doc_ids;
  all_doc_ids.reserve(collection.docs.docs.size());
  for (const auto& d : collection.docs.docs) all_doc_ids.push_back(d.doc_id);
  std::sort(all_doc_ids.begin(), all_doc_ids.end());

  const PatternSpec patterns[] = {
      {kExcellent, kFair}, {kExcellent, kBad}, {kGood, kBad}};
  int* pattern_counts[] = {&local_report.pattern_excellent_fair,
                           &local_report.pattern_excellent_bad,
                           &local_report.pattern_good_bad};

  std::vector<TrainingInstance> instances;
  for (const auto& [query_id, judgments] : collection.judgments_by_query()) {
    ++local_report.queries_with_judgments;

    // Bucket by rating, discarding perfect outright; sort for determinism.
    std::vector<std::string> by_rating[4];
    for (const auto& j : judgments) {
      if (j.rating == kPerfect) continue;
      by_rating[j.rating].push_back(j.doc_id);
    }
    for (auto& bucket : by_rating) std::sort(bucket.begin(), bucket.end());

    if (by_rating[kExcellent].empty() && by_rating[kGood].empty()) {
      ++local_report.queries_without_positive;
      continue;
    }

    TermSequence query_seq =
        to_term_sequence(normalize_text(collection.query(query_id).body), query_len);

    for (int p = 0; p < 3; ++p) {
      const auto& positives = by_rating[patterns[p].positive_rating];
      const auto& negatives = by_rating[patterns[p].negative_rating];
      if (positives.empty()) continue;
      if (negatives.size() < static_cast<size_t>(numneg)) continue;

      TrainingInstance inst;
      inst.query_id = query_id;
      inst.provenance = mode;
      // Ties between positive candidates go to the smallest doc_id.
      inst.positive_id = positives.front();

      if (mode == NegativeMode::judged) {
        auto pick = rng.sample_without_replacement(negatives.size(), numneg);
        for (size_t idx : pick) inst.negative_ids.push_back(negatives[idx]);
      } else {
        // Uniform over the store minus the positive. Draw indices over the
        // full sorted list and skip the positive by remapping.
        if (all_doc_ids.size() < static_cast<size_t>(numneg) + 1) {
          throw DataError("random negatives: document store too small");
        }
        size_t pos_idx = static_cast<size_t>(
            std::lower_bound(all_doc_ids.begin(), all_doc_ids.end(), inst.positive_id) -
            all_doc_ids.begin());
        auto pick = rng.sample_without_replacement(all_doc_ids.size() - 1, numneg);
        for (size_t idx : pick) {
          size_t real = idx < pos_idx ? idx : idx + 1;
          inst.negative_ids.push_back(all_doc_ids[real]);
        }
      }

      inst.query = query_seq;
      inst.positive = doc_seq(inst.positive_id);
      for (const auto& nid : inst.negative_ids) inst.negatives.push_back(doc_seq(nid));
      instances.push_back(std::move(inst));
      ++*pattern_counts[p];
      ++local_report.emitted;
    }
  }

  if (report) *report = local_report;
  return instances;
}

}  // namespace duet
