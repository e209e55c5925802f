#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "duet/corpus.h"

namespace duet {

// Collection-level term statistics over full document bodies.
struct CollectionStats {
  int64_t doc_count = 0;
  double avgdl = 0.0;
  int64_t total_terms = 0;
  std::unordered_map<std::string, int64_t> df;
  std::unordered_map<std::string, int64_t> cf;

  int64_t doc_freq(const std::string& term) const;
  int64_t coll_freq(const std::string& term) const;
};

CollectionStats build_collection_stats(const DocumentStore& docs);

// Okapi BM25 with the +1 idf form: idf = ln(1 + (N - df + 0.5)/(df + 0.5)).
// Duplicate query terms contribute once per occurrence.
double bm25_score(const std::vector<std::string>& query_terms,
                  const std::vector<std::string>& doc_terms, const CollectionStats& stats,
                  double k1 = 1.2, double b = 0.75);

// Query likelihood with Dirichlet smoothing. Terms absent from the whole
// collection contribute ln(eps/(dl+mu)) with eps=1e-10 instead of -inf.
double ql_score(const std::vector<std::string>& query_terms,
                const std::vector<std::string>& doc_terms, const CollectionStats& stats,
                double mu = 1500.0);

struct RankedDoc {
  std::string doc_id;
  double score = 0.0;
  int rank = 0;  // 1-based
};

using PairScorer = std::function<double(const std::vector<std::string>& query_terms,
                                        const std::vector<std::string>& doc_terms)>;

// Scores the candidates, sorts by descending score with ascending doc_id
// on ties, and assigns ranks from 1.
std::vector<RankedDoc> rank_collection(const PairScorer& scorer,
                                       const std::vector<std::string>& query_terms,
                                       const DocumentStore& docs,
                                       const std::vector<std::string>& candidate_ids);

// Run file line: query_id<TAB>doc_id<TAB>rank<TAB>score<TAB>run_tag.
void write_run_lines(std::ostream& out, const std::string& query_id,
                     const std::vector<RankedDoc>& ranking, const std::string& run_tag);

struct RunEntry {
  std::string query_id;
  std::string doc_id;
  int rank = 0;
  double score = 0.0;
  std::string run_tag;
};

std::vector<RunEntry> load_run_file(const std::string& path);

}  // namespace duet
