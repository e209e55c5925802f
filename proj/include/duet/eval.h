#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "duet/baselines.h"
#include "duet/corpus.h"

namespace duet {

// Gain 2^label - 1, discount log2(i + 1). Returns nullopt when the ideal
// gain is zero (all labels 0), in which case the query is excluded from
// averages.
std::optional<double> ndcg_at_k(const std::vector<int>& ranked_labels, int k);

struct QueryMetrics {
  double ndcg1 = 0.0;
  double ndcg10 = 0.0;
};

struct RunResult {
  std::string run_tag;
  std::map<std::string, QueryMetrics> per_query;  // queries with defined NDCG
  double mean_ndcg1 = 0.0;
  double mean_ndcg10 = 0.0;
  std::vector<std::string> excluded_queries;  // zero ideal gain
  int unjudged_docs = 0;                      // scored with label 0
  std::vector<std::string> unknown_queries;   // absent from qrels, skipped
};

// Qrels lookup: query_id -> (doc_id -> rating).
using QrelsMap = std::map<std::string, std::map<std::string, int>>;
QrelsMap qrels_map(const std::vector<Judgment>& judgments);

RunResult evaluate_run(const std::vector<RunEntry>& run, const QrelsMap& qrels);

struct TTestResult {
  double t = 0.0;
  double p = 1.0;
  bool significant = false;  // at 0.05 / num_comparisons
  int n = 0;
};

// Two-sided paired t-test on per-query metric differences (a - b) over the
// queries both runs include. Bonferroni-corrected threshold.
TTestResult paired_ttest(const RunResult& a, const RunResult& b, int num_comparisons,
                         bool use_ndcg10 = false);

// Regularized incomplete beta and the two-sided Student-t survival
// function; evaluated by continued fraction to ~1e-9.
double incomplete_beta(double a, double b, double x);
double student_t_two_sided_p(double t, int dof);

enum class SliceGrouping { query_length, rarest_term };

struct SliceBucket {
  std::string label;
  int query_count = 0;
  std::map<std::string, double> mean_ndcg1_by_run;
  std::map<std::string, double> mean_ndcg10_by_run;
};

struct SliceReport {
  SliceGrouping grouping = SliceGrouping::query_length;
  std::vector<SliceBucket> buckets;
};

// query_length buckets by token count (1,2,3,4,5+). rarest_term assigns
// each query the band of its least-frequent term in the training counts:
// unseen, 1-10, 11-100, 101-1000, 1001-10000, >10000.
SliceReport slice_report(const std::vector<RunResult>& results, const DocumentStore& queries,
                         const std::map<std::string, int64_t>& training_term_counts,
                         SliceGrouping grouping);

std::map<std::string, int64_t> count_training_terms(const DocumentStore& docs,
                                                    const DocumentStore& queries);

struct PcaResult {
  std::vector<std::string> run_tags;
  std::vector<std::pair<double, double>> coordinates;  // per run
  bool degenerate = false;  // all runs identical; coordinates forced to 0
};

// Projects runs onto the top-2 principal directions of their per-query
// NDCG vectors over a seeded query sample. Power iteration with deflation,
// tolerance 1e-9.
PcaResult performance_pca(const std::vector<RunResult>& results, bool use_ndcg10, int sample,
                          uint64_t seed);

}  // namespace duet
