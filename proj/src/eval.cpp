#include "duet/eval.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "duet/rng.h"

namespace duet {

std::optional<double> ndcg_at_k(const std::vector<int>& ranked_labels, int k) {
  if (k < 1) throw std::invalid_argument("ndcg_at_k: k must be >= 1");
  auto dcg = [&](const std::vector<int>& labels) {
    double sum = 0.0;
    const int limit = std::min<int>(k, static_cast<int>(labels.size()));
    for (int i = 0; i < limit; ++i) {
      sum += (std::pow(2.0, labels[i]) - 1.0) / std::log2(static_cast<double>(i) + 2.0);
    }
    return sum;
  };
  std::vector<int> ideal(ranked_labels);
  std::sort(ideal.begin(), ideal.end(), std::greater<int>());
  const double idcg = dcg(ideal);
  if (idcg == 0.0) return std::nullopt;
  return dcg(ranked_labels) / idcg;
}

QrelsMap qrels_map(const std::vector<Judgment>& judgments) {
  QrelsMap m;
  for (const auto& j : judgments) m[j.query_id][j.doc_id] = j.rating;
  return m;
}

RunResult evaluate_run(const std::vector<RunEntry>& run, const QrelsMap& qrels) {
  RunResult result;
  std::map<std::string, std::vector<RunEntry>> by_query;
  for (const auto& e : run) {
    by_query[e.query_id].push_back(e);
    if (result.run_tag.empty()) result.run_tag = e.run_tag;
  }

  double sum1 = 0.0, sum10 = 0.0;
  for (auto& [query_id, entries] : by_query) {
    auto qit = qrels.find(query_id);
    if (qit == qrels.end()) {
      result.unknown_queries.push_back(query_id);
      continue;
    }
    std::sort(entries.begin(), entries.end(),
              [](const RunEntry& a, const RunEntry& b) { return a.rank < b.rank; });
    std::vector<int> labels;
    labels.reserve(entries.size());
    for (const auto& e : entries) {
      auto dit = qit->second.find(e.doc_id);
      if (dit == qit->second.end()) {
        ++result.unjudged_docs;
        labels.push_back(0);
      } else {
        labels.push_back(dit->second);
      }
    }
    auto n1 = ndcg_at_k(labels, 1);
    auto n10 = ndcg_at_k(labels, 10);
    if (!n10) {
      result.excluded_queries.push_back(query_id);
      continue;
    }
    QueryMetrics qm;
    qm.ndcg1 = n1.value_or(0.0);  // same ideal gain; n1 defined iff n10 is
    qm.ndcg10 = *n10;
    result.per_query[query_id] = qm;
    sum1 += qm.ndcg1;
    sum10 += qm.ndcg10;
  }
  const double n = static_cast<double>(result.per_query.size());
  result.mean_ndcg1 = n > 0 ? sum1 / n : 0.0;
  result.mean_ndcg10 = n > 0 ? sum10 / n : 0.0;
  return result;
}

double incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  // Continued fraction (Lentz), symmetric split for convergence.
  auto beta_cf = [](double aa, double bb, double xx) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 1e-15;
    constexpr double kTiny = 1e-300;
    double qab = aa + bb, qap = aa + 1.0, qam = aa - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * xx / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
      const double m2 = 2.0 * m;
      double num = m * (bb - m) * xx / ((qam + m2) * (aa + m2));
      d = 1.0 + num * d;
      if (std::abs(d) < kTiny) d = kTiny;
      c = 1.0 + num / c;
      if (std::abs(c) < kTiny) c = kTiny;
      d = 1.0 / d;
      h *= d * c;
      num = -(aa + m) * (qab + m) * xx / ((aa + m2) * (qap + m2));
      d = 1.0 + num * d;
      if (std::abs(d) < kTiny) d = kTiny;
      c = 1.0 + num / c;
      if (std::abs(c) < kTiny) c = kTiny;
      d = 1.0 / d;
      const double delta = d * c;
      h *= delta;
      if (std::abs(delta - 1.0) < kEps) break;
    }
    return h;
  };
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_cf(a, b, x) / a;
  }
  return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, int dof) {
  if (dof < 1) throw std::invalid_argument("student_t_two_sided_p: dof must be >= 1");
  if (std::isinf(t)) return 0.0;
  const double v = static_cast<double>(dof);
  return incomplete_beta(v / 2.0, 0.5, v / (v + t * t));
}

TTestResult paired_ttest(const RunResult& a, const RunResult& b, int num_comparisons,
                         bool use_ndcg10) {
  if (num_comparisons < 1) throw std::invalid_argument("paired_ttest: num_comparisons must be >= 1");
  std::vector<double> diffs;
  for (const auto& [qid, ma] : a.per_query) {
    auto it = b.per_query.find(qid);
    if (it == b.per_query.end()) continue;
    const double da = use_ndcg10 ? ma.ndcg10 : ma.ndcg1;
    const double db = use_ndcg10 ? it->second.ndcg10 : it->second.ndcg1;
    diffs.push_back(da - db);
  }
  const int n = static_cast<int>(diffs.size());
  if (n < 2) throw DataError("paired_ttest: fewer than 2 common queries");

  double mean = 0.0;
  for (double d : diffs) mean += d;
  mean /= n;
  double var = 0.0;
  for (double d : diffs) var += (d - mean) * (d - mean);
  var /= (n - 1);

  TTestResult result;
  result.n = n;
  const double alpha = 0.05 / num_comparisons;
  if (var == 0.0) {
    // Zero variance: identical runs give t=0/p=1, a constant nonzero
    // difference is infinitely significant.
    if (mean == 0.0) {
      result.t = 0.0;
      result.p = 1.0;
      result.significant = false;
    } else {
      result.t = mean > 0 ? std::numeric_limits<double>::infinity()
                          : -std::numeric_limits<double>::infinity();
      result.p = 0.0;
      result.significant = true;
    }
    return result;
  }
  result.t = mean / std::sqrt(var / n);
  result.p = student_t_two_sided_p(result.t, n - 1);
  result.significant = result.p < alpha;
  return result;
}

std::map<std::string, int64_t> count_training_terms(const DocumentStore& docs,
                                                    const DocumentStore& queries) {
  std::map<std::string, int64_t> counts;
  for (const auto& d : docs.docs) {
    for (const auto& t : normalize_text(d.body)) counts[t]++;
  }
  for (const auto& q : queries.docs) {
    for (const auto& t : normalize_text(q.body)) counts[t]++;
  }
  return counts;
}

namespace {

std::string length_bucket(size_t tokens) {
  if (tokens >= 5) return "len>=5";
  return "len=" + std::to_string(tokens);
}

const char* kRarityLabels[] = {"unseen", "1-10", "11-100", "101-1000", "1001-10000", ">10000"};

int rarity_band(int64_t count) {
  if (count <= 0) return 0;
  if (count <= 10) return 1;
  if (count <= 100) return 2;
  if (count <= 1000) return 3;
  if (count <= 10000) return 4;
  return 5;
}

}  // namespace

SliceReport slice_report(const std::vector<RunResult>& results, const DocumentStore& queries,
                         const std::map<std::string, int64_t>& training_term_counts,
                         SliceGrouping grouping) {
  SliceReport report;
  report.grouping = grouping;

  // Queries included by every run, so bucket means stay comparable.
  std::set<std::string> common;
  if (!results.empty()) {
    for (const auto& [qid, _] : results[0].per_query) {
      bool in_all = true;
      for (const auto& r : results) {
        if (!r.per_query.count(qid)) {
          in_all = false;
          break;
        }
      }
      if (in_all) common.insert(qid);
    }
  }

  std::vector<std::string> labels;
  if (grouping == SliceGrouping::query_length) {
    for (size_t l = 1; l <= 4; ++l) labels.push_back(length_bucket(l));
    labels.push_back("len>=5");
  } else {
    labels.assign(std::begin(kRarityLabels), std::end(kRarityLabels));
  }
  std::map<std::string, int> bucket_index;
  report.buckets.resize(labels.size());
  for (size_t i = 0; i < labels.size(); ++i) {
    report.buckets[i].label = labels[i];
    bucket_index[labels[i]] = static_cast<int>(i);
  }

  std::map<std::string, std::map<std::string, std::pair<double, double>>> sums;  // label -> run -> sums
  std::map<std::string, int> counts;
  for (const auto& qid : common) {
    const auto tokens = normalize_text(queries.get(qid).body);
    std::string label;
    if (grouping == SliceGrouping::query_length) {
      if (tokens.empty()) continue;
      label = length_bucket(tokens.size());
    } else {
      int band = 5;
      for (const auto& t : tokens) {
        auto it = training_term_counts.find(t);
        band = std::min(band, rarity_band(it == training_term_counts.end() ? 0 : it->second));
      }
      if (tokens.empty()) continue;
      label = kRarityLabels[band];
    }
    counts[label]++;
    for (const auto& r : results) {
      const auto& qm = r.per_query.at(qid);
      sums[label][r.run_tag].first += qm.ndcg1;
      sums[label][r.run_tag].second += qm.ndcg10;
    }
  }

  for (auto& bucket : report.buckets) {
    bucket.query_count = counts.count(bucket.label) ? counts[bucket.label] : 0;
    if (bucket.query_count == 0) continue;
    for (const auto& [run_tag, s] : sums[bucket.label]) {
      bucket.mean_ndcg1_by_run[run_tag] = s.first / bucket.query_count;
      bucket.mean_ndcg10_by_run[run_tag] = s.second / bucket.query_count;
    }
  }
  return report;
}

PcaResult performance_pca(const std::vector<RunResult>& results, bool use_ndcg10, int sample,
                          uint64_t seed) {
  if (results.size() < 3) throw DataError("performance_pca: need at least 3 runs");
  std::vector<std::string> common;
  for (const auto& [qid, _] : results[0].per_query) {
    bool in_all = true;
    for (const auto& r : results) {
      if (!r.per_query.count(qid)) {
        in_all = false;
        break;
      }
    }
    if (in_all) common.push_back(qid);
  }
  std::sort(common.begin(), common.end());
  if (common.size() < 3) throw DataError("performance_pca: fewer than 3 common queries");

  Rng rng(seed);
  if (sample > 0 && static_cast<size_t>(sample) < common.size()) {
    auto idx = rng.sample_without_replacement(common.size(), static_cast<size_t>(sample));
    std::vector<std::string> picked;
    picked.reserve(idx.size());
    for (size_t i : idx) picked.push_back(common[i]);
    std::sort(picked.begin(), picked.end());
    common = std::move(picked);
  }

  const size_t runs = results.size();
  const size_t q = common.size();
  std::vector<double> x(runs * q);
  for (size_t r = 0; r < runs; ++r) {
    for (size_t c = 0; c < q; ++c) {
      const auto& qm = results[r].per_query.at(common[c]);
      x[r * q + c] = use_ndcg10 ? qm.ndcg10 : qm.ndcg1;
    }
  }
  // Center each query dimension across runs.
  for (size_t c = 0; c < q; ++c) {
    double mean = 0.0;
    for (size_t r = 0; r < runs; ++r) mean += x[r * q + c];
    mean /= static_cast<double>(runs);
    for (size_t r = 0; r < runs; ++r) x[r * q + c] -= mean;
  }

  // Covariance-vector product without materializing the QxQ matrix:
  // C v = X^T (X v) / (runs - 1).
  auto cov_apply = [&](const std::vector<double>& v, std::vector<double>& out) {
    std::vector<double> xv(runs, 0.0);
    for (size_t r = 0; r < runs; ++r) {
      double acc = 0.0;
      for (size_t c = 0; c < q; ++c) acc += x[r * q + c] * v[c];
      xv[r] = acc;
    }
    out.assign(q, 0.0);
    for (size_t r = 0; r < runs; ++r) {
      for (size_t c = 0; c < q; ++c) out[c] += x[r * q + c] * xv[r];
    }
    const double scale = 1.0 / static_cast<double>(runs - 1);
    for (auto& o : out) o *= scale;
  };

  auto norm = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double e : v) s += e * e;
    return std::sqrt(s);
  };

  PcaResult result;
  for (const auto& r : results) result.run_tags.push_back(r.run_tag);
  result.coordinates.assign(runs, {0.0, 0.0});

  std::vector<std::vector<double>> components;
  constexpr double kTol = 1e-9;
  constexpr int kMaxIter = 10000;
  for (int comp = 0; comp < 2; ++comp) {
    std::vector<double> v(q);
    for (auto& e : v) e = rng.next_double() - 0.5;
    // Project out earlier components from the start vector.
    for (const auto& u : components) {
      double dot = 0.0;
      for (size_t c = 0; c < q; ++c) dot += v[c] * u[c];
      for (size_t c = 0; c < q; ++c) v[c] -= dot * u[c];
    }
    double vn = norm(v);
    if (vn == 0.0) break;
    for (auto& e : v) e /= vn;

    std::vector<double> next;
    bool converged = false;
    for (int iter = 0; iter < kMaxIter && !converged; ++iter) {
      cov_apply(v, next);
      for (const auto& u : components) {  // deflation
        double dot = 0.0;
        for (size_t c = 0; c < q; ++c) dot += next[c] * u[c];
        for (size_t c = 0; c < q; ++c) next[c] -= dot * u[c];
      }
      const double nn = norm(next);
      if (nn < 1e-14) {
        // No variance left: all runs identical along remaining directions.
        if (components.empty()) result.degenerate = true;
        next.assign(q, 0.0);
        converged = true;
        break;
      }
      for (auto& e : next) e /= nn;
      double diff = 0.0;
      for (size_t c = 0; c < q; ++c) diff = std::max(diff, std::abs(next[c] - v[c]));
      // Sign flips oscillate for negative eigenvalues; covariance is PSD so
      // plain distance is enough.
      converged = diff < kTol;
      v = next;
    }
    components.push_back(v);
  }

  for (size_t r = 0; r < runs; ++r) {
    double pc1 = 0.0, pc2 = 0.0;
    for (size_t c = 0; c < q; ++c) {
      if (!components.empty()) pc1 += x[r * q + c] * components[0][c];
      if (components.size() > 1) pc2 += x[r * q + c] * components[1][c];
    }
    result.coordinates[r] = {pc1, pc2};
  }
  if (result.degenerate) result.coordinates.assign(runs, {0.0, 0.0});
  return result;
}

}  // namespace duet
