#include "duet/baselines.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <set>

namespace duet {

int64_t CollectionStats::doc_freq(const std::string& term) const {
  auto it = df.find(term);
  return it == df.end() ? 0 : it->second;
}

int64_t CollectionStats::coll_freq(const std::string& term) const {
  auto it = cf.find(term);
  return it == cf.end() ? 0 : it->second;
}

CollectionStats build_collection_stats(const DocumentStore& docs) {
  CollectionStats stats;
  stats.doc_count = static_cast<int64_t>(docs.docs.size());
  for (const auto& doc : docs.docs) {
    auto terms = normalize_text(doc.body);
    stats.total_terms += static_cast<int64_t>(terms.size());
    std::set<std::string> unique(terms.begin(), terms.end());
    for (const auto& t : terms) stats.cf[t]++;
    for (const auto& t : unique) stats.df[t]++;
  }
  stats.avgdl = stats.doc_count > 0
                    ? static_cast<double>(stats.total_terms) / static_cast<double>(stats.doc_count)
                    : 0.0;
  return stats;
}

namespace {

std::unordered_map<std::string, int64_t> term_counts(const std::vector<std::string>& terms) {
  std::unordered_map<std::string, int64_t> tf;
  for (const auto& t : terms) tf[t]++;
  return tf;
}

}  // namespace

double bm25_score(const std::vector<std::string>& query_terms,
                  const std::vector<std::string>& doc_terms, const CollectionStats& stats,
                  double k1, double b) {
  if (stats.doc_count == 0) throw DataError("bm25_score: empty collection");
  const auto tf = term_counts(doc_terms);
  const double dl = static_cast<double>(doc_terms.size());
  const double n = static_cast<double>(stats.doc_count);
  double score = 0.0;
  for (const auto& q : query_terms) {
    auto it = tf.find(q);
    if (it == tf.end()) continue;
    const double t = static_cast<double>(it->second);
    const double df = static_cast<double>(stats.doc_freq(q));
    const double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
    const double norm = stats.avgdl > 0.0 ? dl / stats.avgdl : 1.0;
    score += idf * t * (k1 + 1.0) / (t + k1 * (1.0 - b + b * norm));
  }
  return score;
}

double ql_score(const std::vector<std::string>& query_terms,
                const std::vector<std::string>& doc_terms, const CollectionStats& stats,
                double mu) {
  if (stats.total_terms == 0) throw DataError("ql_score: collection has no terms");
  constexpr double kEps = 1e-10;
  const auto tf = term_counts(doc_terms);
  const double dl = static_cast<double>(doc_terms.size());
  const double total = static_cast<double>(stats.total_terms);
  double score = 0.0;
  for (const auto& q : query_terms) {
    auto it = tf.find(q);
    const double t = it == tf.end() ? 0.0 : static_cast<double>(it->second);
    const double background = static_cast<double>(stats.coll_freq(q)) / total;
    const double numer = t + mu * background;
    score += std::log(numer > 0.0 ? numer / (dl + mu) : kEps / (dl + mu));
  }
  return score;
}

std::vector<RankedDoc> rank_collection(const PairScorer& scorer,
                                       const std::vector<std::string>& query_terms,
                                       const DocumentStore& docs,
                                       const std::vector<std::string>& candidate_ids) {
  std::vector<RankedDoc> ranking;
  ranking.reserve(candidate_ids.size());
  for (const auto& doc_id : candidate_ids) {
    const auto& doc = docs.get(doc_id);
    ranking.push_back({doc_id, scorer(query_terms, normalize_text(doc.body)), 0});
  }
  std::sort(ranking.begin(), ranking.end(), [](const RankedDoc& a, const RankedDoc& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.doc_id < b.doc_id;
  });
  for (size_t i = 0; i < ranking.size(); ++i) ranking[i].rank = static_cast<int>(i) + 1;
  return ranking;
}

void write_run_lines(std::ostream& out, const std::string& query_id,
                     const std::vector<RankedDoc>& ranking, const std::string& run_tag) {
  for (const auto& r : ranking) {
    out << query_id << '\t' << r.doc_id << '\t' << r.rank << '\t' << r.score << '\t' << run_tag
        << '\n';
  }
}

std::vector<RunEntry> load_run_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path);
  std::vector<RunEntry> out;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split(line, '\t');
    if (fields.size() < 5) throw DataError(path + ":" + std::to_string(lineno) + ": malformed line");
    RunEntry e;
    e.query_id = fields[0];
    e.doc_id = fields[1];
    try {
      e.rank = std::stoi(fields[2]);
      e.score = std::stod(fields[3]);
    } catch (const std::exception&) {
      throw DataError(path + ":" + std::to_string(lineno) + ": bad rank or score");
    }
    e.run_tag = fields[4];
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace duet
