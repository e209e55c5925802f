#include "duet/featurize.h"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <ostream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace duet {

std::vector<int> NGraphVocabulary::composition() const {
  std::vector<int> counts(static_cast<size_t>(max_n), 0);
  for (const auto& e : entries) counts[e.ngraph.size() - 1]++;
  return counts;
}

std::map<std::string, int> extract_ngraphs(const std::string& term, int max_n) {
  if (max_n < 1) throw std::invalid_argument("extract_ngraphs: max_n must be >= 1");
  std::map<std::string, int> counts;
  const int len = static_cast<int>(term.size());
  for (int n = 1; n <= std::min(max_n, len); ++n) {
    for (int i = 0; i + n <= len; ++i) counts[term.substr(i, n)]++;
  }
  return counts;
}

NGraphVocabulary build_ngraph_vocabulary(const DocumentStore& docs, int max_n, int k) {
  if (docs.docs.empty()) throw DataError("build_ngraph_vocabulary: empty corpus");
  if (k < 1 || max_n < 1) throw std::invalid_argument("build_ngraph_vocabulary: bad K or max_n");

  const int ndocs = static_cast<int>(docs.docs.size());
  int nthreads = 1;
#ifdef _OPENMP
  nthreads = omp_get_max_threads();
#endif
  // Parallel fold: per-thread counting, then a merge. Counts are sums, so
  // the merge order cannot change the result.
  std::vector<std::unordered_map<std::string, uint64_t>> partial(nthreads);
#pragma omp parallel for schedule(static)
  for (int d = 0; d < ndocs; ++d) {
    int tid = 0;
#ifdef _OPENMP
    tid = omp_get_thread_num();
#endif
    auto& counts = partial[tid];
    for (const auto& term : normalize_text(docs.docs[d].body)) {
      const int len = static_cast<int>(term.size());
      for (int n = 1; n <= std::min(max_n, len); ++n) {
        for (int i = 0; i + n <= len; ++i) counts[term.substr(i, n)]++;
      }
    }
  }
  std::unordered_map<std::string, uint64_t> total;
  for (const auto& counts : partial) {
    for (const auto& [ng, c] : counts) total[ng] += c;
  }

  std::vector<NGraphEntry> entries;
  entries.reserve(total.size());
  for (auto& [ng, c] : total) entries.push_back({ng, c, 0});
  std::sort(entries.begin(), entries.end(), [](const NGraphEntry& a, const NGraphEntry& b) {
    if (a.frequency != b.frequency) return a.frequency > b.frequency;
    return a.ngraph < b.ngraph;
  });
  if (entries.size() > static_cast<size_t>(k)) entries.resize(static_cast<size_t>(k));
  if (entries.size() < static_cast<size_t>(k)) {
    std::cerr << "warning: corpus yields only " << entries.size() << " distinct n-graphs (K=" << k
              << ")\n";
  }

  NGraphVocabulary vocab;
  vocab.max_n = max_n;
  vocab.entries = std::move(entries);
  for (size_t i = 0; i < vocab.entries.size(); ++i) {
    vocab.entries[i].id = static_cast<int>(i);
    vocab.id_by_ngraph[vocab.entries[i].ngraph] = static_cast<int>(i);
  }
  return vocab;
}

InteractionMatrix interaction_matrix(const TermSequence& query, const TermSequence& doc) {
  InteractionMatrix m;
  m.doc_len = doc.target_len;
  m.query_len = query.target_len;
  m.values.assign(static_cast<size_t>(m.doc_len) * m.query_len, 0.0f);
  for (int i = 0; i < m.doc_len; ++i) {
    const std::string& dterm = doc.terms[i];
    if (is_pad(dterm)) continue;
    for (int j = 0; j < m.query_len; ++j) {
      if (!is_pad(query.terms[j]) && dterm == query.terms[j]) {
        m.values[static_cast<size_t>(i) * m.query_len + j] = 1.0f;
      }
    }
  }
  return m;
}

NGraphMatrix ngraph_matrix(const TermSequence& seq, const NGraphVocabulary& vocab) {
  NGraphMatrix m;
  m.vocab_size = vocab.size();
  m.seq_len = seq.target_len;
  m.values.assign(static_cast<size_t>(m.vocab_size) * m.seq_len, 0.0f);
  for (int j = 0; j < seq.target_len; ++j) {
    const std::string& term = seq.terms[j];
    if (is_pad(term)) continue;
    const int len = static_cast<int>(term.size());
    for (int n = 1; n <= std::min(vocab.max_n, len); ++n) {
      for (int i = 0; i + n <= len; ++i) {
        auto it = vocab.id_by_ngraph.find(term.substr(i, n));
        if (it != vocab.id_by_ngraph.end()) {
          m.values[static_cast<size_t>(it->second) * m.seq_len + j] += 1.0f;
        }
      }
    }
  }
  return m;
}

void write_vocab_tsv(std::ostream& out, const NGraphVocabulary& vocab) {
  for (const auto& e : vocab.entries) {
    out << e.id << '\t' << e.ngraph << '\t' << e.frequency << '\n';
  }
}

NGraphVocabulary load_vocab_tsv(const std::string& path, int max_n) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path);
  NGraphVocabulary vocab;
  vocab.max_n = max_n;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto fields = split(line, '\t');
    if (fields.size() < 3) throw DataError(path + ":" + std::to_string(lineno) + ": malformed line");
    NGraphEntry e;
    e.id = std::stoi(fields[0]);
    e.ngraph = fields[1];
    e.frequency = std::stoull(fields[2]);
    if (e.id != static_cast<int>(vocab.entries.size())) {
      throw DataError(path + ":" + std::to_string(lineno) + ": ranks must ascend from 0");
    }
    if (e.ngraph.size() > static_cast<size_t>(max_n)) {
      throw DataError(path + ":" + std::to_string(lineno) + ": n-graph longer than max_n");
    }
    vocab.id_by_ngraph[e.ngraph] = e.id;
    vocab.entries.push_back(std::move(e));
  }
  return vocab;
}

void write_sparse_triplets(std::ostream& out, const float* values, int rows, int cols) {
  out << "shape " << rows << ' ' << cols << '\n';
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      float v = values[static_cast<size_t>(i) * cols + j];
      if (v != 0.0f) out << i << '\t' << j << '\t' << v << '\n';
    }
  }
}

}  // namespace duet
