#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "duet/corpus.h"

namespace duet {

// Binary doc_len x query_len matrix, row-major over document positions.
// Entry (i, j) is 1 iff doc term i equals query term j and neither is pad.
struct InteractionMatrix {
  std::vector<float> values;
  int doc_len = 0;
  int query_len = 0;

  float at(int i, int j) const { return values[static_cast<size_t>(i) * query_len + j]; }
};

struct NGraphEntry {
  std::string ngraph;
  uint64_t frequency = 0;
  int id = 0;
};

// Top-K character n-graphs over [a-z0-9], ids dense 0..K-1 in descending
// frequency order, ties broken lexicographically.
struct NGraphVocabulary {
  std::vector<NGraphEntry> entries;
  int max_n = 5;
  std::unordered_map<std::string, int> id_by_ngraph;

  int size() const { return static_cast<int>(entries.size()); }
  // Count of entries per n-graph length 1..max_n.
  std::vector<int> composition() const;
};

// K x seq_len column-per-term n-graph count matrix. Pad columns are zero.
struct NGraphMatrix {
  std::vector<float> values;
  int vocab_size = 0;
  int seq_len = 0;

  float at(int k, int j) const { return values[static_cast<size_t>(k) * seq_len + j]; }
};

// All contiguous substrings of length 1..min(max_n, len), with multiplicity.
std::map<std::string, int> extract_ngraphs(const std::string& term, int max_n);

// Counts n-graphs over every document body term (not queries). Emits at most
// K entries; fewer when the corpus has fewer distinct n-graphs.
NGraphVocabulary build_ngraph_vocabulary(const DocumentStore& docs, int max_n, int k);

InteractionMatrix interaction_matrix(const TermSequence& query, const TermSequence& doc);

NGraphMatrix ngraph_matrix(const TermSequence& seq, const NGraphVocabulary& vocab);

// vocab.tsv: rank<TAB>ngraph<TAB>frequency, rank ascending from 0.
void write_vocab_tsv(std::ostream& out, const NGraphVocabulary& vocab);
NGraphVocabulary load_vocab_tsv(const std::string& path, int max_n);

// Debug dump: one-line header "shape <rows> <cols>", then sparse triplets
// "i<TAB>j<TAB>v" for every nonzero, row-major order.
void write_sparse_triplets(std::ostream& out, const float* values, int rows, int cols);

}  // namespace duet
