#include "duet/featurize.h"

#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "duet/rng.h"
#include "test_util.h"

using namespace duet;

namespace {

std::string random_term(Rng& rng, int max_len) {
  static const std::string alphabet = "abcdefghijklmnopqrstuvwxyz0123456789";
  const size_t len = 1 + rng.next_below(static_cast<uint64_t>(max_len));
  std::string s;
  for (size_t i = 0; i < len; ++i) s.push_back(alphabet[rng.next_below(alphabet.size())]);
  return s;
}

}  // namespace

TEST_CASE("extract_ngraphs enumerates substrings with multiplicity") {
  auto cat = extract_ngraphs("cat", 5);
  CHECK(cat == std::map<std::string, int>{{"c", 1}, {"a", 1}, {"t", 1},
                                          {"ca", 1}, {"at", 1}, {"cat", 1}});
  auto aa = extract_ngraphs("aa", 2);
  CHECK(aa == std::map<std::string, int>{{"a", 2}, {"aa", 1}});
  CHECK(extract_ngraphs("", 5).empty());
}

TEST_CASE("extract_ngraphs matches a brute-force enumeration oracle") {
  Rng rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    const std::string term = random_term(rng, 9);
    const int max_n = 1 + static_cast<int>(rng.next_below(6));
    // Independent oracle: collect every substring by scanning positions.
    std::map<std::string, int> oracle;
    for (size_t i = 0; i < term.size(); ++i) {
      for (size_t n = 1; n <= term.size() - i && n <= static_cast<size_t>(max_n); ++n) {
        oracle[term.substr(i, n)]++;
      }
    }
    CHECK(extract_ngraphs(term, max_n) == oracle);

    // Count identity: sum of multiplicities is sum over n of L-n+1.
    int total = 0;
    for (const auto& [_, c] : extract_ngraphs(term, max_n)) total += c;
    int expected = 0;
    const int len = static_cast<int>(term.size());
    for (int n = 1; n <= std::min(max_n, len); ++n) expected += len - n + 1;
    CHECK(total == expected);
  }
}

TEST_CASE("vocabulary of a tiny corpus is exhaustive") {
  auto docs = DocumentStore::from({{"d1", "aa"}});
  auto vocab = build_ngraph_vocabulary(docs, 2, 10);
  REQUIRE(vocab.size() == 2);
  CHECK(vocab.entries[0].ngraph == "a");
  CHECK(vocab.entries[0].frequency == 2);
  CHECK(vocab.entries[1].ngraph == "aa");
  CHECK(vocab.entries[1].frequency == 1);
  auto comp = vocab.composition();
  CHECK(comp == std::vector<int>{1, 1});
}

TEST_CASE("vocabulary ranks by frequency then lexicographically") {
  // "ab ab ba": a:3? a appears in ab(1) ab(1) ba(1) = 3, b likewise; ab:2, ba:1.
  auto docs = DocumentStore::from({{"d1", "ab ab ba"}});
  auto vocab = build_ngraph_vocabulary(docs, 2, 10);
  REQUIRE(vocab.size() == 4);
  CHECK(vocab.entries[0].ngraph == "a");
  CHECK(vocab.entries[1].ngraph == "b");  // tie with "a" broken lexicographically
  CHECK(vocab.entries[2].ngraph == "ab");
  CHECK(vocab.entries[3].ngraph == "ba");
  for (int i = 0; i < vocab.size(); ++i) CHECK(vocab.entries[i].id == i);
}

TEST_CASE("vocabulary frequencies are non-increasing and recountable") {
  Rng rng(77);
  std::vector<RawDocument> docs;
  for (int d = 0; d < 50; ++d) {
    std::string body;
    for (int t = 0; t < 20; ++t) body += random_term(rng, 6) + " ";
    docs.push_back({"d" + std::to_string(d), body});
  }
  auto store = DocumentStore::from(docs);
  auto vocab = build_ngraph_vocabulary(store, 5, 200);

  for (int i = 1; i < vocab.size(); ++i) {
    CHECK(vocab.entries[i - 1].frequency >= vocab.entries[i].frequency);
  }

  // Independent single-threaded recount of a few entries.
  for (int i : {0, vocab.size() / 2, vocab.size() - 1}) {
    const auto& e = vocab.entries[static_cast<size_t>(i)];
    uint64_t count = 0;
    for (const auto& d : store.docs) {
      for (const auto& term : normalize_text(d.body)) {
        if (e.ngraph.size() > term.size()) continue;
        for (size_t p = 0; p + e.ngraph.size() <= term.size(); ++p) {
          if (term.compare(p, e.ngraph.size(), e.ngraph) == 0) ++count;
        }
      }
    }
    CHECK(e.frequency == count);
  }
}

TEST_CASE("vocabulary build is permutation-invariant in document order") {
  Rng rng(123);
  std::vector<RawDocument> docs;
  for (int d = 0; d < 30; ++d) {
    std::string body;
    for (int t = 0; t < 10; ++t) body += random_term(rng, 5) + " ";
    docs.push_back({"d" + std::to_string(d), body});
  }
  auto vocab_a = build_ngraph_vocabulary(DocumentStore::from(docs), 4, 100);
  std::reverse(docs.begin(), docs.end());
  auto vocab_b = build_ngraph_vocabulary(DocumentStore::from(docs), 4, 100);
  REQUIRE(vocab_a.size() == vocab_b.size());
  for (int i = 0; i < vocab_a.size(); ++i) {
    CHECK(vocab_a.entries[i].ngraph == vocab_b.entries[i].ngraph);
    CHECK(vocab_a.entries[i].frequency == vocab_b.entries[i].frequency);
  }
}

TEST_CASE("interaction matrix marks exact non-pad matches") {
  auto q = to_term_sequence({"a", "b"}, 2);
  auto d = to_term_sequence({"a", "c", "b", "a"}, 4);
  auto m = interaction_matrix(q, d);
  CHECK(m.doc_len == 4);
  CHECK(m.query_len == 2);
  // rows doc-major: a:(1,0) c:(0,0) b:(0,1) a:(1,0)
  CHECK(m.values == std::vector<float>{1, 0, 0, 0, 0, 1, 1, 0});

  auto allpad = to_term_sequence({}, 4);
  auto zero = interaction_matrix(q, allpad);
  CHECK(std::all_of(zero.values.begin(), zero.values.end(), [](float v) { return v == 0.0f; }));

  auto xyz = to_term_sequence({"x", "y", "z"}, 3);
  auto eye = interaction_matrix(xyz, xyz);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) CHECK(eye.at(i, j) == (i == j ? 1.0f : 0.0f));
  }
}

TEST_CASE("interaction matrix equals the nested-loop oracle exhaustively") {
  Rng rng(17);
  const std::vector<std::string> verbs = {"a", "b", "c", "d", ""};
  for (int trial = 0; trial < 300; ++trial) {
    const int nq = 1 + static_cast<int>(rng.next_below(10));
    const int nd = 1 + static_cast<int>(rng.next_below(20));
    std::vector<std::string> qt, dt;
    for (int j = 0; j < nq; ++j) qt.push_back(verbs[rng.next_below(4)]);
    for (int i = 0; i < nd; ++i) dt.push_back(verbs[rng.next_below(4)]);
    auto q = to_term_sequence(qt, nq + static_cast<int>(rng.next_below(3)));
    auto d = to_term_sequence(dt, nd + static_cast<int>(rng.next_below(3)));
    auto m = interaction_matrix(q, d);
    for (int i = 0; i < d.target_len; ++i) {
      for (int j = 0; j < q.target_len; ++j) {
        const bool expect = !is_pad(d.terms[i]) && !is_pad(q.terms[j]) && d.terms[i] == q.terms[j];
        CHECK(m.at(i, j) == (expect ? 1.0f : 0.0f));
      }
    }
  }
}

TEST_CASE("ngraph matrix restricts to the vocabulary") {
  auto docs = DocumentStore::from({{"d1", "c a t"}});  // unigraphs only
  auto vocab = build_ngraph_vocabulary(docs, 1, 10);
  REQUIRE(vocab.size() == 3);

  auto seq = to_term_sequence({"cat"}, 3);
  auto m = ngraph_matrix(seq, vocab);
  CHECK(m.vocab_size == 3);
  CHECK(m.seq_len == 3);
  double col0 = 0, col1 = 0, col2 = 0;
  for (int k = 0; k < 3; ++k) {
    col0 += m.at(k, 0);
    col1 += m.at(k, 1);
    col2 += m.at(k, 2);
  }
  CHECK(col0 == 3.0);  // c, a, t all in vocab
  CHECK(col1 == 0.0);  // pad column
  CHECK(col2 == 0.0);
}

TEST_CASE("ngraph matrix column sums match a brute-force recount") {
  Rng rng(9);
  std::vector<RawDocument> docs;
  for (int d = 0; d < 40; ++d) {
    std::string body;
    for (int t = 0; t < 8; ++t) body += random_term(rng, 7) + " ";
    docs.push_back({"d" + std::to_string(d), body});
  }
  auto store = DocumentStore::from(docs);
  auto vocab = build_ngraph_vocabulary(store, 5, 300);

  for (int trial = 0; trial < 50; ++trial) {
    const std::string term = random_term(rng, 8);
    auto seq = to_term_sequence({term}, 2);
    auto m = ngraph_matrix(seq, vocab);
    double col_sum = 0;
    for (int k = 0; k < m.vocab_size; ++k) col_sum += m.at(k, 0);

    int in_vocab = 0, total = 0;
    for (const auto& [ng, count] : extract_ngraphs(term, vocab.max_n)) {
      total += count;
      if (vocab.id_by_ngraph.count(ng)) in_vocab += count;
    }
    CHECK(col_sum == static_cast<double>(in_vocab));
    CHECK(col_sum <= static_cast<double>(total));
  }
}

TEST_CASE("vocab tsv round-trips") {
  auto docs = DocumentStore::from({{"d1", "abc abd"}});
  auto vocab = build_ngraph_vocabulary(docs, 3, 50);
  std::ostringstream out;
  write_vocab_tsv(out, vocab);

  testutil::TempDir tmp("vocab_io");
  auto path = tmp.write("vocab.tsv", out.str());
  auto loaded = load_vocab_tsv(path, 3);
  REQUIRE(loaded.size() == vocab.size());
  for (int i = 0; i < vocab.size(); ++i) {
    CHECK(loaded.entries[i].ngraph == vocab.entries[i].ngraph);
    CHECK(loaded.entries[i].frequency == vocab.entries[i].frequency);
    CHECK(loaded.entries[i].id == i);
  }
}

TEST_CASE("sparse triplet dump lists nonzeros with a shape header") {
  std::vector<float> m = {0, 2, 0, 0, 0, 1};  // 2x3
  std::ostringstream out;
  write_sparse_triplets(out, m.data(), 2, 3);
  CHECK(out.str() == "shape 2 3\n0\t1\t2\n1\t2\t1\n");
}
