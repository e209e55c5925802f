// Acceptance suite: one pass/fail line per criterion. Exit code is the
// number of failed criteria. Needs the CLI binary for the determinism and
// sweep criteria: acceptance --cli /path/to/duet [--workdir DIR]

#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "duet/baselines.h"
#include "duet/checkpoint.h"
#include "duet/eval.h"
#include "duet/featurize.h"
#include "duet/models.h"
#include "duet/trainer.h"
#include "oracles.h"
#include "synth.h"

namespace fs = std::filesystem;
using namespace duet;

namespace {

std::string g_cli;
std::string g_workdir;

double now_s() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

int run_cli(const std::string& args) {
  const std::string cmd = g_cli + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

ModelConfig desk_config() {
  ModelConfig cfg;
  cfg.query_len = 10;
  cfg.doc_len = 100;
  cfg.local_filters = 32;
  cfg.vocab_size = 200;
  cfg.dist_filters = 32;
  cfg.doc_pool = 10;
  cfg.hidden = 32;
  return cfg;
}

template <class T>
void fill_random(BasicTensor<T>& t, Rng& rng, float scale = 1.0f) {
  for (auto& v : t.data) v = static_cast<T>(rng.next_symmetric(scale));
}

template <class T>
TensorPtr<T> project_to_scalar(Tape<T>* tape, const TensorPtr<T>& y, uint64_t seed) {
  Rng rng(seed);
  auto w = make_tensor<T>({static_cast<int>(y->size()), 1});
  fill_random(*w, rng);
  auto b = make_tensor<T>({1});
  return affine(tape, y, w, b);
}

// ---- shared training helpers ------------------------------------------

struct TrainedModel {
  ModelConfig mcfg;
  NGraphVocabulary vocab;
  Params params;
};

synth::PairScoreFn scorer_for(const synth::Corpus& corpus, const TrainedModel& model) {
  return [&corpus, &model](const std::string& qid, const std::string& did) {
    auto qseq = to_term_sequence(normalize_text(corpus.collection.query(qid).body),
                                 model.mcfg.query_len);
    auto dseq =
        to_term_sequence(normalize_text(corpus.collection.docs.get(did).body), model.mcfg.doc_len);
    return static_cast<double>(score_pair(model.params, model.mcfg, qseq, dseq, model.vocab));
  };
}

// Trains epoch by epoch up to max_epochs; stops early once NDCG@k over the
// held-out candidates reaches `target` (0 disables early stop). Returns the
// best value seen.
double train_until(const synth::Corpus& corpus, TrainedModel& model, ModelMode mode,
                   uint64_t seed, int max_epochs, double target, int ndcg_k,
                   int* epochs_used = nullptr) {
  auto instances = build_training_instances(corpus.collection, NegativeMode::judged,
                                            model.mcfg.numneg, model.mcfg.query_len,
                                            model.mcfg.doc_len, seed);
  Rng rng(seed);
  model.params = init_params<float>(model.mcfg, mode, rng);
  double best = 0.0;
  for (int epoch = 1; epoch <= max_epochs; ++epoch) {
    TrainConfig tcfg;
    tcfg.epochs = 1;
    tcfg.seed = seed + static_cast<uint64_t>(epoch);
    tcfg.learning_rate = 0.05;
    tcfg.mode = mode;
    train(instances, model.params, model.mcfg, tcfg, model.vocab);
    best = std::max(best, synth::mean_ndcg(corpus, scorer_for(corpus, model), ndcg_k));
    if (epochs_used) *epochs_used = epoch;
    if (target > 0.0 && best >= target) break;
  }
  return best;
}

// ---- criteria ----------------------------------------------------------

struct Criterion {
  bool pass = false;
  std::string detail;
};

Criterion criterion_gradients() {
  const double t0 = now_s();
  double worst = 0.0;
  Rng rng(11);

  {  // affine
    auto x = make_tensor<double>({12}, true);
    auto w = make_tensor<double>({12, 5}, true);
    auto b = make_tensor<double>({5}, true);
    fill_random(*x, rng);
    fill_random(*w, rng);
    fill_random(*b, rng);
    auto f = [&](Tape<double>* tape) { return project_to_scalar(tape, affine(tape, x, w, b), 1); };
    for (const auto& t : {x, w, b}) worst = std::max(worst, gradient_check<double>(f, t));
  }
  {  // conv
    auto x = make_tensor<double>({10, 8}, true);
    auto k = make_tensor<double>({4, 10, 3}, true);
    auto b = make_tensor<double>({4}, true);
    fill_random(*x, rng);
    fill_random(*k, rng);
    fill_random(*b, rng);
    auto f = [&](Tape<double>* tape) { return project_to_scalar(tape, conv_seq(tape, x, k, b), 2); };
    for (const auto& t : {x, k, b}) worst = std::max(worst, gradient_check<double>(f, t));
  }
  {  // maxpool, tanh, hadamard, dropout
    auto x = make_tensor<double>({4, 6}, true);
    fill_random(*x, rng);
    auto fp = [&](Tape<double>* tape) { return project_to_scalar(tape, maxpool_seq(tape, x, 2), 3); };
    worst = std::max(worst, gradient_check<double>(fp, x));

    auto t = make_tensor<double>({4, 5}, true);
    fill_random(*t, rng);
    auto ft = [&](Tape<double>* tape) { return project_to_scalar(tape, tanh_act(tape, t), 4); };
    worst = std::max(worst, gradient_check<double>(ft, t));

    auto q = make_tensor<double>({4, 1}, true);
    auto d = make_tensor<double>({4, 5}, true);
    fill_random(*q, rng);
    fill_random(*d, rng);
    auto fh = [&](Tape<double>* tape) {
      return project_to_scalar(tape, hadamard_broadcast(tape, q, d), 5);
    };
    worst = std::max(worst, gradient_check<double>(fh, q));
    worst = std::max(worst, gradient_check<double>(fh, d));

    auto z = make_tensor<double>({30}, true);
    fill_random(*z, rng);
    auto fd = [&](Tape<double>* tape) {
      Rng mask_rng(777);
      return project_to_scalar(tape, dropout(tape, z, 0.2, RunMode::train, &mask_rng), 6);
    };
    worst = std::max(worst, gradient_check<double>(fd, z));
  }
  {  // softmax_nll
    auto s = make_tensor<double>({5}, true);
    fill_random(*s, rng);
    auto f = [&](Tape<double>* tape) { return softmax_nll(tape, s); };
    worst = std::max(worst, gradient_check<double>(f, s));
  }
  {  // end-to-end tiny duet loss
    ModelConfig cfg;
    cfg.query_len = 3;
    cfg.doc_len = 8;
    cfg.local_filters = 4;
    cfg.vocab_size = 10;
    cfg.dist_filters = 4;
    cfg.doc_pool = 2;
    cfg.hidden = 5;
    auto params = init_params<double>(cfg, ModelMode::duet, rng);
    auto x = make_tensor<double>({cfg.doc_len, cfg.query_len}, true);
    auto q = make_tensor<double>({cfg.vocab_size, cfg.query_len}, true);
    fill_random(*x, rng);
    fill_random(*q, rng);
    std::vector<TensorPtr<double>> docs;
    for (int i = 0; i < 1 + cfg.numneg; ++i) {
      auto d = make_tensor<double>({cfg.vocab_size, cfg.doc_len}, true);
      fill_random(*d, rng);
      docs.push_back(d);
    }
    auto f = [&](Tape<double>* tape) {
      Rng mask_rng(999);
      ScoreContext<double> ctx{tape, RunMode::train, &mask_rng};
      std::vector<TensorPtr<double>> scores;
      for (const auto& d : docs) scores.push_back(duet_score(ctx, x, q, d, params, cfg));
      return softmax_nll(tape, concat_scalars(tape, scores));
    };
    for (const auto& t : params.all()) worst = std::max(worst, gradient_check<double>(f, t));
    worst = std::max(worst, gradient_check<double>(f, x));
    worst = std::max(worst, gradient_check<double>(f, q));
    worst = std::max(worst, gradient_check<double>(f, docs[0]));
  }

  const double elapsed = now_s() - t0;
  Criterion c;
  c.pass = worst < 1e-3 && elapsed < 60.0;
  std::ostringstream ss;
  ss << "max rel err " << worst << ", " << elapsed << " s";
  c.detail = ss.str();
  return c;
}

Criterion criterion_shapes() {
  ModelConfig cfg;  // full-size defaults
  Rng rng(1);
  auto params = init_params<float>(cfg, ModelMode::duet, rng);

  auto x = make_tensor<float>({cfg.doc_len, cfg.query_len});
  auto q = make_tensor<float>({cfg.vocab_size, cfg.query_len});
  auto d = make_tensor<float>({cfg.vocab_size, cfg.doc_len});

  auto local_conv = conv_seq<float>(nullptr, x, params.l_conv_k, params.l_conv_b);
  auto query_conv = conv_seq<float>(nullptr, q, params.d_qconv_k, params.d_qconv_b);
  auto query_pool = maxpool_seq<float>(nullptr, query_conv, cfg.query_conv_len());
  auto doc_conv = conv_seq<float>(nullptr, d, params.d_dconv_k, params.d_dconv_b);
  auto doc_pool = maxpool_seq<float>(nullptr, doc_conv, cfg.doc_pool);

  auto shape_is = [](const FloatTensorPtr& t, int a, int b) {
    return t->shape == std::vector<int>{a, b};
  };
  Criterion c;
  c.pass = shape_is(local_conv, 300, 10) && shape_is(query_conv, 300, 8) &&
           shape_is(query_pool, 300, 1) && shape_is(doc_conv, 300, 998) &&
           shape_is(doc_pool, 300, 899);
  std::ostringstream ss;
  ss << "local conv " << local_conv->shape_str() << ", query conv " << query_conv->shape_str()
     << ", query pool " << query_pool->shape_str() << ", doc conv " << doc_conv->shape_str()
     << ", doc pool " << doc_pool->shape_str();
  c.detail = ss.str();
  return c;
}

Criterion criterion_oracles() {
  std::ostringstream ss;
  bool ok = true;
  Rng rng(21);

  {  // interaction matrix vs nested loop, exhaustive sizes up to 10x20
    const std::vector<std::string> pool = {"a", "b", "c"};
    bool all = true;
    for (int nq = 1; nq <= 10 && all; ++nq) {
      for (int nd = 1; nd <= 20 && all; ++nd) {
        for (int trial = 0; trial < 2; ++trial) {
          std::vector<std::string> qt, dt;
          for (int j = 0; j < nq; ++j) {
            if (rng.next_below(4) == 0) continue;  // shorter than target -> pads
            qt.push_back(pool[rng.next_below(pool.size())]);
          }
          for (int i = 0; i < nd; ++i) {
            if (rng.next_below(5) == 0) continue;
            dt.push_back(pool[rng.next_below(pool.size())]);
          }
          auto q = to_term_sequence(qt, nq);
          auto d = to_term_sequence(dt, nd);
          auto m = interaction_matrix(q, d);
          for (int i = 0; i < nd; ++i) {
            for (int j = 0; j < nq; ++j) {
              const bool expect =
                  !is_pad(d.terms[i]) && !is_pad(q.terms[j]) && d.terms[i] == q.terms[j];
              if (m.at(i, j) != (expect ? 1.0f : 0.0f)) all = false;
            }
          }
        }
      }
    }
    ok = ok && all;
    ss << "interaction " << (all ? "ok" : "MISMATCH");
  }

  {  // ndcg vs definitional oracle, 1e4 cases, |delta| < 1e-9
    double worst = 0.0;
    for (int trial = 0; trial < 10000; ++trial) {
      const int n = 1 + static_cast<int>(rng.next_below(12));
      std::vector<int> labels;
      for (int i = 0; i < n; ++i) labels.push_back(static_cast<int>(rng.next_below(5)));
      const int k = 1 + static_cast<int>(rng.next_below(12));
      auto dcg = [&](const std::vector<int>& ls) {
        double s = 0;
        for (int i = 0; i < std::min<int>(k, static_cast<int>(ls.size())); ++i) {
          s += (std::pow(2.0, ls[static_cast<size_t>(i)]) - 1.0) / std::log2(i + 2.0);
        }
        return s;
      };
      std::vector<int> ideal = labels;
      std::sort(ideal.rbegin(), ideal.rend());
      auto got = ndcg_at_k(labels, k);
      if (dcg(ideal) == 0.0) {
        if (got.has_value()) ok = false;
      } else {
        worst = std::max(worst, std::abs(*got - dcg(labels) / dcg(ideal)));
      }
    }
    ok = ok && worst < 1e-9;
    ss << ", ndcg max delta " << worst;
  }

  {  // bm25/ql vs independent formula, 100 cases, |delta| < 1e-6
    const std::vector<std::string> vocab = {"a", "b", "c", "d", "e", "f"};
    std::vector<RawDocument> docs;
    for (int d = 0; d < 20; ++d) {
      std::string body;
      const int len = 4 + static_cast<int>(rng.next_below(25));
      for (int i = 0; i < len; ++i) body += vocab[rng.next_below(vocab.size())] + " ";
      docs.push_back({"d" + std::to_string(d), body});
    }
    auto store = DocumentStore::from(docs);
    auto stats = build_collection_stats(store);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<std::string> query;
      for (size_t i = 0; i < 1 + rng.next_below(3); ++i) query.push_back(vocab[rng.next_below(6)]);
      auto doc_terms = normalize_text(store.docs[rng.next_below(store.docs.size())].body);
      double bm25_expect = 0.0, ql_expect = 0.0;
      const double n = static_cast<double>(stats.doc_count);
      const double dl = static_cast<double>(doc_terms.size());
      for (const auto& qt : query) {
        int tf = 0;
        for (const auto& t : doc_terms) tf += t == qt ? 1 : 0;
        int df = 0;
        int64_t cf = 0;
        for (const auto& d2 : store.docs) {
          bool seen = false;
          for (const auto& t : normalize_text(d2.body)) {
            if (t == qt) {
              ++cf;
              seen = true;
            }
          }
          df += seen ? 1 : 0;
        }
        if (tf > 0) {
          bm25_expect += std::log(1.0 + (n - df + 0.5) / (df + 0.5)) * tf * 2.2 /
                         (tf + 1.2 * (0.25 + 0.75 * dl / stats.avgdl));
        }
        const double bg = static_cast<double>(cf) / static_cast<double>(stats.total_terms);
        const double numer = tf + 1500.0 * bg;
        ql_expect += std::log(numer > 0 ? numer / (dl + 1500.0) : 1e-10 / (dl + 1500.0));
      }
      worst = std::max(worst, std::abs(bm25_score(query, doc_terms, stats) - bm25_expect));
      worst = std::max(worst, std::abs(ql_score(query, doc_terms, stats) - ql_expect));
    }
    ok = ok && worst < 1e-6;
    ss << ", bm25/ql max delta " << worst;
  }

  {  // pca vs dense eigensolver, 1e-6 up to sign
    const int runs = 5, nq = 50;
    std::vector<RunResult> results;
    std::vector<std::vector<double>> x(runs, std::vector<double>(nq));
    for (int r = 0; r < runs; ++r) {
      RunResult rr;
      rr.run_tag = "r" + std::to_string(r);
      for (int cix = 0; cix < nq; ++cix) {
        const double val = rng.next_double();
        x[static_cast<size_t>(r)][static_cast<size_t>(cix)] = val;
        rr.per_query["q" + std::to_string(100 + cix)] = {val, val};
      }
      results.push_back(std::move(rr));
    }
    auto pca = performance_pca(results, false, 0, 3);
    for (int cix = 0; cix < nq; ++cix) {
      double mean = 0;
      for (int r = 0; r < runs; ++r) mean += x[static_cast<size_t>(r)][static_cast<size_t>(cix)];
      mean /= runs;
      for (int r = 0; r < runs; ++r) x[static_cast<size_t>(r)][static_cast<size_t>(cix)] -= mean;
    }
    std::vector<std::vector<double>> gram(runs, std::vector<double>(runs, 0.0));
    for (int i = 0; i < runs; ++i) {
      for (int j = 0; j < runs; ++j) {
        for (int cix = 0; cix < nq; ++cix) {
          gram[static_cast<size_t>(i)][static_cast<size_t>(j)] +=
              x[static_cast<size_t>(i)][static_cast<size_t>(cix)] *
              x[static_cast<size_t>(j)][static_cast<size_t>(cix)];
        }
      }
    }
    auto eig = oracles::jacobi_eigen(gram);
    std::vector<std::pair<double, int>> order;
    for (int i = 0; i < runs; ++i) order.push_back({eig.values[static_cast<size_t>(i)], i});
    std::sort(order.rbegin(), order.rend());
    double worst = 0.0;
    for (int comp = 0; comp < 2; ++comp) {
      const double lambda = order[static_cast<size_t>(comp)].first;
      const auto& vec = eig.vectors[static_cast<size_t>(order[static_cast<size_t>(comp)].second)];
      for (int r = 0; r < runs; ++r) {
        const double expect = std::abs(vec[static_cast<size_t>(r)] * std::sqrt(lambda));
        const double got = std::abs(comp == 0 ? pca.coordinates[static_cast<size_t>(r)].first
                                              : pca.coordinates[static_cast<size_t>(r)].second);
        worst = std::max(worst, std::abs(expect - got));
      }
    }
    ok = ok && worst < 1e-6;
    ss << ", pca max delta " << worst;
  }

  Criterion c;
  c.pass = ok;
  c.detail = ss.str();
  return c;
}

Criterion criterion_loss_semantics() {
  // Uniform scores through the real model: zeroed output layers.
  ModelConfig cfg = desk_config();
  Rng rng(3);
  auto params = init_params<float>(cfg, ModelMode::duet, rng);
  std::fill(params.l_out_w->data.begin(), params.l_out_w->data.end(), 0.0f);
  std::fill(params.d_out_w->data.begin(), params.d_out_w->data.end(), 0.0f);

  ScoreContext<float> ctx;
  auto x = make_tensor<float>({cfg.doc_len, cfg.query_len});
  auto q = make_tensor<float>({cfg.vocab_size, cfg.query_len});
  std::vector<FloatTensorPtr> scores;
  Rng drng(5);
  for (int i = 0; i < 1 + cfg.numneg; ++i) {
    auto d = make_tensor<float>({cfg.vocab_size, cfg.doc_len});
    fill_random(*d, drng);
    scores.push_back(duet_score(ctx, x, q, d, params, cfg));
  }
  std::vector<float> probs;
  auto loss = softmax_nll<float>(nullptr, concat_scalars<float>(nullptr, scores), &probs);
  const double loss_delta = std::abs(loss->data[0] - std::log(5.0));

  double worst_sum = 0.0;
  Rng srng(7);
  for (int trial = 0; trial < 100; ++trial) {
    auto s = make_tensor<float>({5});
    fill_random(*s, srng, trial % 3 == 0 ? 100.0f : 2.0f);
    std::vector<float> p;
    softmax_nll<float>(nullptr, s, &p);
    double sum = 0;
    for (float v : p) sum += v;
    worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
  }

  Criterion c;
  c.pass = loss_delta < 1e-5 && worst_sum < 1e-6;
  std::ostringstream ss;
  ss << "uniform loss delta " << loss_delta << ", posterior sum delta " << worst_sum;
  c.detail = ss.str();
  return c;
}

Criterion criterion_learning() {
#ifdef _OPENMP
  omp_set_num_threads(1);  // budgets are stated for one core
#endif
  std::ostringstream ss;
  bool ok = true;

  {  // exact-match corpus, local-only
    const double t0 = now_s();
    auto corpus = synth::make_exact(40, 8, 31);
    TrainedModel model{desk_config(), {}, {}};
    model.vocab = build_ngraph_vocabulary(corpus.collection.docs, 5, model.mcfg.vocab_size);
    model.mcfg.vocab_size = model.vocab.size();
    int epochs = 0;
    const double ndcg = train_until(corpus, model, ModelMode::local_only, 31, 20, 0.9, 1, &epochs);
    const double elapsed = now_s() - t0;
    ok = ok && ndcg >= 0.9 && elapsed < 300.0;
    ss << "exact local ndcg@1 " << ndcg << " in " << epochs << " epochs (" << elapsed << " s)";
  }

  {  // synonym corpus: distributed learns, local provably cannot
    const double t0 = now_s();
    auto corpus = synth::make_synonym(6, 1, 31);
    TrainedModel dist{desk_config(), {}, {}};
    dist.vocab = build_ngraph_vocabulary(corpus.collection.docs, 5, dist.mcfg.vocab_size);
    dist.mcfg.vocab_size = dist.vocab.size();
    int epochs = 0;
    const double dist_ndcg =
        train_until(corpus, dist, ModelMode::distributed_only, 31, 20, 0.9, 1, &epochs);

    TrainedModel local{dist.mcfg, dist.vocab, {}};
    const double local_ndcg = train_until(corpus, local, ModelMode::local_only, 31, 20, 0.0, 1);
    const double elapsed = now_s() - t0;
    ok = ok && dist_ndcg >= 0.9 && local_ndcg <= 0.6 && elapsed < 300.0;
    ss << "; synonym dist ndcg@1 " << dist_ndcg << " in " << epochs << " epochs, local "
       << local_ndcg << " (" << elapsed << " s)";
  }

  {  // mixed corpus: duet beats both solos at NDCG@10
    const double t0 = now_s();
    auto corpus = synth::make_mixed(31);
    TrainedModel base{desk_config(), {}, {}};
    base.vocab = build_ngraph_vocabulary(corpus.collection.docs, 5, base.mcfg.vocab_size);
    base.mcfg.vocab_size = base.vocab.size();

    auto run_mode = [&](ModelMode mode) {
      TrainedModel m = base;
      train_until(corpus, m, mode, 31, 12, 0.0, 10);
      return synth::mean_ndcg(corpus, scorer_for(corpus, m), 10);
    };
    const double local10 = run_mode(ModelMode::local_only);
    const double dist10 = run_mode(ModelMode::distributed_only);
    const double duet10 = run_mode(ModelMode::duet);
    const double elapsed = now_s() - t0;
    ok = ok && duet10 >= local10 + 0.02 && duet10 >= dist10 + 0.02 && elapsed < 300.0;
    ss << "; mixed ndcg@10 duet " << duet10 << " local " << local10 << " dist " << dist10 << " ("
       << elapsed << " s)";
  }

#ifdef _OPENMP
  omp_set_num_threads(omp_get_num_procs());
#endif
  Criterion c;
  c.pass = ok;
  c.detail = ss.str();
  return c;
}

Criterion criterion_negative_sampling() {
  auto corpus = synth::make_confusable(40, 8, 31);
  ModelConfig mcfg = desk_config();
  auto vocab = build_ngraph_vocabulary(corpus.collection.docs, 5, mcfg.vocab_size);
  mcfg.vocab_size = vocab.size();

  int judged_wins = 0;
  std::ostringstream ss;
  for (uint64_t seed = 101; seed <= 105; ++seed) {
    double val[2];
    int vi = 0;
    for (auto neg : {NegativeMode::judged, NegativeMode::random}) {
      auto instances = build_training_instances(corpus.collection, neg, mcfg.numneg,
                                                mcfg.query_len, mcfg.doc_len, seed);
      Rng rng(seed);
      TrainedModel model{mcfg, vocab, init_params<float>(mcfg, ModelMode::local_only, rng)};
      TrainConfig tcfg;
      tcfg.epochs = 16;
      tcfg.seed = seed;
      tcfg.learning_rate = 0.05;
      tcfg.mode = ModelMode::local_only;
      train(instances, model.params, mcfg, tcfg, vocab);
      val[vi++] = synth::mean_ndcg(corpus, scorer_for(corpus, model), 1);
    }
    judged_wins += val[0] > val[1] ? 1 : 0;
    ss << " seed" << seed << " " << val[0] << ">" << val[1] << (val[0] > val[1] ? " y" : " n");
  }
  Criterion c;
  c.pass = judged_wins >= 3;
  c.detail = "judged wins " + std::to_string(judged_wins) + "/5:" + ss.str();
  return c;
}

Criterion criterion_determinism() {
  Criterion c;
  const std::string dir = g_workdir + "/det";
  fs::create_directories(dir);
  auto corpus = synth::make_exact(6, 2, 77);
  auto paths = synth::write_tsv(corpus, dir);

  std::ostringstream cfg;
  cfg << "docs = " << paths.docs << "\nqueries = " << paths.queries << "\nqrels = " << paths.qrels
      << "\ndoc_len = 100\nlocal_filters = 16\nvocab_size = 100\ndist_filters = 16\n"
      << "doc_pool = 10\nhidden = 16\nlearning_rate = 0.05\nepochs = 2\nmode = duet\nseed = 7\n"
      << "out_dir = " << dir << "/out\n";
  const std::string cfg_path = dir + "/exp.cfg";
  write_text_file(cfg_path, cfg.str());

  // Identical invocation twice; the second run overwrites the first.
  if (run_cli("train --config " + cfg_path) != 0) {
    c.detail = "cmd_train failed";
    return c;
  }
  const std::string bytes_a = slurp(dir + "/out/checkpoint.bin");
  if (run_cli("train --config " + cfg_path) != 0) {
    c.detail = "cmd_train failed on the second run";
    return c;
  }
  const std::string bytes_b = slurp(dir + "/out/checkpoint.bin");
  const bool identical = !bytes_a.empty() && bytes_a == bytes_b;

  // Round-trip: load and re-save, bytes must survive.
  CheckpointMeta meta;
  auto tensors = load_checkpoint(dir + "/out/checkpoint.bin", &meta);
  save_checkpoint(dir + "/roundtrip.bin", tensors, meta);
  const bool roundtrip = slurp(dir + "/roundtrip.bin") == bytes_b;

  c.pass = identical && roundtrip;
  std::ostringstream ss;
  ss << "checkpoints " << (identical ? "identical" : "DIFFER") << " (" << bytes_a.size()
     << " bytes), round-trip " << (roundtrip ? "bit-exact" : "DIFFERS");
  c.detail = ss.str();
  return c;
}

Criterion criterion_sweep() {
  Criterion c;
  const std::string dir = g_workdir + "/sweep";
  fs::create_directories(dir);
  auto corpus = synth::make_exact(1024, 8, 55);
  auto paths = synth::write_tsv(corpus, dir);

  std::ostringstream cfg;
  cfg << "docs = " << paths.docs << "\nqueries = " << paths.queries << "\nqrels = " << paths.qrels
      << "\nval_qrels = " << paths.val_qrels << "\ndoc_len = 100\nlocal_filters = 16\n"
      << "vocab_size = 100\ndist_filters = 16\ndoc_pool = 10\nhidden = 16\n"
      << "learning_rate = 0.05\nmode = local\nseed = 9\nout_dir = " << dir << "/out\n";
  const std::string cfg_path = dir + "/sweep.cfg";
  write_text_file(cfg_path, cfg.str());

  if (run_cli("sweep --config " + cfg_path +
              " --sizes 128,512,2048 --protocol both --samples-seen 2048") != 0) {
    c.detail = "cmd_sweep failed";
    return c;
  }

  bool ok = true;
  std::ostringstream ss;
  for (const std::string proto : {"one-epoch", "fixed-samples"}) {
    ss << " " << proto << ":";
    for (int size : {128, 512, 2048}) {
      const std::string path =
          dir + "/out/sweep_" + proto + "_" + std::to_string(size) + ".report.tsv";
      const std::string report = slurp(path);
      if (report.empty()) {
        ok = false;
        ss << " " << size << "=MISSING";
        continue;
      }
      // Well-formed: every line has epoch, finite loss, val column.
      double last_val = -1.0;
      size_t lines = 0;
      std::istringstream in(report);
      std::string line;
      while (std::getline(in, line)) {
        auto fields = split(line, '\t');
        if (fields.size() != 3) ok = false;
        else {
          const double loss = std::stod(fields[1]);
          if (!std::isfinite(loss)) ok = false;
          if (fields[2] != "-") last_val = std::stod(fields[2]);
        }
        ++lines;
      }
      const int expected_epochs = proto == "one-epoch" ? 1 : std::max(1, 2048 / size);
      if (lines != static_cast<size_t>(expected_epochs)) ok = false;
      const std::string run_path =
          dir + "/out/sweep_" + proto + "_" + std::to_string(size) + ".run.tsv";
      if (load_run_file(run_path).empty()) ok = false;
      ss << " " << size << "=" << last_val;  // reported, not asserted
    }
  }
  c.pass = ok;
  c.detail = "final val ndcg@1 by size:" + ss.str();
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string arg = argv[i];
    if (arg == "--cli") g_cli = argv[i + 1];
    else if (arg == "--workdir") g_workdir = argv[i + 1];
  }
  if (g_workdir.empty()) {
    g_workdir = (fs::temp_directory_path() / ("duet_acceptance_" + std::to_string(::getpid()))).string();
  }
  fs::create_directories(g_workdir);

  struct Entry {
    const char* name;
    std::function<Criterion()> fn;
    bool needs_cli;
  };
  const std::vector<Entry> entries = {
      {"1 gradient correctness", criterion_gradients, false},
      {"2 shape contract", criterion_shapes, false},
      {"3 oracle equivalence", criterion_oracles, false},
      {"4 loss semantics", criterion_loss_semantics, false},
      {"5 desk-scale learning", criterion_learning, false},
      {"6 negative sampling", criterion_negative_sampling, false},
      {"7 determinism", criterion_determinism, true},
      {"8 training-size sweep", criterion_sweep, true},
  };

  int failures = 0;
  for (const auto& entry : entries) {
    Criterion result;
    if (entry.needs_cli && g_cli.empty()) {
      result.pass = false;
      result.detail = "needs --cli <path to duet binary>";
    } else {
      const double t0 = now_s();
      result = entry.fn();
      std::ostringstream timed;
      timed << result.detail << " [" << now_s() - t0 << " s]";
      result.detail = timed.str();
    }
    std::printf("[%s] criterion %s: %s\n", result.pass ? "PASS" : "FAIL", entry.name,
                result.detail.c_str());
    std::fflush(stdout);
    failures += result.pass ? 0 : 1;
  }
  fs::remove_all(g_workdir);
  return failures;
}
