// duet: train, rank, and evaluate exact-match + embedding ranking models
// over flat TSV collections.

#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <CLI11.hpp>

#include "duet/baselines.h"
#include "duet/checkpoint.h"
#include "duet/config.h"
#include "duet/corpus.h"
#include "duet/eval.h"
#include "duet/featurize.h"
#include "duet/models.h"
#include "duet/trainer.h"

namespace fs = std::filesystem;
using namespace duet;

namespace {

void set_threads(int threads) {
#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#else
  (void)threads;
#endif
}

void write_artifact_config(const std::string& artifact_path, const std::string& content) {
  write_text_file(artifact_path + ".config", content);
}

std::string describe(std::initializer_list<std::pair<std::string, std::string>> kv) {
  std::ostringstream out;
  for (const auto& [k, v] : kv) out << k << " = " << v << '\n';
  return out.str();
}

NGraphVocabulary load_or_build_vocab(const ExperimentConfig& cfg, const Collection& collection,
                                     const std::string& out_dir) {
  if (!cfg.vocab.empty()) return load_vocab_tsv(cfg.vocab, cfg.model.max_ngraph);
  auto vocab = build_ngraph_vocabulary(collection.docs, cfg.model.max_ngraph, cfg.model.vocab_size);
  if (!out_dir.empty()) {
    std::ofstream out(fs::path(out_dir) / "vocab.tsv");
    write_vocab_tsv(out, vocab);
  }
  return vocab;
}

// Candidate files are qid<TAB>did lines; qrels files work as-is.
std::map<std::string, std::vector<std::string>> load_candidates(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path);
  std::map<std::string, std::vector<std::string>> out;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split(line, '\t');
    if (fields.size() < 2 || fields[0].empty() || fields[1].empty()) {
      throw DataError(path + ":" + std::to_string(lineno) + ": malformed line");
    }
    out[fields[0]].push_back(fields[1]);
  }
  return out;
}

std::vector<TrainingInstance> build_validation_instances(const ExperimentConfig& cfg,
                                                         const Collection& collection) {
  if (cfg.val_qrels.empty()) return {};
  Collection val = collection;
  val.judgments = load_qrels_tsv(cfg.val_qrels);
  for (const auto& j : val.judgments) {
    if (!val.docs.contains(j.doc_id) || !val.queries.contains(j.query_id)) {
      throw DataError("val_qrels references unknown ids: " + j.query_id + "," + j.doc_id);
    }
  }
  return build_training_instances(val, NegativeMode::judged, cfg.model.numneg,
                                  cfg.model.query_len, cfg.model.doc_len, cfg.train.seed);
}

int cmd_build_vocab(const std::string& docs_path, int k, int max_n, const std::string& out_path) {
  auto docs = DocumentStore::from(load_id_text_tsv(docs_path));
  auto vocab = build_ngraph_vocabulary(docs, max_n, k);
  std::ofstream out(out_path);
  if (!out) throw DataError("cannot write file: " + out_path);
  write_vocab_tsv(out, vocab);
  auto comp = vocab.composition();
  std::cout << "vocabulary size " << vocab.size() << " (requested " << k << ")\n";
  for (int n = 1; n <= max_n; ++n) {
    std::cout << "n=" << n << "\t" << comp[static_cast<size_t>(n) - 1] << "\n";
  }
  write_artifact_config(out_path, describe({{"docs", docs_path},
                                            {"k", std::to_string(k)},
                                            {"max_n", std::to_string(max_n)},
                                            {"out", out_path}}));
  return 0;
}

int cmd_train(ExperimentConfig cfg) {
  if (cfg.docs.empty() || cfg.queries.empty() || cfg.qrels.empty() || cfg.out_dir.empty()) {
    throw DataError("train config needs docs, queries, qrels and out_dir");
  }
  fs::create_directories(cfg.out_dir);
  auto collection = load_collection(cfg.docs, cfg.queries, cfg.qrels);
  auto vocab = load_or_build_vocab(cfg, collection, cfg.out_dir);
  if (vocab.size() < cfg.model.vocab_size) {
    std::cerr << "warning: vocabulary has " << vocab.size() << " entries, sizing model input down\n";
  }
  cfg.model.vocab_size = vocab.size();
  cfg.model.validate();

  InstanceBuildReport build_report;
  auto instances =
      build_training_instances(collection, cfg.train.negatives, cfg.model.numneg,
                               cfg.model.query_len, cfg.model.doc_len, cfg.train.seed,
                               &build_report);
  if (instances.empty()) throw DataError("no training instances could be built");
  std::cout << "instances " << build_report.emitted << " (queries with judgments "
            << build_report.queries_with_judgments << ", skipped without positive "
            << build_report.queries_without_positive << ")\n";

  auto validation = build_validation_instances(cfg, collection);

  Rng init_rng(cfg.train.seed);
  Params params = init_params<float>(cfg.model, cfg.train.mode, init_rng);

  const std::string resolved = cfg.serialize();
  write_text_file((fs::path(cfg.out_dir) / "config.resolved.cfg").string(), resolved);
  CheckpointMeta meta{cfg.train.seed, fnv1a64(resolved)};

  StepCallback on_step;
  const std::string ckpt_path = (fs::path(cfg.out_dir) / "checkpoint.bin").string();
  if (cfg.checkpoint_every > 0) {
    on_step = [&](int step) {
      if (step % cfg.checkpoint_every == 0) save_checkpoint(ckpt_path, params.all(), meta);
    };
  }

  auto report = train(instances, params, cfg.model, cfg.train, vocab,
                      validation.empty() ? nullptr : &validation, on_step);

  save_checkpoint(ckpt_path, params.all(), meta);
  write_text_file((fs::path(cfg.out_dir) / "train_report.tsv").string(), train_report_tsv(report));
  std::cout << "final mean loss " << report.epochs.back().mean_loss;
  if (report.epochs.back().val_ndcg1) std::cout << ", val ndcg@1 " << *report.epochs.back().val_ndcg1;
  std::cout << "\ncheckpoint " << ckpt_path << "\n";
  return 0;
}

struct RankArgs {
  std::string checkpoint;
  std::string config;
  std::string baseline;
  std::string docs;
  std::string queries;
  std::string candidates;
  std::string vocab;
  std::string out;
  std::string tag;
  double k1 = 1.2;
  double b = 0.75;
  double mu = 1500.0;
  std::string dump_pair;  // qid:did
  std::string dump_dir;
};

int cmd_rank(const RankArgs& args) {
  if (args.baseline.empty() == args.checkpoint.empty()) {
    throw DataError("rank needs exactly one of --baseline or --checkpoint");
  }
  auto docs = DocumentStore::from(load_id_text_tsv(args.docs));
  auto queries = DocumentStore::from(load_id_text_tsv(args.queries));
  auto candidates = load_candidates(args.candidates);
  if (candidates.empty()) std::cerr << "warning: empty candidate set\n";
  for (const auto& [qid, dids] : candidates) {
    (void)queries.get(qid);
    for (const auto& did : dids) (void)docs.get(did);
  }

  std::ofstream out(args.out);
  if (!out) throw DataError("cannot write file: " + args.out);

  std::string config_note;
  if (!args.baseline.empty()) {
    auto stats = build_collection_stats(docs);
    PairScorer scorer;
    if (args.baseline == "bm25") {
      scorer = [&](const std::vector<std::string>& q, const std::vector<std::string>& d) {
        return bm25_score(q, d, stats, args.k1, args.b);
      };
    } else if (args.baseline == "ql") {
      scorer = [&](const std::vector<std::string>& q, const std::vector<std::string>& d) {
        return ql_score(q, d, stats, args.mu);
      };
    } else {
      throw DataError("unknown baseline: " + args.baseline + " (want bm25|ql)");
    }
    const std::string tag = args.tag.empty() ? args.baseline : args.tag;
    // Baselines score full bodies; candidate lists are small, so score
    // queries in parallel and write in deterministic order.
    std::vector<const std::string*> qids;
    for (const auto& [qid, _] : candidates) qids.push_back(&qid);
    std::vector<std::vector<RankedDoc>> rankings(qids.size());
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
    for (ptrdiff_t i = 0; i < static_cast<ptrdiff_t>(qids.size()); ++i) {
      try {
        const auto query_terms = normalize_text(queries.get(*qids[i]).body);
        rankings[i] = rank_collection(scorer, query_terms, docs, candidates.at(*qids[i]));
      } catch (...) {
#pragma omp critical
        failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
    for (size_t i = 0; i < qids.size(); ++i) write_run_lines(out, *qids[i], rankings[i], tag);
    config_note = describe({{"baseline", args.baseline},
                            {"k1", std::to_string(args.k1)},
                            {"b", std::to_string(args.b)},
                            {"mu", std::to_string(args.mu)},
                            {"docs", args.docs},
                            {"queries", args.queries},
                            {"candidates", args.candidates},
                            {"tag", tag}});
  } else {
    if (args.config.empty()) throw DataError("rank --checkpoint needs --config");
    ExperimentConfig cfg = ExperimentConfig::parse_file(args.config);
    if (!args.vocab.empty()) cfg.vocab = args.vocab;
    if (cfg.vocab.empty()) throw DataError("rank --checkpoint needs a vocab path (config or --vocab)");
    auto vocab = load_vocab_tsv(cfg.vocab, cfg.model.max_ngraph);
    cfg.model.vocab_size = vocab.size();
    CheckpointMeta meta;
    Params params = params_from_tensors(cfg.model, load_checkpoint(args.checkpoint, &meta));
    const std::string tag = args.tag.empty() ? to_string(params.mode) : args.tag;

    std::vector<const std::string*> qids;
    for (const auto& [qid, _] : candidates) qids.push_back(&qid);
    std::vector<std::vector<RankedDoc>> rankings(qids.size());
    std::exception_ptr failure;
    // Parameters are immutable here; per-query scoring is independent.
#pragma omp parallel for schedule(dynamic)
    for (ptrdiff_t i = 0; i < static_cast<ptrdiff_t>(qids.size()); ++i) {
      try {
        const auto& qid = *qids[i];
        auto qseq = to_term_sequence(normalize_text(queries.get(qid).body), cfg.model.query_len);
        std::vector<RankedDoc> ranking;
        for (const auto& did : candidates.at(qid)) {
          auto dseq = to_term_sequence(normalize_text(docs.get(did).body), cfg.model.doc_len);
          ranking.push_back({did, score_pair(params, cfg.model, qseq, dseq, vocab), 0});
        }
        std::sort(ranking.begin(), ranking.end(), [](const RankedDoc& a, const RankedDoc& b) {
          if (a.score != b.score) return a.score > b.score;
          return a.doc_id < b.doc_id;
        });
        for (size_t r = 0; r < ranking.size(); ++r) ranking[r].rank = static_cast<int>(r) + 1;
        rankings[i] = std::move(ranking);
      } catch (...) {
#pragma omp critical
        failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
    for (size_t i = 0; i < qids.size(); ++i) write_run_lines(out, *qids[i], rankings[i], tag);

    if (!args.dump_pair.empty()) {
      auto sep = args.dump_pair.find(':');
      if (sep == std::string::npos) throw DataError("--dump-pair wants query_id:doc_id");
      const std::string qid = args.dump_pair.substr(0, sep);
      const std::string did = args.dump_pair.substr(sep + 1);
      auto qseq = to_term_sequence(normalize_text(queries.get(qid).body), cfg.model.query_len);
      auto dseq = to_term_sequence(normalize_text(docs.get(did).body), cfg.model.doc_len);
      fs::create_directories(args.dump_dir.empty() ? "." : args.dump_dir);
      fs::path dir = args.dump_dir.empty() ? "." : args.dump_dir;
      auto im = interaction_matrix(qseq, dseq);
      std::ofstream xi(dir / "interaction.tsv");
      write_sparse_triplets(xi, im.values.data(), im.doc_len, im.query_len);
      auto qm = ngraph_matrix(qseq, vocab);
      std::ofstream xq(dir / "query_ngraphs.tsv");
      write_sparse_triplets(xq, qm.values.data(), qm.vocab_size, qm.seq_len);
      auto dm = ngraph_matrix(dseq, vocab);
      std::ofstream xd(dir / "doc_ngraphs.tsv");
      write_sparse_triplets(xd, dm.values.data(), dm.vocab_size, dm.seq_len);
    }
    config_note = describe({{"checkpoint", args.checkpoint},
                            {"config", args.config},
                            {"vocab", cfg.vocab},
                            {"docs", args.docs},
                            {"queries", args.queries},
                            {"candidates", args.candidates},
                            {"tag", tag}});
  }
  write_artifact_config(args.out, config_note);
  return 0;
}

int cmd_eval(const std::vector<std::string>& run_paths, const std::string& qrels_path,
             const std::string& out_dir) {
  auto qrels = qrels_map(load_qrels_tsv(qrels_path));
  fs::create_directories(out_dir);

  std::vector<RunResult> results;
  for (const auto& path : run_paths) {
    auto result = evaluate_run(load_run_file(path), qrels);
    if (result.run_tag.empty()) result.run_tag = fs::path(path).stem().string();
    if (!result.excluded_queries.empty()) {
      std::cerr << "note: " << result.run_tag << ": " << result.excluded_queries.size()
                << " queries with zero ideal gain excluded\n";
    }
    if (result.unjudged_docs > 0) {
      std::cerr << "warning: " << result.run_tag << ": " << result.unjudged_docs
                << " unjudged documents scored as label 0\n";
    }
    for (const auto& q : result.unknown_queries) {
      std::cerr << "warning: " << result.run_tag << ": query " << q << " missing from qrels\n";
    }
    std::ostringstream metrics;
    for (const auto& [qid, qm] : result.per_query) {
      metrics << qid << '\t' << qm.ndcg1 << '\t' << qm.ndcg10 << '\n';
    }
    metrics << "MEAN\t" << result.mean_ndcg1 << '\t' << result.mean_ndcg10 << '\n';
    write_text_file((fs::path(out_dir) / (result.run_tag + ".metrics.tsv")).string(),
                    metrics.str());
    std::cout << result.run_tag << "\tndcg@1 " << result.mean_ndcg1 << "\tndcg@10 "
              << result.mean_ndcg10 << "\n";
    results.push_back(std::move(result));
  }

  if (results.size() >= 2) {
    const int pairs = static_cast<int>(results.size() * (results.size() - 1) / 2);
    std::ostringstream table;
    table << "metric\trun_a\trun_b\tt\tp\tsignificant\n";
    for (size_t i = 0; i < results.size(); ++i) {
      for (size_t j = i + 1; j < results.size(); ++j) {
        for (bool use10 : {false, true}) {
          auto tt = paired_ttest(results[i], results[j], pairs, use10);
          table << (use10 ? "ndcg10" : "ndcg1") << '\t' << results[i].run_tag << '\t'
                << results[j].run_tag << '\t' << tt.t << '\t' << tt.p << '\t'
                << (tt.significant ? "yes" : "no") << '\n';
        }
      }
    }
    write_text_file((fs::path(out_dir) / "significance.tsv").string(), table.str());
    std::cout << table.str();
  }

  std::ostringstream note;
  note << "qrels = " << qrels_path << '\n';
  for (const auto& p : run_paths) note << "run = " << p << '\n';
  write_text_file((fs::path(out_dir) / "config.resolved.cfg").string(), note.str());
  return 0;
}

int cmd_ablate(const std::string& checkpoint_path, const std::string& config_path,
               const std::string& docs_path, const std::string& queries_path,
               const std::string& vocab_path, const std::string& query_id,
               const std::string& doc_id, const std::string& out_path) {
  ExperimentConfig cfg = ExperimentConfig::parse_file(config_path);
  if (!vocab_path.empty()) cfg.vocab = vocab_path;
  if (cfg.vocab.empty()) throw DataError("ablate needs a vocab path (config or --vocab)");
  auto vocab = load_vocab_tsv(cfg.vocab, cfg.model.max_ngraph);
  cfg.model.vocab_size = vocab.size();
  Params params = params_from_tensors(cfg.model, load_checkpoint(checkpoint_path));

  auto docs = DocumentStore::from(load_id_text_tsv(docs_path));
  auto queries = DocumentStore::from(load_id_text_tsv(queries_path));
  auto qseq = to_term_sequence(normalize_text(queries.get(query_id).body), cfg.model.query_len);
  auto dseq = to_term_sequence(normalize_text(docs.get(doc_id).body), cfg.model.doc_len);

  auto entries = term_ablation(params, cfg.model, qseq, dseq, vocab);
  std::ostringstream table;
  table << "term\tposition\tlocal_drop\tdistributed_drop\tduet_drop\n";
  for (const auto& e : entries) {
    table << e.term << '\t' << e.position << '\t' << e.local_drop << '\t' << e.distributed_drop
          << '\t' << e.duet_drop << '\n';
  }
  std::cout << table.str();
  if (!out_path.empty()) {
    write_text_file(out_path, table.str());
    write_artifact_config(out_path, describe({{"checkpoint", checkpoint_path},
                                              {"query_id", query_id},
                                              {"doc_id", doc_id}}));
  }
  return 0;
}

int cmd_report(const std::vector<std::string>& run_paths, const std::string& qrels_path,
               const std::string& queries_path, const std::string& train_docs_path,
               const std::string& train_queries_path, bool use_ndcg10, int sample, uint64_t seed,
               const std::string& out_dir) {
  auto qrels = qrels_map(load_qrels_tsv(qrels_path));
  auto queries = DocumentStore::from(load_id_text_tsv(queries_path));
  fs::create_directories(out_dir);

  std::vector<RunResult> results;
  for (const auto& path : run_paths) {
    auto r = evaluate_run(load_run_file(path), qrels);
    if (r.run_tag.empty()) r.run_tag = fs::path(path).stem().string();
    results.push_back(std::move(r));
  }

  std::map<std::string, int64_t> term_counts;
  if (!train_docs_path.empty() && !train_queries_path.empty()) {
    term_counts = count_training_terms(DocumentStore::from(load_id_text_tsv(train_docs_path)),
                                       DocumentStore::from(load_id_text_tsv(train_queries_path)));
  }

  auto write_slices = [&](SliceGrouping grouping, const std::string& name) {
    auto report = slice_report(results, queries, term_counts, grouping);
    std::ostringstream out;
    out << "bucket\tqueries";
    for (const auto& r : results) out << '\t' << r.run_tag;
    out << '\n';
    for (const auto& b : report.buckets) {
      out << b.label << '\t' << b.query_count;
      for (const auto& r : results) {
        out << '\t';
        auto it = (use_ndcg10 ? b.mean_ndcg10_by_run : b.mean_ndcg1_by_run).find(r.run_tag);
        if (it == (use_ndcg10 ? b.mean_ndcg10_by_run : b.mean_ndcg1_by_run).end()) out << '-';
        else out << it->second;
      }
      out << '\n';
    }
    write_text_file((fs::path(out_dir) / name).string(), out.str());
    std::cout << out.str();
  };
  write_slices(SliceGrouping::query_length, "slice_query_length.tsv");
  if (!term_counts.empty()) write_slices(SliceGrouping::rarest_term, "slice_term_rarity.tsv");

  if (results.size() >= 3) {
    auto pca = performance_pca(results, use_ndcg10, sample, seed);
    if (pca.degenerate) std::cerr << "note: all runs identical, PCA components are zero\n";
    std::ostringstream out;
    for (size_t i = 0; i < pca.run_tags.size(); ++i) {
      out << pca.run_tags[i] << '\t' << pca.coordinates[i].first << '\t'
          << pca.coordinates[i].second << '\n';
    }
    write_text_file((fs::path(out_dir) / "pca.tsv").string(), out.str());
    std::cout << out.str();
  } else {
    std::cerr << "note: PCA needs at least 3 runs, skipping\n";
  }

  std::ostringstream note;
  note << "qrels = " << qrels_path << '\n';
  for (const auto& p : run_paths) note << "run = " << p << '\n';
  note << "metric = " << (use_ndcg10 ? "ndcg10" : "ndcg1") << '\n';
  note << "sample = " << sample << '\n';
  note << "seed = " << seed << '\n';
  write_text_file((fs::path(out_dir) / "config.resolved.cfg").string(), note.str());
  return 0;
}

int cmd_sweep(ExperimentConfig cfg, const std::vector<size_t>& sizes, const std::string& protocol,
              size_t samples_seen) {
  std::vector<std::string> protocols;
  if (protocol == "both") protocols = {"one-epoch", "fixed-samples"};
  else if (protocol == "one-epoch" || protocol == "fixed-samples") protocols = {protocol};
  else throw DataError("unknown protocol: " + protocol + " (want one-epoch|fixed-samples|both)");
  if (cfg.out_dir.empty()) throw DataError("sweep config needs out_dir");
  fs::create_directories(cfg.out_dir);
  auto collection = load_collection(cfg.docs, cfg.queries, cfg.qrels);
  auto vocab = load_or_build_vocab(cfg, collection, cfg.out_dir);
  cfg.model.vocab_size = vocab.size();
  auto instances =
      build_training_instances(collection, cfg.train.negatives, cfg.model.numneg,
                               cfg.model.query_len, cfg.model.doc_len, cfg.train.seed);
  if (instances.empty()) throw DataError("no training instances could be built");
  auto validation = build_validation_instances(cfg, collection);

  write_text_file((fs::path(cfg.out_dir) / "config.resolved.cfg").string(), cfg.serialize());

  // Candidate sets for the per-size runs come from the validation split.
  std::map<std::string, std::vector<std::string>> val_candidates;
  if (!cfg.val_qrels.empty()) {
    for (const auto& j : load_qrels_tsv(cfg.val_qrels)) {
      val_candidates[j.query_id].push_back(j.doc_id);
    }
  }

  for (const auto& proto : protocols) {
    for (size_t size : sizes) {
      TrainConfig tcfg = cfg.train;
      tcfg.max_instances = size;
      const size_t effective = std::min(size, instances.size());
      if (proto == "one-epoch") {
        tcfg.epochs = 1;
      } else {
        tcfg.epochs = static_cast<int>(std::max<size_t>(1, samples_seen / effective));
      }
      Rng init_rng(tcfg.seed);
      Params params = init_params<float>(cfg.model, tcfg.mode, init_rng);
      auto report = train(instances, params, cfg.model, tcfg, vocab,
                          validation.empty() ? nullptr : &validation);

      const std::string stem = "sweep_" + proto + "_" + std::to_string(size);
      write_text_file((fs::path(cfg.out_dir) / (stem + ".report.tsv")).string(),
                      train_report_tsv(report));
      save_checkpoint((fs::path(cfg.out_dir) / (stem + ".checkpoint.bin")).string(), params.all(),
                      {tcfg.seed, cfg.digest()});
      if (!val_candidates.empty()) {
        std::ofstream run(fs::path(cfg.out_dir) / (stem + ".run.tsv"));
        for (const auto& [qid, dids] : val_candidates) {
          auto qseq =
              to_term_sequence(normalize_text(collection.query(qid).body), cfg.model.query_len);
          std::vector<RankedDoc> ranking;
          for (const auto& did : dids) {
            auto dseq = to_term_sequence(normalize_text(collection.docs.get(did).body),
                                         cfg.model.doc_len);
            ranking.push_back({did, score_pair(params, cfg.model, qseq, dseq, vocab), 0});
          }
          std::sort(ranking.begin(), ranking.end(), [](const RankedDoc& a, const RankedDoc& b) {
            if (a.score != b.score) return a.score > b.score;
            return a.doc_id < b.doc_id;
          });
          for (size_t r = 0; r < ranking.size(); ++r) ranking[r].rank = static_cast<int>(r) + 1;
          write_run_lines(run, qid, ranking, stem);
        }
      }
      const auto& last = report.epochs.back();
      std::cout << proto << "\tsize " << effective << "\tepochs " << tcfg.epochs << "\tloss "
                << last.mean_loss;
      if (last.val_ndcg1) std::cout << "\tval ndcg@1 " << *last.val_ndcg1;
      std::cout << "\n";
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"duet ranking toolkit"};
  app.require_subcommand(1);

  // build-vocab
  auto* sc_vocab = app.add_subcommand("build-vocab", "count n-graphs and write the top-K table");
  std::string bv_docs, bv_out;
  int bv_k = 2000, bv_maxn = 5;
  sc_vocab->add_option("--docs", bv_docs, "documents.tsv")->required();
  sc_vocab->add_option("--k", bv_k, "vocabulary size");
  sc_vocab->add_option("--max-n", bv_maxn, "largest n-graph length");
  sc_vocab->add_option("--out", bv_out, "output vocab.tsv")->required();

  // train
  auto* sc_train = app.add_subcommand("train", "train a model from an experiment config");
  std::string tr_config, tr_mode, tr_negatives;
  int64_t tr_max_instances = -1;
  int64_t tr_seed = -1;
  int tr_threads = 0;
  sc_train->add_option("--config", tr_config, "experiment config file")->required();
  sc_train->add_option("--mode", tr_mode, "duet|local|distributed (overrides config)");
  sc_train->add_option("--negatives", tr_negatives, "judged|random (overrides config)");
  sc_train->add_option("--max-instances", tr_max_instances, "cap training instances");
  sc_train->add_option("--seed", tr_seed, "RNG seed (overrides config)");
  sc_train->add_option("--threads", tr_threads, "OpenMP threads");

  // rank
  auto* sc_rank = app.add_subcommand("rank", "produce a run file over candidate documents");
  RankArgs rank_args;
  int rk_threads = 0;
  sc_rank->add_option("--checkpoint", rank_args.checkpoint, "model checkpoint");
  sc_rank->add_option("--config", rank_args.config, "experiment config for the checkpoint");
  sc_rank->add_option("--baseline", rank_args.baseline, "bm25|ql");
  sc_rank->add_option("--docs", rank_args.docs, "documents.tsv")->required();
  sc_rank->add_option("--queries", rank_args.queries, "queries.tsv")->required();
  sc_rank->add_option("--candidates", rank_args.candidates, "qid<TAB>did lines")->required();
  sc_rank->add_option("--vocab", rank_args.vocab, "vocab.tsv (overrides config)");
  sc_rank->add_option("--out", rank_args.out, "run file to write")->required();
  sc_rank->add_option("--tag", rank_args.tag, "run tag");
  sc_rank->add_option("--k1", rank_args.k1, "BM25 k1");
  sc_rank->add_option("--b", rank_args.b, "BM25 b");
  sc_rank->add_option("--mu", rank_args.mu, "QL Dirichlet mu");
  sc_rank->add_option("--dump-pair", rank_args.dump_pair, "query_id:doc_id feature dump");
  sc_rank->add_option("--dump-dir", rank_args.dump_dir, "directory for feature dumps");
  sc_rank->add_option("--threads", rk_threads, "OpenMP threads");

  // eval
  auto* sc_eval = app.add_subcommand("eval", "NDCG metrics and significance tests for run files");
  std::vector<std::string> ev_runs;
  std::string ev_qrels, ev_out = "eval_out";
  sc_eval->add_option("--qrels", ev_qrels, "qrels.tsv")->required();
  sc_eval->add_option("--out", ev_out, "output directory");
  sc_eval->add_option("runs", ev_runs, "run files")->required();

  // ablate
  auto* sc_ablate = app.add_subcommand("ablate", "per-term score drops for one query/document");
  std::string ab_ckpt, ab_config, ab_docs, ab_queries, ab_vocab, ab_qid, ab_did, ab_out;
  sc_ablate->add_option("--checkpoint", ab_ckpt, "model checkpoint")->required();
  sc_ablate->add_option("--config", ab_config, "experiment config")->required();
  sc_ablate->add_option("--docs", ab_docs, "documents.tsv")->required();
  sc_ablate->add_option("--queries", ab_queries, "queries.tsv")->required();
  sc_ablate->add_option("--vocab", ab_vocab, "vocab.tsv (overrides config)");
  sc_ablate->add_option("--query-id", ab_qid, "query id")->required();
  sc_ablate->add_option("--doc-id", ab_did, "document id")->required();
  sc_ablate->add_option("--out", ab_out, "write the table here too");

  // report
  auto* sc_report = app.add_subcommand("report", "slice analyses and per-query performance PCA");
  std::vector<std::string> rp_runs;
  std::string rp_qrels, rp_queries, rp_train_docs, rp_train_queries, rp_metric = "ndcg1";
  std::string rp_out = "report_out";
  int rp_sample = 2000;
  uint64_t rp_seed = 0;
  sc_report->add_option("--qrels", rp_qrels, "qrels.tsv")->required();
  sc_report->add_option("--queries", rp_queries, "queries.tsv")->required();
  sc_report->add_option("--train-docs", rp_train_docs, "training documents.tsv for term counts");
  sc_report->add_option("--train-queries", rp_train_queries, "training queries.tsv");
  sc_report->add_option("--metric", rp_metric, "ndcg1|ndcg10");
  sc_report->add_option("--sample", rp_sample, "PCA query sample size");
  sc_report->add_option("--seed", rp_seed, "PCA sample seed");
  sc_report->add_option("--out", rp_out, "output directory");
  sc_report->add_option("runs", rp_runs, "run files")->required();

  // sweep
  auto* sc_sweep = app.add_subcommand("sweep", "training-size sweep");
  std::string sw_config, sw_protocol = "both";
  std::vector<size_t> sw_sizes;
  size_t sw_samples = 8192;
  int sw_threads = 0;
  int64_t sw_seed = -1;
  sc_sweep->add_option("--config", sw_config, "experiment config file")->required();
  sc_sweep->add_option("--sizes", sw_sizes, "training set sizes")->required()->delimiter(',');
  sc_sweep->add_option("--protocol", sw_protocol, "one-epoch|fixed-samples|both");
  sc_sweep->add_option("--samples-seen", sw_samples, "total samples for fixed-samples runs");
  sc_sweep->add_option("--seed", sw_seed, "RNG seed (overrides config)");
  sc_sweep->add_option("--threads", sw_threads, "OpenMP threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (sc_vocab->parsed()) return cmd_build_vocab(bv_docs, bv_k, bv_maxn, bv_out);
    if (sc_train->parsed()) {
      set_threads(tr_threads);
      ExperimentConfig cfg = ExperimentConfig::parse_file(tr_config);
      if (!tr_mode.empty()) cfg.train.mode = model_mode_from_string(tr_mode);
      if (!tr_negatives.empty()) {
        cfg.train.negatives = tr_negatives == "random" ? NegativeMode::random
                              : tr_negatives == "judged"
                                  ? NegativeMode::judged
                                  : throw DataError("bad --negatives: " + tr_negatives);
      }
      if (tr_max_instances >= 0) cfg.train.max_instances = static_cast<size_t>(tr_max_instances);
      if (tr_seed >= 0) cfg.train.seed = static_cast<uint64_t>(tr_seed);
      return cmd_train(std::move(cfg));
    }
    if (sc_rank->parsed()) {
      set_threads(rk_threads);
      return cmd_rank(rank_args);
    }
    if (sc_eval->parsed()) return cmd_eval(ev_runs, ev_qrels, ev_out);
    if (sc_ablate->parsed()) {
      return cmd_ablate(ab_ckpt, ab_config, ab_docs, ab_queries, ab_vocab, ab_qid, ab_did, ab_out);
    }
    if (sc_report->parsed()) {
      if (rp_metric != "ndcg1" && rp_metric != "ndcg10") {
        throw DataError("bad --metric: " + rp_metric + " (want ndcg1|ndcg10)");
      }
      return cmd_report(rp_runs, rp_qrels, rp_queries, rp_train_docs, rp_train_queries,
                        rp_metric == "ndcg10", rp_sample, rp_seed, rp_out);
    }
    if (sc_sweep->parsed()) {
      set_threads(sw_threads);
      ExperimentConfig cfg = ExperimentConfig::parse_file(sw_config);
      if (sw_seed >= 0) cfg.train.seed = static_cast<uint64_t>(sw_seed);
      return cmd_sweep(std::move(cfg), sw_sizes, sw_protocol, sw_samples);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
