#include "arblink/cli.hpp"

#include <omp.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "arblink/io.hpp"
#include "arblink/knn.hpp"
#include "arblink/metrics.hpp"
#include "arblink/partition.hpp"
#include "arblink/rng.hpp"
#include "arblink/synth.hpp"
#include "arblink/training.hpp"

namespace arblink {

namespace {

namespace fs = std::filesystem;

struct CommonOpts {
  uint64_t seed = 0;
  int threads = 0;
  bool normalize = false;
};

void apply_threads(const CommonOpts& c) {
  if (c.threads > 0) omp_set_num_threads(c.threads);
}

Corpus load(const std::string& dir, const CommonOpts& c) {
  return load_corpus(CorpusPaths::in_dir(dir), c.normalize);
}

std::vector<PredictionRow> cluster_predictions(const Clustering& clusters,
                                               const LinkResult& links) {
  std::map<uint32_t, uint32_t> mention_cluster;
  for (uint32_t ci = 0; ci < clusters.clusters.size(); ++ci)
    for (NodeRef n : clusters.clusters[ci])
      if (n.is_mention()) mention_cluster[n.id] = ci;
  std::vector<PredictionRow> rows;
  rows.reserve(links.assignments.size());
  for (const auto& [m, e] : links.assignments)
    rows.push_back({m, e, mention_cluster.at(m)});
  return rows;
}

uint64_t fnv1a(const std::string& s) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// Seeded standard normal scaled by 1/sqrt(dim), the from-scratch
// free-embedding initialization.
void reinit_store(EmbeddingStore& store, uint64_t seed) {
  uint32_t dim = store.dim();
  double scale = 1.0 / std::sqrt(double(dim));
  for (uint32_t m = 0; m < store.mention_count(); ++m) {
    auto row = store.mention_row(m);
    for (uint32_t d = 0; d < dim; ++d)
      row[d] = float(scale * rng::normal(seed, 0x1417000000000000ull | m, d));
  }
  for (uint32_t e = 0; e < store.entity_count(); ++e) {
    auto row = store.entity_row(e);
    for (uint32_t d = 0; d < dim; ++d)
      row[d] = float(scale * rng::normal(seed, 0x1418000000000000ull | e, d));
  }
}

struct InferenceOutput {
  WeightedDigraph graph;
  PartitionResult partition;
  LinkResult links;
  std::vector<PredictionRow> rows;
};

InferenceOutput run_inference(const Corpus& corpus, uint32_t k, double lambda,
                              Mode mode) {
  InferenceOutput out;
  out.graph = build_inference_graph(corpus.store, {k});
  out.partition = partition_graph(out.graph, {lambda, mode});
  out.links = link_decisions(out.partition.clusters);
  out.rows = cluster_predictions(out.partition.clusters, out.links);
  return out;
}

EvalReport evaluate_rows(const Corpus& corpus,
                         const std::vector<PredictionRow>& rows,
                         uint32_t recall_k,
                         const std::vector<bool>& seen_entities) {
  std::vector<PredEntry> pred(corpus.n_mentions());
  std::vector<uint32_t> pred_labels(corpus.n_mentions(), 0);
  std::vector<char> covered(corpus.n_mentions(), 0);
  for (const PredictionRow& r : rows) {
    pred[r.mention] = {true, r.entity};
    pred_labels[r.mention] = r.cluster;
    covered[r.mention] = 1;
  }
  std::vector<std::optional<GoldRef>> gold(corpus.n_mentions());
  for (uint32_t m = 0; m < corpus.n_mentions(); ++m)
    gold[m] = corpus.mentions[m].gold;

  EvalReport rep;
  LinkingAccuracy acc = linking_accuracy(pred, gold, seen_entities);
  rep.overall_acc = acc.overall;
  rep.seen_acc = acc.seen;
  rep.unseen_acc = acc.unseen;
  rep.kb_acc = acc.kb;
  rep.nil_acc = acc.nil;
  rep.n_scored = acc.n_scored;
  rep.n_seen = acc.n_seen;
  rep.n_unseen = acc.n_unseen;
  rep.n_kb = acc.n_kb;
  rep.n_nil = acc.n_nil;

  if (corpus.n_entities() > 0) {
    rep.recall_k = std::min<uint32_t>(recall_k, corpus.n_entities());
    rep.recall = recall_at_k(corpus.store, corpus.gold_kb_entity(), recall_k);
  }

  for (uint32_t m = 0; m < corpus.n_mentions(); ++m)
    if (!covered[m])
      throw DataError("cluster metrics need a prediction for every mention; "
                      "missing " + corpus.mention_names[m]);
  std::vector<uint32_t> gold_labels = corpus.gold_partition_labels();
  rep.nmi = nmi(gold_labels, pred_labels);
  rep.ari = ari(gold_labels, pred_labels);
  return rep;
}

std::vector<bool> load_seen(const Corpus& corpus, const std::string& path) {
  std::vector<bool> seen(corpus.n_entities(), path.empty());
  if (path.empty()) return seen;  // default: every KB entity counts as seen
  std::map<std::string, uint32_t> index;
  for (uint32_t e = 0; e < corpus.n_entities(); ++e)
    index[corpus.entity_names[e]] = e;
  std::ifstream in(path);
  if (!in) throw DataError("cannot open seen-entities file: " + path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto it = index.find(line);
    if (it == index.end())
      throw DataError("seen-entities file names unknown entity '" + line + "'");
    seen[it->second] = true;
  }
  return seen;
}

std::vector<double> default_lambdas(const WeightedDigraph& g) {
  std::vector<double> weights;
  weights.reserve(g.edges.size());
  for (const Edge& e : g.edges) weights.push_back(e.weight);
  std::sort(weights.begin(), weights.end());
  std::vector<double> out;
  for (int q = 0; q <= 10; ++q) {
    size_t idx = std::min(weights.size() - 1, weights.size() * q / 10);
    out.push_back(weights[idx]);
  }
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

int run(int argc, const char* const* argv) {
  CLI::App app{"arborescence-based entity linking and discovery"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config");

  CommonOpts common;
  app.add_option("--seed", common.seed, "global random seed");
  app.add_option("--threads", common.threads,
                 "worker threads (results are thread-count invariant)");
  app.add_flag("--normalize", common.normalize,
               "L2-normalize embedding rows at load");

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic corpus");
  SynthConfig synth_cfg;
  std::string out_dir;
  synth_cmd->add_option("--out", out_dir, "output directory")->required();
  synth_cmd->add_option("--entities", synth_cfg.n_entities, "entity count");
  synth_cmd->add_option("--mentions-per-entity", synth_cfg.mentions_per_entity,
                        "mentions per entity");
  synth_cmd->add_option("--dim", synth_cfg.dim, "embedding dimension");
  synth_cmd->add_option("--center-spread", synth_cfg.center_spread,
                        "entity center sphere radius");
  synth_cmd->add_option("--noise-sigma", synth_cfg.noise_sigma,
                        "mention noise stddev");
  synth_cmd->add_option("--holdout", synth_cfg.holdout_fraction,
                        "fraction of entities held out of the KB");

  // build-graph
  auto* graph_cmd = app.add_subcommand("build-graph", "write the k-NN inference graph");
  std::string corpus_dir, graph_out;
  uint32_t k = 1;
  graph_cmd->add_option("--corpus", corpus_dir, "corpus directory")->required();
  graph_cmd->add_option("--k", k, "mention neighbors per mention");
  graph_cmd->add_option("--out", graph_out, "output edge file")->required();

  // link / discover
  auto add_link_opts = [&](CLI::App* cmd, auto& opts) {
    cmd->add_option("--corpus", opts.corpus, "corpus directory")->required();
    cmd->add_option("--k", opts.k, "mention neighbors per mention");
    cmd->add_option("--lambda", opts.lambda, "dissimilarity threshold")->required();
    cmd->add_option("--mode", opts.mode, "directed|undirected");
    cmd->add_option("--out", opts.out, "predictions file")->required();
    cmd->add_option("--trace", opts.trace, "partition trace file");
    cmd->add_option("--graph-out", opts.graph_out, "also write the pruned graph");
  };
  struct LinkOpts {
    std::string corpus, out, trace, graph_out, mode = "directed";
    uint32_t k = 1;
    double lambda = 0.0;
    std::string clusters_out;
  } link_opts, discover_opts;
  auto* link_cmd = app.add_subcommand("link", "cluster and link mentions");
  add_link_opts(link_cmd, link_opts);
  auto* discover_cmd =
      app.add_subcommand("discover", "link plus discovered-cluster listing");
  add_link_opts(discover_cmd, discover_opts);
  discover_cmd->add_option("--clusters-out", discover_opts.clusters_out,
                           "discovered cluster listing")->required();

  // train
  auto* train_cmd = app.add_subcommand("train", "train embeddings");
  TrainConfig train_cfg;
  std::string train_corpus, ckpt_out, negatives = "hard", init = "keep";
  train_cmd->add_option("--corpus", train_corpus, "corpus directory")->required();
  train_cmd->add_option("--batch-size", train_cfg.batch_size, "mini-batch size");
  train_cmd->add_option("--neg-k", train_cfg.neg_k, "negatives per mention (even)");
  train_cmd->add_option("--epochs", train_cfg.epochs, "training epochs");
  train_cmd->add_option("--lr", train_cfg.learning_rate, "learning rate");
  train_cmd->add_option("--negatives", negatives,
                        "hard|random negative sources");
  train_cmd->add_option("--init", init,
                        "keep: start from stored vectors; normal: seeded "
                        "normal / sqrt(dim)");
  train_cmd->add_option("--out", ckpt_out, "checkpoint path")->required();

  // evaluate
  auto* eval_cmd = app.add_subcommand("evaluate", "score a predictions file");
  std::string eval_corpus, pred_path, report_out, seen_path;
  uint32_t recall_k = 64;
  eval_cmd->add_option("--corpus", eval_corpus, "corpus directory")->required();
  eval_cmd->add_option("--pred", pred_path, "predictions file")->required();
  eval_cmd->add_option("--recall-k", recall_k, "recall cutoff");
  eval_cmd->add_option("--seen", seen_path,
                       "file of entity ids seen at training (default: all)");
  eval_cmd->add_option("--out", report_out, "report path")->required();

  // sweep
  auto* sweep_cmd =
      app.add_subcommand("sweep", "grid-search k and lambda, report the best");
  std::string sweep_corpus, sweep_out, sweep_mode = "both",
              objective = "linking";
  std::vector<uint32_t> k_list{1, 2, 4, 8};
  std::vector<double> lambda_list;
  sweep_cmd->add_option("--corpus", sweep_corpus, "corpus directory")->required();
  sweep_cmd->add_option("--k-list", k_list, "k grid");
  sweep_cmd->add_option("--lambda-list", lambda_list,
                        "lambda grid (default: weight quantiles)");
  sweep_cmd->add_option("--mode", sweep_mode, "directed|undirected|both");
  sweep_cmd->add_option("--objective", objective, "linking|discovery");
  sweep_cmd->add_option("--out", sweep_out, "result table")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;  // usage errors exit 2; --help exits 0
  }
  apply_threads(common);

  if (synth_cmd->parsed()) {
    synth_cfg.seed = common.seed;
    Corpus corpus = generate(synth_cfg);
    fs::create_directories(out_dir);
    save_corpus(corpus, CorpusPaths::in_dir(out_dir));
    std::printf("wrote %u mentions, %u KB entities (%zu held out) to %s\n",
                corpus.n_mentions(), corpus.n_entities(),
                corpus.holdout_names.size(), out_dir.c_str());
    return 0;
  }

  if (graph_cmd->parsed()) {
    Corpus corpus = load(corpus_dir, common);
    WeightedDigraph g = build_inference_graph(corpus.store, {k});
    write_graph(corpus, g, graph_out);
    std::printf("wrote %zu edges over %zu nodes to %s\n", g.edges.size(),
                g.nodes.size(), graph_out.c_str());
    return 0;
  }

  auto run_link = [&](const LinkOpts& opts, bool discover) {
    Corpus corpus = load(opts.corpus, common);
    InferenceOutput out = run_inference(corpus, opts.k, opts.lambda,
                                        mode_from_string(opts.mode));
    write_predictions(corpus, out.rows, opts.out);
    if (!opts.trace.empty()) write_trace(out.partition.trace, opts.trace);
    if (!opts.graph_out.empty())
      write_graph(corpus, out.partition.pruned, opts.graph_out);
    auto nil_count = std::count_if(out.rows.begin(), out.rows.end(),
                                   [](const PredictionRow& r) { return !r.entity; });
    std::printf("%zu mentions linked, %lld NIL, %zu clusters\n",
                out.rows.size(), static_cast<long long>(nil_count),
                out.partition.clusters.clusters.size());
    if (discover) {
      auto found = discovered_clusters(out.partition.clusters);
      write_discovered(corpus, found, opts.clusters_out);
      std::printf("%zu discovered clusters\n", found.size());
    }
    return 0;
  };
  if (link_cmd->parsed()) return run_link(link_opts, false);
  if (discover_cmd->parsed()) return run_link(discover_opts, true);

  if (train_cmd->parsed()) {
    Corpus corpus = load(train_corpus, common);
    train_cfg.seed = common.seed;
    if (negatives == "hard") {
      train_cfg.negatives = NegativeMode::Hard;
    } else if (negatives == "random") {
      train_cfg.negatives = NegativeMode::RandomSource;
    } else {
      throw ConfigError("--negatives must be hard|random");
    }
    if (init == "normal") {
      reinit_store(corpus.store, common.seed);
    } else if (init != "keep") {
      throw ConfigError("--init must be keep|normal");
    }
    TrainingData data = TrainingData::from_corpus(corpus);
    TrainResult result = train(data, train_cfg, corpus.store);
    write_store(corpus.store, ckpt_out);
    std::ostringstream cfg_str;
    cfg_str << train_cfg.batch_size << ':' << train_cfg.neg_k << ':'
            << train_cfg.epochs << ':' << train_cfg.learning_rate << ':'
            << train_cfg.seed << ':' << int(train_cfg.negatives);
    write_checkpoint_meta(ckpt_out + ".meta.json", train_cfg.epochs,
                          fnv1a(cfg_str.str()), result.epoch_loss);
    std::printf("trained %zu epochs, final loss %.6f, checkpoint %s\n",
                result.epoch_loss.size(), result.epoch_loss.back(),
                ckpt_out.c_str());
    return 0;
  }

  if (eval_cmd->parsed()) {
    Corpus corpus = load(eval_corpus, common);
    std::vector<PredictionRow> rows = read_predictions(corpus, pred_path);
    EvalReport rep = evaluate_rows(corpus, rows, recall_k,
                                   load_seen(corpus, seen_path));
    write_report(rep, report_out);
    std::printf("overall %.4f  kb %.4f  recall@%u %.4f  nmi %.4f  ari %.4f\n",
                rep.overall_acc, rep.kb_acc, rep.recall_k, rep.recall, rep.nmi,
                rep.ari);
    return 0;
  }

  if (sweep_cmd->parsed()) {
    Corpus corpus = load(sweep_corpus, common);
    std::vector<Mode> modes;
    if (sweep_mode == "both") {
      modes = {Mode::Directed, Mode::Undirected};
    } else {
      modes = {mode_from_string(sweep_mode)};
    }
    std::vector<bool> seen(corpus.n_entities(), true);
    std::ofstream table(sweep_out);
    if (!table) throw DataError("cannot open " + sweep_out);
    table << "mode\tk\tlambda\toverall_acc\tkb_acc\tnmi\tari\tscore\n";
    double best_score = -kInf;
    std::string best_desc;
    for (uint32_t kk : k_list) {
      WeightedDigraph g = build_inference_graph(corpus.store, {kk});
      std::vector<double> lambdas =
          lambda_list.empty() ? default_lambdas(g) : lambda_list;
      for (Mode mode : modes) {
        for (double lambda : lambdas) {
          PartitionResult part = partition_graph(g, {lambda, mode});
          LinkResult links = link_decisions(part.clusters);
          auto rows = cluster_predictions(part.clusters, links);
          EvalReport rep = evaluate_rows(corpus, rows, 1, seen);
          double score = objective == "discovery"
                             ? 0.5 * (rep.nmi + rep.ari)
                             : rep.overall_acc;
          char line[256];
          std::snprintf(line, sizeof(line),
                        "%s\t%u\t%.17g\t%.6f\t%.6f\t%.6f\t%.6f\t%.6f",
                        to_string(mode), kk, lambda, rep.overall_acc,
                        rep.kb_acc, rep.nmi, rep.ari, score);
          table << line << '\n';
          if (score > best_score) {
            best_score = score;
            best_desc = line;
          }
        }
      }
    }
    table << "# best\t" << best_desc << '\n';
    std::printf("best (%s): %s\n", objective.c_str(), best_desc.c_str());
    return 0;
  }

  return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  try {
    return run(argc, argv);
  } catch (const ArbError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    switch (e.kind()) {
      case ErrorKind::Config: return 2;
      case ErrorKind::Divergence: return 4;
      default: return 3;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}

}  // namespace arblink
