#include "commands.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "bioie/corpus/candidates.hpp"
#include "bioie/corpus/dependencies.hpp"
#include "bioie/corpus/readers.hpp"
#include "bioie/corpus/synth.hpp"
#include "bioie/corpus/vocabulary.hpp"
#include "bioie/error.hpp"
#include "bioie/evaluation/metrics.hpp"
#include "bioie/log.hpp"
#include "bioie/pipeline/model.hpp"
#include "bioie/textgraph/graphs.hpp"
#include "bioie/training/checkpoint.hpp"
#include "bioie/training/trainer.hpp"
#include "bioie/training/transfer.hpp"

namespace bioie::cli {

namespace fs = std::filesystem;

namespace {

constexpr std::array<std::string_view, 9> kCommands{"ingest", "build-graphs", "train",   "cv",     "ablate",
                                                     "transfer", "eval",      "predict", "synth"};

constexpr std::array<std::string_view, 9> kDescriptions{
    "parse a corpus and write instance and vocabulary tables",
    "build the semantic, syntactic and sequence word graphs",
    "fit on a holdout split and save a checkpoint",
    "k-fold cross-validation with per-fold and aggregate scores",
    "train every ablation variant and emit the comparison table",
    "warm-start fine-tuning in both directions between two corpora",
    "score a checkpoint on a corpus",
    "write per-pair predictions from a checkpoint",
    "generate a synthetic pathology record corpus",
};

// ---------------------------------------------------------------- data

Dataset read_corpus(const RunConfig& c, const std::string& kind, const std::string& input) {
  if (input.empty()) throw ConfigError("input is required for dataset " + kind);
  Dataset ds;
  if (kind == "cdr") {
    ds = parse_pubtator(fs::path(input));
  } else if (kind == "chemprot") {
    if (c.entities.empty() || c.relations.empty()) throw ConfigError("chemprot needs entities and relations files");
    ds = parse_chemprot(fs::path(input), fs::path(c.entities), fs::path(c.relations));
  } else if (kind == "pathology") {
    ds = parse_pathology_records(fs::path(input));
    if (c.subtask != "all") {
      std::string known;
      for (auto& [variable, sub] : split_subtasks(ds)) {
        if (to_string(variable) == c.subtask) {
          ds = std::move(sub);
          known.clear();
          break;
        }
        known += (known.empty() ? "" : ", ") + std::string(to_string(variable));
      }
      if (!known.empty()) throw ConfigError("subtask '" + c.subtask + "' is not all or one of " + known);
    }
  } else {
    throw ConfigError("unknown dataset kind '" + kind + "'");
  }

  for (auto& doc : ds.documents) {
    const fs::path parse = c.parses.empty() ? fs::path() : fs::path(c.parses) / (doc.id + ".conllu");
    if (!parse.empty() && fs::exists(parse)) {
      doc = attach_dependencies(doc, parse);
    } else if (c.dependency_fallback == "linear") {
      doc = attach_linear_chain(doc);
    }
  }
  ds = normalize_dataset(ds, {c.min_tokens, c.max_tokens});
  if (c.negative_ratio > 0.0) {
    Rng rng(c.seed);
    ds.instances = subsample_negatives(ds.instances, c.negative_ratio, rng);
  }
  if (ds.instances.empty()) throw Error("dataset has no relation instances");
  return ds;
}

Dataset read_corpus(const RunConfig& c) { return read_corpus(c, c.dataset, c.input); }

EmbeddingTable embeddings_for(const RunConfig& c, const Vocabulary& vocab) {
  if (c.vectors.empty()) return random_embeddings(vocab, c.model.d_w, c.seed);
  EmbeddingTable t = load_pretrained_vectors(fs::path(c.vectors), vocab, c.model.d_w, c.seed);
  if (t.coverage < 0.5) {
    std::ostringstream msg;
    msg << "pretrained vectors cover only " << std::fixed << std::setprecision(1) << 100.0 * t.coverage
        << "% of the vocabulary";
    warn(msg.str());
  }
  return t;
}

struct Workspace {
  Dataset dataset;
  Vocabulary vocab;
  EmbeddingTable table;
  CorpusGraphs graphs;
  PreparedData data;
};

Workspace workspace(const RunConfig& c) {
  Workspace w;
  w.dataset = read_corpus(c);
  w.vocab = Vocabulary::build(w.dataset.documents, c.min_count);
  w.table = embeddings_for(c, w.vocab);
  w.graphs = build_corpus_graphs(w.dataset.documents, w.vocab, w.table, {c.theta, c.window});
  w.data = prepare_data(w.dataset, w.vocab, &w.graphs);
  return w;
}

// Encodes a dataset with a checkpoint's vocabulary and word table.
struct CheckpointWorkspace {
  Checkpoint checkpoint;
  Dataset dataset;
  Vocabulary vocab;
  CorpusGraphs graphs;
  PreparedData data;
};

CheckpointWorkspace checkpoint_workspace(const RunConfig& c) {
  if (c.checkpoint.empty()) throw ConfigError("checkpoint is required");
  CheckpointWorkspace w;
  w.checkpoint = load_checkpoint(fs::path(c.checkpoint));
  w.dataset = read_corpus(c);
  if (w.dataset.labels->labels != w.checkpoint.labels) {
    throw ConfigError("dataset labels differ from the checkpoint's");
  }
  w.vocab = w.checkpoint.vocabulary();
  w.graphs = build_corpus_graphs(w.dataset.documents, w.vocab, w.checkpoint.embeddings(), {c.theta, c.window});
  w.data = prepare_data(w.dataset, w.vocab, &w.graphs);
  return w;
}

ModelConfig model_for(const RunConfig& c, const PreparedData& data) {
  ModelConfig m = c.model;
  const std::size_t labels = data.labels->size();
  if (m.label_count == 0) {
    m.label_count = labels;
  } else if (m.label_count != labels) {
    throw ConfigError("label_count = " + std::to_string(m.label_count) + " but the dataset has " +
                      std::to_string(labels) + " labels");
  }
  m.validate();
  return m;
}

TrainPlan plan_of(const RunConfig& c, bool with_freeze = true) {
  TrainPlan p;
  p.epochs = c.epochs;
  p.batch_size = c.batch_size;
  p.seed = c.seed;
  p.patience = c.patience;
  p.lr = c.lr;
  p.dev_fraction = c.dev_fraction;
  if (with_freeze) p.frozen_prefixes = c.freeze_prefixes();
  p.validate();
  return p;
}

FoldSplit holdout(const RunConfig& c, std::size_t n) { return make_folds(n, c.folds, c.seed).split(0, c.dev_fraction); }

// ---------------------------------------------------------------- output

std::ofstream open_output(const RunConfig& c, const std::string& name) {
  std::ofstream out(fs::path(c.output) / name);
  if (!out) throw Error("cannot write " + (fs::path(c.output) / name).string());
  return out;
}

void with_intervals(EvalReport& report, const Evaluation& ev, const LabelSet& labels, const RunConfig& c) {
  if (c.bootstrap > 0) attach_confidence_intervals(report, ev.outcomes(), labels, c.bootstrap, c.seed);
}

void write_scores(const RunConfig& c, const EvalReport& report) {
  auto out = open_output(c, "scores.tsv");
  write_metric_lines(out, report);
}

std::string fixed(double v, int digits = 1) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

// ---------------------------------------------------------------- commands

void cmd_ingest(const RunConfig& c, std::ostream& out) {
  const Dataset ds = read_corpus(c);
  const Vocabulary vocab = Vocabulary::build(ds.documents, c.min_count);
  vocab.save(fs::path(c.output) / "vocab.tsv");
  std::vector<std::size_t> per_label(ds.labels->size(), 0);
  for (const auto& inst : ds.instances) ++per_label.at(inst.label);
  auto f = open_output(c, "ingest.tsv");
  f << "documents\t" << ds.documents.size() << "\ninstances\t" << ds.instances.size() << '\n';
  for (std::size_t i = 0; i < per_label.size(); ++i) f << "label:" << ds.labels->labels[i] << '\t' << per_label[i] << '\n';
  f << "skipped_cross_sentence\t" << ds.stats.skipped_cross_sentence << "\nskipped_out_of_scope\t"
    << ds.stats.skipped_out_of_scope << "\nvocabulary\t" << vocab.size() << '\n';
  out << "ingested " << ds.documents.size() << " documents, " << ds.instances.size() << " instances, vocabulary "
      << vocab.size() << '\n';
}

void cmd_build_graphs(const RunConfig& c, std::ostream& out) {
  const Dataset ds = read_corpus(c);
  const Vocabulary vocab = Vocabulary::build(ds.documents, c.min_count);
  const EmbeddingTable table = embeddings_for(c, vocab);
  const CorpusGraphs graphs = build_corpus_graphs(ds.documents, vocab, table, {c.theta, c.window});
  auto f = open_output(c, "graphs.tsv");
  write_graph_dump(f, graphs, vocab);
  out << "graphs: semantic " << graphs.semantic.size() << ", syntactic " << graphs.syntactic.size() << ", sequence "
      << graphs.sequence.size() << " word pairs\n";
}

void cmd_train(const RunConfig& c, std::ostream& out) {
  const Workspace w = workspace(c);
  const FoldSplit split = holdout(c, w.data.examples.size());
  ModelConfig config = make_variant(model_for(c, w.data), parse_variant(c.variant));
  TrainPlan plan = plan_of(c);

  if (c.grid == "default") {
    const auto grid = default_grid(config);
    auto factory = [&](const ModelConfig& m, std::uint64_t seed) { return Model(m, w.vocab, w.table, seed); };
    TrainPlan grid_plan = plan;
    grid_plan.frozen_prefixes.clear();
    const GridResult g = grid_search(w.data, split.train, split.dev, grid, grid_plan, factory);
    auto f = open_output(c, "grid.tsv");
    f << "index\tdigest\tlr\thidden\tgcn_layers\tdev_f\tepochs\treused\n";
    for (std::size_t i = 0; i < g.leaderboard.size(); ++i) {
      const auto& e = g.leaderboard[i];
      f << i << '\t' << std::hex << e.digest << std::dec << '\t' << e.point.lr << '\t' << e.point.config.hidden << '\t'
        << e.point.config.gcn_layers << '\t' << fixed(e.dev_f, 4) << '\t' << e.epochs << '\t' << e.reused << '\n';
    }
    config = g.leaderboard[g.best].point.config;
    plan.lr = g.leaderboard[g.best].point.lr;
    out << "grid: " << g.runs << " runs, best point " << g.best << " (dev F " << fixed(g.leaderboard[g.best].dev_f)
        << ")\n";
  }

  Model model(config, w.vocab, w.table, c.seed);
  auto metrics = open_output(c, "metrics.tsv");
  MetricsLog log(metrics);
  const FitResult fr = fit(model, w.data, split.train, split.dev, plan, &log);
  const Evaluation ev = evaluate(model, w.data, split.test);
  EvalReport report = ev.report;
  with_intervals(report, ev, *w.data.labels, c);
  model.parameters().unfreeze_all();
  save_checkpoint(fs::path(c.output) / "model.ckpt", capture_checkpoint(model, w.vocab, *w.data.labels));
  write_scores(c, report);
  const std::vector<TableRow> rows{{std::string(table_row_label(parse_variant(c.variant))), report.macro,
                                    report.macro_f_ci}};
  const std::string table = report_table(rows);
  open_output(c, "report.txt") << table;
  out << table << "epochs " << fr.epochs_run << ", best dev epoch " << fr.best_epoch << '\n';
}

void cmd_cv(const RunConfig& c, std::ostream& out) {
  const Workspace w = workspace(c);
  const ModelConfig config = make_variant(model_for(c, w.data), parse_variant(c.variant));
  auto factory = [&](std::uint64_t seed) { return Model(config, w.vocab, w.table, seed); };
  auto metrics = open_output(c, "metrics.tsv");
  MetricsLog log(metrics);
  const CrossValidationResult cv = run_cross_validation(w.data, factory, plan_of(c), c.folds, &log);

  std::vector<Outcome> pooled;
  auto folds = open_output(c, "folds.tsv");
  folds << "fold\tP\tR\tF\tepochs\tbest_epoch\n";
  std::vector<TableRow> rows;
  for (const auto& f : cv.folds) {
    const auto& m = f.test.report.macro;
    folds << f.fold << '\t' << fixed(m.p, 4) << '\t' << fixed(m.r, 4) << '\t' << fixed(m.f, 4) << '\t'
          << f.fit.epochs_run << '\t' << f.fit.best_epoch << '\n';
    rows.push_back({"Fold " + std::to_string(f.fold + 1), m, std::nullopt});
    const auto o = f.test.outcomes();
    pooled.insert(pooled.end(), o.begin(), o.end());
  }
  EvalReport report = cv.pooled;
  if (c.bootstrap > 0) attach_confidence_intervals(report, pooled, *w.data.labels, c.bootstrap, c.seed);
  rows.push_back({"Mean over folds", cv.aggregate.mean, std::nullopt});
  rows.push_back({"Pooled", report.macro, report.macro_f_ci});
  write_scores(c, report);
  std::string table = report_table(rows, "Run");
  table += "Std over folds: P " + fixed(cv.aggregate.stddev.p) + ", R " + fixed(cv.aggregate.stddev.r) + ", F " +
           fixed(cv.aggregate.stddev.f) + "\n";
  open_output(c, "report.txt") << table;
  out << table;
}

void cmd_ablate(const RunConfig& c, std::ostream& out) {
  const Workspace w = workspace(c);
  const FoldSplit split = holdout(c, w.data.examples.size());
  const ModelConfig base = model_for(c, w.data);
  const TrainPlan plan = plan_of(c, false);
  std::vector<TableRow> rows;
  auto tsv = open_output(c, "ablation.tsv");
  tsv << "variant\tP\tR\tF\tCI_low\tCI_high\tparameters\n";
  for (AblationVariant v : all_variants()) {
    Model model(make_variant(base, v), w.vocab, w.table, c.seed);
    fit(model, w.data, split.train, split.dev, plan);
    const Evaluation ev = evaluate(model, w.data, split.test);
    EvalReport report = ev.report;
    with_intervals(report, ev, *w.data.labels, c);
    rows.push_back({std::string(table_row_label(v)), report.macro, report.macro_f_ci});
    tsv << to_string(v) << '\t' << fixed(report.macro.p, 4) << '\t' << fixed(report.macro.r, 4) << '\t'
        << fixed(report.macro.f, 4) << '\t'
        << (report.macro_f_ci ? fixed(report.macro_f_ci->low, 4) + '\t' + fixed(report.macro_f_ci->high, 4)
                              : std::string("NA\tNA"))
        << '\t' << model.count_parameters() << '\n';
  }
  const std::string table = report_table(rows);
  open_output(c, "ablation.txt") << table;
  out << table;
}

void cmd_transfer(const RunConfig& c, std::ostream& out) {
  const std::string target_kind = c.target_dataset.empty() ? c.dataset : c.target_dataset;
  if (target_kind == "chemprot") throw ConfigError("transfer targets must be single-file corpora (cdr or pathology)");
  const Dataset a = read_corpus(c);
  const Dataset b = read_corpus(c, target_kind, c.target_input);
  std::vector<Document> all = a.documents;
  all.insert(all.end(), b.documents.begin(), b.documents.end());
  const Vocabulary vocab = Vocabulary::build(all, c.min_count);
  const EmbeddingTable table = embeddings_for(c, vocab);

  TransferProtocolOptions options;
  options.model = c.model;
  options.model.label_count = 2;
  options.source_plan = plan_of(c, false);
  options.target_plan = plan_of(c);
  options.graphs = {c.theta, c.window};
  options.test_folds = c.folds;
  const auto runs = transfer_protocol({c.source_name, &a}, {c.target_name, &b}, vocab, table, options);

  std::vector<TableRow> rows;
  auto tsv = open_output(c, "transfer.tsv");
  tsv << "direction\tP\tR\tF\tCI_low\tCI_high\tcopied_labels\n";
  for (const auto& r : runs) {
    EvalReport report = r.result.test.report;
    const auto& target_labels = r.name.rfind(c.source_name + "-", 0) == 0 ? *b.labels : *a.labels;
    with_intervals(report, r.result.test, target_labels, c);
    rows.push_back({r.name, report.macro, report.macro_f_ci});
    tsv << r.name << '\t' << fixed(report.macro.p, 4) << '\t' << fixed(report.macro.r, 4) << '\t'
        << fixed(report.macro.f, 4) << '\t'
        << (report.macro_f_ci ? fixed(report.macro_f_ci->low, 4) + '\t' + fixed(report.macro_f_ci->high, 4)
                              : std::string("NA\tNA"))
        << '\t' << r.result.copied_labels << '\n';
  }
  const std::string text = report_table(rows, "Transfer");
  open_output(c, "transfer.txt") << text;
  out << text;
}

void cmd_eval(const RunConfig& c, std::ostream& out) {
  const CheckpointWorkspace w = checkpoint_workspace(c);
  const Model model = model_from_checkpoint(w.checkpoint);
  std::vector<std::size_t> all(w.data.examples.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const Evaluation ev = evaluate(model, w.data, all);
  EvalReport report = ev.report;
  with_intervals(report, ev, *w.data.labels, c);
  write_scores(c, report);
  const std::string table = report_table(std::vector<TableRow>{{"Checkpoint", report.macro, report.macro_f_ci}});
  open_output(c, "report.txt") << table;
  out << table;
}

void cmd_predict(const RunConfig& c, std::ostream& out) {
  const CheckpointWorkspace w = checkpoint_workspace(c);
  const Model model = model_from_checkpoint(w.checkpoint);
  std::vector<std::size_t> order(w.data.examples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  const auto& inst = w.dataset.instances;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return std::tie(inst[x].doc_index, inst[x].head, inst[x].tail) <
           std::tie(inst[y].doc_index, inst[y].head, inst[y].tail);
  });
  const Evaluation ev = evaluate(model, w.data, order);
  auto f = open_output(c, "predictions.tsv");
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto& r = inst[order[k]];
    const Document& doc = w.dataset.documents[r.doc_index];
    const std::size_t label = ev.predictions[k];
    char prob[32];
    std::snprintf(prob, sizeof prob, "%.6f", ev.probabilities[k][label]);
    f << doc.id << '\t' << doc.mentions[r.head].id << '\t' << doc.mentions[r.tail].id << '\t'
      << w.data.labels->labels[label] << '\t' << prob << '\n';
  }
  out << "predicted " << order.size() << " instances\n";
}

void cmd_synth(const RunConfig& c, std::ostream& out) {
  SynthSpec spec;
  if (c.synth_shape == "tfah") {
    spec = tfah_shape(c.seed);
  } else if (c.synth_shape == "tcga") {
    spec = tcga_shape(c.seed);
  } else {
    count_for(spec.positives, EntityKind::kSize) = c.synth_count;
    count_for(spec.decoys, EntityKind::kSize) = c.synth_count;
    spec.one_item_per_document = true;
    spec.min_tokens = 10;
    spec.max_tokens = 30;
    spec.seed = c.seed;
  }
  const SynthCorpus corpus = synth_corpus(spec);
  open_output(c, "corpus.jsonl") << corpus.records;
  std::size_t positives = 0, decoys = 0;
  for (auto n : corpus.report.positives) positives += n;
  for (auto n : corpus.report.decoys) decoys += n;
  out << "synthesized " << corpus.report.documents << " documents, " << positives << " linked values, " << decoys
      << " decoys\n";
}

std::string one_line(std::string text) {
  std::replace(text.begin(), text.end(), '\n', ' ');
  return text;
}

}  // namespace

std::span<const std::string_view> command_names() { return kCommands; }

void run_command(std::string_view command, const RunConfig& config, std::ostream& out) {
  fs::create_directories(config.output);
  write_config(fs::path(config.output) / "config.cfg", config);
  if (command == "ingest") cmd_ingest(config, out);
  else if (command == "build-graphs") cmd_build_graphs(config, out);
  else if (command == "train") cmd_train(config, out);
  else if (command == "cv") cmd_cv(config, out);
  else if (command == "ablate") cmd_ablate(config, out);
  else if (command == "transfer") cmd_transfer(config, out);
  else if (command == "eval") cmd_eval(config, out);
  else if (command == "predict") cmd_predict(config, out);
  else if (command == "synth") cmd_synth(config, out);
  else throw ConfigError("unknown command " + std::string(command));
}

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Document-level biomedical relation extraction"};
  app.name("bioie");
  app.require_subcommand(1);
  std::string config_path;
  std::map<std::string, std::string> values;
  std::vector<std::pair<CLI::Option*, std::string>> options;
  for (std::size_t c = 0; c < kCommands.size(); ++c) {
    CLI::App* sub = app.add_subcommand(std::string(kCommands[c]), std::string(kDescriptions[c]));
    sub->add_option("--config", config_path, "key = value run configuration file");
    for (const auto& key : run_config_keys()) {
      options.emplace_back(sub->add_option("--" + key, values[key]), key);
    }
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << one_line(e.what()) << '\n';
    err << "usage: bioie <command> [--config FILE] [--key value ...]\n";
    err << "commands:";
    for (auto name : kCommands) err << ' ' << name;
    err << '\n';
    return 2;
  }

  std::map<std::string, std::string> flags;
  for (const auto& [opt, key] : options) {
    if (opt->count() > 0) flags[key] = values[key];
  }
  const std::string command = app.get_subcommands().front()->get_name();
  try {
    const RunConfig config = resolve_config(
        config_path.empty() ? std::nullopt : std::optional<fs::path>(config_path), flags, std::getenv("BIOIE_SEED"));
    run_command(command, config, out);
  } catch (const std::exception& e) {
    err << "error: " << one_line(e.what()) << '\n';
    return 1;
  }
  return 0;
}

}  // namespace bioie::cli
