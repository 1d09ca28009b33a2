#include "bioie/training/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "bioie/error.hpp"
#include "bioie/log.hpp"
#include "bioie/training/checkpoint.hpp"

namespace bioie {

void TrainPlan::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be at least 1");
  if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw ConfigError("lr must be a finite non-negative number");
  if (!(dev_fraction >= 0.0 && dev_fraction < 1.0)) throw ConfigError("dev_fraction must lie in [0, 1)");
}

namespace {

std::size_t argmax_row(const Tensor& logits, std::size_t r) {
  const std::size_t c = logits.cols();
  std::size_t best = 0;
  for (std::size_t j = 1; j < c; ++j) {
    if (logits.at(r, j) > logits.at(r, best)) best = j;
  }
  return best;
}

void zero_frozen_grads(Model& model) {
  for (const auto& p : model.parameters().entries()) {
    if (p.frozen && p.value.has_grad()) {
      Tensor t = p.value;
      t.zero_grad();
    }
  }
}

std::vector<std::vector<double>> snapshot(const Model& model) {
  std::vector<std::vector<double>> out;
  for (const auto& p : model.parameters().entries()) out.emplace_back(p.value.values().begin(), p.value.values().end());
  return out;
}

void restore_snapshot(Model& model, const std::vector<std::vector<double>>& values) {
  const auto& entries = model.parameters().entries();
  for (std::size_t i = 0; i < entries.size(); ++i) {
    Tensor t = entries[i].value;
    std::copy(values[i].begin(), values[i].end(), t.mutable_values().begin());
  }
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  return seed ^ (0x9e3779b97f4a7c15ULL * (salt + 1));
}

}  // namespace

double train_epoch(Model& model, const PreparedData& data, std::span<const std::size_t> train, Adam& optimizer,
                   Rng& rng, std::size_t batch_size, EpochTrace* trace) {
  if (train.empty()) throw Error("train_epoch: no training instances");
  if (batch_size == 0) throw ConfigError("batch_size must be at least 1");
  std::vector<std::size_t> order(train.begin(), train.end());
  rng.shuffle(order);
  const std::size_t batches = (order.size() + batch_size - 1) / batch_size;
  double total = 0.0;
  for (std::size_t b = 0; b < batches; ++b) {
    const std::size_t begin = b * batch_size;
    const std::span<const std::size_t> batch(order.data() + begin, std::min(batch_size, order.size() - begin));
    Tape tape;
    Tensor logits = model.forward(tape, data, batch, ops::Mode::kTrain, rng);
    const auto targets = data.labels_of(batch);
    Tensor loss = ops::cross_entropy(tape, logits, targets);
    const double value = loss.item();
    if (!std::isfinite(value)) {
      throw NumericError("non-finite loss " + std::to_string(value) + " in batch " + std::to_string(b + 1) + " of " +
                         std::to_string(batches) + " (first example " + std::to_string(batch.front()) + ")");
    }
    tape.backward(loss);
    zero_frozen_grads(model);
    if (!optimizer.params().empty()) optimizer.step();
    total += value;
    if (trace) {
      for (std::size_t r = 0; r < batch.size(); ++r) {
        trace->examples.push_back(batch[r]);
        trace->predictions.push_back(argmax_row(logits, r));
      }
    }
  }
  return total / static_cast<double>(batches);
}

std::vector<Outcome> Evaluation::outcomes() const {
  std::vector<Outcome> out;
  for (std::size_t i = 0; i < predictions.size(); ++i) out.push_back({predictions[i], gold[i]});
  return out;
}

Evaluation evaluate(const Model& model, const PreparedData& data, std::span<const std::size_t> examples,
                    std::size_t batch_size) {
  if (examples.empty()) throw Error("evaluate: no instances");
  Evaluation ev;
  Rng unused(0);
  double loss = 0.0;
  for (std::size_t begin = 0; begin < examples.size(); begin += batch_size) {
    const auto batch = examples.subspan(begin, std::min(batch_size, examples.size() - begin));
    Tape tape;
    NoGradGuard guard(tape);
    Tensor logits = model.forward(tape, data, batch, ops::Mode::kEval, unused);
    auto probs = probabilities(logits);
    for (std::size_t r = 0; r < batch.size(); ++r) {
      const std::size_t gold = data.examples.at(batch[r]).label;
      ev.examples.push_back(batch[r]);
      ev.predictions.push_back(argmax_row(logits, r));
      ev.gold.push_back(gold);
      loss -= std::log(std::max(probs[r][gold], 1e-300));
      ev.probabilities.push_back(std::move(probs[r]));
    }
  }
  ev.loss = loss / static_cast<double>(examples.size());
  ev.report = evaluate_predictions(ev.predictions, ev.gold, *data.labels);
  return ev;
}

void MetricsLog::write(std::size_t epoch, std::string_view split, double loss, const PRF& prf) {
  *out_ << epoch << '\t' << prefix_ << split << '\t' << std::fixed << std::setprecision(6) << loss << '\t'
        << std::setprecision(4) << prf.p << '\t' << prf.r << '\t' << prf.f << '\n';
  out_->unsetf(std::ios::floatfield);
  out_->flush();
}

Adam make_optimizer(const Model& model, double lr) {
  AdamConfig config;
  config.lr = lr;
  return Adam(model.parameters().trainable(), config);
}

namespace {

Model& apply_freeze(Model& model, const TrainPlan& plan) {
  plan.validate();
  if (!plan.frozen_prefixes.empty()) model.parameters().freeze(plan.frozen_prefixes);
  return model;
}

}  // namespace

Trainer::Trainer(Model& model, const PreparedData& data, const TrainPlan& plan)
    : model_(&apply_freeze(model, plan)),
      data_(&data),
      plan_(plan),
      optimizer_(make_optimizer(model, plan.lr)),
      rng_(plan.seed) {}

double Trainer::run_epoch(std::span<const std::size_t> train, EpochTrace* trace) {
  const double loss = train_epoch(*model_, *data_, train, optimizer_, rng_, plan_.batch_size, trace);
  ++epoch_;
  return loss;
}

FitResult fit(Model& model, const PreparedData& data, std::span<const std::size_t> train,
              std::span<const std::size_t> dev, const TrainPlan& plan, MetricsLog* log) {
  Trainer trainer(model, data, plan);
  FitResult result;
  std::vector<std::vector<double>> best;
  std::size_t stale = 0;
  for (std::size_t epoch = 1; epoch <= plan.epochs; ++epoch) {
    EpochTrace trace;
    double loss = 0.0;
    try {
      loss = trainer.run_epoch(train, log ? &trace : nullptr);
    } catch (const NumericError& e) {
      throw NumericError("epoch " + std::to_string(epoch) + ": " + e.what());
    }
    result.train_loss.push_back(loss);
    result.epochs_run = epoch;
    if (log) {
      std::vector<std::size_t> gold;
      for (auto i : trace.examples) gold.push_back(data.examples[i].label);
      log->write(epoch, "train", loss, evaluate_predictions(trace.predictions, gold, *data.labels).macro);
    }
    if (dev.empty()) continue;
    const Evaluation ev = evaluate(model, data, dev);
    if (log) log->write(epoch, "dev", ev.loss, ev.report.macro);
    result.dev_f.push_back(ev.report.macro.f);
    if (result.best_epoch == 0 || ev.report.macro.f > result.best_dev_f) {
      result.best_epoch = epoch;
      result.best_dev_f = ev.report.macro.f;
      best = snapshot(model);
      stale = 0;
    } else if (plan.patience > 0 && ++stale >= plan.patience) {
      break;
    }
  }
  if (!best.empty()) restore_snapshot(model, best);
  return result;
}

CrossValidationResult run_cross_validation(const PreparedData& data, const ModelFactory& factory,
                                           const TrainPlan& plan, std::size_t k, MetricsLog* log) {
  plan.validate();
  const FoldPlan folds = make_folds(data.examples.size(), k, plan.seed);
  CrossValidationResult result;
  std::vector<std::size_t> pooled_pred, pooled_gold;
  for (std::size_t fold = 0; fold < k; ++fold) {
    FoldResult fr;
    fr.fold = fold;
    fr.split = folds.split(fold, plan.dev_fraction);
    const std::set<std::size_t> test(fr.split.test.begin(), fr.split.test.end());
    for (auto i : fr.split.train) {
      if (test.count(i)) throw Error("fold " + std::to_string(fold) + " leaks instance " + std::to_string(i));
    }
    for (auto i : fr.split.dev) {
      if (test.count(i)) throw Error("fold " + std::to_string(fold) + " leaks instance " + std::to_string(i));
    }
    const auto gold = data.labels_of(fr.split.test);
    if (std::all_of(gold.begin(), gold.end(), [&](std::size_t g) { return g == data.labels->null_index; })) {
      warn("fold " + std::to_string(fold) + " has no positive test instances");
    }
    TrainPlan fold_plan = plan;
    fold_plan.seed = mix_seed(plan.seed, fold);
    Model model = factory(fold_plan.seed);
    if (log) log->set_prefix("fold" + std::to_string(fold) + "/");
    fr.fit = fit(model, data, fr.split.train, fr.split.dev, fold_plan, log);
    fr.test = evaluate(model, data, fr.split.test);
    pooled_pred.insert(pooled_pred.end(), fr.test.predictions.begin(), fr.test.predictions.end());
    pooled_gold.insert(pooled_gold.end(), fr.test.gold.begin(), fr.test.gold.end());
    result.folds.push_back(std::move(fr));
  }
  if (log) log->set_prefix("");
  std::vector<EvalReport> reports;
  for (const auto& f : result.folds) reports.push_back(f.test.report);
  result.aggregate = aggregate_reports(reports);
  result.pooled = evaluate_predictions(pooled_pred, pooled_gold, *data.labels);
  return result;
}

std::string to_text(const GridPoint& point) {
  std::ostringstream out;
  out << to_text(point.config) << "lr = " << std::setprecision(17) << point.lr << '\n';
  return out.str();
}

std::uint64_t grid_digest(const GridPoint& point) { return fnv1a64(to_text(point)); }

std::vector<GridPoint> default_grid(const ModelConfig& base) {
  std::vector<GridPoint> grid;
  for (double lr : {1e-3, 3e-4}) {
    for (std::size_t hidden : {64, 128}) {
      for (std::size_t layers : {1, 2}) {
        GridPoint p{base, lr};
        p.config.hidden = hidden;
        p.config.gcn_layers = layers;
        grid.push_back(p);
      }
    }
  }
  return grid;
}

GridResult grid_search(const PreparedData& data, std::span<const std::size_t> train, std::span<const std::size_t> dev,
                       std::span<const GridPoint> grid, const TrainPlan& plan,
                       const ConfiguredModelFactory& factory) {
  if (grid.empty()) throw ConfigError("grid_search: empty grid");
  if (dev.empty()) throw ConfigError("grid_search: no dev instances to score");
  GridResult result;
  std::map<std::uint64_t, std::size_t> seen;  // digest → leaderboard index
  for (const auto& point : grid) {
    if (!std::isfinite(point.lr)) throw ConfigError("grid_search: non-finite learning rate");
    LeaderboardEntry entry{point, grid_digest(point)};
    if (auto it = seen.find(entry.digest); it != seen.end()) {
      entry.dev_f = result.leaderboard[it->second].dev_f;
      entry.epochs = result.leaderboard[it->second].epochs;
      entry.reused = true;
    } else {
      point.config.validate();
      TrainPlan p = plan;
      p.lr = point.lr;
      Model model = factory(point.config, plan.seed);
      const FitResult fr = fit(model, data, train, dev, p);
      entry.dev_f = fr.best_dev_f;
      entry.epochs = fr.epochs_run;
      seen.emplace(entry.digest, result.leaderboard.size());
      ++result.runs;
    }
    if (result.leaderboard.empty() || entry.dev_f > result.leaderboard[result.best].dev_f) {
      result.best = result.leaderboard.size();
    }
    result.leaderboard.push_back(std::move(entry));
  }
  return result;
}

}  // namespace bioie
