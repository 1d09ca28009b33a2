#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bioie/autodiff/adam.hpp"
#include "bioie/autodiff/rng.hpp"
#include "bioie/corpus/folds.hpp"
#include "bioie/evaluation/metrics.hpp"
#include "bioie/pipeline/model.hpp"

namespace bioie {

struct TrainPlan {
  std::size_t epochs = 100;
  std::size_t batch_size = 16;
  std::uint64_t seed = 0;
  std::size_t patience = 5;  // epochs without a dev macro-F gain; 0 disables early stopping
  double lr = 1e-3;
  double dev_fraction = 0.1;
  std::vector<std::string> frozen_prefixes;

  void validate() const;  // throws ConfigError
};

// Per-example train-mode predictions gathered while an epoch runs.
struct EpochTrace {
  std::vector<std::size_t> examples;
  std::vector<std::size_t> predictions;
};

// One pass over `train` in a seeded shuffled order: forward, loss, backward
// and an optimizer step per mini-batch. Returns the mean batch loss. Throws
// NumericError naming the batch when a loss is not finite.
double train_epoch(Model& model, const PreparedData& data, std::span<const std::size_t> train, Adam& optimizer,
                   Rng& rng, std::size_t batch_size, EpochTrace* trace = nullptr);

struct Evaluation {
  std::vector<std::size_t> examples;
  std::vector<std::size_t> predictions;
  std::vector<std::size_t> gold;
  std::vector<std::vector<double>> probabilities;
  double loss = 0.0;  // mean cross entropy
  EvalReport report;

  std::vector<Outcome> outcomes() const;
};

// Eval-mode scoring; no tape is recorded.
Evaluation evaluate(const Model& model, const PreparedData& data, std::span<const std::size_t> examples,
                    std::size_t batch_size = 64);

// `epoch<TAB>split<TAB>loss<TAB>P<TAB>R<TAB>F`, one line per epoch and split.
class MetricsLog {
 public:
  explicit MetricsLog(std::ostream& out) : out_(&out) {}
  void write(std::size_t epoch, std::string_view split, double loss, const PRF& prf);
  // Prepended to the split column, e.g. "fold3/".
  void set_prefix(std::string prefix) { prefix_ = std::move(prefix); }

 private:
  std::ostream* out_;
  std::string prefix_;
};

// Optimizer over the model's unfrozen parameters.
Adam make_optimizer(const Model& model, double lr);

// Training state that can be checkpointed and resumed between epochs.
class Trainer {
 public:
  // Applies plan.frozen_prefixes to the model before building the optimizer.
  Trainer(Model& model, const PreparedData& data, const TrainPlan& plan);

  double run_epoch(std::span<const std::size_t> train, EpochTrace* trace = nullptr);

  Model& model() { return *model_; }
  Adam& optimizer() { return optimizer_; }
  Rng& rng() { return rng_; }
  std::uint64_t epoch() const { return epoch_; }
  void set_epoch(std::uint64_t epoch) { epoch_ = epoch; }

 private:
  Model* model_;
  const PreparedData* data_;
  TrainPlan plan_;
  Adam optimizer_;
  Rng rng_;
  std::uint64_t epoch_ = 0;
};

struct FitResult {
  std::size_t epochs_run = 0;
  std::size_t best_epoch = 0;  // 1-based; 0 when there was no dev split
  double best_dev_f = 0.0;
  std::vector<double> train_loss;
  std::vector<double> dev_f;  // macro-F per epoch, percent
};

// Trains until plan.epochs or until dev macro-F stalls for plan.patience
// epochs, then restores the weights of the best dev epoch.
FitResult fit(Model& model, const PreparedData& data, std::span<const std::size_t> train,
              std::span<const std::size_t> dev, const TrainPlan& plan, MetricsLog* log = nullptr);

// ---- cross-validation

using ModelFactory = std::function<Model(std::uint64_t seed)>;

struct FoldResult {
  std::size_t fold = 0;
  FoldSplit split;
  FitResult fit;
  Evaluation test;
};

struct CrossValidationResult {
  std::vector<FoldResult> folds;
  Aggregate aggregate;  // mean and sample deviation of fold macro scores
  EvalReport pooled;    // all held-out predictions scored together
};

// Each fold trains a fresh model from factory(seed of the fold) on the
// remaining folds minus a dev carve-out, early-stops on dev, and is scored on
// the held-out fold. Log lines carry a "fold<k>/" split prefix.
CrossValidationResult run_cross_validation(const PreparedData& data, const ModelFactory& factory,
                                           const TrainPlan& plan, std::size_t k = 10, MetricsLog* log = nullptr);

// ---- grid search

struct GridPoint {
  ModelConfig config;
  double lr = 1e-3;
};

std::string to_text(const GridPoint& point);
std::uint64_t grid_digest(const GridPoint& point);

// lr ∈ {1e-3, 3e-4} × hidden ∈ {64, 128} × gcn_layers ∈ {1, 2} over `base`.
std::vector<GridPoint> default_grid(const ModelConfig& base);

struct LeaderboardEntry {
  GridPoint point;
  std::uint64_t digest = 0;
  double dev_f = 0.0;
  std::size_t epochs = 0;
  bool reused = false;  // same digest as an earlier point
};

struct GridResult {
  std::size_t best = 0;  // index into the leaderboard
  std::vector<LeaderboardEntry> leaderboard;
  std::size_t runs = 0;  // distinct trainings performed
};

using ConfiguredModelFactory = std::function<Model(const ModelConfig& config, std::uint64_t seed)>;

// Trains one model per distinct point on `train` and ranks by dev macro-F.
// Ties go to the earliest point.
GridResult grid_search(const PreparedData& data, std::span<const std::size_t> train, std::span<const std::size_t> dev,
                       std::span<const GridPoint> grid, const TrainPlan& plan,
                       const ConfiguredModelFactory& factory);

}  // namespace bioie
