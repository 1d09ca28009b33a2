#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bioie/corpus/document.hpp"

namespace bioie {

struct ClassCounts {
  std::size_t tp = 0, fp = 0, fn = 0;

  bool operator==(const ClassCounts&) const = default;
};

struct ConfusionCounts {
  std::vector<std::string> labels;
  std::size_t null_index = 0;
  std::vector<ClassCounts> per_class;  // indexed like labels
  std::size_t instances = 0;
};

// Throws Error on length mismatch or a label outside the set.
ConfusionCounts confusion_counts(std::span<const std::size_t> predictions, std::span<const std::size_t> gold,
                                 const LabelSet& labels);

// Percent values in [0, 100].
struct PRF {
  double p = 0.0, r = 0.0, f = 0.0;
};

// 2PR/(P+R), 0 when P + R is 0.
double harmonic_f(double p, double r);
PRF prf_from_counts(const ClassCounts& c);

struct Interval {
  double low = 0.0, high = 0.0;
};

struct ClassReport {
  std::string label;
  ClassCounts counts;
  PRF prf;
  std::optional<Interval> f_ci;
};

struct EvalReport {
  std::vector<ClassReport> classes;  // evaluated (non-null) classes
  PRF macro;                         // unweighted mean over evaluated classes
  std::optional<Interval> macro_f_ci;
  std::size_t instances = 0;
};

EvalReport macro_prf(const ConfusionCounts& counts);

// Convenience: counts then macro_prf.
EvalReport evaluate_predictions(std::span<const std::size_t> predictions, std::span<const std::size_t> gold,
                                const LabelSet& labels);

struct Outcome {
  std::size_t prediction = 0;
  std::size_t gold = 0;
};

using OutcomeMetric = std::function<double(std::span<const Outcome>)>;

// Percentile bootstrap: resample with replacement, recompute, take the
// 2.5th and 97.5th percentiles (linear interpolation between order stats).
Interval bootstrap_ci(std::span<const Outcome> outcomes, const OutcomeMetric& metric, std::size_t resamples = 1000,
                      std::uint64_t seed = 0, double level = 0.95);

// Attaches per-class and macro F intervals to a report.
void attach_confidence_intervals(EvalReport& report, std::span<const Outcome> outcomes, const LabelSet& labels,
                                 std::size_t resamples = 1000, std::uint64_t seed = 0);

// Mean and sample standard deviation of fold macro scores.
struct Aggregate {
  PRF mean;
  PRF stddev;
  std::size_t runs = 0;
};

Aggregate aggregate_reports(std::span<const EvalReport> reports);

// Unweighted mean of macro scores and an instance-weighted mean.
struct SubtaskSummary {
  PRF unweighted;
  PRF weighted;
};

SubtaskSummary summarize_subtasks(std::span<const EvalReport> reports);

struct TableRow {
  std::string label;
  PRF prf;
  std::optional<Interval> f_ci;
};

// Aligned text table with one-decimal percentages.
std::string report_table(std::span<const TableRow> rows, const std::string& first_column = "Model");

// `class<TAB>P<TAB>R<TAB>F<TAB>CI_low<TAB>CI_high` per class plus a "macro" line.
void write_metric_lines(std::ostream& out, const EvalReport& report);

}  // namespace bioie
