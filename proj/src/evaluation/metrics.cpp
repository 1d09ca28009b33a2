#include "bioie/evaluation/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "bioie/autodiff/rng.hpp"
#include "bioie/error.hpp"

namespace bioie {

ConfusionCounts confusion_counts(std::span<const std::size_t> predictions, std::span<const std::size_t> gold,
                                 const LabelSet& labels) {
  if (predictions.size() != gold.size()) {
    throw Error("confusion_counts: " + std::to_string(predictions.size()) + " predictions for " +
                std::to_string(gold.size()) + " gold labels");
  }
  ConfusionCounts out;
  out.labels = labels.labels;
  out.null_index = labels.null_index;
  out.per_class.resize(labels.size());
  out.instances = gold.size();
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const std::size_t p = predictions[i], g = gold[i];
    if (p >= labels.size() || g >= labels.size()) {
      throw Error("confusion_counts: label " + std::to_string(std::max(p, g)) + " outside " + labels.name);
    }
    if (p == g) {
      ++out.per_class[g].tp;
    } else {
      ++out.per_class[p].fp;
      ++out.per_class[g].fn;
    }
  }
  return out;
}

double harmonic_f(double p, double r) { return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r); }

PRF prf_from_counts(const ClassCounts& c) {
  PRF out;
  out.p = c.tp + c.fp == 0 ? 0.0 : 100.0 * static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  out.r = c.tp + c.fn == 0 ? 0.0 : 100.0 * static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  out.f = harmonic_f(out.p, out.r);
  return out;
}

EvalReport macro_prf(const ConfusionCounts& counts) {
  EvalReport report;
  report.instances = counts.instances;
  for (std::size_t k = 0; k < counts.per_class.size(); ++k) {
    if (k == counts.null_index) continue;
    report.classes.push_back({counts.labels[k], counts.per_class[k], prf_from_counts(counts.per_class[k]), {}});
  }
  if (!report.classes.empty()) {
    for (const auto& c : report.classes) {
      report.macro.p += c.prf.p;
      report.macro.r += c.prf.r;
      report.macro.f += c.prf.f;
    }
    const auto n = static_cast<double>(report.classes.size());
    report.macro.p /= n;
    report.macro.r /= n;
    report.macro.f /= n;
  }
  return report;
}

EvalReport evaluate_predictions(std::span<const std::size_t> predictions, std::span<const std::size_t> gold,
                                const LabelSet& labels) {
  return macro_prf(confusion_counts(predictions, gold, labels));
}

namespace {

double percentile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

Interval bootstrap_ci(std::span<const Outcome> outcomes, const OutcomeMetric& metric, std::size_t resamples,
                      std::uint64_t seed, double level) {
  if (outcomes.empty()) throw Error("bootstrap_ci: no outcomes");
  if (resamples == 0) throw Error("bootstrap_ci: resamples must be positive");
  Rng rng(seed);
  std::vector<double> values;
  values.reserve(resamples);
  std::vector<Outcome> sample(outcomes.size());
  for (std::size_t b = 0; b < resamples; ++b) {
    for (auto& s : sample) s = outcomes[rng.index(outcomes.size())];
    values.push_back(metric(sample));
  }
  std::sort(values.begin(), values.end());
  const double tail = (1.0 - level) / 2.0;
  return {percentile(values, tail), percentile(values, 1.0 - tail)};
}

void attach_confidence_intervals(EvalReport& report, std::span<const Outcome> outcomes, const LabelSet& labels,
                                 std::size_t resamples, std::uint64_t seed) {
  auto report_of = [&labels](std::span<const Outcome> sample) {
    std::vector<std::size_t> pred, gold;
    for (const auto& o : sample) {
      pred.push_back(o.prediction);
      gold.push_back(o.gold);
    }
    return evaluate_predictions(pred, gold, labels);
  };
  report.macro_f_ci = bootstrap_ci(
      outcomes, [&](std::span<const Outcome> s) { return report_of(s).macro.f; }, resamples, seed);
  for (std::size_t k = 0; k < report.classes.size(); ++k) {
    report.classes[k].f_ci = bootstrap_ci(
        outcomes, [&](std::span<const Outcome> s) { return report_of(s).classes[k].prf.f; }, resamples, seed);
  }
}

Aggregate aggregate_reports(std::span<const EvalReport> reports) {
  Aggregate out;
  out.runs = reports.size();
  if (reports.empty()) return out;
  const auto n = static_cast<double>(reports.size());
  for (const auto& r : reports) {
    out.mean.p += r.macro.p / n;
    out.mean.r += r.macro.r / n;
    out.mean.f += r.macro.f / n;
  }
  if (reports.size() > 1) {
    for (const auto& r : reports) {
      out.stddev.p += (r.macro.p - out.mean.p) * (r.macro.p - out.mean.p);
      out.stddev.r += (r.macro.r - out.mean.r) * (r.macro.r - out.mean.r);
      out.stddev.f += (r.macro.f - out.mean.f) * (r.macro.f - out.mean.f);
    }
    out.stddev.p = std::sqrt(out.stddev.p / (n - 1));
    out.stddev.r = std::sqrt(out.stddev.r / (n - 1));
    out.stddev.f = std::sqrt(out.stddev.f / (n - 1));
  }
  return out;
}

SubtaskSummary summarize_subtasks(std::span<const EvalReport> reports) {
  SubtaskSummary out;
  if (reports.empty()) return out;
  double total = 0.0;
  for (const auto& r : reports) total += static_cast<double>(r.instances);
  const auto n = static_cast<double>(reports.size());
  for (const auto& r : reports) {
    out.unweighted.p += r.macro.p / n;
    out.unweighted.r += r.macro.r / n;
    out.unweighted.f += r.macro.f / n;
    if (total > 0.0) {
      const double w = static_cast<double>(r.instances) / total;
      out.weighted.p += w * r.macro.p;
      out.weighted.r += w * r.macro.r;
      out.weighted.f += w * r.macro.f;
    }
  }
  return out;
}

namespace {

std::string one_decimal(double v) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(1) << v;
  return s.str();
}

}  // namespace

std::string report_table(std::span<const TableRow> rows, const std::string& first_column) {
  const bool with_ci = std::any_of(rows.begin(), rows.end(), [](const TableRow& r) { return r.f_ci.has_value(); });
  std::vector<std::vector<std::string>> cells;
  cells.push_back({first_column, "P", "R", "F"});
  if (with_ci) cells.back().push_back("95% CI (F)");
  for (const auto& r : rows) {
    cells.push_back({r.label, one_decimal(r.prf.p), one_decimal(r.prf.r), one_decimal(r.prf.f)});
    if (with_ci) {
      cells.back().push_back(r.f_ci ? "[" + one_decimal(r.f_ci->low) + ", " + one_decimal(r.f_ci->high) + "]" : "-");
    }
  }
  std::vector<std::size_t> width(cells[0].size(), 0);
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::ostringstream out;
  auto emit = [&](const std::vector<std::string>& row) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c == 0) {
        out << std::left << std::setw(static_cast<int>(width[c])) << row[c];
      } else {
        out << "  " << std::right << std::setw(static_cast<int>(width[c])) << row[c];
      }
    }
    out << '\n';
  };
  emit(cells[0]);
  std::size_t total = 0;
  for (std::size_t w : width) total += w;
  out << std::string(total + 2 * (width.size() - 1), '-') << '\n';
  for (std::size_t i = 1; i < cells.size(); ++i) emit(cells[i]);
  return out.str();
}

void write_metric_lines(std::ostream& out, const EvalReport& report) {
  auto line = [&out](const std::string& name, const PRF& prf, const std::optional<Interval>& ci) {
    out << name << '\t' << std::fixed << std::setprecision(4) << prf.p << '\t' << prf.r << '\t' << prf.f << '\t';
    if (ci) {
      out << ci->low << '\t' << ci->high;
    } else {
      out << "NA\tNA";
    }
    out << '\n';
    out.unsetf(std::ios::floatfield);
  };
  for (const auto& c : report.classes) line(c.label, c.prf, c.f_ci);
  line("macro", report.macro, report.macro_f_ci);
}

}  // namespace bioie
