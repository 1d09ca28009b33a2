#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "doctest.h"

#include "bioie/autodiff/rng.hpp"
#include "bioie/error.hpp"
#include "bioie/evaluation/metrics.hpp"

using namespace bioie;

namespace {

LabelSet three() { return LabelSet{"toy", {"null", "A", "B"}, 0}; }

std::vector<std::string> lines_of(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::string> out;
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST_CASE("confusion counts") {
  const auto labels = three();
  std::vector<std::size_t> gold{0, 1, 2, 1, 2, 0};
  auto perfect = confusion_counts(gold, gold, labels);
  for (const auto& c : perfect.per_class) {
    CHECK(c.fp == 0);
    CHECK(c.fn == 0);
  }

  std::vector<std::size_t> positives(5, 1), nulls(5, 0);
  auto missed = confusion_counts(nulls, positives, labels);
  CHECK(missed.per_class[1].tp == 0);
  CHECK(missed.per_class[1].fn == 5);

  // One A predicted as B.
  std::vector<std::size_t> pred{0, 2, 2, 1, 2, 0};
  auto counts = confusion_counts(pred, gold, labels);
  std::map<std::size_t, ClassCounts> tally;
  for (std::size_t k = 0; k < 3; ++k) {
    for (std::size_t i = 0; i < gold.size(); ++i) {
      tally[k].tp += pred[i] == k && gold[i] == k;
      tally[k].fp += pred[i] == k && gold[i] != k;
      tally[k].fn += pred[i] != k && gold[i] == k;
    }
    CHECK(counts.per_class[k] == tally[k]);
  }
  CHECK(counts.per_class[1] == ClassCounts{1, 0, 1});
  CHECK(counts.per_class[2] == ClassCounts{2, 1, 0});

  std::vector<std::size_t> bad{3};
  std::vector<std::size_t> one{0};
  CHECK_THROWS_AS(confusion_counts(bad, one, labels), Error);
  CHECK_THROWS_AS(confusion_counts(one, gold, labels), Error);
}

TEST_CASE("macro prf rules") {
  ConfusionCounts c;
  c.labels = {"null", "A"};
  c.per_class = {{0, 0, 0}, {1, 0, 0}};
  auto r = macro_prf(c);
  CHECK(r.macro.p == 100.0);
  CHECK(r.macro.r == 100.0);
  CHECK(r.macro.f == 100.0);

  c.per_class = {{0, 0, 0}, {0, 3, 2}};
  r = macro_prf(c);
  CHECK(r.macro.p == 0.0);
  CHECK(r.macro.r == 0.0);
  CHECK(r.macro.f == 0.0);
  CHECK(r.classes.size() == 1);

  CHECK(std::abs(harmonic_f(86.9, 83.7) - 85.3) <= 0.05);
  CHECK(std::abs(harmonic_f(61.5, 72.3) - 66.4) <= 0.15);
  CHECK(harmonic_f(0.0, 0.0) == 0.0);
}

TEST_CASE("degenerate single-label data") {
  const auto labels = three();
  std::vector<std::size_t> all_a(10, 1);
  auto r = evaluate_predictions(all_a, all_a, labels);
  CHECK(r.classes[0].prf.r == 100.0);
  CHECK(r.classes[1].prf.p == 0.0);
  CHECK(r.classes[1].prf.f == 0.0);
}

TEST_CASE("harmonic mean bounds and order invariance") {
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const double p = rng.uniform(0.01, 100.0), r = rng.uniform(0.01, 100.0);
    const double f = harmonic_f(p, r);
    CHECK(f == harmonic_f(r, p));
    CHECK(f >= std::min(p, r) - 1e-12);
    CHECK(f <= std::max(p, r) + 1e-12);
  }
  const auto labels = three();
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::size_t> pred(40), gold(40);
    for (std::size_t i = 0; i < 40; ++i) {
      pred[i] = rng.index(3);
      gold[i] = rng.index(3);
    }
    auto a = evaluate_predictions(pred, gold, labels);
    std::vector<std::size_t> order(40);
    for (std::size_t i = 0; i < 40; ++i) order[i] = i;
    rng.shuffle(order);
    std::vector<std::size_t> pp, gp;
    for (auto i : order) {
      pp.push_back(pred[i]);
      gp.push_back(gold[i]);
    }
    auto b = evaluate_predictions(pp, gp, labels);
    CHECK(a.macro.f == b.macro.f);
    CHECK(a.macro.p == b.macro.p);
  }
}

TEST_CASE("bootstrap intervals") {
  std::vector<Outcome> same(30, Outcome{1, 1});
  auto accuracy = [](std::span<const Outcome> s) {
    double hits = 0;
    for (const auto& o : s) hits += o.prediction == o.gold;
    return hits / static_cast<double>(s.size());
  };
  auto flat = bootstrap_ci(same, accuracy, 1000, 3);
  CHECK(flat.low == 1.0);
  CHECK(flat.high == 1.0);

  Rng rng(4);
  std::vector<Outcome> mixed(200);
  for (auto& o : mixed) o = {rng.index(2), rng.index(2)};
  auto a = bootstrap_ci(mixed, accuracy, 1000, 9);
  auto b = bootstrap_ci(mixed, accuracy, 1000, 9);
  CHECK(a.low == b.low);
  CHECK(a.high == b.high);
  const double point = accuracy(mixed);
  CHECK(a.low <= point);
  CHECK(point <= a.high);

  // Direct enumeration of the same 1000 draws.
  Rng draws(9);
  std::vector<double> values;
  for (int k = 0; k < 1000; ++k) {
    double hits = 0;
    for (std::size_t i = 0; i < mixed.size(); ++i) {
      const auto& o = mixed[draws.index(mixed.size())];
      hits += o.prediction == o.gold;
    }
    values.push_back(hits / 200.0);
  }
  std::sort(values.begin(), values.end());
  const double lo_pos = 0.025 * 999, hi_pos = 0.975 * 999;
  auto at = [&](double pos) {
    const auto i = static_cast<std::size_t>(pos);
    return values[i] + (pos - static_cast<double>(i)) * (values[i + 1] - values[i]);
  };
  CHECK(a.low == doctest::Approx(at(lo_pos)).epsilon(1e-12));
  CHECK(a.high == doctest::Approx(at(hi_pos)).epsilon(1e-12));

  const LabelSet binary{"b", {"null", "yes"}, 0};
  std::vector<std::size_t> pred, gold;
  for (const auto& o : mixed) {
    pred.push_back(o.prediction);
    gold.push_back(o.gold);
  }
  auto report = evaluate_predictions(pred, gold, binary);
  attach_confidence_intervals(report, mixed, binary, 300, 2);
  REQUIRE(report.macro_f_ci);
  CHECK(report.macro_f_ci->low <= report.macro.f);
  CHECK(report.macro.f <= report.macro_f_ci->high);
  CHECK_THROWS_AS(bootstrap_ci({}, accuracy), Error);
}

TEST_CASE("report table layout") {
  std::vector<TableRow> one{{"Proposed Method", {86.94, 83.66, 85.27}, {}}};
  auto t1 = lines_of(report_table(one));
  REQUIRE(t1.size() == 3);
  CHECK(t1[2].find("86.9") != std::string::npos);
  CHECK(t1[2].find("83.7") != std::string::npos);
  CHECK(t1[2].find("85.3") != std::string::npos);

  std::vector<TableRow> twins{{"x", {1, 2, 3}, {}}, {"x", {1, 2, 3}, {}}};
  auto t2 = lines_of(report_table(twins));
  CHECK(t2[2] == t2[3]);

  std::vector<TableRow> ablation;
  for (const char* label : {"Proposed Method", "- BioBert", "- position", "- position - BioBert",
                            "- Multi-head Attention", "- Multi-head Attention + Single-head attention", "- GCN"}) {
    ablation.push_back({label, {50, 50, 50}, Interval{40, 60}});
  }
  auto t3 = lines_of(report_table(ablation));
  REQUIRE(t3.size() == 9);
  CHECK(t3[2].rfind("Proposed Method", 0) == 0);
  CHECK(t3[8].rfind("- GCN", 0) == 0);
  CHECK(t3[0].find("95% CI") != std::string::npos);
  for (std::size_t i = 2; i < t3.size(); ++i) CHECK(t3[i].size() == t3[0].size());
}

TEST_CASE("metric lines and aggregates") {
  const auto labels = three();
  std::vector<std::size_t> pred{1, 2, 2, 0}, gold{1, 2, 1, 0};
  auto r = evaluate_predictions(pred, gold, labels);
  std::ostringstream out;
  write_metric_lines(out, r);
  auto lines = lines_of(out.str());
  REQUIRE(lines.size() == 3);
  CHECK(lines[0].rfind("A\t", 0) == 0);
  CHECK(lines[2].rfind("macro\t", 0) == 0);
  CHECK(std::count(lines[2].begin(), lines[2].end(), '\t') == 5);

  std::vector<EvalReport> folds(3);
  folds[0].macro = {10, 20, 30};
  folds[1].macro = {20, 30, 40};
  folds[2].macro = {30, 40, 50};
  auto agg = aggregate_reports(folds);
  CHECK(agg.mean.f == doctest::Approx(40.0));
  CHECK(agg.stddev.f == doctest::Approx(10.0));

  folds[0].instances = 1;
  folds[1].instances = 1;
  folds[2].instances = 2;
  auto summary = summarize_subtasks(folds);
  CHECK(summary.unweighted.f == doctest::Approx(40.0));
  CHECK(summary.weighted.f == doctest::Approx(42.5));
}
