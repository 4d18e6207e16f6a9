#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "agentjudge/errors.hpp"
#include "agentjudge/metrics.hpp"
#include "test_support.hpp"

using namespace agentjudge;
using namespace agentjudge::testing;

namespace {

struct Labeled {
  std::vector<TaskRecord> records;
  std::vector<Prediction> predictions;
};

// Builds tasks whose human labels and predictions give the requested counts.
Labeled with_counts(int tp, int fp, int tn, int fn) {
  Labeled out;
  int id = 0;
  auto add = [&](int n, bool label, Answer predicted) {
    for (int i = 0; i < n; ++i) {
      TaskRecord t;
      t.task_id = "t" + std::to_string(id++);
      t.description = "d";
      t.human_label = label;
      out.records.push_back(t);
      out.predictions.push_back({t.task_id, predicted});
    }
  };
  add(tp, true, Answer::kYes);
  add(fp, false, Answer::kYes);
  add(tn, false, Answer::kNo);
  add(fn, true, Answer::kNo);
  return out;
}

}  // namespace

TEST(Alignment, PublishedAccuracyCells) {
  auto d = with_counts(14, 9, 12, 7);
  auto m = score_alignment(d.predictions, d.records);
  EXPECT_EQ(m.total(), 42);
  EXPECT_EQ(format_percent(m.accuracy), "61.90%");
  EXPECT_EQ(format_percent(m.recall), "66.67%");
  EXPECT_EQ(format_percent(m.specificity), "57.14%");
  EXPECT_EQ(format_percent(m.precision), "60.87%");

  EXPECT_EQ(format_percent(AlignmentMetrics::from_counts(12, 9, 12, 9).accuracy), "57.14%");
  EXPECT_EQ(format_percent(AlignmentMetrics::from_counts(14, 5, 14, 5).accuracy), "73.68%");
  EXPECT_EQ(format_percent(AlignmentMetrics::from_counts(12, 7, 12, 7).accuracy), "63.16%");
}

TEST(Alignment, PerfectAgreement) {
  auto d = with_counts(5, 0, 4, 0);
  auto m = score_alignment(d.predictions, d.records);
  EXPECT_DOUBLE_EQ(m.accuracy, 1.0);
  EXPECT_DOUBLE_EQ(m.precision, 1.0);
  EXPECT_DOUBLE_EQ(m.recall, 1.0);
  EXPECT_DOUBLE_EQ(m.specificity, 1.0);
}

TEST(Alignment, RandomSetsAreConsistentAndOrderFree) {
  std::mt19937 rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + rng() % 60;
    Labeled d;
    for (int i = 0; i < n; ++i) {
      TaskRecord t;
      t.task_id = "r" + std::to_string(i);
      t.description = "d";
      t.human_label = rng() % 2 == 0;
      d.records.push_back(t);
      d.predictions.push_back({t.task_id, rng() % 2 == 0 ? Answer::kYes : Answer::kNo});
    }
    auto m = score_alignment(d.predictions, d.records);
    EXPECT_EQ(m.total(), n);
    for (double r : {m.accuracy, m.precision, m.recall, m.specificity}) {
      EXPECT_GE(r, 0.0);
      EXPECT_LE(r, 1.0);
    }
    std::shuffle(d.predictions.begin(), d.predictions.end(), rng);
    auto again = score_alignment(d.predictions, d.records);
    EXPECT_EQ(again.tp, m.tp);
    EXPECT_EQ(again.fp, m.fp);
    EXPECT_EQ(again.tn, m.tn);
    EXPECT_EQ(again.fn, m.fn);
  }
}

TEST(Alignment, InvalidInputs) {
  auto d = with_counts(1, 1, 0, 0);
  auto unknown = d.predictions;
  unknown.push_back({"nope", Answer::kYes});
  EXPECT_THROW(score_alignment(unknown, d.records), PreconditionError);
  auto twice = d.predictions;
  twice.push_back(twice[0]);
  EXPECT_THROW(score_alignment(twice, d.records), PreconditionError);
  auto unlabeled = d.records;
  unlabeled[0].human_label.reset();
  EXPECT_THROW(score_alignment(d.predictions, unlabeled), PreconditionError);
}

TEST(MetricsTable, RenderingBoldsTheUniqueBest) {
  MetricsTable table;
  table["DevAI"][kBaselineMethod] = AlignmentMetrics::from_counts(14, 9, 12, 7);
  table["DevAI"][kJudgeMethod] = AlignmentMetrics::from_counts(14, 5, 14, 5);
  const auto md = render_metrics_table(table);
  EXPECT_EQ(md,
            "| Metric | DevAI: LLM-as-a-Judge | DevAI: Judge |\n"
            "|---|---:|---:|\n"
            "| Accuracy | 61.90% | **73.68%** |\n"
            "| Precision | 60.87% | **73.68%** |\n"
            "| Recall | 66.67% | **73.68%** |\n"
            "| Specificity | 57.14% | **73.68%** |\n");
}

TEST(MetricsTable, TiesAndSingleMethodsAreUnmarked) {
  MetricsTable table;
  table["A"][kJudgeMethod] = AlignmentMetrics::from_counts(1, 1, 1, 1);
  EXPECT_EQ(render_metrics_table(table).find("**"), std::string::npos);
  table["A"][kBaselineMethod] = AlignmentMetrics::from_counts(1, 1, 1, 1);
  EXPECT_EQ(render_metrics_table(table).find("**"), std::string::npos);
}

TEST(MetricsTable, JsonRoundTripAndReportFiles) {
  MetricsTable table;
  table["GAIA"][kJudgeMethod] = AlignmentMetrics::from_counts(3, 1, 2, 0);
  auto back = metrics_table_from_json(nlohmann::json::parse(metrics_table_to_json(table).dump()));
  EXPECT_EQ(back["GAIA"][kJudgeMethod].tp, 3);
  EXPECT_DOUBLE_EQ(back["GAIA"][kJudgeMethod].accuracy, 5.0 / 6.0);

  TempDir dir;
  emit_report(table, dir.path(), std::string("abc123"));
  const auto md = read_file(dir.path() / "report.md");
  EXPECT_EQ(md.rfind("# Human alignment\n\n| Metric |", 0), 0u);
  EXPECT_NE(md.find("GAIA / Judge: tp=3 fp=1 tn=2 fn=0 (n=6)"), std::string::npos);
  EXPECT_NE(md.find("Run manifest: abc123"), std::string::npos);
  auto doc = nlohmann::json::parse(read_file(dir.path() / "metrics.json"));
  EXPECT_EQ(doc["datasets"]["GAIA"]["judge"]["n"], 6);
  EXPECT_THROW(emit_report(MetricsTable{}, dir.path()), PreconditionError);
}
