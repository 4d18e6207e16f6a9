#include <gtest/gtest.h>

#include "agentjudge/errors.hpp"
#include "agentjudge/harness.hpp"
#include "agentjudge/report_json.hpp"
#include "test_support.hpp"

using namespace agentjudge;
using namespace agentjudge::testing;

namespace {

std::map<std::string, Answer> by_task(const std::vector<Prediction>& predictions) {
  std::map<std::string, Answer> out;
  for (const auto& p : predictions) out[p.task_id] = p.verdict;
  return out;
}

std::size_t dataset_line_error(const std::string& content) {
  TempDir dir;
  write_file(dir.path() / "d.jsonl", content);
  try {
    load_dataset(dir.path() / "d.jsonl");
  } catch (const DatasetError& e) {
    return e.line();
  }
  return 0;
}

}  // namespace

TEST(Dataset, LoadsRecordsAndBalance) {
  Diagnostics diag;
  auto records = load_dataset(e2e_dir() / "dataset.jsonl", &diag);
  ASSERT_EQ(records.size(), 3u);
  EXPECT_EQ(records[0].task_id, "bcb-sort");
  EXPECT_EQ(records[1].final_answer, "Sydney");
  auto s = summarize_dataset(records);
  EXPECT_EQ(s.count, 3u);
  EXPECT_EQ(s.passed, 2u);
  EXPECT_EQ(s.failed, 1u);
  EXPECT_EQ(s.unlabeled, 0u);
}

TEST(Dataset, ErrorsCarryTheLineNumber) {
  const std::string ok = R"({"task_id": "a", "description": "d"})";
  EXPECT_EQ(dataset_line_error(ok + "\n{not json\n"), 2u);
  EXPECT_EQ(dataset_line_error(ok + "\n\n" + R"({"description": "no id"})" + "\n"), 3u);
  EXPECT_EQ(dataset_line_error(ok + "\n" + ok + "\n"), 2u);
  EXPECT_EQ(dataset_line_error(R"({"task_id": "a", "description": "d", "human_label": "yes"})"),
            1u);
}

TEST(Dataset, EmptyFileWarns) {
  TempDir dir;
  write_file(dir.path() / "empty.jsonl", "");
  Diagnostics diag;
  EXPECT_TRUE(load_dataset(dir.path() / "empty.jsonl", &diag).empty());
  EXPECT_EQ(diag.warnings().size(), 1u);
  EXPECT_THROW(load_dataset(dir.path() / "missing.jsonl"), Error);
}

TEST(RunConfig, Validation) {
  TempDir dir;
  auto c = e2e_config(dir.path());
  EXPECT_NO_THROW(c.validate(true));
  c.parallelism = 0;
  EXPECT_THROW(c.validate(true), PreconditionError);
}

TEST(ReportFileName, UnsafeIdsGetAHashSuffix) {
  EXPECT_EQ(report_file_name("gaia-sum"), "gaia-sum.json");
  const auto name = report_file_name("a/b c");
  EXPECT_NE(name, "a/b c.json");
  EXPECT_EQ(name.find('/'), std::string::npos);
  EXPECT_NE(report_file_name("a/b"), report_file_name("a:b"));
}

TEST(EndToEnd, MockRunProducesGoldenReports) {
  TempDir out;
  const auto records = load_dataset(e2e_dir() / "dataset.jsonl");
  auto services = e2e_services();
  auto result = run_judge(records, e2e_config(out.path()), services);
  for (const auto& o : result.outcomes) EXPECT_TRUE(o.ok) << o.task_id << ": " << o.error;
  auto verdicts = by_task(result.predictions());
  EXPECT_EQ(verdicts["bcb-sort"], Answer::kYes);
  EXPECT_EQ(verdicts["gaia-capital"], Answer::kNo);
  EXPECT_EQ(verdicts["gaia-sum"], Answer::kYes);

  for (const auto& r : records) {
    const auto name = report_file_name(r.task_id);
    const auto produced = read_file(out.path() / name);
    const auto golden = fixtures_dir() / "golden" / name;
    if (std::getenv("AGENTJUDGE_REGEN_GOLDEN")) write_file(golden, produced);
    EXPECT_EQ(produced, read_file(golden)) << name;
    EXPECT_NO_THROW(parse_report(produced));
    EXPECT_TRUE(fs::exists(out.path() / "index" / r.task_id / "chunks.jsonl"));
    EXPECT_TRUE(fs::exists(out.path() / "traces" / (r.task_id + ".json")));
  }
  EXPECT_EQ(read_predictions(out.path() / "predictions.jsonl").size(), 3u);
  auto manifest = nlohmann::json::parse(read_file(out.path() / "manifest.json"));
  EXPECT_EQ(manifest["content_hash"], result.content_hash);
  EXPECT_EQ(manifest["tasks_ok"], 3);

  auto metrics = score_alignment(result.predictions(), records);
  EXPECT_DOUBLE_EQ(metrics.accuracy, 1.0);
}

TEST(EndToEnd, RepeatedRunsAreIdenticalAndReuseTheIndex) {
  TempDir a, b;
  const auto records = load_dataset(e2e_dir() / "dataset.jsonl");
  auto first = run_judge(records, e2e_config(a.path()), e2e_services());
  auto cached = run_judge(records, e2e_config(a.path()), e2e_services());
  auto parallel = run_judge(records, e2e_config(b.path(), 3), e2e_services());
  EXPECT_EQ(first.content_hash, cached.content_hash);
  EXPECT_EQ(first.content_hash, parallel.content_hash);
  for (const auto& o : cached.outcomes) {
    EXPECT_TRUE(o.index_from_cache) << o.task_id;
    EXPECT_EQ(o.usage.count("chunk_summary"), 0u) << o.task_id;
  }
  for (const auto& o : first.outcomes) EXPECT_FALSE(o.index_from_cache);
}

TEST(EndToEnd, MissingLogFailsOnlyThatTask) {
  TempDir out;
  auto records = load_dataset(e2e_dir() / "dataset.jsonl");
  TaskRecord ghost = records[2];
  ghost.task_id = "ghost";
  ghost.log_path = "ghost.log";
  records.insert(records.begin() + 1, ghost);
  auto result = run_judge(records, e2e_config(out.path(), 2), e2e_services());
  ASSERT_EQ(result.outcomes.size(), 4u);
  EXPECT_FALSE(result.all_ok());
  EXPECT_FALSE(result.outcomes[1].ok);
  EXPECT_NE(result.outcomes[1].error.find("ghost.log"), std::string::npos);
  for (std::size_t i : {0u, 2u, 3u}) EXPECT_TRUE(result.outcomes[i].ok);
  EXPECT_EQ(result.predictions().size(), 3u);
}

TEST(Baseline, RunAndScore) {
  TempDir out;
  const auto records = load_dataset(e2e_dir() / "dataset.jsonl");
  auto result = run_baseline(records, e2e_config(out.path()), e2e_services());
  ASSERT_TRUE(result.all_ok());
  auto preds = read_predictions(out.path() / "baseline_predictions.jsonl");
  ASSERT_EQ(preds.size(), 3u);
  auto m = score_alignment(preds, records);
  EXPECT_EQ(m.tp, 2);
  EXPECT_EQ(m.fp, 1);
  auto table = merge_metrics(out.path(), "E2E", kBaselineMethod, m);
  table = merge_metrics(out.path(), "E2E", kJudgeMethod, AlignmentMetrics::from_counts(2, 0, 1, 0));
  EXPECT_EQ(table["E2E"].size(), 2u);
  EXPECT_EQ(read_metrics(out.path() / "metrics.json")["E2E"].size(), 2u);
}
