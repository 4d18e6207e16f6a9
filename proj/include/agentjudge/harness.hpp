#pragma once

// Dataset ingestion and run orchestration for the judge and the baseline.

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "agentjudge/artifact_parser.hpp"
#include "agentjudge/composer.hpp"
#include "agentjudge/criteria_generator.hpp"
#include "agentjudge/gateway.hpp"
#include "agentjudge/metrics.hpp"
#include "agentjudge/reranker.hpp"
#include "agentjudge/verdict.hpp"

namespace agentjudge {

struct DatasetSummary {
  std::size_t count = 0;
  std::size_t passed = 0;
  std::size_t failed = 0;
  std::size_t unlabeled = 0;
};

/// Reads a JSONL dataset. Blank lines are skipped. Throws DatasetError with
/// the 1-based line number for malformed lines and duplicate task ids. An
/// empty file yields an empty list and a warning.
std::vector<TaskRecord> load_dataset(const std::filesystem::path& path,
                                     Diagnostics* diagnostics = nullptr);

DatasetSummary summarize_dataset(const std::vector<TaskRecord>& records);

struct RunConfig {
  std::filesystem::path dataset_path;
  std::filesystem::path log_dir;
  std::filesystem::path output_dir;
  std::filesystem::path cache_dir;
  /// Recorded in the manifest so the run can be replayed.
  std::string backend = "mock";
  std::string model;
  std::filesystem::path mock_rules;
  RetrievalConfig retrieval;
  CriteriaConfig criteria;
  VerdictMode verdict_mode = VerdictMode::kLlm;
  int parallelism = 1;
  std::uint64_t random_seed = 0;
  bool cache = true;

  /// Throws PreconditionError for parallelism < 1 or missing paths.
  void validate(bool needs_logs) const;
};

/// Shared, thread-safe machinery for a run.
struct JudgeServices {
  std::shared_ptr<LlmGateway> gateway;
  std::shared_ptr<const BpeTokenizer> tokenizer;
  std::shared_ptr<const Reranker> reranker;
  HandlerRegistry handlers;
};

/// Everything produced while judging one task.
struct TaskTrace {
  std::vector<ChecklistItem> checklist;
  LogIndex index;
  std::vector<CriterionCheck> checks;
  VerdictOutcome outcome;
};

/// Runs the whole pipeline for one task over its log text.
JudgeReport judge_task(const TaskRecord& task, const std::string& log_text,
                       const JudgeServices& services, const RunConfig& config,
                       const JudgeContext& ctx, const IndexCache* cache = nullptr,
                       TaskTrace* trace = nullptr);

/// Location of a task's log: `log_path` relative to the log directory, or
/// `<log_dir>/<task_id>.log`.
std::filesystem::path log_path_for(const TaskRecord& task, const std::filesystem::path& log_dir);

struct TaskOutcome {
  std::string task_id;
  bool ok = false;
  std::string error;
  std::optional<Answer> verdict;
  std::string report_sha256;
  std::vector<std::string> warnings;
  std::map<std::string, UsageTotals> usage;
  double seconds = 0.0;
  std::size_t chunks = 0;
  bool index_from_cache = false;
  bool verdict_fell_back = false;
};

struct RunResult {
  std::vector<TaskOutcome> outcomes;
  nlohmann::ordered_json manifest;
  /// Hash over the deterministic part of the manifest; equal across
  /// repeated mock runs.
  std::string content_hash;

  bool all_ok() const;
  std::vector<Prediction> predictions() const;
};

/// Judges every record on a pool of `parallelism` workers. Failures are
/// isolated per task. Writes <output>/<task_id>.json, predictions.jsonl,
/// index/<task_id>/ and manifest.json.
RunResult run_judge(const std::vector<TaskRecord>& records, const RunConfig& config,
                    const JudgeServices& services);

/// Baseline judge over the same records. Writes baseline_predictions.jsonl
/// and baseline_manifest.json.
RunResult run_baseline(const std::vector<TaskRecord>& records, const RunConfig& config,
                       const JudgeServices& services);

std::vector<Prediction> read_predictions(const std::filesystem::path& path);
void write_predictions(const std::vector<Prediction>& predictions,
                       const std::filesystem::path& path);

/// Scores predictions against the dataset and merges the result into
/// <dir>/metrics.json under `dataset_name` / `method`.
MetricsTable merge_metrics(const std::filesystem::path& dir, const std::string& dataset_name,
                           const std::string& method, const AlignmentMetrics& metrics);

MetricsTable read_metrics(const std::filesystem::path& path);

/// File name used for a task's report.
std::string report_file_name(const std::string& task_id);

}  // namespace agentjudge
