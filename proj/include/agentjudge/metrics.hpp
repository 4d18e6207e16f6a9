#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "agentjudge/types.hpp"

namespace agentjudge {

struct Prediction {
  std::string task_id;
  Answer verdict = Answer::kNo;
};

/// Confusion matrix of predictions against human labels. Positive class:
/// the human marked the task completed; a "yes" prediction is positive.
/// Throws PreconditionError for an unknown task_id, a task without a human
/// label, or a task predicted twice.
AlignmentMetrics score_alignment(const std::vector<Prediction>& predictions,
                                 const std::vector<TaskRecord>& records);

/// dataset -> method -> metrics.
using MetricsTable = std::map<std::string, std::map<std::string, AlignmentMetrics>>;

inline constexpr const char* kBaselineMethod = "llm_as_judge";
inline constexpr const char* kJudgeMethod = "judge";

/// Column heading for a method key.
std::string method_display_name(const std::string& method);

/// Percentage with two decimals, e.g. "61.90%".
std::string format_percent(double ratio);

nlohmann::ordered_json metrics_to_json(const AlignmentMetrics& m);
AlignmentMetrics metrics_from_json(const nlohmann::json& j);

nlohmann::ordered_json metrics_table_to_json(const MetricsTable& table);
MetricsTable metrics_table_from_json(const nlohmann::json& doc);

/// Markdown table: one row per metric, one column group per dataset and a
/// column per method inside it. The larger value in each row of a dataset
/// group is bold; ties are left unmarked.
std::string render_metrics_table(const MetricsTable& table);

/// Writes metrics.json and report.md into `dir`. Throws PreconditionError if
/// the table holds no scored method.
void emit_report(const MetricsTable& table, const std::filesystem::path& dir,
                 const std::optional<std::string>& manifest_hash = std::nullopt);

}  // namespace agentjudge
