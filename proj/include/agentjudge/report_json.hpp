#pragma once

// Wire format of judge reports and dataset records.

#include <string>
#include <string_view>

#include <json.hpp>

#include "agentjudge/types.hpp"

namespace agentjudge {

using ordered_json = nlohmann::ordered_json;

/// Report as JSON with fixed key order: verdict, eval; and within each eval
/// entry question, proofs{proofs, final_answer}, c3_response{answer, reason,
/// decision_path}.
ordered_json report_to_json(const JudgeReport& report);
std::string serialize_report(const JudgeReport& report, int indent = 4);

/// Throws SchemaError naming the offending path on any schema violation.
JudgeReport report_from_json(const ordered_json& doc);
JudgeReport parse_report(std::string_view text);

ordered_json eval_entry_to_json(const EvalEntry& entry);

/// One JSONL dataset line. Missing optional keys are allowed; task_id and
/// description are required. Throws SchemaError.
TaskRecord task_from_json(const ordered_json& doc);
ordered_json task_to_json(const TaskRecord& task);

/// Drops insignificant whitespace (outside string literals) from JSON text.
std::string strip_json_whitespace(std::string_view text);

}  // namespace agentjudge
