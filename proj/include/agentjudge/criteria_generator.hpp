#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "agentjudge/context.hpp"
#include "agentjudge/types.hpp"

namespace agentjudge {

struct CriteriaConfig {
  std::size_t max_questions = 10;
};

/// Asks the LLM for binary checklist questions covering the task's explicit
/// requirements (template `criteria_gen`). Malformed output and lint
/// violations are each re-asked once; remaining lint problems are reported
/// as warnings. Returns 1..max_questions items in generation order.
std::vector<ChecklistItem> generate_checklist(const TaskRecord& task, const JudgeContext& ctx,
                                              const CriteriaConfig& config = {});

/// Marks redundant or off-goal questions kept=false (template
/// `criteria_filter`). Never rewrites or reorders; throws AllFilteredError if
/// nothing survives.
std::vector<ChecklistItem> filter_checklist(std::vector<ChecklistItem> items,
                                            const TaskRecord& task, const JudgeContext& ctx);

std::vector<ChecklistItem> kept_items(const std::vector<ChecklistItem>& items);

/// Accepts a JSON array of strings, or numbered / bulleted lines ending in '?'.
std::optional<std::vector<std::string>> parse_question_list(std::string_view text);

/// Heuristic: a top-level "and"/"or" joining two requirements. Conjunctions
/// inside quotes or brackets, or licensed by "both", "either", "between" or
/// "whether", do not count.
bool is_compound_question(std::string_view question);

/// Empty when the question passes lint, otherwise the reason.
std::optional<std::string> lint_question(std::string_view question);

}  // namespace agentjudge
