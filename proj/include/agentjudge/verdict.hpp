#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "agentjudge/context.hpp"
#include "agentjudge/types.hpp"

namespace agentjudge {

enum class VerdictMode { kLlm, kStrictAnd };

std::string_view to_string(VerdictMode mode);
/// Accepts "llm" and "strict_and" / "strict-and".
VerdictMode verdict_mode_from_string(std::string_view s);

/// "yes" iff every criterion answered yes.
Answer strict_and(const std::vector<CriterionVerdict>& verdicts);

struct VerdictOutcome {
  JudgeReport report;
  VerdictMode mode_used = VerdictMode::kLlm;
  /// The LLM verdict was unusable and the strict conjunction was used instead.
  bool fell_back = false;
  std::string rationale;
};

/// The eval entries for the kept items, in checklist order.
std::vector<EvalEntry> build_eval(const std::vector<ChecklistItem>& items,
                                  const std::vector<ProofBundle>& bundles,
                                  const std::vector<CriterionVerdict>& verdicts);

/// Aggregates per-criterion verdicts into the task verdict. Bundles and
/// verdicts are matched to kept items by item_id; a kept item without both
/// is a PreconditionError, as is a checklist with nothing kept.
VerdictOutcome decide(const TaskRecord& task, const std::vector<ChecklistItem>& items,
                      const std::vector<ProofBundle>& bundles,
                      const std::vector<CriterionVerdict>& verdicts, VerdictMode mode,
                      const JudgeContext& ctx);

}  // namespace agentjudge
