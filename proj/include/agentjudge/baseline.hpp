#pragma once

#include <string>

#include "agentjudge/context.hpp"
#include "agentjudge/types.hpp"

namespace agentjudge {

struct BaselineVerdict {
  Answer verdict = Answer::kNo;
  std::string rationale;
};

/// Single-call judge over the task and its final answer only (template
/// `baseline_judge`). Throws PreconditionError when the task has no final
/// answer and UnparseableOutput after one failed re-ask.
BaselineVerdict llm_as_judge(const TaskRecord& task, const JudgeContext& ctx);

}  // namespace agentjudge
