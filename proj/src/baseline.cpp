#include "agentjudge/baseline.hpp"

#include <json.hpp>

#include "agentjudge/errors.hpp"
#include "agentjudge/text_util.hpp"

namespace agentjudge {

namespace {

std::optional<BaselineVerdict> parse_baseline(const std::string& reply) {
  auto open = reply.find('{');
  auto close = reply.rfind('}');
  if (open != std::string::npos && close != std::string::npos && close > open) {
    try {
      auto doc = nlohmann::json::parse(reply.substr(open, close - open + 1));
      if (doc.is_object() && doc.contains("verdict") && doc["verdict"].is_string()) {
        auto label = text::to_lower(text::trim(doc["verdict"].get<std::string>()));
        if (label != "yes" && label != "no") return std::nullopt;
        BaselineVerdict v{label == "yes" ? Answer::kYes : Answer::kNo, ""};
        if (doc.contains("rationale") && doc["rationale"].is_string()) {
          v.rationale = doc["rationale"].get<std::string>();
        }
        return v;
      }
      return std::nullopt;
    } catch (const nlohmann::json::parse_error&) {
    }
  }
  if (auto label = text::find_single_label(reply, {"yes", "no"})) {
    return BaselineVerdict{*label == "yes" ? Answer::kYes : Answer::kNo, text::trim(reply)};
  }
  return std::nullopt;
}

}  // namespace

BaselineVerdict llm_as_judge(const TaskRecord& task, const JudgeContext& ctx) {
  if (!task.final_answer) {
    throw PreconditionError("task " + task.task_id + " has no final answer to judge");
  }
  CompletionRequest request;
  request.template_id = "baseline_judge";
  request.variables = {{"task", task.description}, {"final_answer", *task.final_answer}};
  std::function<std::optional<BaselineVerdict>(const std::string&)> parse = parse_baseline;
  return ask_with_reask<BaselineVerdict>(
      ctx, request, parse,
      "Reply with a JSON object {\"verdict\": \"yes\" or \"no\", \"rationale\": <text>}.");
}

}  // namespace agentjudge
