#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "agentjudge/errors.hpp"
#include "agentjudge/gateway.hpp"

namespace agentjudge {

/// Warnings and flags raised while judging one task.
class Diagnostics {
 public:
  void warn(std::string message) { warnings_.push_back(std::move(message)); }
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }

 private:
  std::vector<std::string> warnings_;
};

/// Everything an LLM-backed stage needs to make calls on behalf of one task.
struct JudgeContext {
  LlmGateway* gateway = nullptr;
  UsageLedger* usage = nullptr;
  Diagnostics* diagnostics = nullptr;

  CompletionResponse complete(const CompletionRequest& request) const;
  void warn(std::string message) const;
};

/// Sends `request`; if `parse` rejects the output, re-asks once with the
/// template's `feedback` variable set to `feedback` (plus the rejected
/// output). Throws UnparseableOutput when the second answer is rejected too.
template <typename T>
T ask_with_reask(const JudgeContext& ctx, CompletionRequest request,
                 const std::function<std::optional<T>(const std::string&)>& parse,
                 const std::string& feedback) {
  request.variables["feedback"] = "";
  auto first = ctx.complete(request);
  if (auto parsed = parse(first.text)) return std::move(*parsed);

  request.variables["feedback"] =
      feedback + "\nYour previous reply could not be used:\n" + first.text;
  auto second = ctx.complete(request);
  if (auto parsed = parse(second.text)) return std::move(*parsed);
  throw UnparseableOutput(request.template_id + ": unusable output after one re-ask: " +
                          second.text.substr(0, 200));
}

}  // namespace agentjudge
