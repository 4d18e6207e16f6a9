#include "agentjudge/context.hpp"

#include <spdlog/spdlog.h>

#include "agentjudge/errors.hpp"

namespace agentjudge {

CompletionResponse JudgeContext::complete(const CompletionRequest& request) const {
  if (gateway == nullptr) throw PreconditionError("judge context has no gateway");
  return gateway->complete(request, usage);
}

void JudgeContext::warn(std::string message) const {
  spdlog::warn("{}", message);
  if (diagnostics) diagnostics->warn(std::move(message));
}

}  // namespace agentjudge
