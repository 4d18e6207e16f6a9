#include "agentjudge/verdict.hpp"

#include <json.hpp>

#include "agentjudge/errors.hpp"
#include "agentjudge/report_json.hpp"
#include "agentjudge/text_util.hpp"

namespace agentjudge {

std::string_view to_string(VerdictMode mode) {
  return mode == VerdictMode::kLlm ? "llm" : "strict_and";
}

VerdictMode verdict_mode_from_string(std::string_view s) {
  if (s == "llm") return VerdictMode::kLlm;
  if (s == "strict_and" || s == "strict-and") return VerdictMode::kStrictAnd;
  throw PreconditionError("unknown verdict mode: " + std::string(s));
}

Answer strict_and(const std::vector<CriterionVerdict>& verdicts) {
  for (const auto& v : verdicts) {
    if (v.answer != Answer::kYes) return Answer::kNo;
  }
  return Answer::kYes;
}

std::vector<EvalEntry> build_eval(const std::vector<ChecklistItem>& items,
                                  const std::vector<ProofBundle>& bundles,
                                  const std::vector<CriterionVerdict>& verdicts) {
  std::vector<EvalEntry> eval;
  for (const auto& item : items) {
    if (!item.kept) continue;
    const ProofBundle* bundle = nullptr;
    for (const auto& b : bundles) {
      if (b.item_id == item.item_id) bundle = &b;
    }
    const CriterionVerdict* verdict = nullptr;
    for (const auto& v : verdicts) {
      if (v.item_id == item.item_id) verdict = &v;
    }
    if (!bundle || !verdict) {
      throw PreconditionError("kept item " + std::to_string(item.item_id) +
                              " has no proof bundle or verdict");
    }
    EvalEntry e;
    e.question = item.question;
    e.proofs = bundle->rendered_proofs();
    e.final_answer = bundle->final_answer;
    e.answer = verdict->answer;
    e.reason = verdict->reason;
    e.decision_path = verdict->decision_path;
    eval.push_back(std::move(e));
  }
  return eval;
}

namespace {

struct LlmVerdict {
  Answer answer;
  std::string rationale;
};

std::optional<LlmVerdict> parse_verdict(const std::string& reply) {
  auto open = reply.find('{');
  auto close = reply.rfind('}');
  if (open != std::string::npos && close != std::string::npos && close > open) {
    try {
      auto doc = nlohmann::json::parse(reply.substr(open, close - open + 1));
      if (doc.is_object() && doc.contains("verdict") && doc["verdict"].is_string()) {
        auto label = text::to_lower(text::trim(doc["verdict"].get<std::string>()));
        if (label == "yes" || label == "no") {
          LlmVerdict v{label == "yes" ? Answer::kYes : Answer::kNo, ""};
          if (doc.contains("rationale") && doc["rationale"].is_string()) {
            v.rationale = doc["rationale"].get<std::string>();
          }
          return v;
        }
      }
      return std::nullopt;
    } catch (const nlohmann::json::parse_error&) {
    }
  }
  if (auto label = text::find_single_label(reply, {"yes", "no"})) {
    return LlmVerdict{*label == "yes" ? Answer::kYes : Answer::kNo, text::trim(reply)};
  }
  return std::nullopt;
}

}  // namespace

VerdictOutcome decide(const TaskRecord& task, const std::vector<ChecklistItem>& items,
                      const std::vector<ProofBundle>& bundles,
                      const std::vector<CriterionVerdict>& verdicts, VerdictMode mode,
                      const JudgeContext& ctx) {
  VerdictOutcome out;
  out.report.eval = build_eval(items, bundles, verdicts);
  if (out.report.eval.empty()) throw PreconditionError("no kept checklist items to decide on");

  std::vector<CriterionVerdict> kept;
  for (const auto& item : items) {
    if (!item.kept) continue;
    for (const auto& v : verdicts) {
      if (v.item_id == item.item_id) kept.push_back(v);
    }
  }

  if (mode == VerdictMode::kStrictAnd) {
    out.mode_used = VerdictMode::kStrictAnd;
    out.report.verdict = strict_and(kept);
    return out;
  }

  nlohmann::ordered_json evals = nlohmann::ordered_json::array();
  for (const auto& e : out.report.eval) evals.push_back(eval_entry_to_json(e));

  CompletionRequest request;
  request.template_id = "verdict";
  request.variables = {{"task", task.description}, {"evals", evals.dump(4)}};
  std::function<std::optional<LlmVerdict>(const std::string&)> parse = parse_verdict;
  try {
    auto v = ask_with_reask<LlmVerdict>(
        ctx, request, parse,
        "Reply with a JSON object {\"verdict\": \"yes\" or \"no\", \"rationale\": <text>}.");
    out.mode_used = VerdictMode::kLlm;
    out.report.verdict = v.answer;
    out.rationale = std::move(v.rationale);
  } catch (const UnparseableOutput& e) {
    ctx.warn(std::string("verdict unparseable; falling back to strict_and: ") + e.what());
    out.mode_used = VerdictMode::kStrictAnd;
    out.fell_back = true;
    out.report.verdict = strict_and(kept);
  }
  return out;
}

}  // namespace agentjudge
