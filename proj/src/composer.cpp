#include "agentjudge/composer.hpp"

#include <cctype>

#include <json.hpp>

#include "agentjudge/errors.hpp"
#include "agentjudge/text_util.hpp"

namespace agentjudge {

namespace {

std::optional<Answer> parse_yes_no(const std::string& reply) {
  std::string first;
  for (char c : text::trim(reply)) {
    if (!std::isalpha(static_cast<unsigned char>(c))) break;
    first += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  if (first == "yes") return Answer::kYes;
  if (first == "no") return Answer::kNo;
  if (auto label = text::find_single_label(reply, {"yes", "no"})) {
    return *label == "yes" ? Answer::kYes : Answer::kNo;
  }
  return std::nullopt;
}

std::optional<HandlerResult> parse_handler_reply(const std::string& reply) {
  auto open = reply.find('{');
  auto close = reply.rfind('}');
  if (open != std::string::npos && close != std::string::npos && close > open) {
    try {
      auto doc = nlohmann::json::parse(reply.substr(open, close - open + 1));
      if (doc.is_object() && doc.contains("answer") && doc["answer"].is_string()) {
        auto label = text::to_lower(text::trim(doc["answer"].get<std::string>()));
        if (label == "yes" || label == "no") {
          HandlerResult r;
          r.answer = label == "yes" ? Answer::kYes : Answer::kNo;
          if (doc.contains("reason") && doc["reason"].is_string()) {
            r.reason = doc["reason"].get<std::string>();
          }
          return r;
        }
      }
    } catch (const nlohmann::json::parse_error&) {
    }
  }
  // Plain "Answer: yes" / "Reason: ..." lines.
  std::optional<Answer> answer;
  std::string reason;
  for (const auto& line : text::split_lines(reply)) {
    auto lower = text::to_lower(text::trim(line));
    if (lower.rfind("answer:", 0) == 0) {
      answer = parse_yes_no(lower.substr(7));
    } else if (lower.rfind("reason:", 0) == 0) {
      reason = text::trim(text::trim(line).substr(7));
    }
  }
  if (!answer) return std::nullopt;
  return HandlerResult{*answer, reason};
}

std::string tail(const std::string& s, std::size_t n) {
  auto t = text::trim(s);
  if (t.size() <= n) return t;
  std::size_t start = t.size() - n;
  while (start < t.size() && !text::is_codepoint_boundary(t, start)) ++start;
  return "..." + t.substr(start);
}

std::string raw_proofs(const ProofBundle& bundle) {
  std::string out;
  for (const auto& s : bundle.snippets) {
    if (!out.empty()) out += "\n\n";
    out += s.text;
  }
  return out;
}

}  // namespace

PrimaryClass classify_primary(std::string_view question, const TaskRecord& task,
                              const JudgeContext& ctx) {
  CompletionRequest request;
  request.template_id = "classify_primary";
  request.variables = {{"task", task.description}, {"question", std::string(question)}};
  std::function<std::optional<PrimaryClass>(const std::string&)> parse =
      [](const std::string& reply) -> std::optional<PrimaryClass> {
    auto label = text::find_single_label(reply, {"factual", "logical"});
    if (!label) return std::nullopt;
    return *label == "factual" ? PrimaryClass::kFactual : PrimaryClass::kLogical;
  };
  return ask_with_reask<PrimaryClass>(ctx, request, parse,
                                      "Reply with exactly one word: factual or logical.");
}

LogicalSubclass classify_logical(std::string_view question, const TaskRecord& task,
                                 const JudgeContext& ctx) {
  CompletionRequest request;
  request.template_id = "classify_logical";
  request.variables = {{"task", task.description}, {"question", std::string(question)}};
  std::function<std::optional<LogicalSubclass>(const std::string&)> parse =
      [](const std::string& reply) -> std::optional<LogicalSubclass> {
    auto label = text::find_single_label(reply, {"reasoning", "coding"});
    if (!label) return std::nullopt;
    return *label == "reasoning" ? LogicalSubclass::kReasoning : LogicalSubclass::kCoding;
  };
  return ask_with_reask<LogicalSubclass>(ctx, request, parse,
                                         "Reply with exactly one word: reasoning or coding.");
}

QuestionClass classify_question(std::string_view question, const TaskRecord& task,
                                const JudgeContext& ctx) {
  QuestionClass cls;
  cls.primary = classify_primary(question, task, ctx);
  if (cls.primary == PrimaryClass::kLogical) cls.sub = classify_logical(question, task, ctx);
  return cls;
}

bool assess_sufficiency(std::string_view question, const ProofBundle& bundle,
                        const TaskRecord& task, const JudgeContext& ctx) {
  if (bundle.snippets.empty()) return false;
  CompletionRequest request;
  request.template_id = "proof_sufficiency";
  request.variables = {{"task", task.description},
                       {"question", std::string(question)},
                       {"proofs", bundle.rendered_proofs()}};
  std::function<std::optional<Answer>(const std::string&)> parse = parse_yes_no;
  try {
    return ask_with_reask<Answer>(ctx, request, parse, "Reply with yes or no.") == Answer::kYes;
  } catch (const UnparseableOutput& e) {
    ctx.warn(std::string("sufficiency check unparseable; treating proofs as insufficient: ") +
             e.what());
    return false;
  }
}

ProofBundle expand_context(const ProofBundle& bundle, std::string_view question,
                           const TaskRecord& task, const std::vector<Chunk>& chunks,
                           const RetrievalConfig& config, const JudgeContext& ctx) {
  ProofBundle out = bundle;
  if (bundle.expansions_used >= config.max_expansions || bundle.windows.empty()) {
    out.expansion_exhausted = true;
    return out;
  }
  auto widened = widen_windows(bundle.windows, chunks.size(), config.expansion_window);
  if (widened == bundle.windows) {
    out.expansion_exhausted = true;
    return out;
  }
  out.windows = std::move(widened);
  out.snippets = extract_snippets(question, task, chunks, out.windows, ctx);
  out.expansions_used = bundle.expansions_used + 1;
  out.sufficient = false;
  return out;
}

EvidenceSource choose_evidence_source(const ProofBundle& bundle) {
  if (bundle.snippets.empty()) return EvidenceSource::kFinalAnswer;
  if (bundle.sufficient) return EvidenceSource::kProofs;
  return EvidenceSource::kProofsAndFinalAnswer;
}

std::string render_evidence(const ProofBundle& bundle, EvidenceSource source) {
  const std::string answer =
      bundle.final_answer.empty() ? std::string("(no final answer recorded)") : bundle.final_answer;
  switch (source) {
    case EvidenceSource::kProofs:
      return "## Proofs\n" + bundle.rendered_proofs();
    case EvidenceSource::kProofsAndFinalAnswer:
      return "## Proofs\n" + bundle.rendered_proofs() + "\n\n## Final answer\n" + answer;
    case EvidenceSource::kFinalAnswer:
      return "## Final answer\n" + answer;
  }
  return {};
}

HandlerResult LlmVerifier::verify(const HandlerInput& input, const JudgeContext& ctx) {
  CompletionRequest request;
  request.template_id = template_id_;
  request.variables = {{"task", input.task.description},
                       {"question", std::string(input.question)},
                       {"evidence", render_evidence(input.bundle, input.source)}};
  std::function<std::optional<HandlerResult>(const std::string&)> parse = parse_handler_reply;
  return ask_with_reask<HandlerResult>(
      ctx, request, parse,
      "Reply with a JSON object {\"answer\": \"yes\" or \"no\", \"reason\": <text>}.");
}

HandlerResult CodeCheckVerifier::verify(const HandlerInput& input, const JudgeContext& ctx) {
  if (!sandbox_) throw HandlerError("no sandbox configured for code checks");
  CompletionRequest request;
  request.template_id = "coding_check_script";
  request.variables = {{"task", input.task.description},
                       {"question", std::string(input.question)},
                       {"evidence", render_evidence(input.bundle, input.source)}};
  std::function<std::optional<std::string>(const std::string&)> parse =
      [](const std::string& reply) -> std::optional<std::string> {
    auto block = text::first_fenced_block(reply, "python");
    if (!block || text::trim(*block).empty()) return std::nullopt;
    return block;
  };
  const auto script = ask_with_reask<std::string>(
      ctx, request, parse, "Reply with one ```python fenced block containing the check script.");

  std::map<std::string, std::string> files = {
      {"proofs.txt", input.source == EvidenceSource::kFinalAnswer ? "" : raw_proofs(input.bundle)},
      {"final_answer.txt", input.bundle.final_answer}};
  const auto run = sandbox_->run_python(script, files);

  HandlerResult result;
  if (run.timed_out) {
    result.answer = Answer::kNo;
    result.reason = "check script timed out after " +
                    std::to_string(sandbox_->options().timeout.count()) + "s";
  } else if (run.exit_code == 0) {
    result.answer = Answer::kYes;
    result.reason = "check script passed";
    if (!text::trim(run.output).empty()) result.reason += ": " + tail(run.output, 400);
  } else {
    result.answer = Answer::kNo;
    result.reason = "check script failed with exit code " + std::to_string(run.exit_code);
    if (!text::trim(run.output).empty()) result.reason += ": " + tail(run.output, 400);
  }
  return result;
}

HandlerRegistry HandlerRegistry::defaults(std::shared_ptr<Sandbox> sandbox) {
  HandlerRegistry r;
  r.factual = std::make_shared<LlmVerifier>("verify_factual");
  r.reasoning = std::make_shared<LlmVerifier>("verify_reasoning");
  r.coding = std::make_shared<CodeCheckVerifier>(std::move(sandbox));
  return r;
}

void HandlerRegistry::validate() const {
  if (!factual) throw PreconditionError("no handler registered for factual questions");
  if (!reasoning) throw PreconditionError("no handler registered for reasoning questions");
  if (!coding) throw PreconditionError("no handler registered for coding questions");
}

VerificationHandler& HandlerRegistry::for_class(const QuestionClass& cls) const {
  std::shared_ptr<VerificationHandler> h;
  if (cls.primary == PrimaryClass::kFactual) {
    h = factual;
  } else if (cls.sub == LogicalSubclass::kCoding) {
    h = coding;
  } else {
    h = reasoning;
  }
  if (!h) throw PreconditionError("no handler registered for this question class");
  return *h;
}

DecisionPath decision_path_for(EvidenceSource source, const QuestionClass& cls) {
  if (cls.primary == PrimaryClass::kFactual) return DecisionPath::factual(source);
  return DecisionPath::logical(source, cls.sub.value_or(LogicalSubclass::kReasoning));
}

CriterionVerdict verify_criterion(const ChecklistItem& item, const ProofBundle& bundle,
                                  const QuestionClass& cls, const TaskRecord& task,
                                  const HandlerRegistry& handlers, const JudgeContext& ctx) {
  if (item.item_id != bundle.item_id) {
    throw PreconditionError("proof bundle belongs to a different checklist item");
  }
  const auto source = choose_evidence_source(bundle);
  auto& handler = handlers.for_class(cls);

  CriterionVerdict verdict;
  verdict.item_id = item.item_id;
  verdict.decision_path = decision_path_for(source, cls);
  try {
    auto result = handler.verify(HandlerInput{task, item.question, bundle, source}, ctx);
    verdict.answer = result.answer;
    verdict.reason = std::move(result.reason);
  } catch (const std::exception& e) {
    ctx.warn("criterion " + std::to_string(item.item_id) + " (" + handler.name() +
             ") failed; recorded as no: " + e.what());
    verdict.answer = Answer::kNo;
    verdict.reason = std::string("verification failed: ") + e.what();
  }
  return verdict;
}

CriterionCheck check_criterion(const ChecklistItem& item, const TaskRecord& task,
                               const LogIndex& index, const Reranker& reranker,
                               const RetrievalConfig& config, const HandlerRegistry& handlers,
                               const JudgeContext& ctx) {
  CriterionCheck check;
  check.cls = classify_question(item.question, task, ctx);

  const auto mask = plan_section_mask(index.chunks, config);
  check.retrieval = retrieve_chunks(item.question, index.summaries, reranker, config, &mask);

  auto& bundle = check.bundle;
  bundle.item_id = item.item_id;
  bundle.final_answer = task.final_answer.value_or("");
  bundle.windows = windows_for(check.retrieval);
  bundle.snippets = extract_snippets(item.question, task, index.chunks, bundle.windows, ctx);
  bundle.sufficient = assess_sufficiency(item.question, bundle, task, ctx);
  while (!bundle.sufficient && !bundle.expansion_exhausted) {
    bundle = expand_context(bundle, item.question, task, index.chunks, config, ctx);
    if (!bundle.expansion_exhausted) {
      bundle.sufficient = assess_sufficiency(item.question, bundle, task, ctx);
    }
  }

  check.verdict = verify_criterion(item, bundle, check.cls, task, handlers, ctx);
  return check;
}

}  // namespace agentjudge
