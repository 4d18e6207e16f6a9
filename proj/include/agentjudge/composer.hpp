#pragma once

// Per-criterion verification: classify the question, gather sufficient
// evidence and hand it to the matching handler.

#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "agentjudge/artifact_parser.hpp"
#include "agentjudge/context.hpp"
#include "agentjudge/reranker.hpp"
#include "agentjudge/sandbox.hpp"
#include "agentjudge/types.hpp"

namespace agentjudge {

struct QuestionClass {
  PrimaryClass primary = PrimaryClass::kFactual;
  std::optional<LogicalSubclass> sub;

  bool operator==(const QuestionClass&) const = default;
};

/// Template `classify_primary`; the reply must name exactly one of
/// "factual" / "logical" (one re-ask, then UnparseableOutput).
PrimaryClass classify_primary(std::string_view question, const TaskRecord& task,
                              const JudgeContext& ctx);
/// Template `classify_logical`; "reasoning" / "coding".
LogicalSubclass classify_logical(std::string_view question, const TaskRecord& task,
                                 const JudgeContext& ctx);
QuestionClass classify_question(std::string_view question, const TaskRecord& task,
                                const JudgeContext& ctx);

/// Whether the bundle's snippets alone settle the question (template
/// `proof_sufficiency`). An empty bundle is insufficient without a call.
bool assess_sufficiency(std::string_view question, const ProofBundle& bundle,
                        const TaskRecord& task, const JudgeContext& ctx);

/// Widens every searched window by `expansion_window` chunks and re-extracts.
/// Once the budget is spent, or when widening changes nothing, returns the
/// bundle unchanged apart from `expansion_exhausted`.
ProofBundle expand_context(const ProofBundle& bundle, std::string_view question,
                           const TaskRecord& task, const std::vector<Chunk>& chunks,
                           const RetrievalConfig& config, const JudgeContext& ctx);

/// Evidence source implied by the bundle: no snippets means the final answer
/// alone, sufficient proofs mean the proofs alone, otherwise both.
EvidenceSource choose_evidence_source(const ProofBundle& bundle);

/// The handlers' `evidence` variable for the chosen source.
std::string render_evidence(const ProofBundle& bundle, EvidenceSource source);

struct HandlerInput {
  const TaskRecord& task;
  std::string_view question;
  const ProofBundle& bundle;
  EvidenceSource source;
};

struct HandlerResult {
  Answer answer = Answer::kNo;
  std::string reason;
};

class VerificationHandler {
 public:
  virtual ~VerificationHandler() = default;
  virtual HandlerResult verify(const HandlerInput& input, const JudgeContext& ctx) = 0;
  virtual std::string name() const = 0;
};

/// One LLM call over the evidence; the reply is {"answer": "yes"|"no",
/// "reason": text}.
class LlmVerifier : public VerificationHandler {
 public:
  explicit LlmVerifier(std::string template_id) : template_id_(std::move(template_id)) {}
  HandlerResult verify(const HandlerInput& input, const JudgeContext& ctx) override;
  std::string name() const override { return template_id_; }

 private:
  std::string template_id_;
};

/// Asks the LLM for a Python check script (template `coding_check_script`)
/// and runs it in the sandbox with proofs.txt and final_answer.txt beside it.
/// Exit status 0 means yes.
class CodeCheckVerifier : public VerificationHandler {
 public:
  explicit CodeCheckVerifier(std::shared_ptr<Sandbox> sandbox) : sandbox_(std::move(sandbox)) {}
  HandlerResult verify(const HandlerInput& input, const JudgeContext& ctx) override;
  std::string name() const override { return "coding_check_script"; }

 private:
  std::shared_ptr<Sandbox> sandbox_;
};

struct HandlerRegistry {
  std::shared_ptr<VerificationHandler> factual;
  std::shared_ptr<VerificationHandler> reasoning;
  std::shared_ptr<VerificationHandler> coding;

  static HandlerRegistry defaults(std::shared_ptr<Sandbox> sandbox);

  /// Throws PreconditionError naming the first missing handler.
  void validate() const;
  VerificationHandler& for_class(const QuestionClass& cls) const;
};

DecisionPath decision_path_for(EvidenceSource source, const QuestionClass& cls);

/// Runs the handler for `cls`. Handler failures fail closed: the verdict is
/// "no" with the failure as the reason, and a warning is raised.
CriterionVerdict verify_criterion(const ChecklistItem& item, const ProofBundle& bundle,
                                  const QuestionClass& cls, const TaskRecord& task,
                                  const HandlerRegistry& handlers, const JudgeContext& ctx);

struct CriterionCheck {
  QuestionClass cls;
  RetrievalResult retrieval;
  ProofBundle bundle;
  CriterionVerdict verdict;
};

/// Retrieval, extraction, sufficiency with bounded expansion, then
/// verification, for one kept checklist item.
CriterionCheck check_criterion(const ChecklistItem& item, const TaskRecord& task,
                               const LogIndex& index, const Reranker& reranker,
                               const RetrievalConfig& config, const HandlerRegistry& handlers,
                               const JudgeContext& ctx);

}  // namespace agentjudge
