#include "agentjudge/types.hpp"

#include "agentjudge/errors.hpp"

namespace agentjudge {

std::string_view to_string(Answer answer) {
  return answer == Answer::kYes ? "yes" : "no";
}

Answer answer_from_label(std::string_view label) {
  if (label == "yes") return Answer::kYes;
  if (label == "no") return Answer::kNo;
  throw SchemaError("$", "answer must be \"yes\" or \"no\", got \"" +
                             std::string(label) + "\"");
}

std::string_view to_string(EvidenceSource source) {
  switch (source) {
    case EvidenceSource::kProofs:
      return "proofs";
    case EvidenceSource::kProofsAndFinalAnswer:
      return "proofs+final_answer";
    case EvidenceSource::kFinalAnswer:
      return "final_answer";
  }
  return "proofs";
}

std::string_view to_string(PrimaryClass primary) {
  return primary == PrimaryClass::kFactual ? "factual" : "logical";
}

std::string_view to_string(LogicalSubclass sub) {
  return sub == LogicalSubclass::kReasoning ? "reasoning" : "coding";
}

DecisionPath DecisionPath::factual(EvidenceSource source) {
  return DecisionPath(source, PrimaryClass::kFactual, std::nullopt);
}

DecisionPath DecisionPath::logical(EvidenceSource source, LogicalSubclass sub) {
  return DecisionPath(source, PrimaryClass::kLogical, sub);
}

DecisionPath DecisionPath::from_labels(const std::vector<std::string>& labels) {
  if (labels.size() < 2) {
    throw SchemaError("$", "decision_path needs at least 2 labels");
  }
  EvidenceSource source;
  if (labels[0] == "proofs") {
    source = EvidenceSource::kProofs;
  } else if (labels[0] == "proofs+final_answer") {
    source = EvidenceSource::kProofsAndFinalAnswer;
  } else if (labels[0] == "final_answer") {
    source = EvidenceSource::kFinalAnswer;
  } else {
    throw SchemaError("$[0]", "unknown evidence source \"" + labels[0] + "\"");
  }

  if (labels[1] == "factual") {
    if (labels.size() != 2) {
      throw SchemaError("$", "factual decision_path must have exactly 2 labels");
    }
    return factual(source);
  }
  if (labels[1] != "logical") {
    throw SchemaError("$[1]", "unknown primary class \"" + labels[1] + "\"");
  }
  if (labels.size() != 3) {
    throw SchemaError("$", "logical decision_path must have exactly 3 labels");
  }
  if (labels[2] == "reasoning") return logical(source, LogicalSubclass::kReasoning);
  if (labels[2] == "coding") return logical(source, LogicalSubclass::kCoding);
  throw SchemaError("$[2]", "unknown logical subclass \"" + labels[2] + "\"");
}

std::vector<std::string> DecisionPath::labels() const {
  std::vector<std::string> out{std::string(to_string(evidence_)),
                               std::string(to_string(primary_))};
  if (sub_) out.emplace_back(to_string(*sub_));
  return out;
}

void TaskRecord::validate() const {
  if (task_id.empty()) throw PreconditionError("task_id must be nonempty");
  if (description.empty()) {
    throw PreconditionError("task " + task_id + ": description must be nonempty");
  }
}

std::string render_proofs(const std::vector<Snippet>& snippets) {
  std::string out;
  for (const auto& snippet : snippets) {
    if (!out.empty()) out += "\n\n";
    out += "```\n";
    out += snippet.text;
    out += "\n```";
  }
  return out;
}

std::string ProofBundle::rendered_proofs() const { return render_proofs(snippets); }

AlignmentMetrics AlignmentMetrics::from_counts(std::int64_t tp, std::int64_t fp,
                                               std::int64_t tn, std::int64_t fn) {
  if (tp < 0 || fp < 0 || tn < 0 || fn < 0) {
    throw PreconditionError("confusion counts must be non-negative");
  }
  auto ratio = [](std::int64_t num, std::int64_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
  };
  AlignmentMetrics m;
  m.tp = tp;
  m.fp = fp;
  m.tn = tn;
  m.fn = fn;
  m.accuracy = ratio(tp + tn, tp + tn + fp + fn);
  m.precision = ratio(tp, tp + fp);
  m.recall = ratio(tp, tp + fn);
  m.specificity = ratio(tn, tn + fp);
  return m;
}

}  // namespace agentjudge
