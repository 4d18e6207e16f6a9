#pragma once

// Shared vocabulary of the judging pipeline.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace agentjudge {

enum class Answer { kYes, kNo };

std::string_view to_string(Answer answer);
/// Accepts "yes"/"no" exactly (the wire vocabulary); throws SchemaError otherwise.
Answer answer_from_label(std::string_view label);

enum class EvidenceSource { kProofs, kProofsAndFinalAnswer, kFinalAnswer };
enum class PrimaryClass { kFactual, kLogical };
enum class LogicalSubclass { kReasoning, kCoding };

std::string_view to_string(EvidenceSource source);
std::string_view to_string(PrimaryClass primary);
std::string_view to_string(LogicalSubclass sub);

/// Closed-vocabulary record of how a criterion was verified:
/// [evidence source, primary class] for factual questions and
/// [evidence source, "logical", subclass] for logical ones.
class DecisionPath {
 public:
  static DecisionPath factual(EvidenceSource source);
  static DecisionPath logical(EvidenceSource source, LogicalSubclass sub);

  /// Validates a label list; throws SchemaError (path "$") on any violation.
  static DecisionPath from_labels(const std::vector<std::string>& labels);

  std::vector<std::string> labels() const;

  EvidenceSource evidence() const noexcept { return evidence_; }
  PrimaryClass primary() const noexcept { return primary_; }
  std::optional<LogicalSubclass> sub() const noexcept { return sub_; }

  bool operator==(const DecisionPath&) const = default;

 private:
  DecisionPath(EvidenceSource evidence, PrimaryClass primary,
               std::optional<LogicalSubclass> sub)
      : evidence_(evidence), primary_(primary), sub_(sub) {}

  EvidenceSource evidence_;
  PrimaryClass primary_;
  std::optional<LogicalSubclass> sub_;
};

struct TaskRecord {
  std::string task_id;
  std::string description;
  std::vector<std::string> attachments;
  std::vector<std::string> tools;
  std::optional<bool> human_label;
  std::optional<std::string> ground_truth;
  std::optional<std::string> final_answer;
  /// Location of the Actor log, relative to the run's log directory.
  std::optional<std::string> log_path;

  /// Throws PreconditionError when task_id or description is empty.
  void validate() const;

  bool operator==(const TaskRecord&) const = default;
};

struct ActorLog {
  std::string task_id;
  std::string text;
  std::string source;
  bool degenerate = false;
};

/// A contiguous slice `[begin, end)` of an ActorLog, in UTF-8 byte offsets.
struct Chunk {
  std::size_t index = 0;
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t token_count = 0;
  std::string text;

  bool operator==(const Chunk&) const = default;
};

struct ChunkSummary {
  std::size_t chunk_index = 0;
  std::string summary;

  bool operator==(const ChunkSummary&) const = default;
};

struct ChecklistItem {
  std::size_t item_id = 0;
  std::string question;
  bool kept = true;
  std::optional<std::string> filter_reason;

  bool operator==(const ChecklistItem&) const = default;
};

/// Inclusive range of adjacent chunks searched together for evidence.
struct ChunkWindow {
  std::size_t first = 0;
  std::size_t last = 0;

  bool operator==(const ChunkWindow&) const = default;
};

/// Evidence extracted from the chunk window [window_first, window_last].
struct Snippet {
  std::size_t chunk_index = 0;
  std::size_t window_first = 0;
  std::size_t window_last = 0;
  std::string text;
  /// Set when the text came from the longest-common-substring fallback
  /// instead of a verbatim extraction.
  bool fallback_match = false;

  bool operator==(const Snippet&) const = default;
};

struct ProofBundle {
  std::size_t item_id = 0;
  std::vector<Snippet> snippets;
  /// Windows the snippets were extracted from, in log order.
  std::vector<ChunkWindow> windows;
  std::string final_answer;
  bool sufficient = false;
  int expansions_used = 0;
  bool expansion_exhausted = false;

  /// The wire-format "proofs" string: fenced snippets joined by blank lines.
  std::string rendered_proofs() const;
};

std::string render_proofs(const std::vector<Snippet>& snippets);

struct CriterionVerdict {
  std::size_t item_id = 0;
  Answer answer = Answer::kNo;
  std::string reason;
  DecisionPath decision_path = DecisionPath::factual(EvidenceSource::kProofs);

  bool operator==(const CriterionVerdict&) const = default;
};

struct EvalEntry {
  std::string question;
  std::string proofs;
  std::string final_answer;
  Answer answer = Answer::kNo;
  std::string reason;
  DecisionPath decision_path = DecisionPath::factual(EvidenceSource::kProofs);

  bool operator==(const EvalEntry&) const = default;
};

struct JudgeReport {
  Answer verdict = Answer::kNo;
  std::vector<EvalEntry> eval;

  bool operator==(const JudgeReport&) const = default;
};

struct AlignmentMetrics {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t tn = 0;
  std::int64_t fn = 0;
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double specificity = 0.0;

  /// Ratios use the zero-denominator convention: an empty ratio is 0.
  static AlignmentMetrics from_counts(std::int64_t tp, std::int64_t fp,
                                      std::int64_t tn, std::int64_t fn);

  std::int64_t total() const noexcept { return tp + fp + tn + fn; }
};

}  // namespace agentjudge
