#include <gtest/gtest.h>

#include "agentjudge/errors.hpp"
#include "agentjudge/types.hpp"

using namespace agentjudge;

TEST(DecisionPath, FactualHasTwoLabels) {
  auto p = DecisionPath::factual(EvidenceSource::kProofs);
  EXPECT_EQ(p.labels(), (std::vector<std::string>{"proofs", "factual"}));
  EXPECT_FALSE(p.sub().has_value());
}

TEST(DecisionPath, LogicalHasThreeLabels) {
  auto p = DecisionPath::logical(EvidenceSource::kProofsAndFinalAnswer, LogicalSubclass::kCoding);
  EXPECT_EQ(p.labels(),
            (std::vector<std::string>{"proofs+final_answer", "logical", "coding"}));
}

TEST(DecisionPath, FromLabelsRoundTripsEveryValidPath) {
  for (auto src : {EvidenceSource::kProofs, EvidenceSource::kProofsAndFinalAnswer,
                   EvidenceSource::kFinalAnswer}) {
    auto f = DecisionPath::factual(src);
    EXPECT_EQ(DecisionPath::from_labels(f.labels()), f);
    for (auto sub : {LogicalSubclass::kReasoning, LogicalSubclass::kCoding}) {
      auto l = DecisionPath::logical(src, sub);
      EXPECT_EQ(DecisionPath::from_labels(l.labels()), l);
    }
  }
}

TEST(DecisionPath, RejectsUnknownOrMisplacedLabels) {
  auto path_of = [](std::vector<std::string> labels) {
    try {
      DecisionPath::from_labels(labels);
    } catch (const SchemaError& e) {
      return e.path();
    }
    return std::string("accepted");
  };
  EXPECT_EQ(path_of({"proofs"}), "$");
  EXPECT_EQ(path_of({"evidence", "factual"}), "$[0]");
  EXPECT_EQ(path_of({"proofs", "numeric"}), "$[1]");
  EXPECT_EQ(path_of({"proofs", "factual", "coding"}), "$");
  EXPECT_EQ(path_of({"proofs", "logical"}), "$");
  EXPECT_EQ(path_of({"proofs", "logical", "guessing"}), "$[2]");
  EXPECT_EQ(path_of({"proofs", "logical", "reasoning"}), "accepted");
}

TEST(Answer, WireLabelsOnly) {
  EXPECT_EQ(answer_from_label("yes"), Answer::kYes);
  EXPECT_EQ(answer_from_label("no"), Answer::kNo);
  EXPECT_THROW(answer_from_label("Yes"), SchemaError);
  EXPECT_THROW(answer_from_label("maybe"), SchemaError);
}

TEST(TaskRecord, ValidateRequiresIdAndDescription) {
  TaskRecord t;
  EXPECT_THROW(t.validate(), PreconditionError);
  t.task_id = "a";
  EXPECT_THROW(t.validate(), PreconditionError);
  t.description = "do it";
  EXPECT_NO_THROW(t.validate());
}

TEST(RenderProofs, FencesAndJoinsSnippets) {
  EXPECT_EQ(render_proofs({}), "");
  std::vector<Snippet> s(2);
  s[0].text = "first";
  s[1].text = "second";
  EXPECT_EQ(render_proofs(s), "```\nfirst\n```\n\n```\nsecond\n```");
}

TEST(AlignmentMetrics, ZeroDenominatorsGiveZero) {
  auto m = AlignmentMetrics::from_counts(0, 0, 5, 3);
  EXPECT_EQ(m.precision, 0.0);
  EXPECT_EQ(m.recall, 0.0);
  EXPECT_DOUBLE_EQ(m.specificity, 1.0);
  EXPECT_DOUBLE_EQ(m.accuracy, 5.0 / 8.0);

  auto empty = AlignmentMetrics::from_counts(0, 0, 0, 0);
  EXPECT_EQ(empty.accuracy, 0.0);
  EXPECT_EQ(empty.specificity, 0.0);
  EXPECT_THROW(AlignmentMetrics::from_counts(-1, 0, 0, 0), PreconditionError);
}

TEST(AlignmentMetrics, RatiosAreInUnitInterval) {
  for (int tp = 0; tp < 5; ++tp)
    for (int fp = 0; fp < 5; ++fp)
      for (int tn = 0; tn < 5; ++tn)
        for (int fn = 0; fn < 5; ++fn) {
          auto m = AlignmentMetrics::from_counts(tp, fp, tn, fn);
          for (double v : {m.accuracy, m.precision, m.recall, m.specificity}) {
            EXPECT_GE(v, 0.0);
            EXPECT_LE(v, 1.0);
          }
          EXPECT_EQ(m.total(), tp + fp + tn + fn);
        }
}
