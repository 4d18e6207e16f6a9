#include <gtest/gtest.h>

#include "agentjudge/baseline.hpp"
#include "agentjudge/errors.hpp"
#include "test_support.hpp"

using namespace agentjudge;
using namespace agentjudge::testing;

TEST(Baseline, PromptHoldsTaskAndFinalAnswerOnly) {
  TaskRecord t;
  t.task_id = "b1";
  t.description = "Name the capital of Australia.";
  t.final_answer = "Canberra";
  t.log_path = "b1.log";
  MockSetup m({rule("baseline_judge", {has("final_answer", "Canberra")},
                    R"({"verdict": "yes", "rationale": "correct"})")});
  auto ctx = m.ctx();
  auto v = llm_as_judge(t, ctx);
  EXPECT_EQ(v.verdict, Answer::kYes);
  EXPECT_EQ(v.rationale, "correct");
  const auto calls = m.calls("baseline_judge");
  ASSERT_EQ(calls.size(), 1u);
  EXPECT_EQ(m.backend->recorded().size(), 1u);
  EXPECT_NE(calls[0].prompt.find("Name the capital of Australia."), std::string::npos);
  EXPECT_EQ(calls[0].prompt.find("b1.log"), std::string::npos);
}

TEST(Baseline, LabelOnlyReplyAndReask) {
  TaskRecord t{"b2", "Sort the list.", {}, {}, {}, {}, std::string("[1, 2, 3]"), {}};
  MockSetup m({rule("baseline_judge", {is("feedback", "")}, "Hard to say."),
               rule("baseline_judge", {has("feedback", "JSON object")}, "No")});
  auto ctx = m.ctx();
  EXPECT_EQ(llm_as_judge(t, ctx).verdict, Answer::kNo);
  EXPECT_EQ(m.calls("baseline_judge").size(), 2u);
}

TEST(Baseline, MissingFinalAnswerIsAPrecondition) {
  TaskRecord t;
  t.task_id = "b3";
  t.description = "x";
  MockSetup m({fallback("baseline_judge", "yes")});
  auto ctx = m.ctx();
  EXPECT_THROW(llm_as_judge(t, ctx), PreconditionError);
  EXPECT_TRUE(m.backend->recorded().empty());
}
