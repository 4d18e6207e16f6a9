#include <gtest/gtest.h>

#include "agentjudge/errors.hpp"
#include "agentjudge/templates.hpp"
#include "test_support.hpp"

using namespace agentjudge;
using namespace agentjudge::testing;

TEST(Templates, RenderSubstitutesPlaceholders) {
  TemplateCatalog c;
  c.add("greet", "Hello {{name}}, {{name}}! {{what}}");
  EXPECT_EQ(c.render("greet", {{"name", "Ada"}, {"what", "hi"}, {"unused", "x"}}),
            "Hello Ada, Ada! hi");
  EXPECT_EQ(c.placeholders("greet"), (std::set<std::string>{"name", "what"}));
}

TEST(Templates, UnknownTemplateAndUnboundPlaceholderFail) {
  TemplateCatalog c;
  c.add("greet", "Hello {{name}}");
  EXPECT_THROW(c.render("missing", {}), TemplateError);
  EXPECT_THROW(c.render("greet", {}), TemplateError);
  EXPECT_THROW(c.render("greet", {{"nam", "x"}}), PreconditionError);
}

TEST(Templates, SubstitutedValuesAreNotReexpanded) {
  TemplateCatalog c;
  c.add("t", "[{{a}}]");
  EXPECT_EQ(c.render("t", {{"a", "{{b}}"}}), "[{{b}}]");
}

TEST(Templates, VersionTracksContent) {
  TemplateCatalog a;
  a.add("t", "one");
  TemplateCatalog b;
  b.add("t", "one");
  EXPECT_EQ(a.version(), b.version());
  b.add("t", "two");
  EXPECT_NE(a.version(), b.version());
  EXPECT_EQ(a.version().size(), 16u);
}

TEST(Templates, BundledCatalogHasEveryPipelineTemplate) {
  auto c = catalog();
  const std::map<std::string, std::set<std::string>> expected = {
      {"criteria_gen", {"task", "attachments", "tools", "max_questions", "feedback"}},
      {"criteria_filter", {"task", "questions", "feedback"}},
      {"chunk_summary", {"chunk", "feedback"}},
      {"snippet_extract", {"task", "question", "excerpt", "feedback"}},
      {"classify_primary", {"task", "question", "feedback"}},
      {"classify_logical", {"task", "question", "feedback"}},
      {"proof_sufficiency", {"task", "question", "proofs", "feedback"}},
      {"verify_factual", {"task", "question", "evidence", "feedback"}},
      {"verify_reasoning", {"task", "question", "evidence", "feedback"}},
      {"coding_check_script", {"task", "question", "evidence", "feedback"}},
      {"verdict", {"task", "evals", "feedback"}},
      {"baseline_judge", {"task", "final_answer", "feedback"}},
  };
  for (const auto& [id, vars] : expected) {
    ASSERT_TRUE(c->has(id)) << id;
    EXPECT_EQ(c->placeholders(id), vars) << id;
  }
}
