// Acceptance suite: one PASS/FAIL line per criterion, exit status 0 iff all pass.

#include <chrono>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include "agentjudge/artifact_parser.hpp"
#include "agentjudge/baseline.hpp"
#include "agentjudge/composer.hpp"
#include "agentjudge/harness.hpp"
#include "agentjudge/metrics.hpp"
#include "agentjudge/report_json.hpp"
#include "agentjudge/text_util.hpp"
#include "agentjudge/verdict.hpp"
#include "test_support.hpp"

#include <spdlog/spdlog.h>

using namespace agentjudge;
using namespace agentjudge::testing;

namespace {

// Collects the first few failures of a criterion.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    if (ok) return;
    ++failures_;
    if (failures_ <= 3) messages_ += (messages_.empty() ? "" : "; ") + what;
  }
  bool ok() const { return failures_ == 0; }
  std::string detail() const {
    return messages_ + (failures_ > 3 ? " (+" + std::to_string(failures_ - 3) + " more)" : "");
  }

 private:
  int failures_ = 0;
  std::string messages_;
};

struct Criterion {
  int number;
  std::string title;
  double budget_seconds;
  std::function<void(Check&)> body;
};

class FixedReranker : public Reranker {
 public:
  explicit FixedReranker(std::vector<double> scores) : scores_(std::move(scores)) {}
  std::vector<double> score(std::string_view, const std::vector<std::string>&) const override {
    return scores_;
  }
  RerankerKind kind() const override { return RerankerKind::kLexicalMock; }
  std::string id() const override { return "fixed"; }

 private:
  std::vector<double> scores_;
};

LogIndex index_of(const std::vector<std::string>& texts) {
  LogIndex index;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    index.chunks.push_back({i, pos, pos + texts[i].size(), 1, texts[i]});
    index.summaries.push_back({i, "summary " + std::to_string(i)});
    pos += texts[i].size();
  }
  return index;
}

std::string random_log(std::mt19937& rng, std::size_t length) {
  static const std::vector<std::string> parts = {
      "the ",  "agent ", "called ", "web_search", "(",     ")",  "\n",   "\n\n",      "  ",
      "\t",    "42",     "3.14",   "é",          "中文", "😀", "Ω",    "'s ",       "ERROR: ",
      "{\"k\": 1}", "```", "ﬁ",  "\r\n",       "https://example.org/a?b=c", "    return x\n"};
  std::string s;
  while (s.size() < length) s += parts[rng() % parts.size()];
  std::size_t cut = std::min(length, s.size());
  while (cut > 0 && !text::is_codepoint_boundary(s, cut)) --cut;
  return s.substr(0, cut);
}

void check_partition(Check& c, const std::string& log, const std::vector<Chunk>& chunks,
                     std::size_t limit, const std::string& label) {
  std::size_t pos = 0;
  std::string joined;
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    const auto& k = chunks[i];
    c.expect(k.index == i && k.begin == pos && k.begin < k.end, label + ": chunks not contiguous");
    c.expect(k.token_count <= limit, label + ": chunk over the token limit");
    c.expect(tokenizer()->count(k.text) == k.token_count, label + ": token count mismatch");
    joined += k.text;
    pos = k.end;
  }
  c.expect(joined == log, label + ": chunks do not reconstruct the log");
}

// Criterion 1
void wire_format(Check& c) {
  for (const char* name : {"gaia_kuznetzov.json", "bigcode_task_func.json"}) {
    const auto text = read_file(fixtures_dir() / "appendix" / name);
    const auto report = parse_report(text);
    c.expect(strip_json_whitespace(serialize_report(report)) == strip_json_whitespace(text),
             std::string(name) + " does not round-trip");
    for (const auto& e : report.eval) {
      try {
        DecisionPath::from_labels(e.decision_path.labels());
      } catch (const std::exception& ex) {
        c.expect(false, std::string(name) + ": " + ex.what());
      }
    }
  }
  const auto gaia = parse_report(read_file(fixtures_dir() / "appendix" / "gaia_kuznetzov.json"));
  c.expect(gaia.verdict == Answer::kNo && gaia.eval.size() == 3, "GAIA fixture content");
  const auto bcb = parse_report(read_file(fixtures_dir() / "appendix" / "bigcode_task_func.json"));
  c.expect(bcb.verdict == Answer::kYes && bcb.eval.size() == 5, "BigCode fixture content");
}

// Criterion 2
void chunker(Check& c) {
  std::mt19937 rng(20240601);
  for (int i = 0; i < 200; ++i) {
    const std::size_t length = i == 0 ? 0 : rng() % 100001;
    const auto log = random_log(rng, length);
    check_partition(c, log, chunk_log(log, 300, *tokenizer()), 300,
                    "log " + std::to_string(i));
  }
  const auto fixture = read_file(fixtures_dir() / "chunking" / "log_650_tokens.txt");
  const auto chunks = chunk_log(fixture, 300, *tokenizer());
  std::vector<std::size_t> sizes;
  for (const auto& k : chunks) sizes.push_back(k.token_count);
  c.expect(sizes == std::vector<std::size_t>{300, 300, 50}, "650-token fixture is not 300/300/50");
  check_partition(c, fixture, chunks, 300, "650-token fixture");
}

// Criterion 3
void retrieval(Check& c) {
  std::mt19937 rng(77);
  const std::vector<std::string> noise = {"browser", "opened", "page", "scrolled", "clicked",
                                          "download", "folder", "listing", "retry", "timeout"};
  const std::string question = "Which museum stored the Kuznetzov specimens?";
  LexicalReranker lexical;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 5 + rng() % 40;
    const std::size_t needle = rng() % n;
    std::vector<ChunkSummary> summaries;
    for (std::size_t i = 0; i < n; ++i) {
      std::string s;
      for (int w = 0; w < 8; ++w) s += noise[rng() % noise.size()] + " ";
      if (i == needle) s += "the museum stored the Kuznetzov specimens";
      summaries.push_back({i, s});
    }
    std::vector<std::string> texts;
    for (const auto& s : summaries) texts.push_back(s.summary);
    const double needle_score = lexical.score(question, texts)[needle];
    RetrievalConfig cfg;
    cfg.relevance_threshold = std::uniform_real_distribution<double>(0.01, needle_score)(rng);
    auto res = retrieve_chunks(question, summaries, lexical, cfg);
    bool found = false;
    for (const auto& s : res.selected) found = found || s.chunk_index == needle;
    c.expect(found && !res.fallback, "needle missed in trial " + std::to_string(trial));
  }

  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 3 + rng() % 20;
    std::vector<double> scores(n);
    for (auto& s : scores) s = std::uniform_real_distribution<double>(0.0, 0.49)(rng);
    std::vector<ChunkSummary> summaries;
    for (std::size_t i = 0; i < n; ++i) summaries.push_back({i, "x"});
    RetrievalConfig cfg;
    cfg.fallback_top_k = 1 + rng() % 3;
    auto res = retrieve_chunks("q", summaries, FixedReranker(scores), cfg);
    c.expect(res.fallback && res.selected.size() == cfg.fallback_top_k,
             "fallback did not return exactly top-k");
  }

  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> scores(1 + rng() % 30);
    for (auto& s : scores) s = u(rng);
    std::vector<ChunkSummary> summaries;
    for (std::size_t i = 0; i < scores.size(); ++i) summaries.push_back({i, "x"});
    double lo = u(rng), hi = u(rng);
    if (lo > hi) std::swap(lo, hi);
    RetrievalConfig a, b;
    a.relevance_threshold = lo;
    b.relevance_threshold = hi;
    FixedReranker r(scores);
    auto ra = retrieve_chunks("q", summaries, r, a);
    auto rb = retrieve_chunks("q", summaries, r, b);
    std::set<std::size_t> sa, sb;
    if (!ra.fallback) {
      for (const auto& s : ra.selected) sa.insert(s.chunk_index);
    }
    if (!rb.fallback) {
      for (const auto& s : rb.selected) sb.insert(s.chunk_index);
    }
    c.expect(std::includes(sa.begin(), sa.end(), sb.begin(), sb.end()),
             "raising the threshold enlarged the passing set");
  }
}

// Criterion 4
void dispatch(Check& c) {
  struct Scripted {
    std::string primary;
    std::string logical;
    std::size_t path_length;
    std::string handler_template;
  };
  const std::vector<Scripted> classes = {
      {"factual", "reasoning", 2, "verify_factual"},
      {"logical", "reasoning", 3, "verify_reasoning"},
      {"logical", "coding", 3, "coding_check_script"},
  };
  // snippet reply, sufficiency reply
  const std::vector<std::pair<std::string, std::string>> evidence = {
      {"NONE", "yes"}, {"needle 2", "no"}, {"needle 2", "yes"}};
  auto index = index_of({"noise 0 ", "noise 1 ", "needle 2 ", "noise 3 "});
  FixedReranker reranker({0.0, 0.0, 0.9, 0.0});
  auto sandbox = std::make_shared<Sandbox>();
  TaskRecord task;
  task.task_id = "dispatch";
  task.description = "Find the needle.";
  task.final_answer = "needle";

  for (const auto& cls : classes) {
    for (const auto& [snippet, sufficient] : evidence) {
      MockSetup m({fallback("classify_primary", cls.primary),
                   fallback("classify_logical", cls.logical),
                   fallback("snippet_extract", snippet),
                   fallback("proof_sufficiency", sufficient),
                   fallback("verify_factual", R"({"answer": "yes", "reason": "r"})"),
                   fallback("verify_reasoning", R"({"answer": "yes", "reason": "r"})"),
                   fallback("coding_check_script", "```python\nprint('ok')\n```")});
      auto ctx = m.ctx();
      RetrievalConfig cfg;
      auto check = check_criterion({0, "Is there a needle?", true, {}}, task, index, reranker,
                                   cfg, HandlerRegistry::defaults(sandbox), ctx);
      const auto labels = check.verdict.decision_path.labels();
      const std::string tag = cls.primary + "/" + cls.logical + "/" + snippet + "/" + sufficient;
      c.expect(labels.size() == cls.path_length, tag + ": wrong path length");
      c.expect(check.verdict.reason.rfind("verification failed", 0) != 0,
               tag + ": handler failed: " + check.verdict.reason);
      const auto calls = m.calls(cls.handler_template);
      if (calls.empty()) {
        c.expect(false, tag + ": handler not called");
        continue;
      }
      const auto& prompt_evidence = calls.back().variables.at("evidence");
      const bool has_proofs = prompt_evidence.find("## Proofs") != std::string::npos;
      const bool has_answer = prompt_evidence.find("## Final answer") != std::string::npos;
      const std::string expected = has_proofs && has_answer ? "proofs+final_answer"
                                   : has_proofs             ? "proofs"
                                                            : "final_answer";
      c.expect(labels[0] == expected, tag + ": label " + labels[0] + " but prompt holds " + expected);
    }
  }

  std::vector<std::string> texts;
  for (int i = 0; i < 12; ++i) texts.push_back("chunk " + std::to_string(i) + " ");
  auto long_index = index_of(texts);
  std::vector<double> scores(12, 0.0);
  scores[6] = 0.9;
  FixedReranker long_reranker(scores);
  for (int budget = 0; budget <= 6; ++budget) {
    MockSetup m({fallback("classify_primary", "factual"), fallback("snippet_extract", "chunk"),
                 fallback("proof_sufficiency", "no"),
                 fallback("verify_factual", R"({"answer": "no", "reason": "r"})")});
    auto ctx = m.ctx();
    RetrievalConfig cfg;
    cfg.max_expansions = budget;
    auto check = check_criterion({0, "q?", true, {}}, task, long_index, long_reranker, cfg,
                                 HandlerRegistry::defaults(sandbox), ctx);
    c.expect(check.bundle.expansions_used <= budget && check.bundle.expansion_exhausted,
             "expansion exceeded budget " + std::to_string(budget));
    c.expect(m.calls("proof_sufficiency").size() <= static_cast<std::size_t>(budget) + 1,
             "too many sufficiency checks for budget " + std::to_string(budget));
  }
}

// Criterion 5
void verdicts(Check& c) {
  std::mt19937 rng(5);
  MockSetup strict({});
  auto strict_ctx = strict.ctx();
  TaskRecord task;
  task.task_id = "v";
  task.description = "d";
  auto build = [](const std::vector<Answer>& answers, const std::vector<std::string>& questions) {
    std::tuple<std::vector<ChecklistItem>, std::vector<ProofBundle>, std::vector<CriterionVerdict>>
        out;
    for (std::size_t i = 0; i < answers.size(); ++i) {
      std::get<0>(out).push_back({i, questions[i], true, {}});
      ProofBundle b;
      b.item_id = i;
      std::get<1>(out).push_back(b);
      CriterionVerdict v;
      v.item_id = i;
      v.answer = answers[i];
      std::get<2>(out).push_back(v);
    }
    return out;
  };
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<Answer> answers(1 + rng() % 10);
    bool all = true;
    for (auto& a : answers) {
      a = rng() % 3 == 0 ? Answer::kNo : Answer::kYes;
      all = all && a == Answer::kYes;
    }
    std::vector<std::string> qs(answers.size(), "q?");
    auto [items, bundles, vs] = build(answers, qs);
    auto out = decide(task, items, bundles, vs, VerdictMode::kStrictAnd, strict_ctx);
    c.expect(out.report.verdict == (all ? Answer::kYes : Answer::kNo),
             "strict_and differs from the conjunction");
  }
  for (const auto& [name, expected] : std::vector<std::pair<std::string, Answer>>{
           {"gaia_kuznetzov.json", Answer::kNo}, {"bigcode_task_func.json", Answer::kYes}}) {
    const auto report = parse_report(read_file(fixtures_dir() / "appendix" / name));
    std::vector<Answer> answers;
    std::vector<std::string> qs;
    for (const auto& e : report.eval) {
      answers.push_back(e.answer);
      qs.push_back(e.question);
    }
    auto [items, bundles, vs] = build(answers, qs);
    MockSetup m({rule("verdict", {has("evals", "\"answer\": \"no\"")},
                      R"({"verdict": "no", "rationale": "a criterion failed"})"),
                 rule("verdict", {lacks("evals", "\"answer\": \"no\"")},
                      R"({"verdict": "yes", "rationale": "all criteria met"})")});
    auto ctx = m.ctx();
    auto llm = decide(task, items, bundles, vs, VerdictMode::kLlm, ctx);
    auto conj = decide(task, items, bundles, vs, VerdictMode::kStrictAnd, ctx);
    c.expect(llm.report.verdict == expected && conj.report.verdict == expected && !llm.fell_back,
             name + ": llm and strict_and disagree with the fixture");
  }
}

// Criterion 6
void metrics(Check& c) {
  auto build = [](int tp, int fp, int tn, int fn) {
    std::vector<TaskRecord> records;
    std::vector<Prediction> preds;
    int id = 0;
    auto add = [&](int n, bool label, Answer p) {
      for (int i = 0; i < n; ++i) {
        TaskRecord t;
        t.task_id = std::to_string(id++);
        t.description = "d";
        t.human_label = label;
        records.push_back(t);
        preds.push_back({t.task_id, p});
      }
    };
    add(tp, true, Answer::kYes);
    add(fp, false, Answer::kYes);
    add(tn, false, Answer::kNo);
    add(fn, true, Answer::kNo);
    return score_alignment(preds, records);
  };
  c.expect(format_percent(build(14, 9, 12, 7).accuracy) == "61.90%", "26/42");
  c.expect(format_percent(build(14, 5, 14, 5).accuracy) == "73.68%", "28/38");
  c.expect(format_percent(build(12, 7, 12, 7).accuracy) == "63.16%", "24/38");
  const auto zero = build(0, 0, 3, 0);
  c.expect(zero.precision == 0.0 && zero.recall == 0.0 && format_percent(zero.recall) == "0.00%",
           "zero-denominator convention");

  std::mt19937 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + rng() % 80;
    std::vector<TaskRecord> records;
    std::vector<Prediction> preds;
    for (int i = 0; i < n; ++i) {
      TaskRecord t;
      t.task_id = "r" + std::to_string(i);
      t.description = "d";
      t.human_label = rng() % 2 == 0;
      records.push_back(t);
      preds.push_back({t.task_id, rng() % 2 == 0 ? Answer::kYes : Answer::kNo});
    }
    const auto m = score_alignment(preds, records);
    c.expect(m.tp + m.fp + m.tn + m.fn == n, "tp+fp+tn+fn != N");
    c.expect(m.accuracy == static_cast<double>(m.tp + m.tn) / n, "accuracy identity");
  }
}

// Criterion 7
void determinism(Check& c) {
  TempDir out;
  const auto records = load_dataset(e2e_dir() / "dataset.jsonl");
  auto first = run_judge(records, e2e_config(out.path()), e2e_services());
  std::map<std::string, std::string> reports;
  for (const auto& r : records) reports[r.task_id] = read_file(out.path() / report_file_name(r.task_id));
  auto second = run_judge(records, e2e_config(out.path()), e2e_services());
  c.expect(first.all_ok() && second.all_ok(), "a task failed");
  c.expect(records.size() == 3, "fixture set is not 3 tasks");
  c.expect(first.content_hash == second.content_hash, "manifest hash differs between runs");
  for (const auto& r : records) {
    c.expect(reports[r.task_id] == read_file(out.path() / report_file_name(r.task_id)),
             r.task_id + ": report bytes differ between runs");
  }
}

// Criterion 8
void baseline_isolation(Check& c) {
  const auto records = load_dataset(e2e_dir() / "dataset.jsonl");
  auto backend = MockBackend::from_file(e2e_dir() / "mock_rules.json");
  auto gateway = std::make_shared<LlmGateway>(catalog(), backend, tokenizer(), fast_gateway_options());
  for (const auto& task : records) {
    UsageLedger usage;
    Diagnostics diag;
    JudgeContext ctx{gateway.get(), &usage, &diag};
    const auto before = backend->recorded().size();
    llm_as_judge(task, ctx);
    const auto recorded = backend->recorded();
    c.expect(recorded.size() == before + 1, task.task_id + ": baseline made extra calls");
    const auto& prompt = recorded.back().prompt;
    c.expect(prompt.find(*task.final_answer) != std::string::npos,
             task.task_id + ": final answer missing from the prompt");
    const auto log = read_file(log_path_for(task, e2e_dir() / "logs"));
    for (const auto& line : text::split_lines(log)) {
      const auto t = text::trim(line);
      if (t.size() < 8) continue;
      if (task.final_answer->find(t) != std::string::npos) continue;
      if (task.description.find(t) != std::string::npos) continue;
      c.expect(prompt.find(t) == std::string::npos,
               task.task_id + ": log line leaked into the prompt: " + t);
    }
  }
}

}  // namespace

int main() {
  spdlog::set_level(spdlog::level::err);
  const std::vector<Criterion> criteria = {
      {1, "wire-format fidelity of the appendix evaluations", 1.0, wire_format},
      {2, "chunker partitions 200 random logs and the 650-token fixture", 10.0, chunker},
      {3, "retrieval needle, fallback and threshold monotonicity", 5.0, retrieval},
      {4, "dispatch totality, decision path integrity and bounded expansion", 30.0, dispatch},
      {5, "verdict semantics", 5.0, verdicts},
      {6, "metrics oracle", 1.0, metrics},
      {7, "end-to-end determinism over the 3-task fixture set", 60.0, determinism},
      {8, "baseline prompt holds the final answer and no log content", 5.0, baseline_isolation},
  };
  int failed = 0;
  for (const auto& cr : criteria) {
    Check check;
    const auto start = std::chrono::steady_clock::now();
    try {
      cr.body(check);
    } catch (const std::exception& e) {
      check.expect(false, std::string("exception: ") + e.what());
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    check.expect(seconds < cr.budget_seconds,
                 "took " + std::to_string(seconds) + "s, budget " +
                     std::to_string(cr.budget_seconds) + "s");
    std::ostringstream line;
    line.precision(2);
    line << std::fixed << (check.ok() ? "PASS" : "FAIL") << " criterion " << cr.number << ": "
         << cr.title << " (" << seconds << "s)";
    if (!check.ok()) line << " -- " << check.detail();
    std::cout << line.str() << std::endl;
    if (!check.ok()) ++failed;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed"
            << std::endl;
  return failed == 0 ? 0 : 1;
}
