// judge: command-line entry point.
//
//   judge run       judge every task of a dataset and write reports
//   judge baseline  single-call judge over final answers only
//   judge score     confusion-matrix metrics against human labels
//   judge report    markdown table from metrics.json

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "agentjudge/build_info.hpp"
#include "agentjudge/errors.hpp"
#include "agentjudge/harness.hpp"
#include "agentjudge/metrics.hpp"
#include "agentjudge/services.hpp"

namespace fs = std::filesystem;
using namespace agentjudge;

namespace {

struct Options {
  ServiceOptions services;
  RunConfig run;
  std::string verdict_mode = "llm";
  std::string dataset_name;
  std::string method;
  std::string log_level = "info";
};

void add_backend_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--backend", o.services.backend, "Text generation backend")
      ->check(CLI::IsMember({"mock", "http"}))
      ->capture_default_str();
  cmd->add_option("--mock-rules", o.services.mock_rules, "Scripted responses for the mock backend");
  cmd->add_option("--model", o.services.model, "Model name for the http backend")
      ->capture_default_str();
  cmd->add_option("--endpoint", o.services.endpoint, "Chat-completions URL")->capture_default_str();
  cmd->add_option("--api-key-env", o.services.api_key_env, "Environment variable with the API key")
      ->capture_default_str();
  cmd->add_option("--templates", o.services.templates_dir, "Prompt template directory");
  cmd->add_option("--tokenizer", o.services.tokenizer_path, "tiktoken rank file");
  cmd->add_option("--parallelism", o.run.parallelism, "Tasks judged concurrently")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--max-in-flight", o.services.gateway.max_in_flight,
                  "Concurrent backend requests")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}

void apply_common(Options& o) {
  o.run.backend = o.services.backend;
  o.run.model = o.services.backend == "mock" ? "mock" : o.services.model;
  o.run.mock_rules = o.services.mock_rules;
  o.run.verdict_mode = verdict_mode_from_string(o.verdict_mode);
  if (o.run.cache_dir.empty()) o.run.cache_dir = o.run.output_dir / ".cache";
}

std::string dataset_name_for(const Options& o) {
  return o.dataset_name.empty() ? o.run.dataset_path.stem().string() : o.dataset_name;
}

int cmd_run(Options& o) {
  apply_common(o);
  auto records = load_dataset(o.run.dataset_path);
  auto services = make_services(o.services);
  auto result = run_judge(records, o.run, services);
  std::size_t failed = 0;
  for (const auto& t : result.outcomes) failed += t.ok ? 0 : 1;
  std::cout << "judged " << result.outcomes.size() - failed << "/" << result.outcomes.size()
            << " tasks; manifest " << result.content_hash << "\n";
  return result.all_ok() ? 0 : 1;
}

int cmd_baseline(Options& o) {
  apply_common(o);
  auto records = load_dataset(o.run.dataset_path);
  auto services = make_services(o.services);
  auto result = run_baseline(records, o.run, services);
  std::size_t failed = 0;
  for (const auto& t : result.outcomes) failed += t.ok ? 0 : 1;
  std::cout << "baseline judged " << result.outcomes.size() - failed << "/"
            << result.outcomes.size() << " tasks; manifest " << result.content_hash << "\n";
  return result.all_ok() ? 0 : 1;
}

int cmd_score(Options& o) {
  auto records = load_dataset(o.run.dataset_path);
  const auto name = dataset_name_for(o);
  struct Source {
    const char* method;
    const char* file;
  };
  const Source sources[] = {{kJudgeMethod, "predictions.jsonl"},
                            {kBaselineMethod, "baseline_predictions.jsonl"}};
  int scored = 0;
  for (const auto& s : sources) {
    if (!o.method.empty() && o.method != s.method) continue;
    const auto path = o.run.output_dir / s.file;
    if (!fs::exists(path)) continue;
    const auto metrics = score_alignment(read_predictions(path), records);
    merge_metrics(o.run.output_dir, name, s.method, metrics);
    std::cout << name << " / " << method_display_name(s.method)
              << ": accuracy " << format_percent(metrics.accuracy) << ", precision "
              << format_percent(metrics.precision) << ", recall " << format_percent(metrics.recall)
              << ", specificity " << format_percent(metrics.specificity) << " (n="
              << metrics.total() << ")\n";
    ++scored;
  }
  if (scored == 0) {
    std::cerr << "no predictions found in " << o.run.output_dir << "\n";
    return 1;
  }
  return 0;
}

int cmd_report(Options& o) {
  const auto table = read_metrics(o.run.output_dir / "metrics.json");
  std::optional<std::string> manifest_hash;
  const auto manifest_path = o.run.output_dir / "manifest.json";
  if (fs::exists(manifest_path)) {
    std::ifstream in(manifest_path);
    auto doc = nlohmann::json::parse(in, nullptr, false);
    if (doc.is_object() && doc.contains("content_hash") && doc["content_hash"].is_string()) {
      manifest_hash = doc["content_hash"].get<std::string>();
    }
  }
  emit_report(table, o.run.output_dir, manifest_hash);
  std::cout << render_metrics_table(table);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Judge agent task completion from the agent's log"};
  app.set_version_flag("--version", std::string(build_info::kVersion));
  app.require_subcommand(1);
  Options o;
  app.add_option("--log-level", o.log_level, "trace, debug, info, warn, error or off")
      ->capture_default_str();

  auto* run = app.add_subcommand("run", "Judge every task of a dataset");
  run->add_option("--dataset", o.run.dataset_path, "JSONL task records")->required()->check(CLI::ExistingFile);
  run->add_option("--log-dir", o.run.log_dir, "Directory holding the agent logs")
      ->required()
      ->check(CLI::ExistingDirectory);
  run->add_option("--output", o.run.output_dir, "Output directory")->required();
  add_backend_flags(run, o);
  run->add_option("--threshold", o.run.retrieval.relevance_threshold, "Relevance threshold")
      ->capture_default_str();
  run->add_option("--chunk-tokens", o.run.retrieval.chunk_tokens, "Tokens per log chunk")
      ->check(CLI::Range(32, 1 << 20))
      ->capture_default_str();
  run->add_option("--top-k", o.run.retrieval.fallback_top_k, "Chunks taken when none passes")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  run->add_option("--max-expansions", o.run.retrieval.max_expansions, "Context expansion budget")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  run->add_option("--max-questions", o.run.criteria.max_questions, "Checklist size cap")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  run->add_flag("--exclude-plan-sections", o.run.retrieval.exclude_plan_sections,
                "Skip orchestrator plan sections during retrieval");
  run->add_option("--verdict-mode", o.verdict_mode, "How criterion answers become a verdict")
      ->check(CLI::IsMember({"llm", "strict-and", "strict_and"}))
      ->capture_default_str();
  run->add_option("--reranker", o.services.reranker, "lexical or http")
      ->check(CLI::IsMember({"lexical", "http"}));
  run->add_option("--reranker-endpoint", o.services.reranker_endpoint, "Rerank API URL")
      ->capture_default_str();
  run->add_option("--cache-dir", o.run.cache_dir, "Index cache (default <output>/.cache)");
  run->add_option("--seed", o.run.random_seed, "Recorded random seed")->capture_default_str();
  bool no_cache = false;
  run->add_flag("--no-cache", no_cache, "Rebuild every log index");

  auto* baseline = app.add_subcommand("baseline", "Judge final answers only");
  baseline->add_option("--dataset", o.run.dataset_path, "JSONL task records")
      ->required()
      ->check(CLI::ExistingFile);
  baseline->add_option("--output", o.run.output_dir, "Output directory")->required();
  add_backend_flags(baseline, o);

  auto* score = app.add_subcommand("score", "Score predictions against human labels");
  score->add_option("--dataset", o.run.dataset_path, "JSONL task records with human labels")
      ->required()
      ->check(CLI::ExistingFile);
  score->add_option("--output", o.run.output_dir, "Directory with the predictions")
      ->required()
      ->check(CLI::ExistingDirectory);
  score->add_option("--name", o.dataset_name, "Dataset name in metrics.json (default: file stem)");
  score->add_option("--method", o.method, "Score only this method")
      ->check(CLI::IsMember({kJudgeMethod, kBaselineMethod}));

  auto* report = app.add_subcommand("report", "Write report.md from metrics.json");
  report->add_option("--output", o.run.output_dir, "Directory with metrics.json")
      ->required()
      ->check(CLI::ExistingDirectory);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help and friends exit 0; real usage errors exit 2.
    return app.exit(e) == 0 ? 0 : 2;
  }
  spdlog::set_default_logger(spdlog::stderr_color_mt("judge"));
  spdlog::set_level(spdlog::level::from_str(o.log_level));
  o.run.cache = !no_cache;

  try {
    if (*run) return cmd_run(o);
    if (*baseline) return cmd_baseline(o);
    if (*score) return cmd_score(o);
    if (*report) return cmd_report(o);
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 2;
  }
  return 2;
}
