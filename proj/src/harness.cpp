#include "agentjudge/harness.hpp"

#include <spdlog/spdlog.h>

#include <atomic>
#include <chrono>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "agentjudge/baseline.hpp"
#include "agentjudge/build_info.hpp"
#include "agentjudge/errors.hpp"
#include "agentjudge/hashing.hpp"
#include "agentjudge/report_json.hpp"
#include "agentjudge/text_util.hpp"

namespace agentjudge {

namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// All output files go through one writer; each file is written to a
// temporary name and renamed into place.
class OutputWriter {
 public:
  explicit OutputWriter(fs::path root) : root_(std::move(root)) {}

  void write(const fs::path& relative, const std::string& content) {
    std::lock_guard lock(mutex_);
    const auto target = root_ / relative;
    fs::create_directories(target.parent_path());
    const auto tmp = target.string() + ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      out << content;
      if (!out) throw Error("cannot write " + tmp);
    }
    fs::rename(tmp, target);
  }

 private:
  fs::path root_;
  std::mutex mutex_;
};

nlohmann::ordered_json usage_json(const std::map<std::string, UsageTotals>& usage) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [tmpl, u] : usage) {
    j[tmpl] = {{"calls", u.calls},
               {"prompt_tokens", u.prompt_tokens},
               {"completion_tokens", u.completion_tokens}};
  }
  return j;
}

std::string file_sha256_or_empty(const fs::path& path) {
  if (path.empty() || !fs::exists(path)) return "";
  return sha256_hex(read_file(path));
}

nlohmann::ordered_json retrieval_json(const RetrievalConfig& r) {
  return {{"chunk_tokens", r.chunk_tokens},
          {"relevance_threshold", r.relevance_threshold},
          {"fallback_top_k", r.fallback_top_k},
          {"expansion_window", r.expansion_window},
          {"max_expansions", r.max_expansions},
          {"exclude_plan_sections", r.exclude_plan_sections}};
}

// Settings that determine the run's output; paths and scheduling excluded.
nlohmann::ordered_json deterministic_config(const RunConfig& config) {
  return {{"backend", config.backend},
          {"model", config.model},
          {"mock_rules_sha256", file_sha256_or_empty(config.mock_rules)},
          {"retrieval", retrieval_json(config.retrieval)},
          {"max_questions", config.criteria.max_questions},
          {"verdict_mode", std::string(to_string(config.verdict_mode))},
          {"random_seed", config.random_seed}};
}

nlohmann::ordered_json config_snapshot(const RunConfig& config) {
  auto j = deterministic_config(config);
  j["dataset_path"] = config.dataset_path.string();
  j["log_dir"] = config.log_dir.string();
  j["output_dir"] = config.output_dir.string();
  j["cache_dir"] = config.cache_dir.string();
  j["mock_rules"] = config.mock_rules.string();
  j["parallelism"] = config.parallelism;
  j["cache"] = config.cache;
  return j;
}

template <typename Fn>
void for_each_task(std::size_t count, int parallelism, Fn&& fn) {
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < count; i = next++) fn(i);
  };
  const auto n = std::min<std::size_t>(static_cast<std::size_t>(std::max(parallelism, 1)), count);
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
}

RunResult assemble_manifest(const std::string& kind, const std::vector<TaskRecord>& records,
                            std::vector<TaskOutcome> outcomes, const RunConfig& config,
                            const JudgeServices& services) {
  RunResult result;
  result.outcomes = std::move(outcomes);

  const auto& catalog = services.gateway->catalog();
  nlohmann::ordered_json tokenizer = {{"name", services.tokenizer->name()},
                                      {"vocab_sha256", services.tokenizer->vocab_sha256()}};
  nlohmann::ordered_json reranker = nlohmann::ordered_json::object();
  if (services.reranker) {
    reranker = {{"kind", std::string(to_string(services.reranker->kind()))},
                {"id", services.reranker->id()}};
  }
  const auto dataset_sha = file_sha256_or_empty(config.dataset_path);

  nlohmann::ordered_json hashed_tasks = nlohmann::ordered_json::array();
  nlohmann::ordered_json tasks = nlohmann::ordered_json::array();
  std::map<std::string, UsageTotals> total_usage;
  std::size_t ok = 0;
  for (const auto& o : result.outcomes) {
    if (o.ok) ++ok;
    const std::string status = o.ok ? "ok" : "failed";
    nlohmann::ordered_json verdict =
        o.verdict ? nlohmann::ordered_json(std::string(to_string(*o.verdict))) : nullptr;
    hashed_tasks.push_back({{"task_id", o.task_id},
                            {"status", status},
                            {"verdict", verdict},
                            {"report_sha256", o.report_sha256}});
    tasks.push_back({{"task_id", o.task_id},
                     {"status", status},
                     {"error", o.error},
                     {"verdict", verdict},
                     {"report_file", o.ok && kind == "judge" ? report_file_name(o.task_id) : ""},
                     {"report_sha256", o.report_sha256},
                     {"seconds", o.seconds},
                     {"chunks", o.chunks},
                     {"index_from_cache", o.index_from_cache},
                     {"verdict_fell_back", o.verdict_fell_back},
                     {"warnings", o.warnings},
                     {"usage", usage_json(o.usage)}});
    for (const auto& [tmpl, u] : o.usage) {
      auto& t = total_usage[tmpl];
      t.calls += u.calls;
      t.prompt_tokens += u.prompt_tokens;
      t.completion_tokens += u.completion_tokens;
    }
  }

  nlohmann::ordered_json hashed = {{"kind", kind},
                                   {"code_version", build_info::kVersion},
                                   {"template_version", catalog.version()},
                                   {"tokenizer", tokenizer},
                                   {"backend", services.gateway->backend_id()},
                                   {"reranker", reranker},
                                   {"config", deterministic_config(config)},
                                   {"dataset_sha256", dataset_sha},
                                   {"tasks", hashed_tasks}};
  result.content_hash = sha256_hex(hashed.dump());

  const auto balance = summarize_dataset(records);
  result.manifest = {{"kind", kind},
                     {"code_version", build_info::kVersion},
                     {"template_version", catalog.version()},
                     {"tokenizer", tokenizer},
                     {"backend", services.gateway->backend_id()},
                     {"reranker", reranker},
                     {"config", config_snapshot(config)},
                     {"dataset_sha256", dataset_sha},
                     {"dataset", {{"count", balance.count},
                                  {"passed", balance.passed},
                                  {"failed", balance.failed},
                                  {"unlabeled", balance.unlabeled}}},
                     {"tasks_ok", ok},
                     {"tasks_failed", result.outcomes.size() - ok},
                     {"tasks", tasks},
                     {"usage_total", usage_json(total_usage)},
                     {"content_hash", result.content_hash}};
  return result;
}

std::string predictions_jsonl(const std::vector<Prediction>& predictions) {
  std::string out;
  for (const auto& p : predictions) {
    nlohmann::ordered_json j = {{"task_id", p.task_id},
                                {"verdict", std::string(to_string(p.verdict))}};
    out += j.dump() + "\n";
  }
  return out;
}

std::string index_jsonl_chunks(const LogIndex& index) {
  std::string out;
  for (const auto& c : index.chunks) {
    nlohmann::ordered_json j = {{"index", c.index},
                                {"begin", c.begin},
                                {"end", c.end},
                                {"token_count", c.token_count},
                                {"text", c.text}};
    out += j.dump() + "\n";
  }
  return out;
}

std::string index_jsonl_summaries(const LogIndex& index) {
  std::string out;
  for (const auto& s : index.summaries) {
    nlohmann::ordered_json j = {{"chunk_index", s.chunk_index}, {"summary", s.summary}};
    out += j.dump() + "\n";
  }
  return out;
}

nlohmann::ordered_json trace_json(const TaskTrace& trace) {
  nlohmann::ordered_json checklist = nlohmann::ordered_json::array();
  for (const auto& item : trace.checklist) {
    checklist.push_back({{"item_id", item.item_id},
                         {"question", item.question},
                         {"kept", item.kept},
                         {"filter_reason", item.filter_reason ? nlohmann::ordered_json(*item.filter_reason)
                                                              : nlohmann::ordered_json(nullptr)}});
  }
  nlohmann::ordered_json checks = nlohmann::ordered_json::array();
  for (const auto& c : trace.checks) {
    nlohmann::ordered_json selected = nlohmann::ordered_json::array();
    for (const auto& s : c.retrieval.selected) {
      selected.push_back({{"chunk_index", s.chunk_index}, {"score", s.score}});
    }
    nlohmann::ordered_json snippets = nlohmann::ordered_json::array();
    for (const auto& s : c.bundle.snippets) {
      snippets.push_back({{"chunk_index", s.chunk_index},
                          {"window", {s.window_first, s.window_last}},
                          {"fallback_match", s.fallback_match}});
    }
    checks.push_back({{"item_id", c.verdict.item_id},
                      {"primary", std::string(to_string(c.cls.primary))},
                      {"selected", selected},
                      {"retrieval_fallback", c.retrieval.fallback},
                      {"snippets", snippets},
                      {"sufficient", c.bundle.sufficient},
                      {"expansions_used", c.bundle.expansions_used},
                      {"expansion_exhausted", c.bundle.expansion_exhausted}});
  }
  return {{"checklist", checklist},
          {"index_key", trace.index.key},
          {"checks", checks},
          {"verdict_mode", std::string(to_string(trace.outcome.mode_used))},
          {"verdict_fell_back", trace.outcome.fell_back},
          {"verdict_rationale", trace.outcome.rationale}};
}

}  // namespace

std::vector<TaskRecord> load_dataset(const fs::path& path, Diagnostics* diagnostics) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetError(0, "cannot read dataset " + path.string());
  std::vector<TaskRecord> records;
  std::set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    nlohmann::ordered_json doc;
    try {
      doc = nlohmann::ordered_json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw DatasetError(line_no, std::string("invalid JSON: ") + e.what());
    }
    TaskRecord record;
    try {
      record = task_from_json(doc);
    } catch (const SchemaError& e) {
      throw DatasetError(line_no, e.what());
    }
    if (!ids.insert(record.task_id).second) {
      throw DatasetError(line_no, "duplicate task_id " + record.task_id);
    }
    records.push_back(std::move(record));
  }
  if (records.empty()) {
    const std::string msg = "dataset " + path.string() + " has no records";
    spdlog::warn("{}", msg);
    if (diagnostics) diagnostics->warn(msg);
  } else {
    const auto s = summarize_dataset(records);
    spdlog::info("loaded {} records ({} passed, {} failed, {} unlabeled)", s.count, s.passed,
                 s.failed, s.unlabeled);
  }
  return records;
}

DatasetSummary summarize_dataset(const std::vector<TaskRecord>& records) {
  DatasetSummary s;
  s.count = records.size();
  for (const auto& r : records) {
    if (!r.human_label) {
      ++s.unlabeled;
    } else if (*r.human_label) {
      ++s.passed;
    } else {
      ++s.failed;
    }
  }
  return s;
}

void RunConfig::validate(bool needs_logs) const {
  if (parallelism < 1) throw PreconditionError("parallelism must be >= 1");
  if (!dataset_path.empty() && !fs::exists(dataset_path)) {
    throw PreconditionError("dataset not found: " + dataset_path.string());
  }
  if (needs_logs && !fs::is_directory(log_dir)) {
    throw PreconditionError("log directory not found: " + log_dir.string());
  }
  if (output_dir.empty()) throw PreconditionError("output directory must be set");
  retrieval.validate();
}

fs::path log_path_for(const TaskRecord& task, const fs::path& log_dir) {
  if (task.log_path && !task.log_path->empty()) return log_dir / *task.log_path;
  return log_dir / (task.task_id + ".log");
}

std::string report_file_name(const std::string& task_id) {
  auto safe = text::safe_file_name(task_id);
  if (safe != task_id) safe += "-" + sha256_hex(task_id).substr(0, 8);
  return safe + ".json";
}

JudgeReport judge_task(const TaskRecord& task, const std::string& log_text,
                       const JudgeServices& services, const RunConfig& config,
                       const JudgeContext& ctx, const IndexCache* cache, TaskTrace* trace) {
  task.validate();
  services.handlers.validate();
  if (!services.reranker || !services.tokenizer) {
    throw PreconditionError("judge services are incomplete");
  }

  auto checklist = generate_checklist(task, ctx, config.criteria);
  checklist = filter_checklist(std::move(checklist), task, ctx);
  auto index = build_index(log_text, config.retrieval, *services.tokenizer, ctx, cache);

  std::vector<CriterionCheck> checks;
  std::vector<ProofBundle> bundles;
  std::vector<CriterionVerdict> verdicts;
  for (const auto& item : checklist) {
    if (!item.kept) continue;
    auto check = check_criterion(item, task, index, *services.reranker, config.retrieval,
                                 services.handlers, ctx);
    bundles.push_back(check.bundle);
    verdicts.push_back(check.verdict);
    checks.push_back(std::move(check));
  }
  auto outcome = decide(task, checklist, bundles, verdicts, config.verdict_mode, ctx);
  auto report = outcome.report;
  if (trace) {
    trace->checklist = std::move(checklist);
    trace->index = std::move(index);
    trace->checks = std::move(checks);
    trace->outcome = std::move(outcome);
  }
  return report;
}

bool RunResult::all_ok() const {
  for (const auto& o : outcomes) {
    if (!o.ok) return false;
  }
  return true;
}

std::vector<Prediction> RunResult::predictions() const {
  std::vector<Prediction> out;
  for (const auto& o : outcomes) {
    if (o.ok && o.verdict) out.push_back(Prediction{o.task_id, *o.verdict});
  }
  return out;
}

RunResult run_judge(const std::vector<TaskRecord>& records, const RunConfig& config,
                    const JudgeServices& services) {
  config.validate(true);
  fs::create_directories(config.output_dir);
  OutputWriter writer(config.output_dir);
  std::optional<IndexCache> cache;
  if (config.cache) {
    fs::create_directories(config.cache_dir);
    cache.emplace(config.cache_dir);
  }

  std::vector<TaskOutcome> outcomes(records.size());
  for_each_task(records.size(), config.parallelism, [&](std::size_t i) {
    const auto& task = records[i];
    auto& o = outcomes[i];
    o.task_id = task.task_id;
    Diagnostics diagnostics;
    UsageLedger usage;
    JudgeContext ctx{services.gateway.get(), &usage, &diagnostics};
    const auto start = std::chrono::steady_clock::now();
    try {
      const auto log_file = log_path_for(task, config.log_dir);
      if (!fs::exists(log_file)) throw Error("missing log file " + log_file.string());
      const auto log_text = read_file(log_file);
      TaskTrace trace;
      auto report = judge_task(task, log_text, services, config, ctx,
                               cache ? &*cache : nullptr, &trace);
      const auto bytes = serialize_report(report) + "\n";
      const auto stem = fs::path(report_file_name(task.task_id)).stem();
      writer.write(report_file_name(task.task_id), bytes);
      writer.write(fs::path("index") / stem / "chunks.jsonl", index_jsonl_chunks(trace.index));
      writer.write(fs::path("index") / stem / "summaries.jsonl",
                   index_jsonl_summaries(trace.index));
      writer.write(fs::path("traces") / (stem.string() + ".json"), trace_json(trace).dump(2) + "\n");
      o.ok = true;
      o.verdict = report.verdict;
      o.report_sha256 = sha256_hex(bytes);
      o.chunks = trace.index.chunks.size();
      o.index_from_cache = trace.index.from_cache;
      o.verdict_fell_back = trace.outcome.fell_back;
    } catch (const std::exception& e) {
      o.ok = false;
      o.error = e.what();
      spdlog::error("task {} failed: {}", task.task_id, e.what());
    }
    o.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    o.warnings = diagnostics.warnings();
    o.usage = usage.snapshot();
  });

  auto result = assemble_manifest("judge", records, std::move(outcomes), config, services);
  writer.write("predictions.jsonl", predictions_jsonl(result.predictions()));
  writer.write("manifest.json", result.manifest.dump(2) + "\n");
  return result;
}

RunResult run_baseline(const std::vector<TaskRecord>& records, const RunConfig& config,
                       const JudgeServices& services) {
  config.validate(false);
  fs::create_directories(config.output_dir);
  OutputWriter writer(config.output_dir);

  std::vector<TaskOutcome> outcomes(records.size());
  for_each_task(records.size(), config.parallelism, [&](std::size_t i) {
    const auto& task = records[i];
    auto& o = outcomes[i];
    o.task_id = task.task_id;
    Diagnostics diagnostics;
    UsageLedger usage;
    JudgeContext ctx{services.gateway.get(), &usage, &diagnostics};
    const auto start = std::chrono::steady_clock::now();
    try {
      task.validate();
      auto v = llm_as_judge(task, ctx);
      nlohmann::ordered_json j = {{"verdict", std::string(to_string(v.verdict))},
                                  {"rationale", v.rationale}};
      const auto bytes = j.dump(4) + "\n";
      const auto stem = fs::path(report_file_name(task.task_id)).stem();
      writer.write(fs::path("baseline") / (stem.string() + ".json"), bytes);
      o.ok = true;
      o.verdict = v.verdict;
      o.report_sha256 = sha256_hex(bytes);
    } catch (const std::exception& e) {
      o.ok = false;
      o.error = e.what();
      spdlog::error("baseline for task {} failed: {}", task.task_id, e.what());
    }
    o.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    o.warnings = diagnostics.warnings();
    o.usage = usage.snapshot();
  });

  auto result = assemble_manifest("baseline", records, std::move(outcomes), config, services);
  writer.write("baseline_predictions.jsonl", predictions_jsonl(result.predictions()));
  writer.write("baseline_manifest.json", result.manifest.dump(2) + "\n");
  return result;
}

std::vector<Prediction> read_predictions(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::vector<Prediction> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      out.push_back(Prediction{j.at("task_id").get<std::string>(),
                               answer_from_label(j.at("verdict").get<std::string>())});
    } catch (const std::exception& e) {
      throw DatasetError(line_no, path.string() + ": " + e.what());
    }
  }
  return out;
}

void write_predictions(const std::vector<Prediction>& predictions, const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << predictions_jsonl(predictions);
  if (!out) throw Error("cannot write " + path.string());
}

MetricsTable read_metrics(const fs::path& path) {
  try {
    return metrics_table_from_json(nlohmann::json::parse(read_file(path)));
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError("$", e.what());
  }
}

MetricsTable merge_metrics(const fs::path& dir, const std::string& dataset_name,
                           const std::string& method, const AlignmentMetrics& metrics) {
  const auto path = dir / "metrics.json";
  MetricsTable table;
  if (fs::exists(path)) table = read_metrics(path);
  table[dataset_name][method] = metrics;
  fs::create_directories(dir);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << metrics_table_to_json(table).dump(2) << '\n';
  if (!out) throw Error("cannot write " + path.string());
  return table;
}

}  // namespace agentjudge
