#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "agentjudge/artifact_parser.hpp"
#include "agentjudge/errors.hpp"
#include "agentjudge/harness.hpp"
#include "agentjudge/metrics.hpp"
#include "agentjudge/report_json.hpp"
#include "agentjudge/services.hpp"

namespace py = pybind11;
using namespace agentjudge;

namespace {

std::shared_ptr<const BpeTokenizer> tokenizer_at(const std::string& path) {
  static std::mutex mutex;
  static std::map<std::string, std::shared_ptr<const BpeTokenizer>> cache;
  const auto resolved = path.empty() ? default_tokenizer_path().string() : path;
  std::lock_guard lock(mutex);
  auto& tok = cache[resolved];
  if (!tok) tok = BpeTokenizer::load(resolved);
  return tok;
}

ServiceOptions mock_options(const std::string& mock_rules) {
  ServiceOptions o;
  o.backend = "mock";
  o.mock_rules = mock_rules;
  return o;
}

RunConfig run_config(const std::string& dataset, const std::string& log_dir,
                     const std::string& output, const std::string& mock_rules, int parallelism,
                     const std::string& verdict_mode) {
  RunConfig c;
  c.dataset_path = dataset;
  c.log_dir = log_dir;
  c.output_dir = output;
  c.cache_dir = std::filesystem::path(output) / ".cache";
  c.backend = "mock";
  c.model = "mock";
  c.mock_rules = mock_rules;
  c.parallelism = parallelism;
  c.verdict_mode = verdict_mode_from_string(verdict_mode);
  return c;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Native core of the agentjudge package.";

  py::register_exception<Error>(m, "AgentJudgeError");

  m.def(
      "token_count",
      [](const std::string& text, const std::string& tokenizer_path) {
        return tokenizer_at(tokenizer_path)->count(text);
      },
      py::arg("text"), py::arg("tokenizer_path") = "");

  m.def(
      "chunk_log",
      [](const std::string& text, std::size_t chunk_tokens, const std::string& tokenizer_path) {
        py::list out;
        for (const auto& c : chunk_log(text, chunk_tokens, *tokenizer_at(tokenizer_path))) {
          py::dict d;
          d["index"] = c.index;
          d["begin"] = c.begin;
          d["end"] = c.end;
          d["token_count"] = c.token_count;
          d["text"] = c.text;
          out.append(d);
        }
        return out;
      },
      py::arg("text"), py::arg("chunk_tokens") = 300, py::arg("tokenizer_path") = "",
      "Chunks are UTF-8 byte spans [begin, end) of the input.");

  m.def(
      "normalize_report",
      [](const std::string& text, int indent) { return serialize_report(parse_report(text), indent); },
      py::arg("text"), py::arg("indent") = 4);

  m.def(
      "score_alignment",
      [](const std::vector<std::pair<std::string, std::string>>& predictions,
         const std::string& dataset) {
        std::vector<Prediction> preds;
        for (const auto& [id, verdict] : predictions) {
          preds.push_back({id, answer_from_label(verdict)});
        }
        return metrics_to_json(score_alignment(preds, load_dataset(dataset))).dump();
      },
      py::arg("predictions"), py::arg("dataset"));

  m.def(
      "render_metrics_table",
      [](const std::string& metrics_json) {
        return render_metrics_table(metrics_table_from_json(nlohmann::json::parse(metrics_json)));
      },
      py::arg("metrics_json"));

  m.def(
      "run_judge",
      [](const std::string& dataset, const std::string& log_dir, const std::string& output,
         const std::string& mock_rules, int parallelism, const std::string& verdict_mode) {
        auto config = run_config(dataset, log_dir, output, mock_rules, parallelism, verdict_mode);
        auto services = make_services(mock_options(mock_rules));
        py::gil_scoped_release release;
        return run_judge(load_dataset(dataset), config, services).manifest.dump();
      },
      py::arg("dataset"), py::arg("log_dir"), py::arg("output"), py::arg("mock_rules"),
      py::arg("parallelism") = 1, py::arg("verdict_mode") = "llm");

  m.def(
      "run_baseline",
      [](const std::string& dataset, const std::string& output, const std::string& mock_rules) {
        RunConfig config = run_config(dataset, "", output, mock_rules, 1, "llm");
        auto services = make_services(mock_options(mock_rules));
        py::gil_scoped_release release;
        return run_baseline(load_dataset(dataset), config, services).manifest.dump();
      },
      py::arg("dataset"), py::arg("output"), py::arg("mock_rules"));
}
