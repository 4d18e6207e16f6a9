#include "agentjudge/metrics.hpp"

#include <spdlog/fmt/fmt.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <unordered_map>

#include "agentjudge/errors.hpp"

namespace agentjudge {

AlignmentMetrics score_alignment(const std::vector<Prediction>& predictions,
                                 const std::vector<TaskRecord>& records) {
  std::unordered_map<std::string, const TaskRecord*> by_id;
  for (const auto& r : records) by_id[r.task_id] = &r;

  std::set<std::string> seen;
  std::int64_t tp = 0, fp = 0, tn = 0, fn = 0;
  for (const auto& p : predictions) {
    auto it = by_id.find(p.task_id);
    if (it == by_id.end()) throw PreconditionError("prediction for unknown task " + p.task_id);
    if (!it->second->human_label) {
      throw PreconditionError("task " + p.task_id + " has no human label");
    }
    if (!seen.insert(p.task_id).second) {
      throw PreconditionError("task " + p.task_id + " predicted more than once");
    }
    const bool actual = *it->second->human_label;
    const bool predicted = p.verdict == Answer::kYes;
    if (actual && predicted) ++tp;
    if (!actual && predicted) ++fp;
    if (!actual && !predicted) ++tn;
    if (actual && !predicted) ++fn;
  }
  return AlignmentMetrics::from_counts(tp, fp, tn, fn);
}

std::string method_display_name(const std::string& method) {
  if (method == kBaselineMethod) return "LLM-as-a-Judge";
  if (method == kJudgeMethod) return "Judge";
  return method;
}

std::string format_percent(double ratio) { return fmt::format("{:.2f}%", ratio * 100.0); }

nlohmann::ordered_json metrics_to_json(const AlignmentMetrics& m) {
  return {{"tp", m.tp},
          {"fp", m.fp},
          {"tn", m.tn},
          {"fn", m.fn},
          {"n", m.total()},
          {"accuracy", m.accuracy},
          {"precision", m.precision},
          {"recall", m.recall},
          {"specificity", m.specificity}};
}

AlignmentMetrics metrics_from_json(const nlohmann::json& j) {
  return AlignmentMetrics::from_counts(j.at("tp").get<std::int64_t>(),
                                       j.at("fp").get<std::int64_t>(),
                                       j.at("tn").get<std::int64_t>(),
                                       j.at("fn").get<std::int64_t>());
}

nlohmann::ordered_json metrics_table_to_json(const MetricsTable& table) {
  nlohmann::ordered_json datasets = nlohmann::ordered_json::object();
  for (const auto& [dataset, methods] : table) {
    nlohmann::ordered_json m = nlohmann::ordered_json::object();
    for (const auto& [method, metrics] : methods) m[method] = metrics_to_json(metrics);
    datasets[dataset] = std::move(m);
  }
  return {{"datasets", std::move(datasets)}};
}

MetricsTable metrics_table_from_json(const nlohmann::json& doc) {
  MetricsTable table;
  if (!doc.is_object() || !doc.contains("datasets") || !doc["datasets"].is_object()) {
    throw SchemaError("$.datasets", "expected an object");
  }
  for (const auto& [dataset, methods] : doc["datasets"].items()) {
    for (const auto& [method, metrics] : methods.items()) {
      try {
        table[dataset][method] = metrics_from_json(metrics);
      } catch (const nlohmann::json::exception& e) {
        throw SchemaError("$.datasets." + dataset + "." + method, e.what());
      }
    }
  }
  return table;
}

namespace {

// Baseline first, the judge second, anything else alphabetically after.
std::vector<std::string> ordered_methods(const std::map<std::string, AlignmentMetrics>& methods) {
  std::vector<std::string> out;
  for (const auto& [m, _] : methods) out.push_back(m);
  auto rank = [](const std::string& m) {
    if (m == kBaselineMethod) return 0;
    if (m == kJudgeMethod) return 1;
    return 2;
  };
  std::stable_sort(out.begin(), out.end(), [&](const std::string& a, const std::string& b) {
    if (rank(a) != rank(b)) return rank(a) < rank(b);
    return a < b;
  });
  return out;
}

}  // namespace

std::string render_metrics_table(const MetricsTable& table) {
  struct Row {
    const char* label;
    double AlignmentMetrics::*field;
  };
  const Row rows[] = {{"Accuracy", &AlignmentMetrics::accuracy},
                      {"Precision", &AlignmentMetrics::precision},
                      {"Recall", &AlignmentMetrics::recall},
                      {"Specificity", &AlignmentMetrics::specificity}};

  std::string header = "| Metric |";
  std::string rule = "|---|";
  for (const auto& [dataset, methods] : table) {
    for (const auto& m : ordered_methods(methods)) {
      header += " " + dataset + ": " + method_display_name(m) + " |";
      rule += "---:|";
    }
  }
  std::string out = header + "\n" + rule + "\n";
  for (const auto& row : rows) {
    std::string line = std::string("| ") + row.label + " |";
    for (const auto& [dataset, methods] : table) {
      const auto order = ordered_methods(methods);
      double best = -1.0;
      std::size_t best_count = 0;
      for (const auto& m : order) {
        const double v = methods.at(m).*row.field;
        if (v > best) {
          best = v;
          best_count = 1;
        } else if (v == best) {
          ++best_count;
        }
      }
      const bool mark = order.size() > 1 && best_count == 1;
      for (const auto& m : order) {
        const double v = methods.at(m).*row.field;
        const auto cell = format_percent(v);
        line += " " + (mark && v == best ? "**" + cell + "**" : cell) + " |";
      }
    }
    out += line + "\n";
  }
  return out;
}

void emit_report(const MetricsTable& table, const std::filesystem::path& dir,
                 const std::optional<std::string>& manifest_hash) {
  std::size_t scored = 0;
  for (const auto& [_, methods] : table) scored += methods.size();
  if (scored == 0) throw PreconditionError("no scored method to report");

  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "metrics.json", std::ios::binary | std::ios::trunc);
    out << metrics_table_to_json(table).dump(2) << '\n';
    if (!out) throw Error("cannot write " + (dir / "metrics.json").string());
  }
  std::ofstream out(dir / "report.md", std::ios::binary | std::ios::trunc);
  out << "# Human alignment\n\n" << render_metrics_table(table);
  for (const auto& [dataset, methods] : table) {
    for (const auto& m : ordered_methods(methods)) {
      const auto& x = methods.at(m);
      out << "\n" << dataset << " / " << method_display_name(m) << ": tp=" << x.tp
          << " fp=" << x.fp << " tn=" << x.tn << " fn=" << x.fn << " (n=" << x.total() << ")";
    }
  }
  out << "\n";
  if (manifest_hash) out << "\nRun manifest: " << *manifest_hash << "\n";
  if (!out) throw Error("cannot write " + (dir / "report.md").string());
}

}  // namespace agentjudge
