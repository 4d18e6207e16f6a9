#include "agentjudge/report_json.hpp"

#include "agentjudge/errors.hpp"

namespace agentjudge {

namespace {

const ordered_json& require(const ordered_json& obj, const char* key,
                            const std::string& path) {
  if (!obj.is_object()) throw SchemaError(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError(path + "." + key, "missing key");
  return *it;
}

std::string require_string(const ordered_json& obj, const char* key,
                           const std::string& path) {
  const auto& node = require(obj, key, path);
  if (!node.is_string()) throw SchemaError(path + "." + key, "expected a string");
  return node.get<std::string>();
}

Answer require_answer(const ordered_json& obj, const char* key,
                      const std::string& path) {
  auto label = require_string(obj, key, path);
  try {
    return answer_from_label(label);
  } catch (const SchemaError&) {
    throw SchemaError(path + "." + key, "answer must be \"yes\" or \"no\", got \"" +
                                            label + "\"");
  }
}

DecisionPath parse_decision_path(const ordered_json& node, const std::string& path) {
  if (!node.is_array()) throw SchemaError(path, "expected an array");
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < node.size(); ++i) {
    if (!node[i].is_string()) {
      throw SchemaError(path + "[" + std::to_string(i) + "]", "expected a string");
    }
    labels.push_back(node[i].get<std::string>());
  }
  try {
    return DecisionPath::from_labels(labels);
  } catch (const SchemaError& e) {
    // from_labels reports paths relative to the array ("$" or "$[i]").
    throw SchemaError(path + e.path().substr(1), e.message());
  }
}

std::vector<std::string> string_list(const ordered_json& obj, const char* key,
                                     const std::string& path) {
  std::vector<std::string> out;
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return out;
  if (!it->is_array()) throw SchemaError(path + "." + key, "expected an array");
  for (std::size_t i = 0; i < it->size(); ++i) {
    const auto& v = (*it)[i];
    if (!v.is_string()) {
      throw SchemaError(path + "." + key + "[" + std::to_string(i) + "]",
                        "expected a string");
    }
    out.push_back(v.get<std::string>());
  }
  return out;
}

std::optional<std::string> optional_string(const ordered_json& obj, const char* key,
                                           const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw SchemaError(path + "." + key, "expected a string");
  return it->get<std::string>();
}

}  // namespace

ordered_json eval_entry_to_json(const EvalEntry& entry) {
  ordered_json e;
  e["question"] = entry.question;
  e["proofs"] = ordered_json::object();
  e["proofs"]["proofs"] = entry.proofs;
  e["proofs"]["final_answer"] = entry.final_answer;
  e["c3_response"] = ordered_json::object();
  e["c3_response"]["answer"] = std::string(to_string(entry.answer));
  e["c3_response"]["reason"] = entry.reason;
  e["c3_response"]["decision_path"] = entry.decision_path.labels();
  return e;
}

ordered_json report_to_json(const JudgeReport& report) {
  ordered_json doc;
  doc["verdict"] = std::string(to_string(report.verdict));
  doc["eval"] = ordered_json::array();
  for (const auto& entry : report.eval) doc["eval"].push_back(eval_entry_to_json(entry));
  return doc;
}

std::string serialize_report(const JudgeReport& report, int indent) {
  return report_to_json(report).dump(indent);
}

JudgeReport report_from_json(const ordered_json& doc) {
  JudgeReport report;
  report.verdict = require_answer(doc, "verdict", "$");
  const auto& evals = require(doc, "eval", "$");
  if (!evals.is_array()) throw SchemaError("$.eval", "expected an array");
  for (std::size_t i = 0; i < evals.size(); ++i) {
    const std::string path = "$.eval[" + std::to_string(i) + "]";
    const auto& node = evals[i];
    EvalEntry entry;
    entry.question = require_string(node, "question", path);
    const auto& proofs = require(node, "proofs", path);
    entry.proofs = require_string(proofs, "proofs", path + ".proofs");
    entry.final_answer = require_string(proofs, "final_answer", path + ".proofs");
    const auto& c3 = require(node, "c3_response", path);
    entry.answer = require_answer(c3, "answer", path + ".c3_response");
    entry.reason = require_string(c3, "reason", path + ".c3_response");
    entry.decision_path =
        parse_decision_path(require(c3, "decision_path", path + ".c3_response"),
                            path + ".c3_response.decision_path");
    report.eval.push_back(std::move(entry));
  }
  return report;
}

JudgeReport parse_report(std::string_view text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError("$", std::string("invalid JSON: ") + e.what());
  }
  return report_from_json(doc);
}

TaskRecord task_from_json(const ordered_json& doc) {
  if (!doc.is_object()) throw SchemaError("$", "expected an object");
  TaskRecord task;
  task.task_id = require_string(doc, "task_id", "$");
  task.description = require_string(doc, "description", "$");
  task.attachments = string_list(doc, "attachments", "$");
  task.tools = string_list(doc, "tools", "$");
  if (auto it = doc.find("human_label"); it != doc.end() && !it->is_null()) {
    if (!it->is_boolean()) throw SchemaError("$.human_label", "expected a boolean");
    task.human_label = it->get<bool>();
  }
  task.ground_truth = optional_string(doc, "ground_truth", "$");
  task.final_answer = optional_string(doc, "final_answer", "$");
  task.log_path = optional_string(doc, "log_path", "$");
  if (task.task_id.empty()) throw SchemaError("$.task_id", "must be nonempty");
  if (task.description.empty()) throw SchemaError("$.description", "must be nonempty");
  return task;
}

ordered_json task_to_json(const TaskRecord& task) {
  ordered_json doc;
  doc["task_id"] = task.task_id;
  doc["description"] = task.description;
  doc["attachments"] = task.attachments;
  doc["tools"] = task.tools;
  doc["human_label"] = task.human_label ? ordered_json(*task.human_label) : ordered_json();
  doc["ground_truth"] = task.ground_truth ? ordered_json(*task.ground_truth) : ordered_json();
  doc["final_answer"] = task.final_answer ? ordered_json(*task.final_answer) : ordered_json();
  doc["log_path"] = task.log_path ? ordered_json(*task.log_path) : ordered_json();
  return doc;
}

std::string strip_json_whitespace(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool in_string = false;
  bool escaped = false;
  for (char c : text) {
    if (in_string) {
      out += c;
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == ' ' || c == '\n' || c == '\r' || c == '\t') continue;
    if (c == '"') in_string = true;
    out += c;
  }
  return out;
}

}  // namespace agentjudge
