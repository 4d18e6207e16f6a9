#include "agentjudge/criteria_generator.hpp"

#include <cctype>
#include <filesystem>

#include <json.hpp>

#include "agentjudge/errors.hpp"
#include "agentjudge/text_util.hpp"

namespace agentjudge {

namespace {

std::optional<nlohmann::json> extract_json_array(std::string_view text) {
  auto open = text.find('[');
  auto close = text.rfind(']');
  if (open == std::string_view::npos || close == std::string_view::npos || close < open) {
    return std::nullopt;
  }
  try {
    auto doc = nlohmann::json::parse(text.substr(open, close - open + 1));
    if (doc.is_array()) return doc;
  } catch (const nlohmann::json::parse_error&) {
  }
  return std::nullopt;
}

std::string strip_list_marker(std::string line) {
  line = text::trim(line);
  std::size_t i = 0;
  while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
  if (i > 0 && i < line.size() && (line[i] == '.' || line[i] == ')')) {
    return text::trim(line.substr(i + 1));
  }
  if (!line.empty() && (line[0] == '-' || line[0] == '*')) return text::trim(line.substr(1));
  return line;
}

std::string describe_attachments(const TaskRecord& task) {
  if (task.attachments.empty()) return "none";
  std::string out;
  for (const auto& ref : task.attachments) {
    std::filesystem::path p(ref);
    std::string type = p.extension().string();
    if (!type.empty()) type = type.substr(1);
    out += "- " + p.filename().string() + " (" + (type.empty() ? "unknown type" : type) + ")\n";
  }
  return out;
}

std::string describe_tools(const TaskRecord& task) {
  if (task.tools.empty()) return "none";
  std::string out;
  for (const auto& t : task.tools) out += (out.empty() ? "" : ", ") + t;
  return out;
}

std::vector<std::string> lint_all(const std::vector<std::string>& questions) {
  std::vector<std::string> problems;
  for (std::size_t i = 0; i < questions.size(); ++i) {
    if (auto why = lint_question(questions[i])) {
      problems.push_back("question " + std::to_string(i + 1) + " (\"" + questions[i] +
                         "\"): " + *why);
    }
  }
  return problems;
}

std::string join_lines(const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& l : lines) out += l + "\n";
  return out;
}

}  // namespace

std::optional<std::vector<std::string>> parse_question_list(std::string_view text) {
  std::vector<std::string> out;
  if (auto arr = extract_json_array(text)) {
    for (const auto& v : *arr) {
      if (!v.is_string()) return std::nullopt;
      auto q = text::trim(v.get<std::string>());
      if (!q.empty()) out.push_back(std::move(q));
    }
    if (out.empty()) return std::nullopt;
    return out;
  }
  for (const auto& line : text::split_lines(text)) {
    auto q = strip_list_marker(line);
    if (!q.empty() && q.back() == '?') out.push_back(std::move(q));
  }
  if (out.empty()) return std::nullopt;
  return out;
}

bool is_compound_question(std::string_view question) {
  const std::string lower = text::to_lower(question);
  int depth = 0;
  bool in_double = false;
  bool in_backtick = false;
  int licenses = 0;
  std::string word;

  auto finish_word = [&]() -> bool {
    if (word.empty()) return false;
    bool compound = false;
    if (depth == 0 && !in_double && !in_backtick) {
      if (word == "both" || word == "either" || word == "neither" || word == "between" ||
          word == "whether") {
        ++licenses;
      } else if (word == "and" || word == "or" || word == "nor") {
        if (licenses > 0) {
          --licenses;
        } else {
          compound = true;
        }
      }
    }
    word.clear();
    return compound;
  };

  for (char c : lower) {
    if (std::isalpha(static_cast<unsigned char>(c))) {
      word += c;
      continue;
    }
    if (finish_word()) return true;
    if (c == '"') {
      in_double = !in_double;
    } else if (c == '`') {
      in_backtick = !in_backtick;
    } else if (!in_double && !in_backtick) {
      if (c == '(' || c == '[' || c == '{') ++depth;
      if ((c == ')' || c == ']' || c == '}') && depth > 0) --depth;
    }
  }
  return finish_word();
}

std::optional<std::string> lint_question(std::string_view question) {
  const std::string q = text::trim(question);
  if (q.empty() || q.back() != '?') return std::string("must be a yes/no question ending in '?'");
  if (is_compound_question(q)) {
    return std::string("joins two requirements with a top-level conjunction");
  }
  return std::nullopt;
}

std::vector<ChecklistItem> generate_checklist(const TaskRecord& task, const JudgeContext& ctx,
                                              const CriteriaConfig& config) {
  if (task.description.empty()) throw PreconditionError("task description must be nonempty");
  if (config.max_questions < 1) throw PreconditionError("max_questions must be >= 1");
  if (!task.attachments.empty()) {
    ctx.warn("task " + task.task_id +
             " has attachments; only their names and types are visible to the criteria "
             "generator");
  }

  CompletionRequest request;
  request.template_id = "criteria_gen";
  request.variables = {{"task", task.description},
                       {"attachments", describe_attachments(task)},
                       {"tools", describe_tools(task)},
                       {"max_questions", std::to_string(config.max_questions)},
                       {"feedback", ""}};

  auto first = ctx.complete(request);
  auto questions = parse_question_list(first.text);
  bool reasked = false;
  if (!questions) {
    request.variables["feedback"] =
        "Reply with a JSON array of strings, one yes/no question per element.\n"
        "Your previous reply could not be parsed:\n" +
        first.text;
    questions = parse_question_list(ctx.complete(request).text);
    reasked = true;
    if (!questions) {
      throw UnparseableOutput("criteria_gen: no checklist questions after one reformat retry");
    }
  }

  auto problems = lint_all(*questions);
  if (!problems.empty() && !reasked) {
    request.variables["feedback"] =
        "Some questions broke the rules. Each question must be answerable with yes or no, "
        "end in '?', and cover exactly one requirement:\n" +
        join_lines(problems);
    if (auto retry = parse_question_list(ctx.complete(request).text)) {
      questions = std::move(retry);
      problems = lint_all(*questions);
    }
  }
  for (const auto& p : problems) ctx.warn("checklist lint: " + p);

  if (questions->size() > config.max_questions) {
    ctx.warn("criteria generator returned " + std::to_string(questions->size()) +
             " questions; keeping the first " + std::to_string(config.max_questions));
    questions->resize(config.max_questions);
  }

  std::vector<ChecklistItem> items;
  for (std::size_t i = 0; i < questions->size(); ++i) {
    items.push_back(ChecklistItem{i, (*questions)[i], true, std::nullopt});
  }
  return items;
}

std::vector<ChecklistItem> filter_checklist(std::vector<ChecklistItem> items,
                                            const TaskRecord& task, const JudgeContext& ctx) {
  if (items.empty()) throw PreconditionError("filter_checklist needs at least one item");

  std::string numbered;
  for (std::size_t i = 0; i < items.size(); ++i) {
    numbered += std::to_string(i + 1) + ". " + items[i].question + "\n";
  }

  struct Decision {
    bool keep = true;
    std::string reason;
  };
  using Decisions = std::vector<Decision>;
  const std::size_t n = items.size();

  std::function<std::optional<Decisions>(const std::string&)> parse =
      [n](const std::string& reply) -> std::optional<Decisions> {
    auto arr = extract_json_array(reply);
    if (!arr) return std::nullopt;
    Decisions decisions(n);
    for (const auto& entry : *arr) {
      if (!entry.is_object() || !entry.contains("id") || !entry["id"].is_number_integer() ||
          !entry.contains("keep") || !entry["keep"].is_boolean()) {
        return std::nullopt;
      }
      const auto id = entry["id"].get<std::int64_t>();
      if (id < 1 || static_cast<std::size_t>(id) > n) continue;
      auto& d = decisions[static_cast<std::size_t>(id - 1)];
      d.keep = entry["keep"].get<bool>();
      if (entry.contains("reason") && entry["reason"].is_string()) {
        d.reason = entry["reason"].get<std::string>();
      }
    }
    return decisions;
  };

  CompletionRequest request;
  request.template_id = "criteria_filter";
  request.variables = {{"task", task.description}, {"questions", numbered}};
  auto decisions = ask_with_reask<Decisions>(
      ctx, request, parse,
      "Reply with a JSON array of objects {\"id\": <number>, \"keep\": true|false, "
      "\"reason\": <text>}.");

  std::size_t kept = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!items[i].kept) continue;
    if (decisions[i].keep) {
      ++kept;
      continue;
    }
    items[i].kept = false;
    items[i].filter_reason =
        decisions[i].reason.empty() ? std::string("removed by filter") : decisions[i].reason;
  }
  if (kept == 0) {
    throw AllFilteredError("task " + task.task_id + ": every checklist question was filtered out");
  }
  return items;
}

std::vector<ChecklistItem> kept_items(const std::vector<ChecklistItem>& items) {
  std::vector<ChecklistItem> out;
  for (const auto& item : items) {
    if (item.kept) out.push_back(item);
  }
  return out;
}

}  // namespace agentjudge
