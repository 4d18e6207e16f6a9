#include "agentjudge/gateway.hpp"

#include <fstream>
#include <thread>

#include <spdlog/spdlog.h>

#include "agentjudge/errors.hpp"

namespace agentjudge {

namespace {

bool condition_holds(const MockRule::Condition& cond, const Variables& vars) {
  auto it = vars.find(cond.variable);
  if (it == vars.end()) return cond.op == MockRule::Op::kNotContains;
  switch (cond.op) {
    case MockRule::Op::kEquals:
      return it->second == cond.value;
    case MockRule::Op::kContains:
      return it->second.find(cond.value) != std::string::npos;
    case MockRule::Op::kNotContains:
      return it->second.find(cond.value) == std::string::npos;
  }
  return false;
}

bool rule_matches(const MockRule& rule, const std::string& template_id, const Variables& vars) {
  if (rule.template_id != template_id) return false;
  for (const auto& cond : rule.conditions) {
    if (!condition_holds(cond, vars)) return false;
  }
  return true;
}

std::string describe(const std::string& template_id, const Variables& vars) {
  std::string out = "template \"" + template_id + "\" with variables {";
  bool first = true;
  for (const auto& [k, v] : vars) {
    out += (first ? "" : ", ") + k + ": \"" + (v.size() > 60 ? v.substr(0, 60) + "..." : v) + "\"";
    first = false;
  }
  return out + "}";
}

}  // namespace

std::shared_ptr<MockBackend> MockBackend::from_json(const nlohmann::json& doc) {
  auto backend = std::make_shared<MockBackend>();
  if (!doc.contains("rules") || !doc["rules"].is_array()) {
    throw Error("mock rule file needs a \"rules\" array");
  }
  for (const auto& r : doc["rules"]) {
    MockRule rule;
    rule.template_id = r.at("template").get<std::string>();
    rule.response = r.at("response").get<std::string>();
    rule.fallback = r.value("fallback", false);
    if (r.contains("match")) {
      for (const auto& [var, spec] : r["match"].items()) {
        for (const auto& [op, value] : spec.items()) {
          MockRule::Op parsed_op;
          if (op == "equals") {
            parsed_op = MockRule::Op::kEquals;
          } else if (op == "contains") {
            parsed_op = MockRule::Op::kContains;
          } else if (op == "not_contains") {
            parsed_op = MockRule::Op::kNotContains;
          } else {
            throw Error("unknown mock match operator \"" + op + "\"");
          }
          // A list applies the operator to each element.
          const auto values = value.is_array() ? value : nlohmann::json::array({value});
          for (const auto& v : values) {
            rule.conditions.push_back(MockRule::Condition{var, parsed_op, v.get<std::string>()});
          }
        }
      }
    }
    backend->add_rule(std::move(rule));
  }
  return backend;
}

std::shared_ptr<MockBackend> MockBackend::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open mock rule file " + path.string());
  return from_json(nlohmann::json::parse(in));
}

void MockBackend::add_rule(MockRule rule) {
  std::lock_guard lock(mutex_);
  rules_.push_back(std::move(rule));
}

BackendReply MockBackend::generate(const BackendRequest& request) {
  std::lock_guard lock(mutex_);
  recorded_.push_back({request.template_id, request.variables, request.prompt});

  for (bool fallback_tier : {false, true}) {
    const MockRule* hit = nullptr;
    int hits = 0;
    for (const auto& rule : rules_) {
      if (rule.fallback != fallback_tier) continue;
      if (rule_matches(rule, request.template_id, request.variables)) {
        hit = &rule;
        ++hits;
      }
    }
    if (hits == 1) return {hit->response, std::nullopt};
    if (hits > 1) {
      throw UnmatchedMockRequest(std::to_string(hits) + " mock rules match " +
                                 describe(request.template_id, request.variables));
    }
  }
  throw UnmatchedMockRequest("no mock rule matches " +
                             describe(request.template_id, request.variables));
}

std::vector<MockBackend::Recorded> MockBackend::recorded() const {
  std::lock_guard lock(mutex_);
  return recorded_;
}

std::size_t MockBackend::call_count(const std::string& template_id) const {
  std::lock_guard lock(mutex_);
  std::size_t n = 0;
  for (const auto& r : recorded_) n += r.template_id == template_id;
  return n;
}

void MockBackend::clear_recorded() {
  std::lock_guard lock(mutex_);
  recorded_.clear();
}

void UsageLedger::add(const std::string& template_id, const Usage& usage) {
  std::lock_guard lock(mutex_);
  auto& t = by_template_[template_id];
  ++t.calls;
  t.prompt_tokens += usage.prompt_tokens;
  t.completion_tokens += usage.completion_tokens;
}

std::map<std::string, UsageTotals> UsageLedger::snapshot() const {
  std::lock_guard lock(mutex_);
  return by_template_;
}

UsageTotals UsageLedger::total() const {
  std::lock_guard lock(mutex_);
  UsageTotals sum;
  for (const auto& [id, t] : by_template_) {
    sum.calls += t.calls;
    sum.prompt_tokens += t.prompt_tokens;
    sum.completion_tokens += t.completion_tokens;
  }
  return sum;
}

UsageTotals UsageLedger::for_template(const std::string& template_id) const {
  std::lock_guard lock(mutex_);
  auto it = by_template_.find(template_id);
  return it == by_template_.end() ? UsageTotals{} : it->second;
}

// Holds one of the gateway's in-flight slots for its lifetime.
class LlmGateway::Slot {
 public:
  explicit Slot(LlmGateway& gw) : gw_(gw) {
    std::unique_lock lock(gw_.slots_mutex_);
    gw_.slots_cv_.wait(lock, [&] { return gw_.in_flight_ < gw_.options_.max_in_flight; });
    ++gw_.in_flight_;
  }
  ~Slot() {
    {
      std::lock_guard lock(gw_.slots_mutex_);
      --gw_.in_flight_;
    }
    gw_.slots_cv_.notify_one();
  }
  Slot(const Slot&) = delete;
  Slot& operator=(const Slot&) = delete;

 private:
  LlmGateway& gw_;
};

LlmGateway::LlmGateway(std::shared_ptr<const TemplateCatalog> catalog,
                       std::shared_ptr<Backend> backend,
                       std::shared_ptr<const BpeTokenizer> tokenizer, GatewayOptions options)
    : catalog_(std::move(catalog)),
      backend_(std::move(backend)),
      tokenizer_(std::move(tokenizer)),
      options_(options) {
  if (!catalog_ || !backend_ || !tokenizer_) {
    throw PreconditionError("gateway needs a catalog, a backend and a tokenizer");
  }
  if (options_.max_attempts < 1 || options_.max_in_flight < 1) {
    throw PreconditionError("gateway max_attempts and max_in_flight must be >= 1");
  }
  backend_id_ = backend_->id();
}

std::string LlmGateway::render(const std::string& template_id,
                               const Variables& variables) const {
  return catalog_->render(template_id, variables);
}

CompletionResponse LlmGateway::complete(const CompletionRequest& request, UsageLedger* scope) {
  const std::string prompt = catalog_->render(request.template_id, request.variables);
  const BackendRequest backend_request{request.template_id, request.variables, prompt,
                                       request.temperature, request.max_tokens};

  BackendReply reply;
  int attempt = 0;
  auto backoff = options_.initial_backoff;
  for (;;) {
    ++attempt;
    try {
      Slot slot(*this);
      reply = backend_->generate(backend_request);
      break;
    } catch (const TransientBackendError& e) {
      if (attempt >= options_.max_attempts) {
        spdlog::error("{}: giving up after {} attempts: {}", request.template_id, attempt,
                      e.what());
        throw RetryBudgetExhausted(request.template_id + ": retry budget exhausted after " +
                                   std::to_string(attempt) + " attempts: " + e.what());
      }
      spdlog::warn("{}: transient failure on attempt {} ({}), retrying in {} ms",
                   request.template_id, attempt, e.what(), backoff.count());
      std::this_thread::sleep_for(backoff);
      backoff = std::chrono::milliseconds(
          static_cast<std::int64_t>(static_cast<double>(backoff.count()) *
                                    options_.backoff_multiplier));
    }
  }
  if (attempt > 1) spdlog::info("{}: succeeded after {} attempts", request.template_id, attempt);

  CompletionResponse response;
  response.backend_id = backend_id_;
  response.attempts = attempt;
  response.text = std::move(reply.text);
  const auto completion_tokens = static_cast<std::int64_t>(tokenizer_->count(response.text));
  if (request.max_tokens > 0 && completion_tokens > request.max_tokens) {
    response.text = std::string(
        tokenizer_->truncate(response.text, static_cast<std::size_t>(request.max_tokens)));
    response.truncated = true;
    spdlog::warn("{}: response of {} tokens truncated to max_tokens={}", request.template_id,
                 completion_tokens, request.max_tokens);
  }
  if (reply.usage) {
    response.usage = *reply.usage;
  } else {
    response.usage.prompt_tokens = static_cast<std::int64_t>(tokenizer_->count(prompt));
    response.usage.completion_tokens = static_cast<std::int64_t>(tokenizer_->count(response.text));
  }
  usage_.add(request.template_id, response.usage);
  if (scope) scope->add(request.template_id, response.usage);
  return response;
}

}  // namespace agentjudge
