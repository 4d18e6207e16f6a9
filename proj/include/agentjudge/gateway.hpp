#pragma once

// Backend-agnostic access to text generation.

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "agentjudge/templates.hpp"
#include "agentjudge/tokenizer.hpp"

namespace agentjudge {

struct CompletionRequest {
  std::string template_id;
  Variables variables;
  double temperature = 0.0;
  int max_tokens = 1024;
};

struct Usage {
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
};

struct CompletionResponse {
  std::string text;
  Usage usage;
  std::string backend_id;
  bool truncated = false;
  int attempts = 1;
};

/// What a backend receives: the rendered prompt plus the request it came from.
struct BackendRequest {
  const std::string& template_id;
  const Variables& variables;
  const std::string& prompt;
  double temperature;
  int max_tokens;
};

struct BackendReply {
  std::string text;
  std::optional<Usage> usage;
};

class Backend {
 public:
  virtual ~Backend() = default;

  /// Throws TransientBackendError for retryable failures and any other
  /// GatewayError for permanent ones.
  virtual BackendReply generate(const BackendRequest& request) = 0;
  virtual std::string id() const = 0;
};

/// One canned response. Conditions test named request variables; a rule
/// matches when all of its conditions hold.
struct MockRule {
  enum class Op { kEquals, kContains, kNotContains };
  struct Condition {
    std::string variable;
    Op op = Op::kContains;
    std::string value;
  };

  std::string template_id;
  std::vector<Condition> conditions;
  std::string response;
  /// Fallback rules are consulted only when no regular rule matches.
  bool fallback = false;
};

/// Deterministic scripted backend. For every request exactly one rule of the
/// first non-empty tier (regular, then fallback) must match, otherwise the
/// request fails with UnmatchedMockRequest.
class MockBackend : public Backend {
 public:
  struct Recorded {
    std::string template_id;
    Variables variables;
    std::string prompt;
  };

  MockBackend() = default;
  explicit MockBackend(std::vector<MockRule> rules) : rules_(std::move(rules)) {}

  /// Format: {"rules": [{"template": id, "match": {var: {"contains"|"equals"|
  /// "not_contains": text or [text, ...]}}, "response": text, "fallback": bool}]}.
  static std::shared_ptr<MockBackend> from_json(const nlohmann::json& doc);
  static std::shared_ptr<MockBackend> from_file(const std::filesystem::path& path);

  void add_rule(MockRule rule);

  BackendReply generate(const BackendRequest& request) override;
  std::string id() const override { return "mock"; }

  std::vector<Recorded> recorded() const;
  std::size_t call_count(const std::string& template_id) const;
  void clear_recorded();

 private:
  std::vector<MockRule> rules_;
  mutable std::mutex mutex_;
  std::vector<Recorded> recorded_;
};

/// OpenAI-compatible chat-completion endpoint.
struct HttpBackendConfig {
  std::string endpoint = "https://api.openai.com/v1/chat/completions";
  std::string model = "gpt-4o";
  std::string api_key_env = "AGENTJUDGE_API_KEY";
  std::chrono::seconds timeout{120};
};

class HttpChatBackend : public Backend {
 public:
  /// Reads the credential from `config.api_key_env`; throws MissingCredential
  /// if it is unset or empty.
  explicit HttpChatBackend(HttpBackendConfig config);

  BackendReply generate(const BackendRequest& request) override;
  std::string id() const override { return "http:" + config_.model; }

 private:
  HttpBackendConfig config_;
  std::string api_key_;
};

struct UsageTotals {
  std::int64_t calls = 0;
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
};

/// Thread-safe per-template usage counters. Counters only grow.
class UsageLedger {
 public:
  void add(const std::string& template_id, const Usage& usage);
  std::map<std::string, UsageTotals> snapshot() const;
  UsageTotals total() const;
  UsageTotals for_template(const std::string& template_id) const;

 private:
  mutable std::mutex mutex_;
  std::map<std::string, UsageTotals> by_template_;
};

struct GatewayOptions {
  int max_attempts = 4;
  std::chrono::milliseconds initial_backoff{500};
  double backoff_multiplier = 2.0;
  int max_in_flight = 4;
};

class LlmGateway {
 public:
  LlmGateway(std::shared_ptr<const TemplateCatalog> catalog, std::shared_ptr<Backend> backend,
             std::shared_ptr<const BpeTokenizer> tokenizer, GatewayOptions options = {});

  /// Renders the request's template and sends it, retrying transient failures
  /// with exponential backoff. Usage is recorded globally and, when given, in
  /// `scope` as well.
  CompletionResponse complete(const CompletionRequest& request, UsageLedger* scope = nullptr);

  std::string render(const std::string& template_id, const Variables& variables) const;

  const TemplateCatalog& catalog() const { return *catalog_; }
  const UsageLedger& usage() const { return usage_; }
  const std::string& backend_id() const { return backend_id_; }

 private:
  class Slot;

  std::shared_ptr<const TemplateCatalog> catalog_;
  std::shared_ptr<Backend> backend_;
  std::shared_ptr<const BpeTokenizer> tokenizer_;
  GatewayOptions options_;
  std::string backend_id_;
  UsageLedger usage_;

  std::mutex slots_mutex_;
  std::condition_variable slots_cv_;
  int in_flight_ = 0;
};

}  // namespace agentjudge
