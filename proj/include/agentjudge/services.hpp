#pragma once

#include <filesystem>
#include <string>

#include "agentjudge/harness.hpp"

namespace agentjudge {

struct ServiceOptions {
  /// "mock" or "http".
  std::string backend = "mock";
  std::filesystem::path mock_rules;
  std::string model = "gpt-4o";
  std::string endpoint = "https://api.openai.com/v1/chat/completions";
  std::string api_key_env = "AGENTJUDGE_API_KEY";
  /// "lexical" or "http". Empty picks lexical for the mock backend and http
  /// otherwise.
  std::string reranker;
  std::string reranker_endpoint = "http://127.0.0.1:8080/rerank";
  std::string reranker_model = "cross-encoder/ms-marco-MiniLM-L-6-v2";
  std::filesystem::path templates_dir;
  std::filesystem::path tokenizer_path;
  GatewayOptions gateway;
  SandboxOptions sandbox;
};

/// Directory holding the bundled templates/ and data/: $AGENTJUDGE_DATA_DIR
/// if set, otherwise the source tree the binary was built from.
std::filesystem::path default_resource_dir();
std::filesystem::path default_templates_dir();
std::filesystem::path default_tokenizer_path();

/// Builds the gateway, tokenizer, reranker and handlers for a run. Throws
/// PreconditionError for unknown choices and MissingCredential when the http
/// backend has no API key.
JudgeServices make_services(const ServiceOptions& options);

}  // namespace agentjudge
