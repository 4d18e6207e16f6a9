#include "agentjudge/services.hpp"

#include <cstdlib>

#include "agentjudge/build_info.hpp"
#include "agentjudge/errors.hpp"

namespace agentjudge {

namespace fs = std::filesystem;

fs::path default_resource_dir() {
  if (const char* dir = std::getenv("AGENTJUDGE_DATA_DIR"); dir && *dir) return dir;
  return build_info::kSourceDir;
}

fs::path default_templates_dir() { return default_resource_dir() / "templates"; }

fs::path default_tokenizer_path() {
  return default_resource_dir() / "data" / "cl100k_base.tiktoken";
}

JudgeServices make_services(const ServiceOptions& options) {
  const auto templates =
      options.templates_dir.empty() ? default_templates_dir() : options.templates_dir;
  const auto tokenizer_path =
      options.tokenizer_path.empty() ? default_tokenizer_path() : options.tokenizer_path;

  auto catalog = TemplateCatalog::load(templates);
  auto tokenizer = BpeTokenizer::load(tokenizer_path);

  std::shared_ptr<Backend> backend;
  if (options.backend == "mock") {
    if (options.mock_rules.empty()) throw PreconditionError("the mock backend needs a rules file");
    backend = MockBackend::from_file(options.mock_rules);
  } else if (options.backend == "http") {
    HttpBackendConfig cfg;
    cfg.endpoint = options.endpoint;
    cfg.model = options.model;
    cfg.api_key_env = options.api_key_env;
    backend = std::make_shared<HttpChatBackend>(cfg);
  } else {
    throw PreconditionError("unknown backend: " + options.backend);
  }

  std::string reranker_choice = options.reranker;
  if (reranker_choice.empty()) reranker_choice = options.backend == "mock" ? "lexical" : "http";
  std::shared_ptr<const Reranker> reranker;
  if (reranker_choice == "lexical") {
    reranker = std::make_shared<LexicalReranker>();
  } else if (reranker_choice == "http") {
    HttpRerankerConfig cfg;
    cfg.endpoint = options.reranker_endpoint;
    cfg.model = options.reranker_model;
    reranker = std::make_shared<HttpReranker>(cfg);
  } else {
    throw PreconditionError("unknown reranker: " + reranker_choice);
  }

  JudgeServices services;
  services.gateway = std::make_shared<LlmGateway>(catalog, backend, tokenizer, options.gateway);
  services.tokenizer = tokenizer;
  services.reranker = reranker;
  services.handlers = HandlerRegistry::defaults(std::make_shared<Sandbox>(options.sandbox));
  return services;
}

}  // namespace agentjudge
