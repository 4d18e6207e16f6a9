#pragma once

#include <chrono>
#include <string>
#include <string_view>
#include <vector>

namespace agentjudge {

enum class RerankerKind { kCrossEncoderModel, kRemoteRerankApi, kLexicalMock };

std::string_view to_string(RerankerKind kind);

/// Relevance scorer: higher is more relevant. Scores for one query are
/// comparable across the passages of a call and deterministic for fixed input.
class Reranker {
 public:
  virtual ~Reranker() = default;
  virtual std::vector<double> score(std::string_view query,
                                    const std::vector<std::string>& passages) const = 0;
  virtual RerankerKind kind() const = 0;
  virtual std::string id() const = 0;
};

/// Offline stand-in for a cross-encoder. Score is the IDF-weighted fraction
/// of the query's content terms present in the passage, in [0, 1]; document
/// frequencies come from the passages of the call.
class LexicalReranker : public Reranker {
 public:
  std::vector<double> score(std::string_view query,
                            const std::vector<std::string>& passages) const override;
  RerankerKind kind() const override { return RerankerKind::kLexicalMock; }
  std::string id() const override { return "lexical"; }
};

/// Lowercased alphanumeric terms of `text` minus a small English stopword list.
std::vector<std::string> lexical_terms(std::string_view text);

/// Client for a `/rerank` endpoint in the text-embeddings-inference style:
/// POST {"query", "texts", "raw_scores": false} -> [{"index", "score"}].
/// Serving ms-marco-MiniLM-L-6-v2 this way yields sigmoid scores in [0, 1].
struct HttpRerankerConfig {
  std::string endpoint = "http://127.0.0.1:8080/rerank";
  std::string model = "cross-encoder/ms-marco-MiniLM-L-6-v2";
  RerankerKind kind = RerankerKind::kCrossEncoderModel;
  /// Optional; when set and present in the environment, sent as a bearer token.
  std::string api_key_env;
  std::chrono::seconds timeout{60};
};

class HttpReranker : public Reranker {
 public:
  explicit HttpReranker(HttpRerankerConfig config);

  std::vector<double> score(std::string_view query,
                            const std::vector<std::string>& passages) const override;
  RerankerKind kind() const override { return config_.kind; }
  std::string id() const override { return "http:" + config_.model; }

 private:
  HttpRerankerConfig config_;
};

}  // namespace agentjudge
