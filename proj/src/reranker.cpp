#include "agentjudge/reranker.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include <httplib.h>
#include <json.hpp>

#include "agentjudge/errors.hpp"
#include "http_util.hpp"

namespace agentjudge {

std::string_view to_string(RerankerKind kind) {
  switch (kind) {
    case RerankerKind::kCrossEncoderModel:
      return "cross_encoder_model";
    case RerankerKind::kRemoteRerankApi:
      return "remote_rerank_api";
    case RerankerKind::kLexicalMock:
      return "lexical_mock";
  }
  return "unknown";
}

namespace {

const std::unordered_set<std::string>& stopwords() {
  static const std::unordered_set<std::string> words = {
      "a",     "an",    "the",  "is",   "are",  "was",  "were", "be",   "been", "being",
      "do",    "does",  "did",  "has",  "have", "had",  "of",   "in",   "on",   "at",
      "to",    "for",   "by",   "with", "from", "as",   "it",   "its",  "this", "that",
      "these", "those", "and",  "or",   "not",  "no",   "yes",  "if",   "than", "then",
      "any",   "all",   "into", "onto", "there", "their", "which", "what", "when", "who",
      "how",   "can",   "could", "should", "would", "will", "shall", "may", "might", "must"};
  return words;
}

}  // namespace

std::vector<std::string> lexical_terms(std::string_view text) {
  std::vector<std::string> terms;
  std::string word;
  auto flush = [&]() {
    if (!word.empty() && !stopwords().count(word)) terms.push_back(word);
    word.clear();
  };
  for (char c : text) {
    auto u = static_cast<unsigned char>(c);
    if (std::isalnum(u) || u >= 0x80) {
      word += static_cast<char>(std::tolower(u));
    } else {
      flush();
    }
  }
  flush();
  return terms;
}

std::vector<double> LexicalReranker::score(std::string_view query,
                                           const std::vector<std::string>& passages) const {
  std::vector<double> scores(passages.size(), 0.0);
  const auto q_terms_list = lexical_terms(query);
  const std::set<std::string> q_terms(q_terms_list.begin(), q_terms_list.end());
  if (q_terms.empty() || passages.empty()) return scores;

  std::vector<std::unordered_set<std::string>> passage_terms;
  passage_terms.reserve(passages.size());
  std::unordered_map<std::string, std::size_t> df;
  for (const auto& p : passages) {
    auto list = lexical_terms(p);
    std::unordered_set<std::string> terms(list.begin(), list.end());
    for (const auto& t : q_terms) {
      if (terms.count(t)) ++df[t];
    }
    passage_terms.push_back(std::move(terms));
  }

  const double n = static_cast<double>(passages.size());
  std::unordered_map<std::string, double> idf;
  double total = 0.0;
  for (const auto& t : q_terms) {
    // df <= n keeps the ratio above 1, so every weight is positive.
    const double w = std::log((n + 1.0) / (static_cast<double>(df[t]) + 0.5));
    idf[t] = w;
    total += w;
  }
  for (std::size_t i = 0; i < passages.size(); ++i) {
    double matched = 0.0;
    for (const auto& t : q_terms) {
      if (passage_terms[i].count(t)) matched += idf[t];
    }
    scores[i] = matched / total;
  }
  return scores;
}

HttpReranker::HttpReranker(HttpRerankerConfig config) : config_(std::move(config)) {
  detail::parse_url(config_.endpoint);
}

std::vector<double> HttpReranker::score(std::string_view query,
                                        const std::vector<std::string>& passages) const {
  std::vector<double> scores(passages.size(), 0.0);
  if (passages.empty()) return scores;

  const auto url = detail::parse_url(config_.endpoint);
  httplib::Client client(url.scheme_host_port);
  client.set_read_timeout(config_.timeout);
  client.set_connection_timeout(std::chrono::seconds(10));

  httplib::Headers headers;
  if (!config_.api_key_env.empty()) {
    if (const char* key = std::getenv(config_.api_key_env.c_str()); key && *key) {
      headers.emplace("Authorization", std::string("Bearer ") + key);
    }
  }

  nlohmann::json body = {{"query", std::string(query)}, {"texts", passages}, {"raw_scores", false}};
  auto res = client.Post(url.path, headers, body.dump(), "application/json");
  detail::classify_http_failure(res, "reranker");

  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::parse_error& e) {
    throw GatewayError(std::string("reranker returned invalid JSON: ") + e.what());
  }
  if (!doc.is_array()) throw GatewayError("reranker response is not an array");
  for (const auto& entry : doc) {
    if (!entry.is_object() || !entry.contains("index") || !entry.contains("score")) {
      throw GatewayError("reranker response entry lacks index or score");
    }
    const auto idx = entry["index"].get<std::size_t>();
    if (idx >= passages.size()) throw GatewayError("reranker returned an out-of-range index");
    scores[idx] = entry["score"].get<double>();
  }
  return scores;
}

}  // namespace agentjudge
