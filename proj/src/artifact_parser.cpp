#include "agentjudge/artifact_parser.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "agentjudge/errors.hpp"
#include "agentjudge/hashing.hpp"
#include "agentjudge/text_util.hpp"

namespace agentjudge {

namespace fs = std::filesystem;

void RetrievalConfig::validate() const {
  if (chunk_tokens < 32) throw PreconditionError("chunk_tokens must be >= 32");
  if (fallback_top_k == 0) throw PreconditionError("fallback_top_k must be >= 1");
  if (max_expansions < 0) throw PreconditionError("max_expansions must be >= 0");
  if (relevance_threshold != relevance_threshold) {
    throw PreconditionError("relevance_threshold must be a number");
  }
}

std::vector<Chunk> chunk_log(std::string_view log, std::size_t chunk_tokens,
                             const BpeTokenizer& tokenizer) {
  if (chunk_tokens == 0) throw PreconditionError("chunk_tokens must be positive");
  std::vector<Chunk> chunks;
  if (log.empty()) return chunks;

  const auto ends = tokenizer.token_ends(log);
  std::size_t first_token = 0;
  std::size_t begin = 0;
  while (first_token < ends.size()) {
    std::size_t stop = std::min(first_token + chunk_tokens, ends.size());
    // A token may end inside a multi-byte character; pull the boundary back
    // to the nearest token end that is also a code point boundary.
    std::size_t cut = stop;
    while (cut > first_token && !text::is_codepoint_boundary(log, ends[cut - 1])) --cut;
    if (cut == first_token) {
      cut = stop;
      while (cut < ends.size() && !text::is_codepoint_boundary(log, ends[cut - 1])) ++cut;
    }
    // Pre-tokenization looks past the cut, so a chunk encoded on its own can
    // differ from its in-context span. Its standalone count must fit too.
    std::size_t standalone = tokenizer.count(log.substr(begin, ends[cut - 1] - begin));
    while (standalone > chunk_tokens) {
      std::size_t shorter = cut - 1;
      while (shorter > first_token && !text::is_codepoint_boundary(log, ends[shorter - 1])) {
        --shorter;
      }
      if (shorter == first_token) break;
      cut = shorter;
      standalone = tokenizer.count(log.substr(begin, ends[cut - 1] - begin));
    }
    const std::size_t end = ends[cut - 1];
    Chunk chunk;
    chunk.index = chunks.size();
    chunk.begin = begin;
    chunk.end = end;
    chunk.token_count = standalone;
    chunk.text = std::string(log.substr(begin, end - begin));
    chunks.push_back(std::move(chunk));
    first_token = cut;
    begin = end;
  }
  return chunks;
}

std::vector<ChunkSummary> summarize_chunks(const std::vector<Chunk>& chunks,
                                           const JudgeContext& ctx) {
  std::vector<ChunkSummary> summaries;
  summaries.reserve(chunks.size());
  std::function<std::optional<std::string>(const std::string&)> parse =
      [](const std::string& reply) -> std::optional<std::string> {
    auto s = text::trim(reply);
    if (s.empty()) return std::nullopt;
    return s;
  };
  for (const auto& chunk : chunks) {
    CompletionRequest request;
    request.template_id = "chunk_summary";
    request.variables = {{"chunk", chunk.text}};
    try {
      auto summary = ask_with_reask<std::string>(ctx, request, parse,
                                                 "The summary must not be empty.");
      summaries.push_back(ChunkSummary{chunk.index, std::move(summary)});
    } catch (const std::exception& e) {
      throw PartialIndexError(summaries.size(), "summarizing chunk " +
                                                    std::to_string(chunk.index) + " failed: " +
                                                    e.what());
    }
  }
  return summaries;
}

std::string index_key(std::string_view log, const RetrievalConfig& config,
                      const BpeTokenizer& tokenizer, const std::string& template_version,
                      const std::string& backend_id) {
  std::ostringstream key;
  key << "index-v1\n"
      << sha256_hex(log) << '\n'
      << config.chunk_tokens << '\n'
      << tokenizer.name() << ':' << tokenizer.vocab_sha256() << '\n'
      << template_version << '\n'
      << backend_id << '\n';
  return sha256_hex(key.str()).substr(0, 32);
}

void write_index_files(const LogIndex& index, const fs::path& dir) {
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "chunks.jsonl", std::ios::binary | std::ios::trunc);
    for (const auto& c : index.chunks) {
      nlohmann::ordered_json j = {{"index", c.index},
                                  {"begin", c.begin},
                                  {"end", c.end},
                                  {"token_count", c.token_count},
                                  {"text", c.text}};
      out << j.dump() << '\n';
    }
    if (!out) throw Error("cannot write " + (dir / "chunks.jsonl").string());
  }
  std::ofstream out(dir / "summaries.jsonl", std::ios::binary | std::ios::trunc);
  for (const auto& s : index.summaries) {
    nlohmann::ordered_json j = {{"chunk_index", s.chunk_index}, {"summary", s.summary}};
    out << j.dump() << '\n';
  }
  if (!out) throw Error("cannot write " + (dir / "summaries.jsonl").string());
}

LogIndex read_index_files(const fs::path& dir) {
  LogIndex index;
  auto read_lines = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error("cannot read " + p.string());
    std::vector<nlohmann::json> docs;
    std::string line;
    while (std::getline(in, line)) {
      if (!text::trim(line).empty()) docs.push_back(nlohmann::json::parse(line));
    }
    return docs;
  };
  for (const auto& j : read_lines(dir / "chunks.jsonl")) {
    Chunk c;
    c.index = j.at("index").get<std::size_t>();
    c.begin = j.at("begin").get<std::size_t>();
    c.end = j.at("end").get<std::size_t>();
    c.token_count = j.at("token_count").get<std::size_t>();
    c.text = j.at("text").get<std::string>();
    index.chunks.push_back(std::move(c));
  }
  for (const auto& j : read_lines(dir / "summaries.jsonl")) {
    index.summaries.push_back(
        ChunkSummary{j.at("chunk_index").get<std::size_t>(), j.at("summary").get<std::string>()});
  }
  return index;
}

IndexCache::IndexCache(fs::path dir) : dir_(std::move(dir)) {}

std::optional<LogIndex> IndexCache::load(const std::string& key) const {
  const auto entry = dir_ / key;
  if (!fs::exists(entry / "chunks.jsonl") || !fs::exists(entry / "summaries.jsonl")) {
    return std::nullopt;
  }
  try {
    auto index = read_index_files(entry);
    if (index.chunks.size() != index.summaries.size()) return std::nullopt;
    for (std::size_t i = 0; i < index.chunks.size(); ++i) {
      if (index.chunks[i].index != i || index.summaries[i].chunk_index != i) return std::nullopt;
    }
    index.key = key;
    index.from_cache = true;
    return index;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

void IndexCache::store(const LogIndex& index) const {
  static std::atomic<unsigned> counter{0};
  const auto final_dir = dir_ / index.key;
  if (fs::exists(final_dir)) return;
  const auto tmp = dir_ / (index.key + ".tmp-" + std::to_string(std::random_device{}()) + "-" +
                           std::to_string(counter++));
  write_index_files(index, tmp);
  std::error_code ec;
  fs::rename(tmp, final_dir, ec);
  if (ec) fs::remove_all(tmp, ec);
}

LogIndex build_index(std::string_view log, const RetrievalConfig& config,
                     const BpeTokenizer& tokenizer, const JudgeContext& ctx,
                     const IndexCache* cache) {
  config.validate();
  if (ctx.gateway == nullptr) throw PreconditionError("judge context has no gateway");
  const auto key = index_key(log, config, tokenizer, ctx.gateway->catalog().version(),
                             ctx.gateway->backend_id());
  if (cache) {
    if (auto hit = cache->load(key)) return std::move(*hit);
  }
  LogIndex index;
  index.key = key;
  index.chunks = chunk_log(log, config.chunk_tokens, tokenizer);
  if (index.chunks.empty()) ctx.warn("actor log is empty; nothing to retrieve from");
  index.summaries = summarize_chunks(index.chunks, ctx);
  if (cache) cache->store(index);
  return index;
}

std::vector<bool> plan_section_mask(const std::vector<Chunk>& chunks,
                                    const RetrievalConfig& config) {
  std::vector<bool> eligible(chunks.size(), true);
  if (!config.exclude_plan_sections) return eligible;
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    for (const auto& marker : config.plan_markers) {
      if (!marker.empty() && text::contains(chunks[i].text, marker)) {
        eligible[i] = false;
        break;
      }
    }
  }
  return eligible;
}

RetrievalResult retrieve_chunks(std::string_view question,
                                const std::vector<ChunkSummary>& summaries,
                                const Reranker& reranker, const RetrievalConfig& config,
                                const std::vector<bool>* eligible) {
  config.validate();
  if (eligible && eligible->size() != summaries.size()) {
    throw PreconditionError("eligibility mask size does not match the summaries");
  }
  std::vector<std::size_t> candidates;
  std::vector<std::string> passages;
  for (std::size_t i = 0; i < summaries.size(); ++i) {
    if (eligible && !(*eligible)[i]) continue;
    candidates.push_back(i);
    passages.push_back(summaries[i].summary);
  }
  RetrievalResult result;
  if (candidates.empty()) return result;

  const auto scores = reranker.score(question, passages);
  if (scores.size() != passages.size()) throw GatewayError("reranker returned wrong score count");

  std::vector<ScoredChunk> ranked;
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    ranked.push_back(ScoredChunk{summaries[candidates[k]].chunk_index, scores[k]});
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const ScoredChunk& a, const ScoredChunk& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.chunk_index < b.chunk_index;
  });

  for (const auto& r : ranked) {
    if (r.score >= config.relevance_threshold) result.selected.push_back(r);
  }
  if (result.selected.empty()) {
    result.fallback = true;
    const auto k = std::min(config.fallback_top_k, ranked.size());
    result.selected.assign(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(k));
  }
  return result;
}

std::string window_text(const std::vector<Chunk>& chunks, const ChunkWindow& window) {
  if (window.first > window.last || window.last >= chunks.size()) {
    throw PreconditionError("chunk window out of range");
  }
  std::string out;
  for (std::size_t i = window.first; i <= window.last; ++i) out += chunks[i].text;
  return out;
}

std::vector<ChunkWindow> windows_for(const RetrievalResult& retrieval) {
  std::vector<std::size_t> idx;
  for (const auto& s : retrieval.selected) idx.push_back(s.chunk_index);
  std::sort(idx.begin(), idx.end());
  idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
  std::vector<ChunkWindow> out;
  for (auto i : idx) out.push_back(ChunkWindow{i, i});
  return out;
}

std::vector<ChunkWindow> widen_windows(const std::vector<ChunkWindow>& windows,
                                       std::size_t chunk_count, std::size_t by) {
  std::vector<ChunkWindow> grown;
  if (chunk_count == 0) return grown;
  for (const auto& w : windows) {
    ChunkWindow g;
    g.first = w.first > by ? w.first - by : 0;
    g.last = std::min(w.last + by, chunk_count - 1);
    grown.push_back(g);
  }
  std::sort(grown.begin(), grown.end(), [](const ChunkWindow& a, const ChunkWindow& b) {
    return a.first != b.first ? a.first < b.first : a.last < b.last;
  });
  std::vector<ChunkWindow> merged;
  for (const auto& w : grown) {
    if (!merged.empty() && w.first <= merged.back().last + 1) {
      merged.back().last = std::max(merged.back().last, w.last);
    } else {
      merged.push_back(w);
    }
  }
  return merged;
}

namespace {

bool is_none_reply(const std::string& s) {
  auto lower = text::to_lower(s);
  while (!lower.empty() && (lower.back() == '.' || lower.back() == '"')) lower.pop_back();
  if (!lower.empty() && lower.front() == '"') lower.erase(lower.begin());
  return lower == "none";
}

std::size_t chunk_at(const std::vector<Chunk>& chunks, const ChunkWindow& w, std::size_t offset) {
  for (std::size_t i = w.first; i <= w.last; ++i) {
    if (offset < chunks[i].end) return i;
  }
  return w.last;
}

}  // namespace

std::vector<Snippet> extract_snippets(std::string_view question, const TaskRecord& task,
                                      const std::vector<Chunk>& chunks,
                                      const std::vector<ChunkWindow>& windows,
                                      const JudgeContext& ctx) {
  std::vector<Snippet> snippets;
  for (const auto& w : windows) {
    const auto excerpt = window_text(chunks, w);
    CompletionRequest request;
    request.template_id = "snippet_extract";
    request.variables = {{"task", task.description},
                         {"question", std::string(question)},
                         {"excerpt", excerpt},
                         {"feedback", ""}};

    auto make = [&](std::size_t pos, std::string text, bool fallback) {
      Snippet s;
      s.chunk_index = chunk_at(chunks, w, chunks[w.first].begin + pos);
      s.window_first = w.first;
      s.window_last = w.last;
      s.text = std::move(text);
      s.fallback_match = fallback;
      snippets.push_back(std::move(s));
    };

    auto reply = text::strip_code_fence(text::trim(ctx.complete(request).text));
    if (is_none_reply(reply)) continue;
    if (!reply.empty()) {
      if (auto pos = excerpt.find(reply); pos != std::string::npos) {
        make(pos, reply, false);
        continue;
      }
    }

    request.variables["feedback"] =
        "Copy the passage character for character from the excerpt, or reply NONE. "
        "This reply does not appear verbatim in the excerpt:\n" +
        reply;
    auto second = text::strip_code_fence(text::trim(ctx.complete(request).text));
    if (is_none_reply(second)) continue;
    if (!second.empty()) {
      if (auto pos = excerpt.find(second); pos != std::string::npos) {
        make(pos, second, false);
        continue;
      }
    }
    const auto [b, e] = text::longest_common_substring(second, excerpt);
    auto matched = excerpt.substr(b, e - b);
    if (text::trim(matched).empty()) {
      ctx.warn("snippet for chunks " + std::to_string(w.first) + "-" + std::to_string(w.last) +
               " was not verbatim and shares no text with the excerpt; dropped");
      continue;
    }
    ctx.warn("snippet for chunks " + std::to_string(w.first) + "-" + std::to_string(w.last) +
             " was not verbatim; using the longest common substring");
    make(b, std::move(matched), true);
  }
  return snippets;
}

}  // namespace agentjudge
