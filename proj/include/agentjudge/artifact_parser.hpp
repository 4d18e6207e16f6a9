#pragma once

// Turns an Actor log into an index of chunks and summaries, retrieves the
// chunks relevant to a question and extracts verbatim evidence from them.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "agentjudge/context.hpp"
#include "agentjudge/reranker.hpp"
#include "agentjudge/tokenizer.hpp"
#include "agentjudge/types.hpp"

namespace agentjudge {

struct RetrievalConfig {
  std::size_t chunk_tokens = 300;
  double relevance_threshold = 0.5;
  std::size_t fallback_top_k = 2;
  std::size_t expansion_window = 1;
  int max_expansions = 2;
  /// Drops chunks that look like orchestrator plan or fact-sheet sections
  /// from retrieval. Off by default.
  bool exclude_plan_sections = false;
  std::vector<std::string> plan_markers = {
      "Here is the plan to follow as best as possible",
      "We are working to address the following user request",
      "To answer this request we have assembled the following team",
      "Here is an initial fact sheet to consider",
  };

  /// Throws PreconditionError for chunk_tokens < 32, fallback_top_k == 0 or a
  /// negative expansion budget.
  void validate() const;
};

/// Splits `log` into consecutive chunks of `chunk_tokens` tokens (the last may
/// be shorter). Boundaries fall on token ends that are also code point
/// boundaries, so concatenating the chunk texts reproduces `log` exactly.
/// An empty log yields no chunks.
std::vector<Chunk> chunk_log(std::string_view log, std::size_t chunk_tokens,
                             const BpeTokenizer& tokenizer);

/// One LLM summary per chunk (template `chunk_summary`), in chunk order.
/// Throws PartialIndexError carrying the summaries finished so far.
std::vector<ChunkSummary> summarize_chunks(const std::vector<Chunk>& chunks,
                                           const JudgeContext& ctx);

struct LogIndex {
  std::vector<Chunk> chunks;
  std::vector<ChunkSummary> summaries;
  std::string key;
  bool from_cache = false;
};

/// On-disk index store: <dir>/<key>/chunks.jsonl and summaries.jsonl.
class IndexCache {
 public:
  explicit IndexCache(std::filesystem::path dir);

  std::optional<LogIndex> load(const std::string& key) const;
  void store(const LogIndex& index) const;

  const std::filesystem::path& dir() const noexcept { return dir_; }

 private:
  std::filesystem::path dir_;
};

/// Cache key over everything the index depends on.
std::string index_key(std::string_view log, const RetrievalConfig& config,
                      const BpeTokenizer& tokenizer, const std::string& template_version,
                      const std::string& backend_id);

/// Chunks and summarizes `log`, reusing `cache` when given. Warns on an
/// empty log.
LogIndex build_index(std::string_view log, const RetrievalConfig& config,
                     const BpeTokenizer& tokenizer, const JudgeContext& ctx,
                     const IndexCache* cache = nullptr);

void write_index_files(const LogIndex& index, const std::filesystem::path& dir);
LogIndex read_index_files(const std::filesystem::path& dir);

struct ScoredChunk {
  std::size_t chunk_index = 0;
  double score = 0.0;
};

struct RetrievalResult {
  /// Selected chunks, best first; ties keep the lower chunk index first.
  std::vector<ScoredChunk> selected;
  /// True when nothing reached the threshold and the top-k were taken instead.
  bool fallback = false;
};

/// Scores every eligible summary against `question` and keeps those at or
/// above the threshold, or the top `fallback_top_k` when none qualifies.
/// `eligible`, when given, has one flag per summary.
RetrievalResult retrieve_chunks(std::string_view question,
                                const std::vector<ChunkSummary>& summaries,
                                const Reranker& reranker, const RetrievalConfig& config,
                                const std::vector<bool>* eligible = nullptr);

/// Eligibility flags for retrieval: false for chunks containing a plan marker
/// when plan exclusion is on.
std::vector<bool> plan_section_mask(const std::vector<Chunk>& chunks,
                                    const RetrievalConfig& config);

/// Text of the chunks in `window`.
std::string window_text(const std::vector<Chunk>& chunks, const ChunkWindow& window);

/// Windows of single chunks, one per selected chunk, in log order.
std::vector<ChunkWindow> windows_for(const RetrievalResult& retrieval);

/// Grows every window by `by` chunks on each side, clamps to the log and
/// merges overlapping or adjacent windows.
std::vector<ChunkWindow> widen_windows(const std::vector<ChunkWindow>& windows,
                                       std::size_t chunk_count, std::size_t by);

/// Asks for the verbatim passage of each window supporting an answer to
/// `question` (template `snippet_extract`). Output that is not a substring of
/// the window is re-asked once; if it still is not, the longest common
/// substring is used and flagged.
std::vector<Snippet> extract_snippets(std::string_view question, const TaskRecord& task,
                                      const std::vector<Chunk>& chunks,
                                      const std::vector<ChunkWindow>& windows,
                                      const JudgeContext& ctx);

}  // namespace agentjudge
