#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace agentjudge {

/// Byte-pair encoder over a tiktoken-format rank file (one
/// "<base64 token> <rank>" pair per line), with the cl100k_base
/// pre-tokenization rules. Only token boundaries are exposed; the chunker
/// never needs token ids.
class BpeTokenizer {
 public:
  static std::shared_ptr<const BpeTokenizer> load(const std::filesystem::path& rank_file);

  /// Exclusive byte end offset of every token of `text`, in order.
  std::vector<std::size_t> token_ends(std::string_view text) const;
  std::size_t count(std::string_view text) const;

  /// Longest prefix of `text` holding at most `max_tokens` tokens, cut at a
  /// code point boundary.
  std::string_view truncate(std::string_view text, std::size_t max_tokens) const;

  const std::string& name() const noexcept { return name_; }
  const std::string& vocab_sha256() const noexcept { return vocab_sha256_; }
  std::size_t vocab_size() const noexcept { return ranks_.size(); }

 private:
  struct Hash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const noexcept {
      return std::hash<std::string_view>{}(s);
    }
  };

  BpeTokenizer() = default;

  void encode_piece(std::string_view piece, std::size_t offset,
                    std::vector<std::size_t>& ends) const;
  std::uint32_t rank_of(std::string_view bytes) const;

  std::unordered_map<std::string, std::uint32_t, Hash, std::equal_to<>> ranks_;
  std::string name_;
  std::string vocab_sha256_;
};

/// Splits text into the pieces that BPE runs on, per the cl100k split rules.
/// Returns the exclusive byte end of each piece.
std::vector<std::size_t> cl100k_pretokenize(std::string_view text);

}  // namespace agentjudge
