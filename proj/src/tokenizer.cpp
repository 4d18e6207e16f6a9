#include "agentjudge/tokenizer.hpp"

#include <array>
#include <fstream>
#include <limits>
#include <queue>
#include <sstream>

#include <unicode/uchar.h>

#include "agentjudge/errors.hpp"
#include "agentjudge/hashing.hpp"
#include "agentjudge/text_util.hpp"

namespace agentjudge {

namespace {

constexpr std::uint32_t kNoRank = std::numeric_limits<std::uint32_t>::max();
constexpr std::uint32_t kInvalid = 0xFFFFFFFFu;

struct CodePoint {
  std::uint32_t cp;
  std::size_t offset;
};

std::vector<CodePoint> decode_utf8(std::string_view s) {
  std::vector<CodePoint> out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    std::size_t len = 0;
    std::uint32_t cp = 0;
    if (b0 < 0x80) {
      len = 1;
      cp = b0;
    } else if ((b0 & 0xE0) == 0xC0) {
      len = 2;
      cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
      len = 3;
      cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
      len = 4;
      cp = b0 & 0x07;
    }
    bool ok = len > 0 && i + len <= s.size();
    for (std::size_t k = 1; ok && k < len; ++k) {
      const auto b = static_cast<unsigned char>(s[i + k]);
      if ((b & 0xC0) != 0x80) ok = false;
      cp = (cp << 6) | (b & 0x3F);
    }
    if (!ok) {
      out.push_back({kInvalid, i});
      ++i;
      continue;
    }
    out.push_back({cp, i});
    i += len;
  }
  return out;
}

bool is_letter(std::uint32_t cp) {
  return cp != kInvalid && (U_GET_GC_MASK(static_cast<UChar32>(cp)) & U_GC_L_MASK) != 0;
}

bool is_number(std::uint32_t cp) {
  return cp != kInvalid && (U_GET_GC_MASK(static_cast<UChar32>(cp)) & U_GC_N_MASK) != 0;
}

bool is_space(std::uint32_t cp) {
  return cp != kInvalid && u_hasBinaryProperty(static_cast<UChar32>(cp), UCHAR_WHITE_SPACE);
}

bool is_newline(std::uint32_t cp) { return cp == '\r' || cp == '\n'; }

bool is_other(std::uint32_t cp) { return !is_space(cp) && !is_letter(cp) && !is_number(cp); }

std::uint32_t ascii_lower(std::uint32_t cp) {
  return (cp >= 'A' && cp <= 'Z') ? cp + 32 : cp;
}

// Length in code points of a contraction suffix at i ('s 't 're 've 'm 'll 'd), or 0.
std::size_t match_contraction(const std::vector<CodePoint>& cps, std::size_t i) {
  if (cps[i].cp != '\'' || i + 1 >= cps.size()) return 0;
  const std::uint32_t c1 = ascii_lower(cps[i + 1].cp);
  if (c1 == 's' || c1 == 't' || c1 == 'm' || c1 == 'd') return 2;
  if (i + 2 >= cps.size()) return 0;
  const std::uint32_t c2 = ascii_lower(cps[i + 2].cp);
  if ((c1 == 'r' && c2 == 'e') || (c1 == 'v' && c2 == 'e') || (c1 == 'l' && c2 == 'l')) {
    return 3;
  }
  return 0;
}

// Returns the end (code point index) of the piece starting at i.
std::size_t next_piece(const std::vector<CodePoint>& cps, std::size_t i) {
  const std::size_t n = cps.size();
  const std::uint32_t c = cps[i].cp;

  if (std::size_t len = match_contraction(cps, i)) return i + len;

  // [^\r\n\p{L}\p{N}]?\p{L}+
  {
    std::size_t j = n;
    if (!is_newline(c) && !is_letter(c) && !is_number(c) && i + 1 < n &&
        is_letter(cps[i + 1].cp)) {
      j = i + 1;
    } else if (is_letter(c)) {
      j = i;
    }
    if (j < n) {
      while (j < n && is_letter(cps[j].cp)) ++j;
      return j;
    }
  }

  // \p{N}{1,3}
  if (is_number(c)) {
    std::size_t j = i;
    while (j < n && j - i < 3 && is_number(cps[j].cp)) ++j;
    return j;
  }

  // ' ?[^\s\p{L}\p{N}]+[\r\n]*'
  {
    std::size_t j = n;
    if (c == ' ' && i + 1 < n && is_other(cps[i + 1].cp)) {
      j = i + 1;
    } else if (is_other(c)) {
      j = i;
    }
    if (j < n) {
      while (j < n && is_other(cps[j].cp)) ++j;
      while (j < n && is_newline(cps[j].cp)) ++j;
      return j;
    }
  }

  // Everything left starts with whitespace.
  std::size_t run_end = i;
  while (run_end < n && is_space(cps[run_end].cp)) ++run_end;

  // \s*[\r\n]+
  for (std::size_t k = run_end; k > i; --k) {
    if (is_newline(cps[k - 1].cp)) return k;
  }
  // \s+(?!\S)
  if (run_end == n) return run_end;
  if (run_end - i >= 2) return run_end - 1;
  // \s+
  return run_end;
}

std::string base64_decode(std::string_view in) {
  static const auto table = [] {
    std::array<int, 256> t{};
    t.fill(-1);
    const char* alphabet =
        "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    for (int i = 0; i < 64; ++i) t[static_cast<unsigned char>(alphabet[i])] = i;
    return t;
  }();
  std::string out;
  int value = 0;
  int bits = -8;
  for (char ch : in) {
    if (ch == '=') break;
    const int d = table[static_cast<unsigned char>(ch)];
    if (d < 0) throw Error("invalid base64 in rank file");
    value = (value << 6) + d;
    bits += 6;
    if (bits >= 0) {
      out += static_cast<char>((value >> bits) & 0xFF);
      bits -= 8;
    }
  }
  return out;
}

}  // namespace

std::vector<std::size_t> cl100k_pretokenize(std::string_view text) {
  const auto cps = decode_utf8(text);
  std::vector<std::size_t> ends;
  std::size_t i = 0;
  while (i < cps.size()) {
    const std::size_t j = next_piece(cps, i);
    ends.push_back(j < cps.size() ? cps[j].offset : text.size());
    i = j;
  }
  return ends;
}

std::shared_ptr<const BpeTokenizer> BpeTokenizer::load(const std::filesystem::path& rank_file) {
  std::ifstream in(rank_file, std::ios::binary);
  if (!in) throw Error("cannot open tokenizer rank file " + rank_file.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string content = buffer.str();

  std::shared_ptr<BpeTokenizer> tok(new BpeTokenizer());
  tok->vocab_sha256_ = sha256_hex(content);
  tok->name_ = rank_file.stem().string();
  tok->ranks_.reserve(110000);

  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < content.size()) {
    auto nl = content.find('\n', pos);
    if (nl == std::string::npos) nl = content.size();
    std::string_view line(content.data() + pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (line.empty()) continue;
    const auto sp = line.find(' ');
    if (sp == std::string_view::npos) {
      throw Error("malformed rank file line " + std::to_string(line_no));
    }
    std::uint32_t rank = 0;
    for (char ch : line.substr(sp + 1)) {
      if (ch < '0' || ch > '9') break;
      rank = rank * 10 + static_cast<std::uint32_t>(ch - '0');
    }
    tok->ranks_.emplace(base64_decode(line.substr(0, sp)), rank);
  }
  for (int b = 0; b < 256; ++b) {
    if (!tok->ranks_.contains(std::string(1, static_cast<char>(b)))) {
      throw Error("rank file does not cover every single byte");
    }
  }
  return tok;
}

std::uint32_t BpeTokenizer::rank_of(std::string_view bytes) const {
  auto it = ranks_.find(bytes);
  return it == ranks_.end() ? kNoRank : it->second;
}

void BpeTokenizer::encode_piece(std::string_view piece, std::size_t offset,
                                std::vector<std::size_t>& ends) const {
  if (piece.size() == 1 || rank_of(piece) != kNoRank) {
    ends.push_back(offset + piece.size());
    return;
  }

  // Parts form a linked list of byte ranges; a min-heap keyed on
  // (rank, start) picks the lowest-rank adjacent pair, leftmost on ties.
  const std::size_t n = piece.size();
  std::vector<std::size_t> end(n);
  std::vector<std::size_t> prev(n);
  std::vector<bool> alive(n, true);
  for (std::size_t i = 0; i < n; ++i) {
    end[i] = i + 1;
    prev[i] = i == 0 ? n : i - 1;
  }

  struct Candidate {
    std::uint32_t rank;
    std::size_t left;
    std::size_t left_end;
    std::size_t right_end;
    bool operator>(const Candidate& o) const {
      return rank != o.rank ? rank > o.rank : left > o.left;
    }
  };
  std::priority_queue<Candidate, std::vector<Candidate>, std::greater<>> heap;
  auto push_pair = [&](std::size_t left) {
    if (left >= n || !alive[left] || end[left] >= n) return;
    const std::size_t right = end[left];
    const std::uint32_t r = rank_of(piece.substr(left, end[right] - left));
    if (r != kNoRank) heap.push({r, left, end[left], end[right]});
  };
  for (std::size_t i = 0; i + 1 < n; ++i) push_pair(i);

  while (!heap.empty()) {
    const Candidate c = heap.top();
    heap.pop();
    if (!alive[c.left] || end[c.left] != c.left_end || c.left_end >= n ||
        !alive[c.left_end] || end[c.left_end] != c.right_end) {
      continue;
    }
    const std::size_t right = c.left_end;
    alive[right] = false;
    end[c.left] = c.right_end;
    if (c.right_end < n) prev[c.right_end] = c.left;
    if (prev[c.left] < n) push_pair(prev[c.left]);
    push_pair(c.left);
  }

  for (std::size_t i = 0; i < n; i = end[i]) ends.push_back(offset + end[i]);
}

std::vector<std::size_t> BpeTokenizer::token_ends(std::string_view text) const {
  std::vector<std::size_t> ends;
  ends.reserve(text.size() / 3 + 1);
  std::size_t start = 0;
  for (std::size_t piece_end : cl100k_pretokenize(text)) {
    encode_piece(text.substr(start, piece_end - start), start, ends);
    start = piece_end;
  }
  return ends;
}

std::size_t BpeTokenizer::count(std::string_view text) const {
  return token_ends(text).size();
}

std::string_view BpeTokenizer::truncate(std::string_view text, std::size_t max_tokens) const {
  const auto ends = token_ends(text);
  if (ends.size() <= max_tokens) return text;
  std::size_t cut = max_tokens == 0 ? 0 : ends[max_tokens - 1];
  while (cut > 0 && !text::is_codepoint_boundary(text, cut)) --cut;
  return text.substr(0, cut);
}

}  // namespace agentjudge
