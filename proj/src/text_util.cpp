#include "agentjudge/text_util.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace agentjudge::text {

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

}  // namespace

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool contains(std::string_view haystack, std::string_view needle) {
  return haystack.find(needle) != std::string_view::npos;
}

std::vector<std::string> split_lines(std::string_view s) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto nl = s.find('\n', start);
    if (nl == std::string_view::npos) {
      if (start < s.size()) lines.emplace_back(s.substr(start));
      break;
    }
    std::string_view line = s.substr(start, nl - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.emplace_back(line);
    start = nl + 1;
  }
  return lines;
}

bool is_codepoint_boundary(std::string_view s, std::size_t pos) {
  if (pos == 0 || pos >= s.size()) return true;
  return (static_cast<unsigned char>(s[pos]) & 0xC0) != 0x80;
}

std::string strip_code_fence(std::string_view s) {
  std::string t = trim(s);
  if (t.rfind("```", 0) != 0 || t.size() < 6 || t.compare(t.size() - 3, 3, "```") != 0) {
    return t;
  }
  auto first_nl = t.find('\n');
  if (first_nl == std::string::npos || first_nl >= t.size() - 3) return t;
  std::string body = t.substr(first_nl + 1, t.size() - 3 - (first_nl + 1));
  if (body.find("```") != std::string::npos) return t;
  if (!body.empty() && body.back() == '\n') body.pop_back();
  return body;
}

std::optional<std::string> first_fenced_block(std::string_view s,
                                              std::string_view language) {
  std::size_t pos = 0;
  while ((pos = s.find("```", pos)) != std::string_view::npos) {
    auto nl = s.find('\n', pos);
    if (nl == std::string_view::npos) return std::nullopt;
    std::string info = to_lower(trim(s.substr(pos + 3, nl - pos - 3)));
    auto close = s.find("```", nl + 1);
    if (close == std::string_view::npos) return std::nullopt;
    if (info.empty() || info == language) {
      return std::string(s.substr(nl + 1, close - nl - 1));
    }
    pos = close + 3;
  }
  return std::nullopt;
}

std::optional<std::string> find_single_label(std::string_view s,
                                             const std::vector<std::string>& labels) {
  const std::string lower = to_lower(s);
  std::set<std::string> found;
  for (const auto& label : labels) {
    const std::string needle = to_lower(label);
    std::size_t pos = 0;
    while ((pos = lower.find(needle, pos)) != std::string::npos) {
      bool left_ok = pos == 0 || !is_word_char(lower[pos - 1]);
      std::size_t end = pos + needle.size();
      bool right_ok = end >= lower.size() || !is_word_char(lower[end]);
      if (left_ok && right_ok) {
        found.insert(label);
        break;
      }
      pos = end;
    }
  }
  if (found.size() != 1) return std::nullopt;
  return *found.begin();
}

std::pair<std::size_t, std::size_t> longest_common_substring(std::string_view a,
                                                             std::string_view b) {
  if (a.empty() || b.empty()) return {0, 0};
  std::vector<std::size_t> prev(b.size() + 1, 0);
  std::vector<std::size_t> cur(b.size() + 1, 0);
  std::size_t best_len = 0;
  std::size_t best_end = 0;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      if (a[i - 1] == b[j - 1]) {
        cur[j] = prev[j - 1] + 1;
        if (cur[j] > best_len || (cur[j] == best_len && j < best_end)) {
          best_len = cur[j];
          best_end = j;
        }
      } else {
        cur[j] = 0;
      }
    }
    std::swap(prev, cur);
  }
  std::size_t begin = best_end - best_len;
  std::size_t end = best_end;
  while (begin < end && !is_codepoint_boundary(b, begin)) ++begin;
  while (end > begin && !is_codepoint_boundary(b, end)) --end;
  return {begin, end};
}

std::string safe_file_name(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_' || c == '-';
    out += ok ? c : '_';
  }
  if (out.empty() || out == "." || out == "..") out = "_" + out;
  return out;
}

}  // namespace agentjudge::text
