#pragma once

// Small text helpers shared by the LLM-output parsers.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace agentjudge::text {

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);
bool contains(std::string_view haystack, std::string_view needle);
std::vector<std::string> split_lines(std::string_view s);

/// True if `pos` is not in the middle of a UTF-8 multi-byte sequence.
bool is_codepoint_boundary(std::string_view s, std::size_t pos);

/// If the whole (trimmed) text is one fenced block, returns its body.
std::string strip_code_fence(std::string_view s);

/// Body of the first ``` fenced block whose info string is empty or matches
/// `language`, if any.
std::optional<std::string> first_fenced_block(std::string_view s,
                                              std::string_view language);

/// Finds exactly one of `labels` as a whole word (case-insensitive) in `s`.
/// Returns nullopt when none or more than one distinct label occurs.
std::optional<std::string> find_single_label(std::string_view s,
                                             const std::vector<std::string>& labels);

/// Longest common substring of `a` and `b`; returns [begin, end) in `b`.
/// Ties resolve to the earliest occurrence in `b`. Offsets are snapped to
/// UTF-8 code point boundaries of `b`.
std::pair<std::size_t, std::size_t> longest_common_substring(std::string_view a,
                                                             std::string_view b);

/// Keeps only [A-Za-z0-9._-]; anything else becomes '_'.
std::string safe_file_name(std::string_view s);

}  // namespace agentjudge::text
