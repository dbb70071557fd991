#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace prefine::util {

std::string_view trim(std::string_view s);
std::string trim_copy(std::string_view s);
std::string to_lower(std::string_view s);

// Lowercase, strip surrounding punctuation/markdown and collapse inner
// whitespace to single spaces. Used for lenient label matching.
std::string normalize_label(std::string_view s);

// Splits on '\n', dropping a trailing '\r' from each line.
std::vector<std::string> split_lines(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

bool iequals(std::string_view a, std::string_view b);
bool istarts_with(std::string_view s, std::string_view prefix);

// Strips a leading list marker: "1.", "1)", "(1)", "-", "*", "+", "•".
std::string_view strip_list_marker(std::string_view line);
bool has_list_marker(std::string_view line);

// Number of sentences, counted as runs ending in '.', '!' or '?'.
std::size_t count_sentences(std::string_view text);

}  // namespace prefine::util
