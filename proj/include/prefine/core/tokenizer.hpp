#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace prefine {

using TokenCounter = std::function<std::size_t(std::string_view)>;

inline constexpr std::string_view kApproxTokenizer = "approx";

// Rule-based stand-in for a model tokenizer. A token is a maximal run of
// word bytes (ASCII letters, digits, '_' and any byte >= 0x80) or a maximal
// run of other non-space bytes. Whitespace only separates.
//   "Hello, world" -> "Hello" "," "world"
std::size_t approx_token_count(std::string_view text);
std::vector<std::string> approx_tokenize(std::string_view text);

// Registry of named counters. "approx" is always present; exact counts can
// be plugged in (e.g. a model tokenizer exposed through the Python module).
void register_tokenizer(std::string name, TokenCounter counter);
// The built-in "approx" counter cannot be removed.
bool unregister_tokenizer(std::string_view name);
bool has_tokenizer(std::string_view name);

// Throws UnknownTokenizer if `tokenizer` is not registered.
std::size_t count_tokens(std::string_view text, std::string_view tokenizer = kApproxTokenizer);

}  // namespace prefine
