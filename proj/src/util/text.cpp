#include "prefine/util/text.hpp"

#include <algorithm>
#include <cctype>

namespace prefine::util {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

}  // namespace

std::string_view trim(std::string_view s) {
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

std::string trim_copy(std::string_view s) { return std::string(trim(s)); }

std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string normalize_label(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool pending_space = false;
    for (char c : s) {
        if (is_space(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) out.push_back(' ');
        pending_space = false;
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    auto strip = [](char c) {
        return c == '*' || c == '_' || c == '"' || c == '\'' || c == '.' || c == ':' ||
               c == '`' || c == ' ' || c == '#';
    };
    std::size_t b = 0;
    std::size_t e = out.size();
    while (b < e && strip(out[b])) ++b;
    while (e > b && strip(out[e - 1])) --e;
    return out.substr(b, e - b);
}

std::vector<std::string> split_lines(std::string_view s) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start <= s.size()) {
        std::size_t nl = s.find('\n', start);
        std::string_view line =
            nl == std::string_view::npos ? s.substr(start) : s.substr(start, nl - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.emplace_back(line);
        if (nl == std::string_view::npos) break;
        start = nl + 1;
    }
    return lines;
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            parts.emplace_back(s.substr(start));
            break;
        }
        parts.emplace_back(s.substr(start, pos - start));
        start = pos + 1;
    }
    return parts;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out.append(sep);
        out.append(parts[i]);
    }
    return out;
}

bool iequals(std::string_view a, std::string_view b) {
    return a.size() == b.size() &&
           std::equal(a.begin(), a.end(), b.begin(), [](unsigned char x, unsigned char y) {
               return std::tolower(x) == std::tolower(y);
           });
}

bool istarts_with(std::string_view s, std::string_view prefix) {
    return s.size() >= prefix.size() && iequals(s.substr(0, prefix.size()), prefix);
}

std::string_view strip_list_marker(std::string_view line) {
    std::string_view s = trim(line);
    // "•" is three bytes in UTF-8.
    static constexpr std::string_view kBullet = "\xE2\x80\xA2";
    if (s.substr(0, kBullet.size()) == kBullet) return trim(s.substr(kBullet.size()));
    if (!s.empty() && (s[0] == '-' || s[0] == '*' || s[0] == '+')) {
        // "**bold**" is emphasis, not a bullet.
        if (s.size() >= 2 && s[0] == '*' && s[1] == '*') return s;
        return trim(s.substr(1));
    }
    std::size_t i = 0;
    bool paren = false;
    if (!s.empty() && s[0] == '(') {
        paren = true;
        i = 1;
    }
    std::size_t digits = i;
    while (digits < s.size() && std::isdigit(static_cast<unsigned char>(s[digits]))) ++digits;
    if (digits > i && digits < s.size()) {
        char d = s[digits];
        if ((paren && d == ')') || (!paren && (d == '.' || d == ')' || d == ':'))) {
            return trim(s.substr(digits + 1));
        }
    }
    return s;
}

bool has_list_marker(std::string_view line) {
    return strip_list_marker(line).size() != trim(line).size();
}

std::size_t count_sentences(std::string_view text) {
    std::size_t count = 0;
    bool in_sentence = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (c == '.' || c == '!' || c == '?') {
            if (in_sentence) {
                bool boundary = i + 1 == text.size() || is_space(text[i + 1]) ||
                                text[i + 1] == '"' || text[i + 1] == '\'';
                if (boundary) {
                    ++count;
                    in_sentence = false;
                }
            }
        } else if (!is_space(c)) {
            in_sentence = true;
        }
    }
    if (in_sentence) ++count;
    return count;
}

}  // namespace prefine::util
