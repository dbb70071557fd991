#include "prefine/prompts/parsers.hpp"

#include <array>
#include <cctype>

#include "prefine/errors.hpp"
#include "prefine/util/text.hpp"

namespace prefine::prompts {

namespace {

std::string_view skip_decoration(std::string_view s) {
    while (!s.empty() && (s.front() == '*' || s.front() == '#' || s.front() == '_' ||
                          std::isspace(static_cast<unsigned char>(s.front())))) {
        s.remove_prefix(1);
    }
    return s;
}

// "Label: rest" with optional markdown emphasis and list marker around the
// label. Returns the text after the colon.
std::optional<std::string_view> match_label(std::string_view line, std::string_view label) {
    auto s = skip_decoration(util::strip_list_marker(util::trim(line)));
    if (!util::istarts_with(s, label)) return std::nullopt;
    s.remove_prefix(label.size());
    while (!s.empty() && (s.front() == '*' || s.front() == '_' || s.front() == ' ')) s.remove_prefix(1);
    if (s.empty() || s.front() != ':') return std::nullopt;
    s.remove_prefix(1);
    while (!s.empty() && (s.front() == '*' || s.front() == '_')) s.remove_prefix(1);
    return util::trim(s);
}

bool is_bracket_header(std::string_view line) {
    auto t = util::trim(line);
    return t.size() >= 2 && t.front() == '[' && t.back() == ']';
}

void append_text(std::string& field, std::string_view text) {
    auto t = util::trim(text);
    if (t.empty()) return;
    if (!field.empty()) field.push_back(' ');
    field.append(t);
}

bool labels_match(const std::string& a, const std::string& b) {
    if (a.empty() || b.empty()) return false;
    return a.rfind(b, 0) == 0 || b.rfind(a, 0) == 0;
}

struct RawBlock {
    std::string criterion;
    std::optional<std::string> score;
    std::string explanation;
    std::string suggestion;
    bool has_explanation = false;
    bool has_suggestion = false;
};

constexpr std::array<std::string_view, 3> kSections = {
    "Positive Aspects", "Areas for Improvement", "Suggestions for Improvement"};

// Index of the section a header line opens, plus any text after the title.
std::optional<std::pair<std::size_t, std::string_view>> match_section(std::string_view line) {
    auto s = skip_decoration(util::trim(line));
    bool paren = !s.empty() && s.front() == '(';
    if (paren) s.remove_prefix(1);
    if (!s.empty() && std::isdigit(static_cast<unsigned char>(s.front()))) {
        s.remove_prefix(1);
        if (s.empty()) return std::nullopt;
        char d = s.front();
        if (d != '.' && d != ')' && d != ':' && d != '-') return std::nullopt;
        s.remove_prefix(1);
    } else if (paren) {
        return std::nullopt;
    }
    s = skip_decoration(s);
    for (std::size_t i = 0; i < kSections.size(); ++i) {
        if (util::istarts_with(s, kSections[i])) {
            auto rest = s.substr(kSections[i].size());
            while (!rest.empty() && (rest.front() == '*' || rest.front() == '_' ||
                                     rest.front() == ':' || rest.front() == ' ')) {
                rest.remove_prefix(1);
            }
            return std::make_pair(i, util::trim(rest));
        }
    }
    return std::nullopt;
}

}  // namespace

Rubric parse_rubric(std::string_view text) {
    std::vector<std::string> marked;
    std::vector<std::string> plain;
    for (const auto& line : util::split_lines(text)) {
        auto t = util::trim(line);
        if (t.empty() || is_bracket_header(t)) continue;
        if (util::has_list_marker(t)) {
            auto c = util::trim(util::strip_list_marker(t));
            if (!c.empty()) marked.emplace_back(c);
        } else {
            plain.emplace_back(t);
        }
    }
    auto& criteria = marked.empty() ? plain : marked;
    if (criteria.empty()) throw EmptyRubric("no rubric criteria found");
    return Rubric::user_specific(std::move(criteria));
}

std::string render_rubric_list(const Rubric& rubric) {
    std::vector<std::string> lines;
    const auto& c = rubric.criteria();
    for (std::size_t i = 0; i < c.size(); ++i) lines.push_back(std::to_string(i + 1) + ". " + c[i]);
    return util::join(lines, "\n");
}

Feedback parse_structured_feedback(std::string_view text, const Rubric& rubric) {
    if (rubric.kind() == RubricKind::None || rubric.criteria().empty()) {
        throw PreconditionViolation("structured feedback needs a rubric");
    }
    std::vector<RawBlock> blocks;
    std::string* current = nullptr;
    for (const auto& line : util::split_lines(text)) {
        if (auto rest = match_label(line, "Criterion")) {
            blocks.emplace_back();
            blocks.back().criterion = std::string(*rest);
            current = &blocks.back().criterion;
            continue;
        }
        if (blocks.empty()) continue;
        auto& b = blocks.back();
        if (auto rest = match_label(line, "Score")) {
            b.score = std::string(*rest);
            current = nullptr;
        } else if (auto rest = match_label(line, "Explanation")) {
            b.has_explanation = true;
            current = &b.explanation;
            append_text(*current, *rest);
        } else if (auto rest = match_label(line, "Suggestion")) {
            b.has_suggestion = true;
            current = &b.suggestion;
            append_text(*current, *rest);
        } else if (current) {
            append_text(*current, line);
        }
    }

    const auto& criteria = rubric.criteria();
    std::vector<std::string> normalized;
    for (const auto& c : criteria) normalized.push_back(util::normalize_label(c));

    std::vector<std::optional<CriterionFeedback>> slots(criteria.size());
    for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
        const auto& b = blocks[bi];
        if (util::trim(b.criterion).empty()) throw MissingField(bi, "Criterion");
        if (!b.score) throw MissingField(bi, "Score");

        auto s = util::trim(*b.score);
        std::size_t digits = 0;
        bool negative = !s.empty() && s.front() == '-';
        std::size_t start = negative ? 1 : 0;
        while (start + digits < s.size() && std::isdigit(static_cast<unsigned char>(s[start + digits]))) {
            ++digits;
        }
        if (digits == 0) throw MissingField(bi, "Score");
        long value = std::stol(std::string(s.substr(start, std::min<std::size_t>(digits, 9))));
        if (negative) value = -value;
        if (value < 1 || value > 10) throw ScoreOutOfRange(value, 1, 10);

        if (!b.has_explanation || b.explanation.empty()) throw MissingField(bi, "Explanation");
        if (!b.has_suggestion || b.suggestion.empty()) throw MissingField(bi, "Suggestion");

        auto key = util::normalize_label(b.criterion);
        std::optional<std::size_t> match;
        for (std::size_t ci = 0; ci < criteria.size(); ++ci) {
            if (!slots[ci] && labels_match(key, normalized[ci])) {
                match = ci;
                break;
            }
        }
        if (!match) {
            throw CriterionMismatch("feedback criterion '" + b.criterion +
                                    "' matches no unused rubric criterion");
        }
        slots[*match] = CriterionFeedback{criteria[*match], static_cast<int>(value), b.explanation,
                                          b.suggestion};
    }
    if (blocks.size() < criteria.size()) throw MissingField(blocks.size(), "Criterion");

    Feedback f;
    f.form = FeedbackForm::Structured;
    f.raw_text = std::string(text);
    for (auto& s : slots) f.items.push_back(std::move(*s));
    return f;
}

Feedback parse_freeform_feedback(std::string_view text) {
    std::array<std::optional<std::string>, 3> sections;
    std::optional<std::size_t> current;
    for (const auto& line : util::split_lines(text)) {
        if (auto header = match_section(line)) {
            current = header->first;
            if (!sections[*current]) sections[*current] = std::string();
            append_text(*sections[*current], header->second);
            continue;
        }
        if (current) append_text(*sections[*current], line);
    }
    for (std::size_t i = 0; i < sections.size(); ++i) {
        if (!sections[i] || sections[i]->empty()) throw MissingSection(std::string(kSections[i]));
    }
    Feedback f;
    f.form = FeedbackForm::Freeform;
    f.positives = *sections[0];
    f.improvements = *sections[1];
    f.suggestions = *sections[2];
    f.raw_text = std::string(text);
    return f;
}

PersonaParse parse_persona(std::string_view text) {
    auto trimmed = util::trim(text);
    if (trimmed.empty()) throw EmptyPersona("persona text is empty");
    std::size_t count = 0;
    for (const auto& line : util::split_lines(trimmed)) {
        if (!util::trim(line).empty()) ++count;
    }
    PersonaParse out{Persona::from_text(std::string(trimmed), count), std::nullopt};
    if (count < kMinObservations || count > kMaxObservations) {
        out.warning = "persona has " + std::to_string(count) + " observation lines, expected " +
                      std::to_string(kMinObservations) + " to " + std::to_string(kMaxObservations);
    }
    return out;
}

}  // namespace prefine::prompts
