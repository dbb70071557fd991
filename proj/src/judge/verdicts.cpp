#include "prefine/judge/verdicts.hpp"

#include <cctype>
#include <cmath>
#include <numeric>
#include <regex>

#include "prefine/errors.hpp"
#include "prefine/util/text.hpp"

namespace prefine::judge {

namespace {

// Leading number of `s` (after skipping non-numeric decoration) as text.
std::optional<std::string> first_number(std::string_view s) {
    static const std::regex number(R"((-?\d+(?:\.\d+)?))");
    std::cmatch m;
    if (!std::regex_search(s.data(), s.data() + s.size(), m, number)) return std::nullopt;
    return m.str(1);
}

ParsedScore to_score(const std::string& number) {
    ParsedScore out;
    double v = std::stod(number);
    out.rounded = number.find('.') != std::string::npos && std::floor(v) != v;
    // Half-up: 7.5 -> 8, -0.5 -> 0.
    out.value = static_cast<int>(std::floor(v + 0.5));
    if (out.value < 1 || out.value > 10) throw ScoreOutOfRange(out.value, 1, 10);
    return out;
}

}  // namespace

std::string_view to_string(Side side) { return side == Side::X ? "X" : "Y"; }

std::string_view to_string(Corrected verdict) {
    switch (verdict) {
        case Corrected::AWins: return "AWins";
        case Corrected::BWins: return "BWins";
        case Corrected::Tie: return "Tie";
    }
    return "Tie";
}

Side parse_side(std::string_view text) {
    if (text == "X") return Side::X;
    if (text == "Y") return Side::Y;
    throw InvalidArgument("unknown verdict side '" + std::string(text) + "'");
}

Corrected parse_corrected(std::string_view text) {
    if (text == "AWins") return Corrected::AWins;
    if (text == "BWins") return Corrected::BWins;
    if (text == "Tie") return Corrected::Tie;
    throw InvalidArgument("unknown corrected verdict '" + std::string(text) + "'");
}

Corrected correct(Side first, Side second) {
    // In the swapped order, A is shown second.
    if (first == Side::X && second == Side::Y) return Corrected::AWins;
    if (first == Side::Y && second == Side::X) return Corrected::BWins;
    return Corrected::Tie;
}

Corrected flip(Corrected verdict) {
    switch (verdict) {
        case Corrected::AWins: return Corrected::BWins;
        case Corrected::BWins: return Corrected::AWins;
        case Corrected::Tie: return Corrected::Tie;
    }
    return Corrected::Tie;
}

Side parse_pairwise_reply(std::string_view text) {
    static const std::regex labelled(R"(preferred\W*(?:story)?\s*([12])\b)", std::regex::icase);
    static const std::regex story(R"(story\s*([12])\b)", std::regex::icase);
    static const std::regex bare(R"(^\W*([12])\W*$)");
    std::string s(util::trim(text));
    std::smatch m;
    if (std::regex_search(s, m, labelled) || std::regex_search(s, m, bare)) {
        return m.str(1) == "1" ? Side::X : Side::Y;
    }
    // Unlabelled reply naming exactly one story.
    bool one = false, two = false;
    for (auto it = std::sregex_iterator(s.begin(), s.end(), story); it != std::sregex_iterator(); ++it) {
        ((*it).str(1) == "1" ? one : two) = true;
    }
    if (one != two) return one ? Side::X : Side::Y;
    throw UnparseableVerdict("cannot read a preference from judge reply '" + s.substr(0, 80) + "'");
}

ParsedScore parse_score_reply(std::string_view text) {
    for (const auto& line : util::split_lines(text)) {
        auto t = util::trim(line);
        while (!t.empty() && (t.front() == '*' || t.front() == '#' || t.front() == ' ')) t.remove_prefix(1);
        if (util::istarts_with(t, "score")) {
            if (auto n = first_number(t.substr(5))) return to_score(*n);
        }
    }
    if (auto n = first_number(text)) return to_score(*n);
    throw UnparseableVerdict("judge reply carries no score");
}

double QualityScores::mean() const {
    return std::accumulate(scores.begin(), scores.end(), 0.0) / static_cast<double>(scores.size());
}

QualityScores parse_quality_reply(std::string_view text) {
    std::array<std::optional<int>, 6> found;
    for (const auto& line : util::split_lines(text)) {
        auto t = util::trim(util::strip_list_marker(util::trim(line)));
        while (!t.empty() && (t.front() == '*' || t.front() == '#' || t.front() == '_' || t.front() == ' ')) t.remove_prefix(1);
        for (std::size_t i = 0; i < kGeneralCriteria.size(); ++i) {
            const auto& name = kGeneralCriteria[i];
            if (found[i] || !util::istarts_with(t, name)) continue;
            auto rest = t.substr(name.size());
            auto colon = rest.find(':');
            if (colon == std::string_view::npos) continue;
            if (auto n = first_number(rest.substr(colon + 1))) found[i] = to_score(*n).value;
        }
    }
    QualityScores q;
    for (std::size_t i = 0; i < found.size(); ++i) {
        if (!found[i]) throw MissingCriterion(std::string(kGeneralCriteria[i]));
        q.scores[i] = *found[i];
    }
    return q;
}

}  // namespace prefine::judge
