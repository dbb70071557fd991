#include "prefine/pipeline/plot_structure.hpp"

#include <array>
#include <cctype>
#include <optional>

#include "prefine/errors.hpp"
#include "prefine/util/text.hpp"

namespace prefine::pipeline {

namespace {

constexpr std::array<std::string_view, 4> kSections = {"Premise", "Setting", "Characters", "Outline"};

std::string_view strip_emphasis(std::string_view s) {
    while (!s.empty() && (s.front() == '*' || s.front() == '#' || s.front() == '_' || s.front() == ' ')) {
        s.remove_prefix(1);
    }
    return s;
}

// Section index and trailing inline text for a header line.
std::optional<std::pair<std::size_t, std::string_view>> match_header(std::string_view line) {
    auto s = strip_emphasis(util::trim(line));
    for (std::size_t i = 0; i < kSections.size(); ++i) {
        if (!util::istarts_with(s, kSections[i])) continue;
        auto rest = s.substr(kSections[i].size());
        while (!rest.empty() && (rest.front() == '*' || rest.front() == '_')) rest.remove_prefix(1);
        if (rest.empty() || rest.front() != ':') continue;
        rest.remove_prefix(1);
        while (!rest.empty() && (rest.front() == '*' || rest.front() == '_')) rest.remove_prefix(1);
        return std::make_pair(i, util::trim(rest));
    }
    return std::nullopt;
}

// "12. text" or "12) text" -> text
std::optional<std::string_view> numbered(std::string_view s) {
    std::size_t i = 0;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
    if (i == 0 || i + 1 >= s.size() || (s[i] != '.' && s[i] != ')') || s[i + 1] != ' ') return std::nullopt;
    return util::trim(s.substr(i + 2));
}

// "a. text", "(b) text", "- text" -> text
std::optional<std::string_view> lettered(std::string_view s) {
    if (s.size() >= 2 && (s[0] == '-' || s[0] == '*') && s[1] == ' ') return util::trim(s.substr(2));
    bool paren = !s.empty() && s.front() == '(';
    if (paren) s.remove_prefix(1);
    if (s.size() >= 3 && s[0] >= 'a' && s[0] <= 'z' && (s[1] == '.' || s[1] == ')') && s[2] == ' ') {
        return util::trim(s.substr(3));
    }
    return std::nullopt;
}

void append_line(std::string& field, std::string_view line) {
    auto t = util::trim(line);
    if (t.empty() && field.empty()) return;
    if (!field.empty()) field.push_back('\n');
    field.append(t);
}

}  // namespace

PlotStructure parse_plot(std::string_view text) {
    PlotStructure plot;
    std::array<bool, 4> seen{};
    std::optional<std::size_t> current;
    std::array<std::string*, 3> fields = {&plot.premise, &plot.setting, &plot.characters};

    for (const auto& line : util::split_lines(text)) {
        if (auto header = match_header(line)) {
            current = header->first;
            seen[*current] = true;
            if (*current < 3) {
                append_line(*fields[*current], header->second);
            } else if (!header->second.empty()) {
                throw StructureViolation("outline header carries inline text");
            }
            continue;
        }
        if (!current) continue;
        if (*current < 3) {
            append_line(*fields[*current], line);
            continue;
        }
        auto t = util::trim(line);
        if (t.empty()) continue;
        auto s = strip_emphasis(t);
        if (auto item = numbered(s)) {
            plot.outline.push_back({std::string(*item), {}});
        } else if (auto sub = lettered(s); sub && !plot.outline.empty()) {
            plot.outline.back().subpoints.emplace_back(*sub);
        } else if (!plot.outline.empty()) {
            auto& target = plot.outline.back().subpoints.empty() ? plot.outline.back().text
                                                                 : plot.outline.back().subpoints.back();
            target += " " + std::string(t);
        } else {
            throw StructureViolation("outline text before the first numbered item");
        }
    }
    for (std::size_t i = 0; i < kSections.size(); ++i) {
        if (!seen[i]) throw StructureViolation("plot lacks the " + std::string(kSections[i]) + " section");
    }
    for (auto* f : fields) *f = util::trim_copy(*f);
    return plot;
}

std::string structure_problem(const PlotStructure& plot, bool require_subpoints) {
    if (plot.outline.size() != 4) {
        return "outline has " + std::to_string(plot.outline.size()) + " top-level items, expected 4";
    }
    if (require_subpoints) {
        for (std::size_t i = 0; i < plot.outline.size(); ++i) {
            auto n = plot.outline[i].subpoints.size();
            if (n < 1 || n > 4) {
                return "outline item " + std::to_string(i + 1) + " has " + std::to_string(n) +
                       " sub-points, expected 1 to 4";
            }
        }
    }
    return "";
}

}  // namespace prefine::pipeline
