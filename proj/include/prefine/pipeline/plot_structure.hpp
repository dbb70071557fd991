#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace prefine::pipeline {

struct OutlineItem {
    std::string text;
    std::vector<std::string> subpoints;

    bool operator==(const OutlineItem&) const = default;
};

// A PerDOC plot: Premise / Setting / Characters / Outline sections.
struct PlotStructure {
    std::string premise;
    std::string setting;
    std::string characters;
    std::vector<OutlineItem> outline;

    bool operator==(const PlotStructure&) const = default;
};

// Splits a plot into its sections. Headers may carry markdown emphasis and
// inline text ("**Setting:** The story is set in ..."). Outline items are
// "1." / "1)" lines; sub-points are "a." / "a)" / "-" lines beneath them.
// Throws StructureViolation when a section is missing.
PlotStructure parse_plot(std::string_view text);

// Exactly four outline items; with require_subpoints each must have 1-4
// sub-points. Returns a description of the first problem, or "" if none.
std::string structure_problem(const PlotStructure& plot, bool require_subpoints);

}  // namespace prefine::pipeline
