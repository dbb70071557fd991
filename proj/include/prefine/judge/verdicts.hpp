#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "prefine/core/types.hpp"

namespace prefine::judge {

// Single-order verdict: the story shown first (X) or second (Y).
enum class Side { X, Y };
// Order-corrected verdict from the perspective of the (A, B) argument order.
enum class Corrected { AWins, BWins, Tie };

std::string_view to_string(Side side);
std::string_view to_string(Corrected verdict);
Side parse_side(std::string_view text);
Corrected parse_corrected(std::string_view text);

// `first` judged order (A, B), `second` judged order (B, A). A wins only
// when both orders pick it; any disagreement is a tie.
Corrected correct(Side first, Side second);
// The same verdict seen from the (B, A) argument order.
Corrected flip(Corrected verdict);

struct PairVerdict {
    Side first = Side::X;
    Side second = Side::X;
    Corrected corrected = Corrected::Tie;
    std::array<std::string, 2> responses;   // raw judge replies, in order
    std::array<std::string, 2> cache_keys;  // where the full exchanges live

    bool operator==(const PairVerdict&) const = default;
};

// Parses "Preferred: Story 1" / "Preferred: Story 2" (tolerant of case,
// markdown and a bare "1"/"2"). Throws UnparseableVerdict.
Side parse_pairwise_reply(std::string_view text);

struct ParsedScore {
    int value = 0;
    bool rounded = false;  // reply was not an integer; rounded half-up
    bool operator==(const ParsedScore&) const = default;
};

// "Score: 7", "7", "7.5/10" ... The first number after a "Score" label, or
// the first number at all. Throws UnparseableVerdict and ScoreOutOfRange.
ParsedScore parse_score_reply(std::string_view text);

struct QualityScores {
    std::array<int, 6> scores{};  // in kGeneralCriteria order

    double mean() const;
    bool operator==(const QualityScores&) const = default;
};

// One "Criterion: N" line per general criterion, any order. Throws
// MissingCriterion naming the first absent criterion, ScoreOutOfRange.
QualityScores parse_quality_reply(std::string_view text);

}  // namespace prefine::judge
