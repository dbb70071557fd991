#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "prefine/core/types.hpp"

namespace prefine::prompts {

// Criterion statements from numbered, bulleted or plain lines. When any
// line carries a list marker, unmarked lines are treated as preamble.
// Throws EmptyRubric or RubricArityError.
Rubric parse_rubric(std::string_view text);

// "1. <criterion>" lines, the form bound to {rubric_list}.
std::string render_rubric_list(const Rubric& rubric);

// One item per "Criterion:" block, reported in rubric order with the
// rubric's own wording. Throws ScoreOutOfRange, MissingField,
// CriterionMismatch, or PreconditionViolation for a None rubric.
Feedback parse_structured_feedback(std::string_view text, const Rubric& rubric);

// Splits on the three numbered section headers, tolerating "1." "1)" "1:"
// and markdown emphasis. Throws MissingSection.
Feedback parse_freeform_feedback(std::string_view text);

inline constexpr std::size_t kMinObservations = 5;
inline constexpr std::size_t kMaxObservations = 10;

struct PersonaParse {
    Persona persona;
    // Set when the observation count falls outside [5,10]; non-fatal.
    std::optional<std::string> warning;
};

// Whole text kept as the persona; observations are counted per non-empty
// line. Throws EmptyPersona.
PersonaParse parse_persona(std::string_view text);

}  // namespace prefine::prompts
