#pragma once

#include <optional>
#include <string>

#include "prefine/core/types.hpp"

// How a user's raw history is shown to the model. Shared by the generation
// stages and the judge so both see the same evidence.
namespace prefine::pipeline {

// PerDOC: "Plot A:\n...\n\nPlot B:\n..." per comparison.
// PerMPST: "Plot i:\n<synopsis>\nReview: ...\nScore: n" per triple, from 0.
std::string format_history(const UserHistory& history);

// Persona-extraction layout for PerDOC: "[Plot A]\n...\n\n[Plot B]\n...".
// PerMPST uses format_history.
std::string format_preference(const UserHistory& history);

// Literal "A"/"B" of the first PerDOC comparison.
std::string choice_label(const UserHistory& history);

// Aspect bound into prompts: the record's aspect, else the first
// comparison's. Throws PreconditionViolation for PerMPST histories.
std::string aspect_label(const UserHistory& history, const std::optional<Aspect>& aspect);

}  // namespace prefine::pipeline
