#pragma once

#include <nlohmann/json.hpp>

#include "prefine/core/types.hpp"

// JSON encodings of the domain types. Decoders throw SchemaError with a
// path-like hint on any type or enum mismatch.
namespace prefine::dataset {

using Json = nlohmann::json;

Json to_json(const Premise& premise);
Premise premise_from_json(const Json& j);

// {"userId", "dataset", "interactions": [...]}
Json to_json(const UserHistory& history);
UserHistory history_from_json(const Json& j);
// Interaction list in the record-file shape (plotA/plotB/aspect/choice or
// synopsis/review/score).
Json interactions_to_json(const UserHistory& history);
UserHistory history_from_items(std::string user_id, const Json& items, Dataset dataset);

Json to_json(const MethodConfig& config);
MethodConfig method_config_from_json(const Json& j);

Json to_json(const Persona& persona);
Persona persona_from_json(const Json& j);

Json to_json(const Rubric& rubric);
Rubric rubric_from_json(const Json& j);

Json to_json(const Feedback& feedback);
Feedback feedback_from_json(const Json& j);

Json to_json(const StoryDraft& draft);
StoryDraft draft_from_json(const Json& j);

Json to_json(const TranscriptEntry& entry);
TranscriptEntry transcript_entry_from_json(const Json& j);

// Typed field access with SchemaError on absence or mismatch.
const Json& require(const Json& j, const char* key);
std::string require_string(const Json& j, const char* key);
long long require_int(const Json& j, const char* key);

}  // namespace prefine::dataset
