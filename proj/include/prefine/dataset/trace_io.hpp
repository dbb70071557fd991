#pragma once

#include <filesystem>

#include <nlohmann/json.hpp>

#include "prefine/core/types.hpp"

namespace prefine::dataset {

inline constexpr int kTraceSchemaVersion = 1;

nlohmann::json trace_to_json(const RefinementTrace& trace);
// Throws VersionMismatch when schemaVersion differs, SchemaError on any
// structural problem, InvariantViolation when the decoded trace is
// inconsistent. Never returns a partial trace.
RefinementTrace trace_from_json(const nlohmann::json& j);

void save_trace(const RefinementTrace& trace, const std::filesystem::path& path);
RefinementTrace load_trace(const std::filesystem::path& path);

}  // namespace prefine::dataset
