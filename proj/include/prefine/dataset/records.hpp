#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "prefine/core/types.hpp"
#include "prefine/core/validation.hpp"

namespace prefine::dataset {

// One premise paired with one user's history; the unit every method runs on.
struct ExperimentRecord {
    std::string id;
    Premise premise;
    UserHistory history;
    std::optional<Aspect> aspect;  // PerDOC only

    Dataset dataset() const { return premise.dataset; }

    bool operator==(const ExperimentRecord&) const = default;
};

struct LoadOptions {
    // Strict mode pins PerMPST histories to exactly arity.permpst_interactions
    // triples; lenient mode accepts any non-empty history. PerDOC histories are
    // always held to arity.perdoc_interactions.
    bool strict = true;
    ArityConfig arity;
};

// Parses line-delimited JSON records, one object per non-blank line.
// Throws SchemaError(line, reason) and ArityError.
std::vector<ExperimentRecord> parse_records(std::string_view text, Dataset dataset,
                                            const LoadOptions& options = {});

std::vector<ExperimentRecord> load_perdoc(const std::filesystem::path& path,
                                          const LoadOptions& options = {});
std::vector<ExperimentRecord> load_permpst(const std::filesystem::path& path,
                                           const LoadOptions& options = {});
std::vector<ExperimentRecord> load_records(const std::filesystem::path& path, Dataset dataset,
                                           const LoadOptions& options = {});

// Guesses the dataset from the first record's history keys.
std::optional<Dataset> sniff_dataset(std::string_view text);

// Canonical single-line JSON for a record; parse_records reads it back.
std::string to_jsonl(const ExperimentRecord& record);

// Sample corpora bundled with the library ("sample_perdoc.jsonl", ...).
std::vector<std::string> sample_names();
std::string_view sample_text(std::string_view name);

}  // namespace prefine::dataset
