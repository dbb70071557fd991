#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "prefine/dataset/records.hpp"
#include "prefine/pipeline/pipeline.hpp"

namespace prefine::pipeline {

struct ExperimentOptions {
    std::filesystem::path out_dir;
    // Skip cells the existing manifest already lists as done.
    bool resume = true;
    // Stop after this many newly executed cells (the run stays resumable).
    std::optional<std::size_t> max_cells;
    std::size_t threads = 1;
};

enum class CellStatus { Pending, Ok, Failed };

struct CellResult {
    std::string method;  // MethodConfig label
    std::string record_id;
    CellStatus status = CellStatus::Pending;
    std::string trace_path;  // relative to out_dir
    std::string error;       // failure code and message

    bool operator==(const CellResult&) const = default;
};

struct Manifest {
    int schema_version = 1;
    std::string dataset;
    std::string backend;
    long long seed = 42;
    double gen_temperature = 0.7;
    double eval_temperature = 0.0;
    std::string template_hash;
    std::vector<std::string> methods;
    std::vector<std::string> records;
    std::vector<CellResult> cells;  // records x methods, record-major
    bool complete = false;

    std::size_t count(CellStatus status) const;
    bool operator==(const Manifest&) const = default;
};

nlohmann::json to_json(const Manifest& manifest);
Manifest manifest_from_json(const nlohmann::json& j);
Manifest load_manifest(const std::filesystem::path& out_dir);

// <out>/<method label>/<record id>/trace.json
std::filesystem::path trace_path(const std::filesystem::path& out_dir, const std::string& method_label,
                                 const std::string& record_id);

// Runs every (record, method) cell, writing each trace and rewriting the
// manifest after every cell so an interrupted run can resume. Failed cells
// are listed in the manifest and their traces are still written.
Manifest run_experiment(const Pipeline& pipeline, const std::vector<dataset::ExperimentRecord>& records,
                        const std::vector<MethodConfig>& methods, const RunConfig& base,
                        const ExperimentOptions& options);

}  // namespace prefine::pipeline
