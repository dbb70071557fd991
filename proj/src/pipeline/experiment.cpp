#include "prefine/pipeline/experiment.hpp"

#include <atomic>
#include <mutex>
#include <thread>

#include <spdlog/spdlog.h>

#include "prefine/dataset/codec.hpp"
#include "prefine/dataset/trace_io.hpp"
#include "prefine/errors.hpp"
#include "prefine/util/fs.hpp"

namespace fs = std::filesystem;

namespace prefine::pipeline {

namespace {

constexpr const char* kManifestName = "manifest.json";

std::string_view status_name(CellStatus s) {
    switch (s) {
        case CellStatus::Pending: return "pending";
        case CellStatus::Ok: return "ok";
        case CellStatus::Failed: return "failed";
    }
    return "pending";
}

CellStatus parse_status(const std::string& s) {
    if (s == "pending") return CellStatus::Pending;
    if (s == "ok") return CellStatus::Ok;
    if (s == "failed") return CellStatus::Failed;
    throw SchemaError("unknown cell status '" + s + "'");
}

void write_manifest(const fs::path& out_dir, const Manifest& m) {
    util::write_file_atomic(out_dir / kManifestName, to_json(m).dump(2) + "\n");
}

}  // namespace

std::size_t Manifest::count(CellStatus status) const {
    std::size_t n = 0;
    for (const auto& c : cells) n += c.status == status;
    return n;
}

nlohmann::json to_json(const Manifest& m) {
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& c : m.cells) {
        nlohmann::json cell = {{"method", c.method},
                               {"recordId", c.record_id},
                               {"status", std::string(status_name(c.status))},
                               {"trace", c.trace_path}};
        if (!c.error.empty()) cell["error"] = c.error;
        cells.push_back(std::move(cell));
    }
    return {{"schemaVersion", m.schema_version},
            {"dataset", m.dataset},
            {"backend", m.backend},
            {"seed", m.seed},
            {"genTemperature", m.gen_temperature},
            {"evalTemperature", m.eval_temperature},
            {"templateHash", m.template_hash},
            {"methods", m.methods},
            {"records", m.records},
            {"cells", cells},
            {"complete", m.complete}};
}

Manifest manifest_from_json(const nlohmann::json& j) {
    using dataset::require;
    using dataset::require_int;
    using dataset::require_string;
    Manifest m;
    m.schema_version = static_cast<int>(require_int(j, "schemaVersion"));
    if (m.schema_version != 1) throw VersionMismatch("unsupported manifest schemaVersion");
    m.dataset = require_string(j, "dataset");
    m.backend = require_string(j, "backend");
    m.seed = require_int(j, "seed");
    m.gen_temperature = require(j, "genTemperature").get<double>();
    m.eval_temperature = require(j, "evalTemperature").get<double>();
    m.template_hash = require_string(j, "templateHash");
    m.methods = require(j, "methods").get<std::vector<std::string>>();
    m.records = require(j, "records").get<std::vector<std::string>>();
    for (const auto& c : require(j, "cells")) {
        CellResult cell;
        cell.method = require_string(c, "method");
        cell.record_id = require_string(c, "recordId");
        cell.status = parse_status(require_string(c, "status"));
        cell.trace_path = require_string(c, "trace");
        cell.error = c.value("error", "");
        m.cells.push_back(std::move(cell));
    }
    m.complete = require(j, "complete").get<bool>();
    return m;
}

Manifest load_manifest(const fs::path& out_dir) {
    auto j = nlohmann::json::parse(util::read_file(out_dir / kManifestName), nullptr, false);
    if (j.is_discarded()) throw SchemaError("manifest in " + out_dir.string() + " is not valid JSON");
    try {
        return manifest_from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("manifest: ") + e.what());
    }
}

fs::path trace_path(const fs::path& out_dir, const std::string& method_label, const std::string& record_id) {
    return out_dir / method_label / record_id / "trace.json";
}

Manifest run_experiment(const Pipeline& pipeline, const std::vector<dataset::ExperimentRecord>& records,
                        const std::vector<MethodConfig>& methods, const RunConfig& base,
                        const ExperimentOptions& options) {
    base.validate();
    if (options.threads == 0) throw InvalidArgument("threads must be at least 1");
    Manifest m;
    m.dataset = std::string(to_string(base.dataset));
    m.backend = base.backend;
    m.seed = base.seed;
    m.gen_temperature = base.gen_temperature;
    m.eval_temperature = base.eval_temperature;
    m.template_hash = pipeline.registry().hash();
    for (const auto& method : methods) m.methods.push_back(method.label());
    for (const auto& r : records) m.records.push_back(r.id);

    struct Job {
        std::size_t cell;
        const dataset::ExperimentRecord* record;
        RunConfig config;
    };
    std::vector<Job> jobs;
    for (const auto& r : records) {
        for (const auto& method : methods) {
            RunConfig cfg = base;
            cfg.method = method;
            auto rel = fs::path(method.label()) / r.id / "trace.json";
            m.cells.push_back({method.label(), r.id, CellStatus::Pending, rel.generic_string(), ""});
            jobs.push_back({m.cells.size() - 1, &r, cfg});
        }
    }

    if (options.resume && fs::exists(options.out_dir / kManifestName)) {
        auto previous = load_manifest(options.out_dir);
        if (previous.template_hash != m.template_hash || previous.seed != m.seed ||
            previous.backend != m.backend) {
            spdlog::warn("existing manifest was produced with different settings; rerunning every cell");
        } else {
            for (auto& cell : m.cells) {
                for (const auto& old : previous.cells) {
                    if (old.method == cell.method && old.record_id == cell.record_id &&
                        old.status == CellStatus::Ok && fs::exists(options.out_dir / old.trace_path)) {
                        cell = old;
                    }
                }
            }
        }
    }
    std::erase_if(jobs, [&](const Job& j) { return m.cells[j.cell].status == CellStatus::Ok; });
    if (options.max_cells && jobs.size() > *options.max_cells) jobs.resize(*options.max_cells);

    fs::create_directories(options.out_dir);
    std::mutex mutex;
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (auto i = next.fetch_add(1); i < jobs.size(); i = next.fetch_add(1)) {
            const auto& job = jobs[i];
            auto trace = pipeline.run_method(*job.record, job.config);
            dataset::save_trace(trace, options.out_dir / m.cells[job.cell].trace_path);
            std::lock_guard lock(mutex);
            auto& cell = m.cells[job.cell];
            if (trace.failure) {
                cell.status = CellStatus::Failed;
                cell.error = trace.failure->code + ": " + trace.failure->message;
                spdlog::warn("{} / {} failed: {}", cell.method, cell.record_id, cell.error);
            } else {
                cell.status = CellStatus::Ok;
                cell.error.clear();
            }
            write_manifest(options.out_dir, m);
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < std::min(options.threads, jobs.size()); ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    m.complete = m.count(CellStatus::Pending) == 0;
    write_manifest(options.out_dir, m);
    return m;
}

}  // namespace prefine::pipeline
