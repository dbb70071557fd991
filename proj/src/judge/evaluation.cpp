#include "prefine/judge/evaluation.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "prefine/dataset/trace_io.hpp"
#include "prefine/errors.hpp"
#include "prefine/util/parallel.hpp"

namespace fs = std::filesystem;

namespace prefine::judge {

namespace {

std::vector<std::optional<Aspect>> aspects_for(const RefinementTrace& t, AspectMode mode) {
    if (t.premise.dataset == Dataset::PerMPST) return {std::nullopt};
    if (mode == AspectMode::RecordOnly) {
        auto a = t.aspect ? *t.aspect : t.history.perdoc().front().aspect;
        return {a};
    }
    return {kAllAspects.begin(), kAllAspects.end()};
}

struct PairJob {
    const RefinementTrace* row;
    const RefinementTrace* col;
    std::string row_method;
    std::string col_method;
    int iteration;  // -1: final draft of row
    std::optional<Aspect> aspect;
};

std::vector<VerdictRecord> run_jobs(const Judge& judge, const std::vector<PairJob>& jobs, std::size_t threads) {
    std::vector<VerdictRecord> out(jobs.size());
    util::parallel_for(jobs.size(), threads, [&](std::size_t i) {
        const auto& job = jobs[i];
        const auto& a = job.iteration < 0 ? job.row->final_draft()
                                          : job.row->drafts.at(static_cast<std::size_t>(job.iteration));
        auto& rec = out[i];
        rec.row = job.row_method;
        rec.col = job.col_method;
        rec.aspect = job.aspect;
        rec.record_id = job.row->record_id;
        rec.iteration = job.iteration;
        rec.verdict = judge.pairwise_corrected(a.text(), job.col->final_draft().text(), job.row->history, job.aspect);
    });
    return out;
}

void require_method(const RunTraces& run, const std::string& method) {
    const auto& ms = run.manifest.methods;
    if (std::find(ms.begin(), ms.end(), method) == ms.end()) {
        throw MissingInput("run in " + run.dir.string() + " has no method '" + method + "'");
    }
}

}  // namespace

const RefinementTrace* RunTraces::find(const std::string& method, const std::string& record_id) const {
    auto it = traces.find({method, record_id});
    return it == traces.end() ? nullptr : &it->second;
}

RunTraces load_run(const fs::path& dir) {
    if (!fs::exists(dir / "manifest.json")) {
        throw MissingInput("no experiment manifest in " + dir.string());
    }
    RunTraces run;
    run.dir = dir;
    run.manifest = pipeline::load_manifest(dir);
    for (const auto& cell : run.manifest.cells) {
        if (cell.status != pipeline::CellStatus::Ok) continue;
        run.traces.emplace(std::pair{cell.method, cell.record_id}, dataset::load_trace(dir / cell.trace_path));
    }
    return run;
}

std::vector<VerdictRecord> judge_pairwise_run(const Judge& judge, const RunTraces& run,
                                              const PairwiseOptions& options) {
    auto pairs = options.pairs;
    if (pairs.empty()) {
        const auto& ms = run.manifest.methods;
        for (std::size_t i = 0; i < ms.size(); ++i) {
            for (std::size_t j = i + 1; j < ms.size(); ++j) pairs.emplace_back(ms[i], ms[j]);
        }
    }
    for (const auto& [row, col] : pairs) {
        require_method(run, row);
        require_method(run, col);
    }
    std::vector<PairJob> jobs;
    for (const auto& id : run.manifest.records) {
        for (const auto& [row, col] : pairs) {
            auto* a = run.find(row, id);
            auto* b = run.find(col, id);
            if (!a || !b) continue;
            for (const auto& aspect : aspects_for(*a, options.aspects)) jobs.push_back({a, b, row, col, -1, aspect});
        }
    }
    return run_jobs(judge, jobs, options.threads);
}

std::vector<VerdictRecord> judge_loop_trend(const Judge& judge, const RunTraces& run, const std::string& method,
                                            const std::string& baseline, const PairwiseOptions& options) {
    require_method(run, method);
    require_method(run, baseline);
    std::vector<PairJob> jobs;
    for (const auto& id : run.manifest.records) {
        auto* a = run.find(method, id);
        auto* b = run.find(baseline, id);
        if (!a || !b) continue;
        for (std::size_t t = 0; t < a->drafts.size(); ++t) {
            for (const auto& aspect : aspects_for(*a, options.aspects)) {
                jobs.push_back({a, b, method, baseline, static_cast<int>(t), aspect});
            }
        }
    }
    return run_jobs(judge, jobs, options.threads);
}

std::vector<TrendPoint> loop_trend(const std::vector<VerdictRecord>& verdicts) {
    std::map<int, std::pair<std::size_t, std::size_t>> tally;  // points2, count
    for (const auto& v : verdicts) {
        auto& [points2, count] = tally[v.iteration];
        points2 += v.verdict.corrected == Corrected::AWins ? 2 : v.verdict.corrected == Corrected::Tie ? 1 : 0;
        ++count;
    }
    std::vector<TrendPoint> out;
    for (const auto& [t, pc] : tally) {
        out.push_back({t, static_cast<double>(pc.first) / (2.0 * static_cast<double>(pc.second)), pc.second});
    }
    return out;
}

std::vector<ScoreRecord> judge_scores_run(const Judge& judge, const RunTraces& run, std::size_t threads) {
    if (run.manifest.dataset != std::string(to_string(Dataset::PerMPST))) {
        throw PreconditionViolation("scalar scores apply to PerMPST runs only");
    }
    std::vector<const pipeline::CellResult*> cells;
    for (const auto& c : run.manifest.cells) {
        if (run.find(c.method, c.record_id)) cells.push_back(&c);
    }
    std::vector<ScoreRecord> out(cells.size());
    util::parallel_for(cells.size(), threads, [&](std::size_t i) {
        const auto& t = *run.find(cells[i]->method, cells[i]->record_id);
        auto r = judge.score(t.final_draft().text(), t.history);
        out[i] = {cells[i]->method, cells[i]->record_id, r.value, std::move(r.warnings)};
    });
    return out;
}

std::vector<QualityRecord> judge_quality_run(const Judge& judge, const RunTraces& run, std::size_t threads) {
    std::vector<const pipeline::CellResult*> cells;
    for (const auto& c : run.manifest.cells) {
        if (run.find(c.method, c.record_id)) cells.push_back(&c);
    }
    std::vector<QualityRecord> out(cells.size());
    util::parallel_for(cells.size(), threads, [&](std::size_t i) {
        const auto& t = *run.find(cells[i]->method, cells[i]->record_id);
        out[i] = {cells[i]->method, cells[i]->record_id,
                  judge.general_quality(t.premise.text, t.final_draft().text()).scores};
    });
    return out;
}

nlohmann::json to_json(const ScoreRecord& r) {
    return {{"method", r.method}, {"recordId", r.record_id}, {"score", r.score}, {"warnings", r.warnings}};
}

ScoreRecord score_from_json(const nlohmann::json& j) {
    try {
        ScoreRecord r{j.at("method").get<std::string>(), j.at("recordId").get<std::string>(),
                      j.at("score").get<int>(), j.value("warnings", std::vector<std::string>{})};
        if (r.score < 1 || r.score > 10) throw SchemaError("score outside [1,10]");
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("score record: ") + e.what());
    }
}

nlohmann::json to_json(const QualityRecord& r) {
    nlohmann::json scores = nlohmann::json::object();
    for (std::size_t i = 0; i < kGeneralCriteria.size(); ++i) {
        scores[std::string(kGeneralCriteria[i])] = r.scores.scores[i];
    }
    return {{"method", r.method}, {"recordId", r.record_id}, {"scores", scores}, {"mean", r.scores.mean()}};
}

QualityRecord quality_from_json(const nlohmann::json& j) {
    try {
        QualityRecord r;
        r.method = j.at("method").get<std::string>();
        r.record_id = j.at("recordId").get<std::string>();
        for (std::size_t i = 0; i < kGeneralCriteria.size(); ++i) {
            r.scores.scores[i] = j.at("scores").at(std::string(kGeneralCriteria[i])).get<int>();
        }
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("quality record: ") + e.what());
    }
}

}  // namespace prefine::judge
