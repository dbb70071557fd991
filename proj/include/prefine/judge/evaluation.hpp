#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "prefine/judge/judge.hpp"
#include "prefine/judge/winrate.hpp"
#include "prefine/pipeline/experiment.hpp"

// Judging passes over the traces of a finished experiment run.
namespace prefine::judge {

struct RunTraces {
    std::filesystem::path dir;
    pipeline::Manifest manifest;
    // (method label, record id) -> successful trace. Failed cells are absent.
    std::map<std::pair<std::string, std::string>, RefinementTrace> traces;

    const RefinementTrace* find(const std::string& method, const std::string& record_id) const;
};

// Loads the manifest and every successful trace. Throws MissingInput when
// the directory holds no manifest.
RunTraces load_run(const std::filesystem::path& dir);

enum class AspectMode { All, RecordOnly };

struct PairwiseOptions {
    // PerDOC: judge under all five aspects or only the record's own.
    AspectMode aspects = AspectMode::All;
    // Ordered (row, col) pairs; empty means every pair of run methods in
    // manifest order, row before col.
    std::vector<std::pair<std::string, std::string>> pairs;
    std::size_t threads = 1;
};

// Final drafts of each pair, per record (and aspect). Output order is
// fixed by (record, pair, aspect) whatever the thread count.
std::vector<VerdictRecord> judge_pairwise_run(const Judge& judge, const RunTraces& run,
                                              const PairwiseOptions& options = {});

// Every draft t of `method` against the final draft of `baseline`, one
// verdict per (record, t, aspect) with iteration = t.
std::vector<VerdictRecord> judge_loop_trend(const Judge& judge, const RunTraces& run, const std::string& method,
                                            const std::string& baseline, const PairwiseOptions& options = {});

struct TrendPoint {
    int iteration = 0;
    double win_rate = 0.0;  // ties count half
    std::size_t count = 0;
    bool operator==(const TrendPoint&) const = default;
};

// Pooled win rate of the row method per iteration, ascending.
std::vector<TrendPoint> loop_trend(const std::vector<VerdictRecord>& verdicts);

struct ScoreRecord {
    std::string method;
    std::string record_id;
    int score = 0;
    std::vector<std::string> warnings;
    bool operator==(const ScoreRecord&) const = default;
};

// Scalar judge scores of every final PerMPST draft, manifest order.
std::vector<ScoreRecord> judge_scores_run(const Judge& judge, const RunTraces& run, std::size_t threads = 1);

struct QualityRecord {
    std::string method;
    std::string record_id;
    QualityScores scores;
    bool operator==(const QualityRecord&) const = default;
};

std::vector<QualityRecord> judge_quality_run(const Judge& judge, const RunTraces& run, std::size_t threads = 1);

nlohmann::json to_json(const ScoreRecord& r);
ScoreRecord score_from_json(const nlohmann::json& j);
nlohmann::json to_json(const QualityRecord& r);
QualityRecord quality_from_json(const nlohmann::json& j);

}  // namespace prefine::judge
