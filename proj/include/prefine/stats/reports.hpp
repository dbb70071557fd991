#pragma once

#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "prefine/judge/evaluation.hpp"
#include "prefine/judge/winrate.hpp"
#include "prefine/stats/stats.hpp"

// Result tables as CSV plus an aligned text rendering. Output depends only
// on the inputs, so reruns give identical bytes.
namespace prefine::stats {

struct Report {
    std::string csv;
    std::string text;
};

Report winrate_report(const judge::WinRateMatrix& matrix);

// Per method: n, mean, std, min, max and the two-sided Wilcoxon p against
// `reference`, paired by record. Throws MissingInput when the reference
// has no scores.
Report scores_report(const std::vector<judge::ScoreRecord>& scores, std::vector<std::string> order = {},
                     const std::string& reference = "EPER");

// Mean of each general criterion and of their average, with the Wilcoxon
// p of the per-record average against `reference`.
Report quality_report(const std::vector<judge::QualityRecord>& records, std::vector<std::string> order = {},
                      const std::string& reference = "EPER");

// Input is the evaluation service's export document. Per method: mean and
// std of the scores, min-max, average rank, and the Wilcoxon p against
// `reference` paired by (session, set).
Report humaneval_report(const nlohmann::json& export_doc, const std::string& reference = "EPER");

Report looptrend_report(const std::vector<judge::TrendPoint>& points);

struct LengthBiasRow {
    std::string row;
    std::string col;
    LengthBiasResult result;
    std::size_t total = 0;
};

// For each ordered pair in the verdicts, the full and length-matched win
// rates. `tokens(method, record)` gives the final draft's token count.
std::vector<LengthBiasRow> length_bias_rows(const std::vector<judge::VerdictRecord>& verdicts,
                                            const std::function<long(const std::string&, const std::string&)>& tokens,
                                            long max_delta = 10);
Report length_bias_report(const std::vector<LengthBiasRow>& rows, long max_delta = 10);

}  // namespace prefine::stats
