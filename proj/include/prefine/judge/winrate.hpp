#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "prefine/core/types.hpp"
#include "prefine/judge/verdicts.hpp"

namespace prefine::judge {

// One corrected comparison: `row` plays A, `col` plays B.
struct VerdictRecord {
    std::string row;
    std::string col;
    std::optional<Aspect> aspect;
    std::string record_id;
    int iteration = -1;  // draft index of `row`; -1 means the final draft
    PairVerdict verdict;

    bool operator==(const VerdictRecord&) const = default;
};

// Win rates with ties split 0.5/0.5. Counts are kept once per unordered
// pair, so cell(a, b) + cell(b, a) == 1 up to one rounding of 1 - x.
class WinRateMatrix {
public:
    const std::vector<std::string>& methods() const noexcept { return methods_; }
    // Aspect buckets that hold any comparison; std::nullopt is the
    // aspect-free bucket used by PerMPST.
    std::vector<std::optional<Aspect>> scopes() const;

    // Per-aspect cell. Throws EmptyCell when the pair was never compared
    // under that aspect, InvalidArgument for unknown methods or a diagonal.
    double cell(const std::string& row, const std::string& col, const std::optional<Aspect>& aspect) const;
    // Mean of the per-aspect cells that hold comparisons.
    double average(const std::string& row, const std::string& col) const;
    // All comparisons of the pair counted together.
    double pooled(const std::string& row, const std::string& col) const;

    std::size_t count(const std::string& row, const std::string& col, const std::optional<Aspect>& aspect) const;
    std::size_t pooled_count(const std::string& row, const std::string& col) const;
    bool has(const std::string& row, const std::string& col) const;

    // Off-diagonal (row, col) pairs, row before col in method order, with
    // no comparisons at all.
    std::vector<std::pair<std::string, std::string>> empty_pairs() const;

private:
    friend WinRateMatrix build_winrate_matrix(const std::vector<VerdictRecord>&, std::vector<std::string>);

    struct Tally {
        std::size_t points2 = 0;  // 2 * wins of the lower-index method + ties
        std::size_t count = 0;
    };
    using Key = std::pair<std::size_t, std::size_t>;  // first < second

    std::size_t index(const std::string& method) const;
    // Oriented lookup; returns the lower-index method's share and whether
    // the caller asked from the other side.
    std::pair<const Tally*, bool> find(const std::string& row, const std::string& col,
                                       const std::optional<Aspect>& aspect) const;

    std::vector<std::string> methods_;
    std::map<std::optional<Aspect>, std::map<Key, Tally>> cells_;
};

// `order` fixes the row/column order; methods seen only in verdicts are
// appended in first-seen order. Self-comparisons throw InvalidArgument.
WinRateMatrix build_winrate_matrix(const std::vector<VerdictRecord>& verdicts, std::vector<std::string> order = {});

// Rows: row,col,scope,aspect,winRate,count for every compared ordered pair.
// scope is "aspect", "average" or "pooled".
std::string winrate_csv(const WinRateMatrix& matrix);
// Grid of averaged cells; '+' marks a row win, '-' a row loss. With
// `color`, wins are green and losses red (ANSI).
std::string winrate_table(const WinRateMatrix& matrix, bool color = false);

nlohmann::json to_json(const VerdictRecord& record);
VerdictRecord verdict_from_json(const nlohmann::json& j);

// Append-only JSONL log. Raw replies live in the response cache; a line
// refers to them by cache key.
void append_verdicts(const std::filesystem::path& path, const std::vector<VerdictRecord>& records);
// Throws SchemaError with the line number of a malformed entry.
std::vector<VerdictRecord> read_verdict_log(const std::filesystem::path& path);

}  // namespace prefine::judge
