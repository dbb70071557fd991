#include "prefine/judge/winrate.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "prefine/errors.hpp"
#include "prefine/util/fs.hpp"
#include "prefine/util/text.hpp"

namespace prefine::judge {

namespace {

std::string fmt(double v, int digits = 4) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string scope_name(const std::optional<Aspect>& aspect) {
    return aspect ? std::string(to_string(*aspect)) : "";
}

}  // namespace

std::size_t WinRateMatrix::index(const std::string& method) const {
    auto it = std::find(methods_.begin(), methods_.end(), method);
    if (it == methods_.end()) throw InvalidArgument("method '" + method + "' is not in the matrix");
    return static_cast<std::size_t>(it - methods_.begin());
}

std::pair<const WinRateMatrix::Tally*, bool> WinRateMatrix::find(const std::string& row, const std::string& col,
                                                                   const std::optional<Aspect>& aspect) const {
    auto r = index(row), c = index(col);
    if (r == c) throw InvalidArgument("the diagonal cell (" + row + ", " + row + ") is undefined");
    auto bucket = cells_.find(aspect);
    if (bucket == cells_.end()) return {nullptr, r > c};
    auto it = bucket->second.find({std::min(r, c), std::max(r, c)});
    return {it == bucket->second.end() ? nullptr : &it->second, r > c};
}

std::vector<std::optional<Aspect>> WinRateMatrix::scopes() const {
    std::vector<std::optional<Aspect>> out;
    for (const auto& [aspect, _] : cells_) out.push_back(aspect);
    return out;
}

double WinRateMatrix::cell(const std::string& row, const std::string& col,
                           const std::optional<Aspect>& aspect) const {
    auto [tally, flipped] = find(row, col, aspect);
    if (!tally || tally->count == 0) {
        throw EmptyCell("no comparisons of " + row + " vs " + col +
                        (aspect ? " under " + std::string(to_string(*aspect)) : std::string()));
    }
    double x = static_cast<double>(tally->points2) / (2.0 * static_cast<double>(tally->count));
    return flipped ? 1.0 - x : x;
}

double WinRateMatrix::average(const std::string& row, const std::string& col) const {
    // Averaged from the lower-index side, then complemented, so the two
    // orientations stay complementary.
    bool flipped = index(row) > index(col);
    const auto& lo = flipped ? col : row;
    const auto& hi = flipped ? row : col;
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& [aspect, _] : cells_) {
        if (count(lo, hi, aspect) == 0) continue;
        sum += cell(lo, hi, aspect);
        ++n;
    }
    if (n == 0) throw EmptyCell("no comparisons of " + row + " vs " + col);
    double x = sum / static_cast<double>(n);
    return flipped ? 1.0 - x : x;
}

double WinRateMatrix::pooled(const std::string& row, const std::string& col) const {
    bool flipped = index(row) > index(col);
    if (index(row) == index(col)) throw InvalidArgument("the diagonal cell is undefined");
    std::size_t points2 = 0, total = 0;
    for (const auto& [aspect, _] : cells_) {
        auto [tally, unused] = find(row, col, aspect);
        (void)unused;
        if (!tally) continue;
        points2 += tally->points2;
        total += tally->count;
    }
    if (total == 0) throw EmptyCell("no comparisons of " + row + " vs " + col);
    double x = static_cast<double>(points2) / (2.0 * static_cast<double>(total));
    return flipped ? 1.0 - x : x;
}

std::size_t WinRateMatrix::count(const std::string& row, const std::string& col,
                                 const std::optional<Aspect>& aspect) const {
    auto [tally, flipped] = find(row, col, aspect);
    (void)flipped;
    return tally ? tally->count : 0;
}

std::size_t WinRateMatrix::pooled_count(const std::string& row, const std::string& col) const {
    std::size_t n = 0;
    for (const auto& [aspect, _] : cells_) n += count(row, col, aspect);
    return n;
}

bool WinRateMatrix::has(const std::string& row, const std::string& col) const {
    return pooled_count(row, col) > 0;
}

std::vector<std::pair<std::string, std::string>> WinRateMatrix::empty_pairs() const {
    std::vector<std::pair<std::string, std::string>> out;
    for (std::size_t i = 0; i < methods_.size(); ++i) {
        for (std::size_t j = i + 1; j < methods_.size(); ++j) {
            if (!has(methods_[i], methods_[j])) out.emplace_back(methods_[i], methods_[j]);
        }
    }
    return out;
}

WinRateMatrix build_winrate_matrix(const std::vector<VerdictRecord>& verdicts, std::vector<std::string> order) {
    WinRateMatrix m;
    m.methods_ = std::move(order);
    auto note = [&](const std::string& method) {
        if (std::find(m.methods_.begin(), m.methods_.end(), method) == m.methods_.end()) {
            m.methods_.push_back(method);
        }
    };
    for (const auto& v : verdicts) {
        note(v.row);
        note(v.col);
    }
    for (const auto& v : verdicts) {
        auto r = m.index(v.row), c = m.index(v.col);
        if (r == c) throw InvalidArgument("verdict compares " + v.row + " with itself");
        // Orient every verdict towards the lower-index method.
        auto corrected = r < c ? v.verdict.corrected : flip(v.verdict.corrected);
        auto& tally = m.cells_[v.aspect][{std::min(r, c), std::max(r, c)}];
        tally.points2 += corrected == Corrected::AWins ? 2 : corrected == Corrected::Tie ? 1 : 0;
        ++tally.count;
    }
    return m;
}

std::string winrate_csv(const WinRateMatrix& m) {
    std::ostringstream out;
    out << "row,col,scope,aspect,winRate,count\n";
    for (const auto& row : m.methods()) {
        for (const auto& col : m.methods()) {
            if (row == col || !m.has(row, col)) continue;
            for (const auto& aspect : m.scopes()) {
                auto n = m.count(row, col, aspect);
                if (n == 0) continue;
                out << row << ',' << col << ",aspect," << scope_name(aspect) << ','
                    << fmt(m.cell(row, col, aspect)) << ',' << n << '\n';
            }
            auto n = m.pooled_count(row, col);
            out << row << ',' << col << ",average,," << fmt(m.average(row, col)) << ',' << n << '\n';
            out << row << ',' << col << ",pooled,," << fmt(m.pooled(row, col)) << ',' << n << '\n';
        }
    }
    return out.str();
}

std::string winrate_table(const WinRateMatrix& m, bool color) {
    std::size_t width = 6;
    for (const auto& name : m.methods()) width = std::max(width, name.size() + 1);
    auto pad = [&](std::string s) {
        s.resize(std::max(s.size(), width), ' ');
        return s;
    };
    std::ostringstream out;
    out << pad("A \\ B");
    for (const auto& col : m.methods()) out << pad(col);
    out << '\n';
    for (const auto& row : m.methods()) {
        out << pad(row);
        for (const auto& col : m.methods()) {
            std::string text;
            const char* on = "";
            if (row == col) {
                text = "-";
            } else if (!m.has(row, col)) {
                text = "n/a";
            } else {
                double x = m.average(row, col);
                text = fmt(x, 2);
                if (x > 0.5) {
                    text += "+";
                    on = "\x1b[32m";
                } else if (x < 0.5) {
                    text += "-";
                    on = "\x1b[31m";
                }
            }
            if (color && *on) {
                out << on << text << "\x1b[0m" << std::string(width - std::min(width, text.size()), ' ');
            } else {
                out << pad(text);
            }
        }
        out << '\n';
    }
    return out.str();
}

nlohmann::json to_json(const VerdictRecord& r) {
    return {
        {"row", r.row},
        {"col", r.col},
        {"aspect", r.aspect ? nlohmann::json(std::string(to_string(*r.aspect))) : nlohmann::json(nullptr)},
        {"recordId", r.record_id},
        {"iteration", r.iteration},
        {"first", std::string(to_string(r.verdict.first))},
        {"second", std::string(to_string(r.verdict.second))},
        {"corrected", std::string(to_string(r.verdict.corrected))},
        {"responses", r.verdict.responses},
        {"cacheKeys", r.verdict.cache_keys},
    };
}

VerdictRecord verdict_from_json(const nlohmann::json& j) {
    try {
        VerdictRecord r;
        r.row = j.at("row").get<std::string>();
        r.col = j.at("col").get<std::string>();
        if (!j.at("aspect").is_null()) r.aspect = parse_aspect(j.at("aspect").get<std::string>());
        r.record_id = j.at("recordId").get<std::string>();
        r.iteration = j.at("iteration").get<int>();
        r.verdict.first = parse_side(j.at("first").get<std::string>());
        r.verdict.second = parse_side(j.at("second").get<std::string>());
        r.verdict.corrected = parse_corrected(j.at("corrected").get<std::string>());
        if (r.verdict.corrected != correct(r.verdict.first, r.verdict.second)) {
            throw SchemaError("corrected verdict disagrees with the two orders");
        }
        r.verdict.responses = j.at("responses").get<std::array<std::string, 2>>();
        r.verdict.cache_keys = j.at("cacheKeys").get<std::array<std::string, 2>>();
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("verdict: ") + e.what());
    } catch (const InvalidArgument& e) {
        throw SchemaError(std::string("verdict: ") + e.what());
    }
}

void append_verdicts(const std::filesystem::path& path, const std::vector<VerdictRecord>& records) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::string block;
    for (const auto& r : records) block += to_json(r).dump() + "\n";
    std::ofstream out(path, std::ios::binary | std::ios::app);
    if (!out) throw Error("IoError", "cannot append to " + path.string());
    out << block;
    out.flush();
    if (!out) throw Error("IoError", "write failed for " + path.string());
}

std::vector<VerdictRecord> read_verdict_log(const std::filesystem::path& path) {
    auto text = util::read_file(path);
    std::vector<VerdictRecord> out;
    std::size_t line_no = 0;
    for (const auto& line : util::split_lines(text)) {
        ++line_no;
        if (util::trim(line).empty()) continue;
        try {
            auto j = nlohmann::json::parse(line);
            out.push_back(verdict_from_json(j));
        } catch (const nlohmann::json::exception& e) {
            throw SchemaError(line_no, e.what());
        } catch (const SchemaError& e) {
            throw SchemaError(line_no, e.what());
        }
    }
    return out;
}

}  // namespace prefine::judge
