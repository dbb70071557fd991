#include "prefine/stats/reports.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>

#include "prefine/errors.hpp"

namespace prefine::stats {

namespace {

std::string fixed(double v, int digits = 2) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string pvalue(double p) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4g", p);
    return buf;
}

// Left-aligned columns sized to their widest cell.
std::string render_text(const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> width;
    for (const auto& r : rows) {
        width.resize(std::max(width.size(), r.size()), 0);
        for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
    }
    std::ostringstream out;
    for (const auto& r : rows) {
        std::string line;
        for (std::size_t i = 0; i < r.size(); ++i) {
            line += r[i];
            if (i + 1 < r.size()) line += std::string(width[i] - r[i].size() + 2, ' ');
        }
        out << line << '\n';
    }
    return out.str();
}

std::string render_csv(const std::vector<std::vector<std::string>>& rows) {
    std::ostringstream out;
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << r[i];
        out << '\n';
    }
    return out.str();
}

// Keeps `order`, then appends unseen methods in first-seen order.
template <typename T, typename Fn>
std::vector<std::string> method_order(std::vector<std::string> order, const std::vector<T>& items, Fn method_of) {
    for (const auto& item : items) {
        const auto& m = method_of(item);
        if (std::find(order.begin(), order.end(), m) == order.end()) order.push_back(m);
    }
    return order;
}

// Wilcoxon p of `method` against `reference` over keys present for both.
std::string paired_p(const std::map<std::string, double>& method, const std::map<std::string, double>& reference) {
    std::vector<double> x, y;
    for (const auto& [key, v] : method) {
        auto it = reference.find(key);
        if (it == reference.end()) continue;
        x.push_back(v);
        y.push_back(it->second);
    }
    if (x.empty()) return "NA";
    return pvalue(wilcoxon_signed_rank(x, y).p);
}

}  // namespace

Report winrate_report(const judge::WinRateMatrix& matrix) {
    return {judge::winrate_csv(matrix), judge::winrate_table(matrix)};
}

Report scores_report(const std::vector<judge::ScoreRecord>& scores, std::vector<std::string> order,
                     const std::string& reference) {
    order = method_order(std::move(order), scores, [](const auto& s) -> const std::string& { return s.method; });
    std::map<std::string, std::map<std::string, double>> by_method;
    for (const auto& s : scores) by_method[s.method][s.record_id] = s.score;
    if (!by_method.count(reference)) throw MissingInput("no scores for reference method " + reference);

    std::vector<std::vector<std::string>> csv = {{"method", "n", "mean", "std", "min", "max", "pVs" + reference}};
    std::vector<std::vector<std::string>> text = {{"Method", "Score (mean +- std)", "n", "p vs " + reference}};
    for (const auto& m : order) {
        auto it = by_method.find(m);
        if (it == by_method.end()) continue;
        std::vector<double> values;
        for (const auto& [id, v] : it->second) values.push_back(v);
        auto d = describe(values);
        auto p = m == reference ? std::string("-") : paired_p(it->second, by_method.at(reference));
        csv.push_back({m, std::to_string(d.n), fixed(d.mean, 4), fixed(d.std, 4), fixed(d.min, 0), fixed(d.max, 0), p});
        text.push_back({m, fixed(d.mean) + " +- " + fixed(d.std), std::to_string(d.n), p});
    }
    return {render_csv(csv), render_text(text)};
}

Report quality_report(const std::vector<judge::QualityRecord>& records, std::vector<std::string> order,
                      const std::string& reference) {
    order = method_order(std::move(order), records, [](const auto& r) -> const std::string& { return r.method; });
    std::map<std::string, std::map<std::string, double>> overall;
    std::map<std::string, std::vector<const judge::QualityRecord*>> by_method;
    for (const auto& r : records) {
        overall[r.method][r.record_id] = r.scores.mean();
        by_method[r.method].push_back(&r);
    }
    std::vector<std::string> header = {"method", "n"};
    for (auto c : kGeneralCriteria) header.emplace_back(c);
    header.insert(header.end(), {"mean", "pVs" + reference});
    std::vector<std::vector<std::string>> rows = {header};
    for (const auto& m : order) {
        const auto& rs = by_method.at(m);
        std::vector<std::string> row = {m, std::to_string(rs.size())};
        for (std::size_t c = 0; c < kGeneralCriteria.size(); ++c) {
            double sum = 0;
            for (const auto* r : rs) sum += r->scores.scores[c];
            row.push_back(fixed(sum / static_cast<double>(rs.size())));
        }
        double sum = 0;
        for (const auto* r : rs) sum += r->scores.mean();
        row.push_back(fixed(sum / static_cast<double>(rs.size())));
        if (m == reference) row.emplace_back("-");
        else row.push_back(overall.count(reference) ? paired_p(overall.at(m), overall.at(reference)) : "NA");
        rows.push_back(std::move(row));
    }
    return {render_csv(rows), render_text(rows)};
}

Report humaneval_report(const nlohmann::json& doc, const std::string& reference) {
    if (!doc.contains("ratings") || !doc.contains("methods")) {
        throw MissingInput("not an evaluation export document");
    }
    const auto methods = doc.at("methods").get<std::vector<std::string>>();
    std::map<std::string, std::map<std::string, double>> scores, ranks;
    for (const auto& r : doc.at("ratings")) {
        auto key = r.at("session").get<std::string>() + "#" + std::to_string(r.at("set").get<int>());
        scores[r.at("method").get<std::string>()][key] = r.at("score").get<int>();
        ranks[r.at("method").get<std::string>()][key] = r.at("rank").get<int>();
    }
    std::vector<std::vector<std::string>> csv = {{"method", "n", "mean", "std", "min", "max", "avgRank", "pVs" + reference}};
    std::vector<std::vector<std::string>> text = {{"Method", "Mean Score (+- SD)", "Min-Max", "Avg. Rank", "p vs " + reference}};
    for (const auto& m : methods) {
        if (!scores.count(m)) continue;
        std::vector<double> s, r;
        for (const auto& [k, v] : scores.at(m)) s.push_back(v);
        for (const auto& [k, v] : ranks.at(m)) r.push_back(v);
        auto d = describe(s);
        auto avg_rank = describe(r).mean;
        auto p = m == reference ? std::string("-")
                                : scores.count(reference) ? paired_p(scores.at(m), scores.at(reference)) : "NA";
        csv.push_back({m, std::to_string(d.n), fixed(d.mean, 4), fixed(d.std, 4), fixed(d.min, 0), fixed(d.max, 0),
                       fixed(avg_rank, 4), p});
        text.push_back({m, fixed(d.mean) + " +- " + fixed(d.std), fixed(d.min, 0) + "-" + fixed(d.max, 0),
                        fixed(avg_rank), p});
    }
    if (doc.contains("rubricRatings") && !doc.at("rubricRatings").empty()) {
        std::vector<double> suit;
        for (const auto& r : doc.at("rubricRatings")) suit.push_back(r.at("suitability").get<int>());
        auto d = describe(suit);
        text.push_back({"Rubric suitability", fixed(d.mean) + " +- " + fixed(d.std),
                        fixed(d.min, 0) + "-" + fixed(d.max, 0), "", ""});
    }
    return {render_csv(csv), render_text(text)};
}

Report looptrend_report(const std::vector<judge::TrendPoint>& points) {
    std::vector<std::vector<std::string>> rows = {{"iteration", "winRate", "count"}};
    for (const auto& p : points) rows.push_back({std::to_string(p.iteration), fixed(p.win_rate, 4), std::to_string(p.count)});
    return {render_csv(rows), render_text(rows)};
}

std::vector<LengthBiasRow> length_bias_rows(const std::vector<judge::VerdictRecord>& verdicts,
                                            const std::function<long(const std::string&, const std::string&)>& tokens,
                                            long max_delta) {
    std::vector<std::pair<std::string, std::string>> keys;
    std::map<std::pair<std::string, std::string>, std::vector<LengthPair>> groups;
    for (const auto& v : verdicts) {
        auto key = std::pair{v.row, v.col};
        if (!groups.count(key)) keys.push_back(key);
        groups[key].push_back({tokens(v.row, v.record_id), tokens(v.col, v.record_id), v.verdict.corrected});
    }
    std::vector<LengthBiasRow> out;
    for (const auto& key : keys) {
        const auto& pairs = groups.at(key);
        out.push_back({key.first, key.second, length_bias_subset(pairs, max_delta), pairs.size()});
    }
    return out;
}

Report length_bias_report(const std::vector<LengthBiasRow>& rows, long max_delta) {
    std::vector<std::vector<std::string>> table = {
        {"row", "col", "fullRate", "subsetRate", "kept", "total", "keptFraction", "maxDelta"}};
    for (const auto& r : rows) {
        table.push_back({r.row, r.col, r.result.full_win_rate ? fixed(*r.result.full_win_rate, 4) : "NA",
                         r.result.win_rate ? fixed(*r.result.win_rate, 4) : "EmptySubset",
                         std::to_string(r.result.kept.size()), std::to_string(r.total),
                         fixed(r.result.kept_fraction, 4), std::to_string(max_delta)});
    }
    return {render_csv(table), render_text(table)};
}

}  // namespace prefine::stats
