#include <nlohmann/json.hpp>

#include "doctest.h"
#include "prefine/errors.hpp"
#include "prefine/stats/reports.hpp"

using namespace prefine;

namespace {

nlohmann::json rating(const char* session, int set, const char* method, int score, int rank) {
    return {{"session", session}, {"set", set}, {"premiseId", "p"}, {"method", method}, {"score", score}, {"rank", rank}};
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (auto nl = text.find('\n'); nl != std::string::npos; nl = text.find('\n', start)) {
        out.push_back(text.substr(start, nl - start));
        start = nl + 1;
    }
    return out;
}

}  // namespace

TEST_SUITE("reports") {

TEST_CASE("human evaluation table from a hand-scored export") {
    // Three (session, set) units, one score and rank per method.
    //   PP   scores 3,2,1  ranks 3,3,3
    //   SR   scores 4,5,3  ranks 2,1,2
    //   EPER scores 5,4,5  ranks 1,2,1
    nlohmann::json doc = {{"version", 1},
                          {"methods", {"PP", "SR", "EPER"}},
                          {"ratings",
                           {rating("s1", 0, "PP", 3, 3), rating("s1", 0, "SR", 4, 2), rating("s1", 0, "EPER", 5, 1),
                            rating("s1", 1, "PP", 2, 3), rating("s1", 1, "SR", 5, 1), rating("s1", 1, "EPER", 4, 2),
                            rating("s2", 0, "PP", 1, 3), rating("s2", 0, "SR", 3, 2), rating("s2", 0, "EPER", 5, 1)}},
                          {"rubricRatings", {{{"session", "s1"}, {"suitability", 4}}, {{"session", "s2"}, {"suitability", 2}}}}};
    auto r = stats::humaneval_report(doc);
    // PP - EPER = -2,-2,-4: every sign negative, exact p = 2 / 2^3.
    // SR - EPER = -1,+1,-2: ranks 1.5,1.5,3, W+ = 1.5, P(T+ <= 1.5) = 3/8, p = 0.75.
    // EPER std = sqrt(1/3).
    CHECK(lines(r.csv) == std::vector<std::string>{"method,n,mean,std,min,max,avgRank,pVsEPER",
                                                   "PP,3,2.0000,1.0000,1,3,3.0000,0.25",
                                                   "SR,3,4.0000,1.0000,3,5,1.6667,0.75",
                                                   "EPER,3,4.6667,0.5774,4,5,1.3333,-"});
    auto text = lines(r.text);
    REQUIRE(text.size() == 5);
    CHECK(text[0].rfind("Method", 0) == 0);
    CHECK(text[3].find("4.67 +- 0.58") != std::string::npos);
    CHECK(text[3].find("4-5") != std::string::npos);
    CHECK(text[4].rfind("Rubric suitability", 0) == 0);
    CHECK(text[4].find("3.00 +- 1.41") != std::string::npos);

    CHECK_THROWS_AS(stats::humaneval_report(nlohmann::json::object()), MissingInput);
}

TEST_CASE("scores table pairs by record and needs the reference") {
    std::vector<judge::ScoreRecord> s = {{"SR", "a", 4, {}},   {"SR", "b", 6, {}},   {"SR", "c", 5, {}},
                                         {"EPER", "a", 7, {}}, {"EPER", "b", 8, {}}, {"EPER", "c", 9, {}},
                                         {"SR", "d", 1, {}}};
    auto r = stats::scores_report(s, {"EPER"});
    // SR over a..d: mean 4, sample var (0+4+1+9)/3. Paired on a..c only:
    // diffs -3,-2,-4 all negative, p = 2 / 8.
    CHECK(lines(r.csv) == std::vector<std::string>{"method,n,mean,std,min,max,pVsEPER", "EPER,3,8.0000,1.0000,7,9,-",
                                                   "SR,4,4.0000,2.1602,1,6,0.25"});
    CHECK_THROWS_AS(stats::scores_report({{"SR", "a", 4, {}}}), MissingInput);
}

TEST_CASE("loop trend and length bias tables") {
    auto trend = stats::looptrend_report({{0, 0.25, 4}, {1, 0.5, 4}});
    CHECK(trend.csv == "iteration,winRate,count\n0,0.2500,4\n1,0.5000,4\n");

    std::vector<judge::VerdictRecord> v(3);
    for (auto& r : v) r.row = "EPER", r.col = "SR";
    v[0].record_id = "a", v[0].verdict.corrected = judge::Corrected::AWins;
    v[1].record_id = "b", v[1].verdict.corrected = judge::Corrected::BWins;
    v[2].record_id = "c", v[2].verdict.corrected = judge::Corrected::AWins;
    // Token gaps: a 5, b 50, c 10. Only a and c stay at max_delta 10.
    std::map<std::string, long> eper = {{"a", 105}, {"b", 150}, {"c", 90}};
    auto tokens = [&](const std::string& m, const std::string& id) { return m == "EPER" ? eper.at(id) : 100L; };
    auto rows = stats::length_bias_rows(v, tokens);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].total == 3);
    CHECK(lines(stats::length_bias_report(rows).csv)[1] == "EPER,SR,0.6667,1.0000,2,3,0.6667,10");
}

}  // TEST_SUITE
