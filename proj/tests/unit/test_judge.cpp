#include <fstream>
#include <map>
#include <mutex>
#include <random>
#include <regex>

#include "doctest.h"
#include "prefine/dataset/records.hpp"
#include "prefine/errors.hpp"
#include "prefine/gateway/mock_backend.hpp"
#include "prefine/judge/evaluation.hpp"
#include "prefine/judge/judge.hpp"
#include "prefine/judge/winrate.hpp"
#include "prefine/pipeline/experiment.hpp"
#include "prefine/util/hash.hpp"
#include "support.hpp"

using namespace prefine;
using namespace prefine::judge;

namespace {

std::string between(const std::string& s, const std::string& open, const std::string& close) {
    auto a = s.find(open);
    if (a == std::string::npos) return {};
    a += open.size();
    auto b = s.find(close, a);
    return b == std::string::npos ? std::string() : s.substr(a, b - a);
}

std::string story1(const gateway::ChatRequest& r) {
    return between(r.messages.back().content, "[Story 1]\n", "\n\n[Story 2]\n");
}
std::string story2(const gateway::ChatRequest& r) {
    return between(r.messages.back().content, "[Story 2]\n", "\n\nAnswer with");
}

using Script = std::function<std::string(const gateway::ChatRequest&)>;

struct JudgeEnv {
    gateway::Gateway gw;
    std::shared_ptr<gateway::ScriptedBackend> backend;
    std::vector<gateway::ChatRequest> seen;
    std::mutex mutex;
    Judge judge;

    explicit JudgeEnv(Script script, JudgeConfig cfg = {})
        : gw(gateway::GatewayOptions{}),
          backend(std::make_shared<gateway::ScriptedBackend>("mock",
                                                             [this, script](const gateway::ChatRequest& r) {
                                                                 std::lock_guard lock(mutex);
                                                                 seen.push_back(r);
                                                                 return script(r);
                                                             })),
          judge((gw.register_backend(backend), gw), cfg) {}
};

const Script kAlwaysFirst = [](const gateway::ChatRequest&) { return std::string("Preferred: Story 1"); };
const Script kAlwaysSecond = [](const gateway::ChatRequest&) { return std::string("Preferred: Story 2"); };
const Script kSmallerText = [](const gateway::ChatRequest& r) {
    return std::string(story1(r) <= story2(r) ? "Preferred: Story 1" : "Preferred: Story 2");
};
const Script kLonger = [](const gateway::ChatRequest& r) {
    return std::string(story1(r).size() >= story2(r).size() ? "Preferred: Story 1" : "Preferred: Story 2");
};
// Arbitrary but deterministic per prompt, so it is position-sensitive.
const Script kPromptHash = [](const gateway::ChatRequest& r) {
    return std::string(util::sha256_hex(r.messages.back().content)[0] < '8' ? "Preferred: Story 1"
                                                                             : "Preferred: Story 2");
};

UserHistory permpst_history() {
    return UserHistory{"u", std::vector<PerMpstInteraction>{{"s1", "r1", 3}, {"s2", "r2", 8},
                                                             {"s3", "r3", 5}, {"s4", "r4", 9}}};
}

UserHistory perdoc_history() {
    return UserHistory{"u", std::vector<PerDocInteraction>{{"plot one", "plot two", Aspect::Surprise, Choice::B}}};
}

VerdictRecord vr(std::string row, std::string col, Corrected c, std::optional<Aspect> aspect = std::nullopt,
                 std::string id = "r") {
    VerdictRecord v;
    v.row = std::move(row);
    v.col = std::move(col);
    v.aspect = aspect;
    v.record_id = std::move(id);
    // Any pair of sides consistent with the corrected outcome.
    v.verdict.first = c == Corrected::BWins ? Side::Y : Side::X;
    v.verdict.second = c == Corrected::AWins ? Side::Y : Side::X;
    v.verdict.corrected = c;
    return v;
}

// (wins + ties / 2) / count straight from a verdict list, row's view.
double oracle_rate(const std::vector<VerdictRecord>& vs, const std::string& row, const std::string& col,
                   std::optional<std::optional<Aspect>> only = std::nullopt) {
    double points = 0;
    int n = 0;
    for (const auto& v : vs) {
        if (only && v.aspect != *only) continue;
        Corrected c;
        if (v.row == row && v.col == col) c = v.verdict.corrected;
        else if (v.row == col && v.col == row) c = flip(v.verdict.corrected);
        else continue;
        points += c == Corrected::AWins ? 1.0 : c == Corrected::Tie ? 0.5 : 0.0;
        ++n;
    }
    REQUIRE(n > 0);
    return points / n;
}

}  // namespace

TEST_SUITE("judge") {

TEST_CASE("order-swap correction truth table") {
    // A is shown first in the first order and second in the swapped order.
    struct Row { Side first, second; Corrected expected; };
    const Row table[] = {{Side::X, Side::Y, Corrected::AWins},
                         {Side::Y, Side::X, Corrected::BWins},
                         {Side::X, Side::X, Corrected::Tie},
                         {Side::Y, Side::Y, Corrected::Tie}};
    for (const auto& r : table) {
        CHECK(correct(r.first, r.second) == r.expected);
        CHECK(correct(r.second, r.first) == flip(r.expected));
    }
    CHECK(flip(flip(Corrected::AWins)) == Corrected::AWins);
    CHECK(flip(Corrected::Tie) == Corrected::Tie);
}

TEST_CASE("pairwise reply parsing") {
    CHECK(parse_pairwise_reply("Preferred: Story 1") == Side::X);
    CHECK(parse_pairwise_reply("**Preferred:** Story 2") == Side::Y);
    CHECK(parse_pairwise_reply("preferred: story 2\n") == Side::Y);
    CHECK(parse_pairwise_reply("2") == Side::Y);
    CHECK(parse_pairwise_reply("I think Story 1 is better.") == Side::X);
    CHECK_THROWS_AS(parse_pairwise_reply("Story 1 and Story 2 are both fine."), UnparseableVerdict);
    CHECK_THROWS_AS(parse_pairwise_reply("no idea"), UnparseableVerdict);
    CHECK_THROWS_AS(parse_pairwise_reply(""), UnparseableVerdict);
}

TEST_CASE("score reply parsing rounds half-up and enforces the range") {
    CHECK(parse_score_reply("7") == ParsedScore{7, false});
    CHECK(parse_score_reply("Score: 7") == ParsedScore{7, false});
    CHECK(parse_score_reply("Score: 7.5") == ParsedScore{8, true});
    CHECK(parse_score_reply("Score: 6.5") == ParsedScore{7, true});
    CHECK(parse_score_reply("Score: 7.49") == ParsedScore{7, true});
    CHECK(parse_score_reply("Score: 8.0") == ParsedScore{8, false});
    CHECK(parse_score_reply("Reasoning first.\n**Score:** 9/10") == ParsedScore{9, false});
    CHECK(parse_score_reply("Score: 10") == ParsedScore{10, false});
    CHECK_THROWS_AS(parse_score_reply("Score: 0"), ScoreOutOfRange);
    CHECK_THROWS_AS(parse_score_reply("Score: 11"), ScoreOutOfRange);
    CHECK_THROWS_AS(parse_score_reply("Score: 0.4"), ScoreOutOfRange);
    CHECK_THROWS_AS(parse_score_reply("no number here"), UnparseableVerdict);
}

TEST_CASE("quality reply parsing") {
    auto q = parse_quality_reply("Relevance: 8\nCoherence: 7\nEmpathy: 6\nSurprise: 5\nEngagement: 9\nComplexity: 4");
    CHECK(q.scores == std::array<int, 6>{8, 7, 6, 5, 9, 4});
    CHECK(q.mean() == doctest::Approx(39.0 / 6.0));
    // Any order, markdown, list markers.
    auto shuffled = parse_quality_reply(
        "- **Complexity**: 4\n- Engagement: 9\n1. Surprise: 5\n* Empathy: 6\nCoherence: 7\n### Relevance: 8");
    CHECK(shuffled == q);
    auto fives = parse_quality_reply("Relevance: 5\nCoherence: 5\nEmpathy: 5\nSurprise: 5\nEngagement: 5\nComplexity: 5");
    CHECK(fives.mean() == 5.0);
    try {
        parse_quality_reply("Relevance: 8\nCoherence: 7\nSurprise: 5\nEngagement: 9\nComplexity: 4");
        FAIL("expected MissingCriterion");
    } catch (const MissingCriterion& e) {
        CHECK(e.name() == "Empathy");
    }
    CHECK_THROWS_AS(
        parse_quality_reply("Relevance: 8\nCoherence: 7\nEmpathy: 12\nSurprise: 5\nEngagement: 9\nComplexity: 4"),
        ScoreOutOfRange);
}

TEST_CASE("scripted judges: consistency, position bias and identity") {
    auto h = permpst_history();
    {
        JudgeEnv env(kAlwaysFirst);
        auto v = env.judge.pairwise_corrected("alpha", "beta", h, std::nullopt);
        CHECK(v.first == Side::X);
        CHECK(v.second == Side::X);
        CHECK(v.corrected == Corrected::Tie);
        CHECK(v.responses == std::array<std::string, 2>{"Preferred: Story 1", "Preferred: Story 1"});
        CHECK(v.cache_keys[0] != v.cache_keys[1]);
        REQUIRE(env.seen.size() == 2);
        CHECK(story1(env.seen[0]) == "alpha");
        CHECK(story1(env.seen[1]) == "beta");
        for (const auto& r : env.seen) {
            CHECK(r.temperature == 0.0);
            CHECK(r.seed == 42);
            CHECK(gateway::request_kind(r) == std::optional<std::string>("judge.pairwise"));
        }
        CHECK(gateway::cache_key(env.seen[0]) == v.cache_keys[0]);
    }
    {
        JudgeEnv env(kSmallerText);
        CHECK(env.judge.pairwise_corrected("alpha", "beta", h, std::nullopt).corrected == Corrected::AWins);
        CHECK(env.judge.pairwise_corrected("beta", "alpha", h, std::nullopt).corrected == Corrected::BWins);
        CHECK(env.judge.pairwise_corrected("same", "same", h, std::nullopt).corrected == Corrected::Tie);
        CHECK(env.judge.pairwise_once("alpha", "beta", h, std::nullopt).side == Side::X);
    }
    {
        JudgeEnv env(kAlwaysFirst);
        CHECK_THROWS_AS(env.judge.pairwise_corrected("", "beta", h, std::nullopt), PreconditionViolation);
        CHECK_THROWS_AS(env.judge.pairwise_once("a", "", h, std::nullopt), PreconditionViolation);
        CHECK_THROWS_AS(env.judge.pairwise_once("a", "b", h, Aspect::Surprise), PreconditionViolation);
        CHECK_THROWS_AS(env.judge.pairwise_once("a", "b", perdoc_history(), std::nullopt), PreconditionViolation);
        CHECK(env.seen.empty());
    }
    JudgeConfig warm;
    warm.temperature = 0.3;
    CHECK_THROWS_AS(JudgeEnv(kAlwaysFirst, warm), InvalidArgument);
}

TEST_CASE("swapping the arguments flips the corrected verdict for any judge") {
    std::mt19937 rng(11);
    auto word = [&] {
        std::string s;
        for (int i = 0, n = 1 + static_cast<int>(rng() % 12); i < n; ++i) s += static_cast<char>('a' + rng() % 4);
        return s;
    };
    std::map<Corrected, int> seen;
    for (const auto& script : {kAlwaysFirst, kAlwaysSecond, kSmallerText, kLonger, kPromptHash}) {
        JudgeEnv env(script);
        for (int trial = 0; trial < 40; ++trial) {
            auto a = word(), b = word();
            auto h = trial % 2 ? permpst_history() : perdoc_history();
            std::optional<Aspect> aspect;
            if (h.dataset() == Dataset::PerDOC) aspect = kAllAspects[trial % 5];
            auto ab = env.judge.pairwise_corrected(a, b, h, aspect);
            auto ba = env.judge.pairwise_corrected(b, a, h, aspect);
            CHECK(ba.corrected == flip(ab.corrected));
            ++seen[ab.corrected];
        }
    }
    // The property was exercised on every outcome.
    CHECK(seen[Corrected::AWins] > 0);
    CHECK(seen[Corrected::BWins] > 0);
    CHECK(seen[Corrected::Tie] > 0);
}

TEST_CASE("PerDOC judge prompts carry the history, the choice and the aspect") {
    JudgeEnv env(kAlwaysFirst);
    env.judge.pairwise_once("x story", "y story", perdoc_history(), Aspect::CharacterQuality);
    const auto& prompt = env.seen.at(0).messages.back().content;
    CHECK(prompt.find("plot one") != std::string::npos);
    CHECK(prompt.find("Chosen: Plot B (aspect: Surprise)") != std::string::npos);
    CHECK(prompt.find("with respect to the aspect \"Character Quality\"") != std::string::npos);
    CHECK(prompt.find("[Story 1]\nx story\n\n[Story 2]\ny story\n") != std::string::npos);
}

TEST_CASE("unparseable verdicts are retried once with the next seed") {
    int calls = 0;
    JudgeEnv flaky([&](const gateway::ChatRequest&) {
        return std::string(++calls == 1 ? "hmm" : "Preferred: Story 2");
    });
    auto v = flaky.judge.pairwise_once("a", "b", permpst_history(), std::nullopt);
    CHECK(v.side == Side::Y);
    REQUIRE(flaky.seen.size() == 2);
    CHECK(flaky.seen[0].seed == 42);
    CHECK(flaky.seen[1].seed == 43);

    JudgeEnv broken([](const gateway::ChatRequest&) { return std::string("cannot decide"); });
    CHECK_THROWS_AS(broken.judge.pairwise_corrected("a", "b", permpst_history(), std::nullopt), UnparseableVerdict);
    CHECK(broken.seen.size() == 2);
}

TEST_CASE("scalar scoring") {
    auto h = permpst_history();
    JudgeEnv seven([](const gateway::ChatRequest&) { return std::string("Score: 7"); });
    auto r = seven.judge.score("a synopsis", h);
    CHECK(r.value == 7);
    CHECK(r.warnings.empty());
    CHECK(gateway::request_kind(seven.seen.at(0)) == std::optional<std::string>("judge.score"));
    CHECK(seven.seen.at(0).messages.back().content.find("Review: r4\nScore: 9") != std::string::npos);

    JudgeEnv half([](const gateway::ChatRequest&) { return std::string("Score: 7.5"); });
    auto rounded = half.judge.score("a synopsis", h);
    CHECK(rounded.value == 8);
    CHECK(rounded.warnings == std::vector<std::string>{"RoundedScore"});

    JudgeEnv zero([](const gateway::ChatRequest&) { return std::string("Score: 0"); });
    CHECK_THROWS_AS(zero.judge.score("a synopsis", h), ScoreOutOfRange);
    CHECK(zero.seen.size() == 2);

    int calls = 0;
    JudgeEnv recover([&](const gateway::ChatRequest&) { return std::string(++calls == 1 ? "Score: 0" : "Score: 6"); });
    auto ok = recover.judge.score("a synopsis", h);
    CHECK(ok.value == 6);
    CHECK(ok.warnings == std::vector<std::string>{"Retry"});

    CHECK_THROWS_AS(seven.judge.score("a plot", perdoc_history()), PreconditionViolation);
    CHECK_THROWS_AS(seven.judge.score("", h), PreconditionViolation);
}

TEST_CASE("general quality scoring") {
    JudgeEnv full([](const gateway::ChatRequest&) {
        return std::string("Relevance: 9\nCoherence: 8\nEmpathy: 7\nSurprise: 6\nEngagement: 5\nComplexity: 4");
    });
    auto q = full.judge.general_quality("a premise", "a story");
    CHECK(q.scores.scores == std::array<int, 6>{9, 8, 7, 6, 5, 4});
    CHECK(q.scores.mean() == doctest::Approx(6.5));
    CHECK(full.seen.at(0).messages.back().content.find("[Premise]\na premise\n\n[Story]\na story") != std::string::npos);

    JudgeEnv no_empathy([](const gateway::ChatRequest&) {
        return std::string("Relevance: 9\nCoherence: 8\nSurprise: 6\nEngagement: 5\nComplexity: 4");
    });
    try {
        no_empathy.judge.general_quality("p", "s");
        FAIL("expected MissingCriterion");
    } catch (const MissingCriterion& e) {
        CHECK(e.name() == "Empathy");
    }
    CHECK(no_empathy.seen.size() == 2);
}

TEST_CASE("win-rate cells from hand-counted verdicts") {
    std::vector<VerdictRecord> vs;
    for (int i = 0; i < 8; ++i) vs.push_back(vr("A", "B", Corrected::AWins));
    for (int i = 0; i < 2; ++i) vs.push_back(vr("A", "B", Corrected::Tie));
    auto m = build_winrate_matrix(vs);
    // (8 + 2 * 0.5) / 10
    CHECK(m.cell("A", "B", std::nullopt) == doctest::Approx(0.9));
    CHECK(m.cell("B", "A", std::nullopt) == doctest::Approx(0.1));
    CHECK(m.average("A", "B") == doctest::Approx(0.9));
    CHECK(m.pooled("B", "A") == doctest::Approx(0.1));
    CHECK(m.count("B", "A", std::nullopt) == 10);

    std::vector<VerdictRecord> ties(6, vr("A", "B", Corrected::Tie));
    auto t = build_winrate_matrix(ties);
    CHECK(t.cell("A", "B", std::nullopt) == 0.5);
    CHECK(t.cell("B", "A", std::nullopt) == 0.5);

    // A verdict recorded from the other side counts for the same pair.
    auto mixed = build_winrate_matrix({vr("A", "B", Corrected::AWins), vr("B", "A", Corrected::BWins),
                                       vr("B", "A", Corrected::AWins), vr("A", "B", Corrected::Tie)},
                                      {"A", "B"});
    // A wins, A wins, B wins, tie: (2 + 0.5) / 4
    CHECK(mixed.cell("A", "B", std::nullopt) == doctest::Approx(0.625));

    CHECK_THROWS_AS(m.cell("A", "A", std::nullopt), InvalidArgument);
    CHECK_THROWS_AS(m.cell("A", "Z", std::nullopt), InvalidArgument);
    CHECK_THROWS_AS(build_winrate_matrix({vr("A", "A", Corrected::Tie)}), InvalidArgument);
}

TEST_CASE("empty cells are reported") {
    auto m = build_winrate_matrix({vr("A", "B", Corrected::AWins, Aspect::Surprise)}, {"A", "B", "C"});
    CHECK_THROWS_AS(m.cell("A", "C", Aspect::Surprise), EmptyCell);
    CHECK_THROWS_AS(m.average("C", "B"), EmptyCell);
    CHECK_THROWS_AS(m.pooled("A", "C"), EmptyCell);
    CHECK_THROWS_AS(m.cell("A", "B", Aspect::Adaptability), EmptyCell);
    CHECK(m.empty_pairs() == std::vector<std::pair<std::string, std::string>>{{"A", "C"}, {"B", "C"}});
    CHECK(winrate_table(m).find("n/a") != std::string::npos);
}

TEST_CASE("complement and aspect averaging hold on random verdict sets") {
    std::mt19937 rng(5);
    const std::vector<std::string> methods = {"ZP", "PP", "SR", "EPER"};
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<VerdictRecord> vs;
        for (int i = 0, n = 20 + static_cast<int>(rng() % 200); i < n; ++i) {
            auto r = rng() % 4, c = (r + 1 + rng() % 3) % 4;
            vs.push_back(vr(methods[r], methods[c], static_cast<Corrected>(rng() % 3),
                            kAllAspects[rng() % 5], "rec" + std::to_string(i % 7)));
        }
        auto m = build_winrate_matrix(vs, methods);
        for (const auto& a : methods) {
            for (const auto& b : methods) {
                if (a == b || !m.has(a, b)) continue;
                CHECK(m.pooled(a, b) + m.pooled(b, a) == doctest::Approx(1.0).epsilon(1e-15));
                CHECK(m.average(a, b) + m.average(b, a) == doctest::Approx(1.0).epsilon(1e-15));
                CHECK(m.pooled(a, b) == doctest::Approx(oracle_rate(vs, a, b)));
                double sum = 0;
                int k = 0;
                for (auto aspect : kAllAspects) {
                    if (m.count(a, b, aspect) == 0) continue;
                    double cell = m.cell(a, b, aspect);
                    CHECK(cell + m.cell(b, a, aspect) == doctest::Approx(1.0).epsilon(1e-15));
                    CHECK(cell == doctest::Approx(oracle_rate(vs, a, b, std::optional<Aspect>(aspect))));
                    sum += cell;
                    ++k;
                }
                CHECK(m.average(a, b) == doctest::Approx(sum / k));
            }
        }
    }
}

TEST_CASE("published win-rate table is complement-consistent and reproducible in shape") {
    // Rows and columns: ZP PP SR IPIR EPIR IPER EPER.
    const std::vector<std::string> order = {"ZP", "PP", "SR", "IPIR", "EPIR", "IPER", "EPER"};
    const double table[7][7] = {
        {-1, 0.20, 0.04, 0.05, 0.03, 0.01, 0.02}, {0.80, -1, 0.59, 0.59, 0.45, 0.34, 0.33},
        {0.96, 0.41, -1, 0.52, 0.31, 0.18, 0.17}, {0.95, 0.41, 0.48, -1, 0.33, 0.14, 0.19},
        {0.97, 0.55, 0.69, 0.67, -1, 0.35, 0.31}, {0.99, 0.66, 0.82, 0.86, 0.65, -1, 0.49},
        {0.98, 0.67, 0.83, 0.81, 0.69, 0.51, -1}};
    // The transcription above matches the reference document row by row.
    const auto reference = testing::read_text(testing::source_dir() / "paper.md");
    const std::regex num(R"(\b[01]\.\d\d\b)");
    for (std::size_t i = 0; i < order.size(); ++i) {
        auto start = reference.find("\n" + order[i] + " ");
        if (order[i] == "SR") start = reference.find("\nSR &");
        REQUIRE(start != std::string::npos);
        auto line = reference.substr(start + 1, reference.find('\n', start + 1) - start - 1);
        std::vector<double> got;
        for (auto it = std::sregex_iterator(line.begin(), line.end(), num); it != std::sregex_iterator(); ++it) {
            got.push_back(std::stod(it->str()));
        }
        std::vector<double> want;
        for (std::size_t j = 0; j < 7; ++j) if (i != j) want.push_back(table[i][j]);
        CHECK(got == want);
        for (std::size_t j = 0; j < 7; ++j) {
            if (i != j) CHECK(table[i][j] + table[j][i] == doctest::Approx(1.0));
        }
    }
    // 49 wins and 1 loss of EPER over ZP give the published 0.98 / 0.02.
    std::vector<VerdictRecord> vs(49, vr("EPER", "ZP", Corrected::AWins));
    vs.push_back(vr("EPER", "ZP", Corrected::BWins));
    auto m = build_winrate_matrix(vs, order);
    CHECK(m.average("EPER", "ZP") == doctest::Approx(0.98));
    CHECK(m.average("ZP", "EPER") == doctest::Approx(0.02));
}

TEST_CASE("CSV and text exports") {
    std::vector<VerdictRecord> vs = {vr("A", "B", Corrected::AWins, Aspect::Surprise),
                                     vr("A", "B", Corrected::Tie, Aspect::Surprise),
                                     vr("A", "B", Corrected::BWins, Aspect::Adaptability)};
    auto m = build_winrate_matrix(vs, {"A", "B"});
    // Surprise: 0.75, Adaptability: 0; average 0.375; pooled 1.5 / 3.
    CHECK(winrate_csv(m) ==
          "row,col,scope,aspect,winRate,count\n"
          "A,B,aspect,Surprise,0.7500,2\n"
          "A,B,aspect,Adaptability,0.0000,1\n"
          "A,B,average,,0.3750,3\n"
          "A,B,pooled,,0.5000,3\n"
          "B,A,aspect,Surprise,0.2500,2\n"
          "B,A,aspect,Adaptability,1.0000,1\n"
          "B,A,average,,0.6250,3\n"
          "B,A,pooled,,0.5000,3\n");
    // printf rounds the exact ties 0.375 and 0.625 to even.
    CHECK(winrate_table(m) ==
          "A \\ B A     B     \n"
          "A     -     0.38- \n"
          "B     0.62+ -     \n");
    CHECK(winrate_table(m, true).find("\x1b[32m0.62+") != std::string::npos);
}

TEST_CASE("verdict log is append-only and round-trips") {
    testing::TempDir dir("verdicts");
    auto path = dir.path() / "judge" / "verdicts.jsonl";
    auto a = vr("A", "B", Corrected::AWins, Aspect::Surprise, "pd-1");
    a.verdict.responses = {"Preferred: Story 1", "Preferred: Story 2"};
    a.verdict.cache_keys = {"k1", "k2"};
    auto b = vr("B", "C", Corrected::Tie, std::nullopt, "pm-1");
    b.iteration = 3;
    append_verdicts(path, {a});
    append_verdicts(path, {b});
    CHECK(read_verdict_log(path) == std::vector<VerdictRecord>{a, b});

    std::ofstream(path, std::ios::app) << R"({"row":"A","col":"B","aspect":null,"recordId":"x","iteration":-1,"first":"X","second":"X","corrected":"AWins","responses":["",""],"cacheKeys":["",""]})"
                                       << "\n";
    try {
        read_verdict_log(path);
        FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
        CHECK(e.line() == 3);
    }
}

TEST_CASE("judging a finished run") {
    testing::TempDir dir("judge-run");
    gateway::GatewayOptions opts;
    opts.cache_root = dir.path() / "cache";
    gateway::Gateway gw(opts);
    gw.register_backend(std::make_shared<gateway::MockBackend>("mock"));
    pipeline::Pipeline p(gw);

    auto records = dataset::parse_records(dataset::sample_text("sample_perdoc.jsonl"), Dataset::PerDOC);
    records.resize(2);
    pipeline::RunConfig base;
    base.dataset = Dataset::PerDOC;
    std::vector<MethodConfig> methods = {MethodConfig::make(Method::PP), MethodConfig::make(Method::SR, 2),
                                         MethodConfig::make(Method::EPER, 2)};
    pipeline::ExperimentOptions eo;
    eo.out_dir = dir.path() / "run";
    pipeline::run_experiment(p, records, methods, base, eo);

    auto run = load_run(eo.out_dir);
    CHECK(run.traces.size() == 6);
    Judge judge(gw);
    auto all = judge_pairwise_run(judge, run);
    CHECK(all.size() == 2 * 3 * 5);  // records x pairs x aspects
    PairwiseOptions own;
    own.aspects = AspectMode::RecordOnly;
    own.threads = 3;
    auto single = judge_pairwise_run(judge, run, own);
    CHECK(single.size() == 2 * 3);
    for (const auto& v : single) CHECK(v.aspect == run.find(v.row, v.record_id)->aspect);

    // The mock judge is content-based, so each pair agrees across orders.
    for (const auto& v : all) CHECK(v.verdict.corrected != Corrected::Tie);
    auto m = build_winrate_matrix(all, run.manifest.methods);
    CHECK(m.empty_pairs().empty());

    // Re-judging is served from the cache and reproduces every verdict.
    auto calls = gw.backend_calls();
    PairwiseOptions threaded;
    threaded.threads = 4;
    CHECK(judge_pairwise_run(judge, run, threaded) == all);
    CHECK(gw.backend_calls() == calls);

    auto trend_verdicts = judge_loop_trend(judge, run, run.manifest.methods[2], run.manifest.methods[0], own);
    auto trend = loop_trend(trend_verdicts);
    REQUIRE(trend.size() == 3);  // t = 0, 1, 2
    for (int t = 0; t < 3; ++t) {
        CHECK(trend[t].iteration == t);
        CHECK(trend[t].count == 2);
    }
    CHECK_THROWS_AS(judge_loop_trend(judge, run, "NOPE", "PP"), MissingInput);
    CHECK_THROWS_AS(judge_scores_run(judge, run), PreconditionViolation);
    auto quality = judge_quality_run(judge, run);
    CHECK(quality.size() == 6);
    CHECK(quality_from_json(to_json(quality[0])) == quality[0]);
    CHECK_THROWS_AS(load_run(dir.path() / "nowhere"), MissingInput);
}

TEST_CASE("scores over a PerMPST run") {
    testing::TempDir dir("score-run");
    gateway::Gateway gw;
    gw.register_backend(std::make_shared<gateway::MockBackend>("mock"));
    pipeline::Pipeline p(gw);
    auto records = dataset::parse_records(dataset::sample_text("sample_permpst.jsonl"), Dataset::PerMPST);
    pipeline::ExperimentOptions eo;
    eo.out_dir = dir.path();
    pipeline::run_experiment(p, records, {MethodConfig::make(Method::ZP), MethodConfig::make(Method::EPER, 1)},
                             pipeline::RunConfig{}, eo);
    Judge judge(gw);
    auto run = load_run(dir.path());
    auto scores = judge_scores_run(judge, run, 2);
    CHECK(scores.size() == 8);
    CHECK(scores[0].record_id == records[0].id);
    for (const auto& s : scores) {
        CHECK(s.score >= 1);
        CHECK(s.score <= 10);
        CHECK(score_from_json(to_json(s)) == s);
    }
    CHECK(judge_pairwise_run(judge, run).size() == 4);
}

}  // TEST_SUITE
