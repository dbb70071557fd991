#include <regex>

#include "doctest.h"
#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"
#include "prefine/errors.hpp"
#include "prefine/eval/server.hpp"
#include "prefine/eval/service.hpp"
#include "prefine/gateway/mock_backend.hpp"
#include "prefine/stats/stats.hpp"
#include "support.hpp"

using namespace prefine;
using namespace prefine::eval;
using nlohmann::json;

namespace {

struct Env {
    gateway::Gateway gw;
    pipeline::Pipeline pipeline;
    Env() : gw(gateway::GatewayOptions{}), pipeline(gw) {
        gw.register_backend(std::make_shared<gateway::MockBackend>("mock"));
    }
};

EvalConfig small_config() {
    auto c = EvalConfig::from_samples();
    c.iterations = 2;
    return c;
}

std::function<std::string()> counter_ids() {
    auto n = std::make_shared<int>(0);
    return [n] { return "s" + std::to_string(++*n); };
}

const std::regex kMethodName(R"(\b(ZP|PP|PEP|SR|IPIR|IPER|EPIR|EPER)\b)");

bool mentions_method(const std::string& payload) { return std::regex_search(payload, kMethodName); }

void submit_all_preferences(EvalService& svc, const std::string& id) {
    for (int i = 1; i <= 4; ++i) svc.submit_preference(id, i, 2 * i + 1, "comment " + std::to_string(i));
}

// Scores and a strict ranking per set, varied with the set index.
StoryResponse response_for(int k) {
    StoryResponse r;
    r.scores = {3 + k, 7, 9 - k};
    r.ranking = k % 2 ? std::array<int, 3>{2, 3, 1} : std::array<int, 3>{1, 2, 3};
    return r;
}

void complete(EvalService& svc, const std::string& id, int suitability = 4) {
    for (int k = 1; k <= 4; ++k) svc.submit_story_ratings(id, k, response_for(k));
    svc.submit_rubric_rating(id, suitability);
}

}  // namespace

TEST_SUITE("eval") {

TEST_CASE("seed set configuration") {
    auto c = EvalConfig::from_samples();
    CHECK(c.seed_synopses.size() == 4);
    CHECK(c.premises.size() == 4);
    CHECK_NOTHROW(c.validate());
    auto three = c;
    three.seed_synopses.pop_back();
    Env env;
    CHECK_THROWS_AS(EvalService(env.pipeline, three, GenerationMode::Manual), MisconfiguredSeedSet);
    auto leaky = c;
    leaky.seed_synopses[0] += " " + c.premises[0].text;
    CHECK_THROWS_AS(leaky.validate(), MisconfiguredSeedSet);
    auto j = json{{"seedSynopses", c.seed_synopses},
                  {"premises", json::array({{{"id", "a"}, {"text", "A."}}, {{"id", "b"}, {"text", "B."}},
                                            {{"id", "c"}, {"text", "C."}}, {{"id", "d"}, {"text", "D."}}})},
                  {"iterations", 3}};
    auto parsed = EvalConfig::from_json(j);
    CHECK(parsed.premises[2].id == "c");
    CHECK(parsed.iterations == 3);
    CHECK_THROWS_AS(EvalConfig::from_json(json{{"premises", 1}}), MisconfiguredSeedSet);
}

TEST_CASE("sessions are independent and serve the four seed synopses") {
    Env env;
    EvalService svc(env.pipeline, small_config(), GenerationMode::Manual);
    auto a = svc.create_session();
    auto b = svc.create_session();
    CHECK(a["id"] != b["id"]);
    CHECK(a["id"].get<std::string>().size() == 32);
    CHECK(a["state"] == "PreferenceEntry");
    CHECK(a["synopses"].size() == 4);
    CHECK(a["synopses"][3]["text"] == svc.config().seed_synopses[3]);
    svc.submit_preference(a["id"], 1, 5, "fine");
    CHECK(svc.get_session(b["id"])["synopses"][0]["submitted"] == false);
    CHECK_THROWS_AS(svc.get_session("nope"), UnknownSession);
}

TEST_CASE("preference entry rejects bad input without changing state") {
    Env env;
    EvalService svc(env.pipeline, small_config(), GenerationMode::Manual);
    svc.set_id_source(counter_ids());
    auto id = svc.create_session()["id"].get<std::string>();
    svc.submit_preference(id, 2, 6, "liked it");
    const auto before = svc.get_session(id);
    CHECK_THROWS_AS(svc.submit_preference(id, 1, 0, "x"), RangeError);
    CHECK_THROWS_AS(svc.submit_preference(id, 1, 11, "x"), RangeError);
    CHECK_THROWS_AS(svc.submit_preference(id, 5, 5, "x"), RangeError);
    CHECK_THROWS_AS(svc.submit_preference(id, 0, 5, "x"), RangeError);
    CHECK_THROWS_AS(svc.submit_preference(id, 1, 5, "   "), EmptyComment);
    CHECK_THROWS_AS(svc.submit_preference(id, 2, 5, "again"), DuplicateIndex);
    CHECK_THROWS_AS(svc.get_story_set(id, 1), StateError);
    CHECK_THROWS_AS(svc.submit_rubric_rating(id, 3), StateError);
    CHECK(svc.get_session(id) == before);
}

TEST_CASE("the fourth preference starts twelve generation jobs") {
    Env env;
    EvalService svc(env.pipeline, small_config(), GenerationMode::Manual);
    auto id = svc.create_session()["id"].get<std::string>();
    for (int i = 1; i <= 3; ++i) svc.submit_preference(id, i, 5, "ok");
    CHECK(svc.pending_jobs() == 0);
    auto view = svc.submit_preference(id, 4, 9, "great");
    CHECK(view["state"] == "Generating");
    CHECK(svc.pending_jobs() == 12);
    CHECK_THROWS_AS(svc.get_story_set(id, 1), NotReady);
    CHECK_THROWS_AS(svc.submit_story_ratings(id, 1, response_for(1)), NotReady);
    CHECK_THROWS_AS(svc.submit_preference(id, 1, 5, "late"), StateError);
    CHECK(svc.drain() == 12);
    view = svc.get_session(id);
    CHECK(view["state"] == "StoryRating");
    CHECK(view["setIndex"] == 1);
    CHECK(view["setsReady"] == 4);
}

TEST_CASE("story rating walks the sets in order") {
    Env env;
    EvalService svc(env.pipeline, small_config(), GenerationMode::Inline);
    auto id = svc.create_session()["id"].get<std::string>();
    submit_all_preferences(svc, id);
    CHECK(svc.get_session(id)["state"] == "StoryRating");

    auto set = svc.get_story_set(id, 1);
    CHECK(set["stories"].size() == 3);
    CHECK(set["premise"] == svc.config().premises[0].text);
    CHECK_THROWS_AS(svc.get_story_set(id, 3), StateError);
    CHECK_THROWS_AS(svc.get_story_set(id, 5), RangeError);
    const auto before = svc.get_session(id);
    CHECK_THROWS_AS(svc.submit_story_ratings(id, 1, {{5, 5, 5}, {1, 1, 2}}), InvalidRanking);
    CHECK_THROWS_AS(svc.submit_story_ratings(id, 1, {{5, 5, 5}, {0, 1, 2}}), InvalidRanking);
    CHECK_THROWS_AS(svc.submit_story_ratings(id, 1, {{0, 5, 5}, {1, 2, 3}}), RangeError);
    CHECK_THROWS_AS(svc.submit_story_ratings(id, 2, {{5, 5, 5}, {1, 2, 3}}), StateError);
    CHECK(svc.get_session(id) == before);

    // Tied scores are fine; the ranking breaks the tie.
    auto v = svc.submit_story_ratings(id, 1, {{7, 7, 9}, {2, 3, 1}});
    CHECK(v["setIndex"] == 2);
    CHECK(svc.get_story_set(id, 1)["submitted"]["ranking"] == json::array({2, 3, 1}));
    CHECK_THROWS_AS(svc.submit_story_ratings(id, 1, {{7, 7, 9}, {2, 3, 1}}), StateError);
    for (int k = 2; k <= 4; ++k) svc.submit_story_ratings(id, k, response_for(k));

    v = svc.get_session(id);
    CHECK(v["state"] == "RubricRating");
    CHECK(v["rubric"].size() >= 3);
    CHECK(v["rubric"].size() <= 5);
    CHECK_THROWS_AS(svc.submit_rubric_rating(id, 0), RangeError);
    CHECK_THROWS_AS(svc.submit_rubric_rating(id, 6), RangeError);
    CHECK(svc.submit_rubric_rating(id, 5)["state"] == "Done");
    CHECK_THROWS_AS(svc.submit_rubric_rating(id, 4), StateError);
    CHECK(svc.get_session(id)["rubricRating"] == 5);
}

TEST_CASE("export unblinds the shuffled sets") {
    Env env;
    auto config = small_config();
    EvalService svc(env.pipeline, config, GenerationMode::Inline);
    svc.set_id_source(counter_ids());
    auto id = svc.create_session()["id"].get<std::string>();
    submit_all_preferences(svc, id);
    complete(svc, id);

    // Regenerate every story to learn which method wrote which text.
    std::vector<PerMpstInteraction> triples;
    for (int i = 0; i < 4; ++i) triples.push_back({config.seed_synopses[i], "comment " + std::to_string(i + 1), 2 * (i + 1) + 1});
    auto ex = svc.export_json();
    std::set<std::vector<std::string>> orders;
    for (int k = 1; k <= 4; ++k) {
        dataset::ExperimentRecord rec{config.premises[k - 1].id, config.premises[k - 1], UserHistory{id, triples}, {}};
        std::map<std::string, std::string> by_text;
        for (auto m : kEvalMethods) {
            auto run = config.run;
            run.method = m == Method::PP ? MethodConfig::make(m) : MethodConfig::make(m, config.iterations);
            by_text[env.pipeline.run_method(rec, run).final_draft().text()] = std::string(to_string(m));
        }
        REQUIRE(by_text.size() == 3);
        auto set = svc.get_story_set(id, k);
        std::vector<std::string> order;
        for (int pos = 0; pos < 3; ++pos) order.push_back(by_text.at(set["stories"][pos]["text"]));
        CHECK(ex["sessions"][0]["sets"][k - 1]["order"] == json(order));
        orders.insert(order);
        auto r = response_for(k);
        for (int pos = 0; pos < 3; ++pos) {
            const auto& row = ex["ratings"][(k - 1) * 3 + pos];
            CHECK(row["method"] == order[pos]);
            CHECK(row["score"] == r.scores[pos]);
            CHECK(row["rank"] == r.ranking[pos]);
        }
    }
    // Four sets are unlikely to share one order; the shuffle is live.
    CHECK(orders.size() > 1);
    CHECK(ex["rubricRatings"][0]["suitability"] == 4);
}

TEST_CASE("export of many sessions") {
    Env env;
    EvalService svc(env.pipeline, small_config(), GenerationMode::Manual);
    CHECK(svc.export_csv() == "session,set,premiseId,method,score,rank\n");
    CHECK(svc.export_json()["ratings"].empty());
    CHECK(svc.method_average_ranks().empty());

    svc.set_id_source(counter_ids());
    for (int s = 0; s < 11; ++s) {
        auto id = svc.create_session()["id"].get<std::string>();
        submit_all_preferences(svc, id);
    }
    svc.drain();
    for (int s = 1; s <= 11; ++s) complete(svc, "s" + std::to_string(s), 1 + s % 5);
    auto ex = svc.export_json();
    for (auto m : {"PP", "SR", "EPER"}) {
        CHECK(ex["scores"][m].size() == 44);
        int rows = 0;
        for (const auto& r : ex["ratings"]) rows += r["method"] == m;
        CHECK(rows == 44);
    }
    CHECK(ex["rankings"].size() == 44);
    CHECK(ex["rubricRatings"].size() == 11);
    CHECK(svc.export_csv() == svc.export_csv());
    CHECK(svc.export_json().dump() == ex.dump());

    // Ranks recomputed from the export agree with the service's own.
    auto avg = stats::average_rank(ex["rankings"].get<std::vector<std::vector<int>>>());
    auto own = svc.method_average_ranks();
    for (std::size_t i = 0; i < kEvalMethods.size(); ++i) CHECK(avg[i] == doctest::Approx(own.at(kEvalMethods[i])));
    CHECK(avg[0] + avg[1] + avg[2] == doctest::Approx(6.0));
}

TEST_CASE("the event log rebuilds sessions after a restart") {
    testing::TempDir dir("evallog");
    Env env;
    auto config = small_config();
    config.log_path = dir.path() / "events.jsonl";
    json done_export, mid_view;
    std::string done_id, mid_id, gen_id;
    {
        EvalService svc(env.pipeline, config, GenerationMode::Inline);
        svc.set_id_source(counter_ids());
        done_id = svc.create_session()["id"];
        submit_all_preferences(svc, done_id);
        complete(svc, done_id);
        mid_id = svc.create_session()["id"];
        submit_all_preferences(svc, mid_id);
        svc.submit_story_ratings(mid_id, 1, response_for(1));
        mid_view = svc.get_session(mid_id);
        done_export = svc.export_json();
    }
    {
        EvalService svc(env.pipeline, config, GenerationMode::Manual);
        CHECK(svc.get_session(mid_id) == mid_view);
        CHECK(svc.get_session(done_id)["state"] == "Done");
        CHECK(svc.pending_jobs() == 0);
        // New ids never collide with replayed ones.
        svc.set_id_source(counter_ids());
        gen_id = svc.create_session()["id"];
        CHECK(gen_id == "s3");
        submit_all_preferences(svc, gen_id);
        CHECK(svc.pending_jobs() == 12);
        svc.drain();
        svc.submit_story_ratings(mid_id, 2, response_for(2));
    }
    {
        // A restart while jobs were queued resumes them.
        EvalService svc(env.pipeline, config, GenerationMode::Manual);
        CHECK(svc.get_session(gen_id)["state"] == "StoryRating");
        CHECK(svc.get_session(mid_id)["setIndex"] == 3);
        auto ex = svc.export_json();
        CHECK(ex["sessions"][0] == done_export["sessions"][0]);
    }
    std::ofstream(config.log_path->string(), std::ios::app) << "{broken\n";
    CHECK_THROWS_AS(EvalService(env.pipeline, config, GenerationMode::Manual), SchemaError);
}

TEST_CASE("interrupted generation resumes on restart") {
    testing::TempDir dir("evalresume");
    Env env;
    auto config = small_config();
    config.log_path = dir.path() / "events.jsonl";
    std::string id;
    {
        EvalService svc(env.pipeline, config, GenerationMode::Manual);
        id = svc.create_session()["id"];
        submit_all_preferences(svc, id);
        CHECK(svc.pending_jobs() == 12);
    }
    EvalService svc(env.pipeline, config, GenerationMode::Background);
    svc.wait_idle();
    CHECK(svc.get_session(id)["state"] == "StoryRating");
}

TEST_CASE("REST interface") {
    Env env;
    EvalService svc(env.pipeline, small_config(), GenerationMode::Manual);
    EvalServer server(svc);
    int port = server.bind("127.0.0.1", 0);
    REQUIRE(port > 0);
    server.start();
    httplib::Client cli("127.0.0.1", port);
    std::vector<std::string> payloads;
    auto call = [&](const std::string& method, const std::string& path, const std::string& body = "") {
        auto res = method == "GET" ? cli.Get(path) : cli.Post(path, body, "application/json");
        REQUIRE(res);
        payloads.push_back(res->body);
        return std::pair{res->status, res->body.empty() || res->body.front() != '{' ? json() : json::parse(res->body)};
    };
    auto expect_error = [&](std::pair<int, json> r, int status, const std::string& code) {
        CHECK(r.first == status);
        CHECK(r.second["code"] == code);
        CHECK(r.second["message"].is_string());
    };

    auto [created, session] = call("POST", "/sessions");
    CHECK(created == 201);
    const std::string id = session["id"];
    const std::string base = "/sessions/" + id;
    CHECK(call("GET", base).second["state"] == "PreferenceEntry");
    expect_error(call("GET", "/sessions/unknown"), 404, "UnknownSession");
    expect_error(call("POST", base + "/preferences/1", R"({"score":0,"comment":"x"})"), 400, "RangeError");
    expect_error(call("POST", base + "/preferences/9", R"({"score":5,"comment":"x"})"), 400, "RangeError");
    expect_error(call("POST", base + "/preferences/one", R"({"score":5,"comment":"x"})"), 400, "RangeError");
    expect_error(call("POST", base + "/preferences/1", R"({"score":5,"comment":""})"), 400, "EmptyComment");
    expect_error(call("POST", base + "/preferences/1", "{nope"), 400, "InvalidArgument");
    expect_error(call("POST", base + "/preferences/1", R"({"comment":"x"})"), 400, "InvalidArgument");
    for (int i = 1; i <= 3; ++i) {
        CHECK(call("POST", base + "/preferences/" + std::to_string(i), R"({"score":7,"comment":"nice"})").first == 200);
    }
    expect_error(call("POST", base + "/preferences/2", R"({"score":7,"comment":"nice"})"), 409, "DuplicateIndex");
    CHECK(call("POST", base + "/preferences/4", R"({"score":2,"comment":"dull"})").second["state"] == "Generating");
    auto not_ready = cli.Get(base + "/sets/1");
    REQUIRE(not_ready);
    CHECK(not_ready->status == 503);
    CHECK(not_ready->get_header_value("Retry-After") == "1");
    svc.drain();

    CHECK(call("GET", base + "/sets/1").second["stories"].size() == 3);
    expect_error(call("GET", base + "/sets/2"), 409, "StateError");
    expect_error(call("POST", base + "/sets/1/ratings", R"({"scores":[5,5,5],"ranking":[1,1,2]})"), 400,
                 "InvalidRanking");
    expect_error(call("POST", base + "/sets/1/ratings", R"({"scores":[5,5],"ranking":[1,2,3]})"), 400, "RangeError");
    for (int k = 1; k <= 4; ++k) {
        call("GET", base + "/sets/" + std::to_string(k));
        CHECK(call("POST", base + "/sets/" + std::to_string(k) + "/ratings", R"({"scores":[7,7,9],"ranking":[2,3,1]})")
                  .first == 200);
    }
    auto rubric_view = call("GET", base).second;
    CHECK(rubric_view["state"] == "RubricRating");
    expect_error(call("POST", base + "/rubric-rating", R"({"suitability":0})"), 400, "RangeError");
    CHECK(call("POST", base + "/rubric-rating", R"({"suitability":3})").second["state"] == "Done");
    expect_error(call("POST", base + "/rubric-rating", R"({"suitability":3})"), 409, "StateError");

    // Nothing the participant sees names a method.
    for (const auto& p : payloads) CHECK_FALSE(mentions_method(p));

    auto ex = cli.Get("/export");
    REQUIRE(ex);
    CHECK(json::parse(ex->body)["ratings"].size() == 12);
    CHECK(mentions_method(ex->body));
    auto csv = cli.Get("/export?format=csv");
    REQUIRE(csv);
    CHECK(csv->get_header_value("Content-Type") == "text/csv");
    CHECK(csv->body == svc.export_csv());
    server.stop();
}

}  // TEST_SUITE
