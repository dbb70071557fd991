#include "prefine/eval/service.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include <spdlog/spdlog.h>

#include "prefine/dataset/codec.hpp"
#include "prefine/dataset/records.hpp"
#include "prefine/errors.hpp"
#include "prefine/util/hash.hpp"
#include "prefine/util/text.hpp"

namespace prefine::eval {

using nlohmann::json;

namespace {

std::string random_token() {
    std::random_device rd;
    std::ostringstream out;
    for (int i = 0; i < 4; ++i) {
        char buf[9];
        std::snprintf(buf, sizeof buf, "%08x", rd());
        out << buf;
    }
    return out.str();
}

void require_range(long value, long lo, long hi, const std::string& what) {
    if (value < lo || value > hi) {
        throw RangeError(what + " " + std::to_string(value) + " outside [" + std::to_string(lo) + "," +
                         std::to_string(hi) + "]");
    }
}

std::size_t method_slot(Method m) {
    auto it = std::find(kEvalMethods.begin(), kEvalMethods.end(), m);
    if (it == kEvalMethods.end()) throw InvalidArgument("method is not part of the evaluation");
    return static_cast<std::size_t>(it - kEvalMethods.begin());
}

}  // namespace

std::string_view to_string(SessionState state) {
    switch (state) {
        case SessionState::PreferenceEntry: return "PreferenceEntry";
        case SessionState::Generating: return "Generating";
        case SessionState::StoryRating: return "StoryRating";
        case SessionState::RubricRating: return "RubricRating";
        case SessionState::Done: return "Done";
    }
    return "PreferenceEntry";
}

void EvalConfig::validate() const {
    if (seed_synopses.size() != kSeedSynopses) {
        throw MisconfiguredSeedSet("expected " + std::to_string(kSeedSynopses) + " seed synopses, got " +
                                   std::to_string(seed_synopses.size()));
    }
    for (const auto& s : seed_synopses) {
        if (util::trim(s).empty()) throw MisconfiguredSeedSet("a seed synopsis is empty");
    }
    if (premises.size() != kStorySets) {
        throw MisconfiguredSeedSet("expected " + std::to_string(kStorySets) + " premises, got " +
                                   std::to_string(premises.size()));
    }
    for (const auto& p : premises) {
        if (p.dataset != Dataset::PerMPST) throw MisconfiguredSeedSet("premise " + p.id + " is not PerMPST");
        for (const auto& s : seed_synopses) {
            if (s.find(p.text) != std::string::npos) {
                throw MisconfiguredSeedSet("premise " + p.id + " appears inside a seed synopsis");
            }
        }
    }
    if (iterations < 1) throw MisconfiguredSeedSet("iterations must be at least 1");
}

EvalConfig EvalConfig::from_samples() {
    auto records = dataset::parse_records(dataset::sample_text("sample_permpst.jsonl"), Dataset::PerMPST);
    EvalConfig c;
    for (const auto& t : records.at(0).history.permpst()) c.seed_synopses.push_back(t.synopsis);
    for (const auto& r : records) c.premises.push_back(r.premise);
    c.run.dataset = Dataset::PerMPST;
    return c;
}

EvalConfig EvalConfig::from_json(const json& j) {
    try {
        EvalConfig c;
        c.seed_synopses = j.at("seedSynopses").get<std::vector<std::string>>();
        for (const auto& p : j.at("premises")) {
            c.premises.push_back(
                make_premise(p.at("id").get<std::string>(), p.at("text").get<std::string>(), Dataset::PerMPST));
        }
        c.iterations = j.value("iterations", kDefaultIterations);
        c.run.dataset = Dataset::PerMPST;
        c.run.backend = j.value("backend", c.run.backend);
        c.run.seed = j.value("seed", c.run.seed);
        if (j.contains("log")) c.log_path = j.at("log").get<std::string>();
        return c;
    } catch (const json::exception& e) {
        throw MisconfiguredSeedSet(std::string("evaluation config: ") + e.what());
    }
}

EvalService::EvalService(const pipeline::Pipeline& pipeline, EvalConfig config, GenerationMode mode)
    : pipeline_(pipeline), config_(std::move(config)), mode_(mode), next_id_(random_token) {
    config_.validate();
    if (config_.log_path && std::filesystem::exists(*config_.log_path)) {
        std::ifstream in(*config_.log_path, std::ios::binary);
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (util::trim(line).empty()) continue;
            try {
                apply(json::parse(line), true);
            } catch (const std::exception& e) {
                throw SchemaError(line_no, std::string("event log: ") + e.what());
            }
        }
        spdlog::info("replayed {} events for {} sessions", line_no, sessions_.size());
    }
    if (mode_ == GenerationMode::Background) {
        for (int i = 0; i < 2; ++i) workers_.emplace_back([this] { worker(); });
    }
    // Sessions interrupted mid-generation pick up where they stopped.
    for (auto& [id, e] : sessions_) {
        if (e->session.state == SessionState::Generating && !e->session.generation_error) enqueue(id);
    }
    if (mode_ == GenerationMode::Inline) drain();
}

EvalService::~EvalService() {
    {
        std::lock_guard lock(jobs_mutex_);
        stopping_ = true;
    }
    jobs_cv_.notify_all();
    for (auto& t : workers_) t.join();
}

void EvalService::set_id_source(std::function<std::string()> next_id) { next_id_ = std::move(next_id); }

EvalService::Entry& EvalService::entry(const std::string& id) const {
    std::lock_guard lock(sessions_mutex_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw UnknownSession("no session '" + id + "'");
    return *it->second;
}

std::uint64_t EvalService::shuffle_seed_for(const std::string& session, std::size_t premise) const {
    return util::sha256_u64(session + "#" + std::to_string(premise) + "#" + std::to_string(config_.run.seed));
}

void EvalService::append_event(const json& event) {
    if (!config_.log_path) return;
    std::lock_guard lock(log_mutex_);
    if (config_.log_path->has_parent_path()) std::filesystem::create_directories(config_.log_path->parent_path());
    std::ofstream out(*config_.log_path, std::ios::binary | std::ios::app);
    out << event.dump() << "\n";
    out.flush();
    if (!out) throw Error("IoError", "cannot append to " + config_.log_path->string());
}

void EvalService::advance_after_generation(Session& s) {
    if (s.state != SessionState::Generating) return;
    if (std::all_of(s.sets.begin(), s.sets.end(), [](const auto& set) { return set.has_value(); })) {
        s.state = SessionState::StoryRating;
        s.set_index = 1;
    }
}

// Events are validated before they are written; applying one cannot fail
// except on a corrupt log.
void EvalService::apply(const json& event, bool replaying) {
    if (event.at("v").get<int>() != kPayloadVersion) throw VersionMismatch("unknown event version");
    const auto type = event.at("type").get<std::string>();
    const auto id = event.at("session").get<std::string>();
    if (type == "create") {
        auto e = std::make_unique<Entry>();
        e->session.id = id;
        e->session.order = event.at("order").get<std::size_t>();
        e->session.sets.resize(kStorySets);
        e->session.responses.resize(kStorySets);
        std::lock_guard lock(sessions_mutex_);
        created_ = std::max(created_, e->session.order + 1);
        sessions_.emplace(id, std::move(e));
        return;
    }
    auto& s = entry(id).session;
    if (type == "preference") {
        auto index = event.at("index").get<std::size_t>();
        s.preferences.at(index - 1) = std::pair{event.at("score").get<int>(), event.at("comment").get<std::string>()};
        bool all = std::all_of(s.preferences.begin(), s.preferences.end(), [](const auto& p) { return p.has_value(); });
        if (all) {
            s.state = SessionState::Generating;
            if (!replaying) enqueue(id);
        }
    } else if (type == "generated") {
        auto premise = event.at("premise").get<std::size_t>();
        auto method = parse_method(event.at("method").get<std::string>());
        if (s.generated.size() < kStorySets) s.generated.resize(kStorySets);
        s.generated.at(premise)[method] = event.at("text").get<std::string>();
        if (event.contains("rubric")) s.rubric = event.at("rubric").get<std::vector<std::string>>();
        if (s.generated[premise].size() == kEvalMethods.size()) {
            StorySet set;
            set.premise_id = config_.premises.at(premise).id;
            set.premise = config_.premises.at(premise).text;
            set.shuffle_seed = shuffle_seed_for(id, premise);
            for (auto m : kEvalMethods) set.items.push_back({m, s.generated[premise].at(m)});
            // Fisher-Yates with a plain modulus so the order is the same on
            // every standard library.
            std::mt19937_64 rng(set.shuffle_seed);
            for (std::size_t i = set.items.size() - 1; i > 0; --i) {
                std::swap(set.items[i], set.items[static_cast<std::size_t>(rng() % (i + 1))]);
            }
            s.sets.at(premise) = std::move(set);
            advance_after_generation(s);
        }
    } else if (type == "generation-failed") {
        s.generation_error = event.at("error").get<std::string>();
    } else if (type == "ratings") {
        auto k = event.at("set").get<std::size_t>();
        s.responses.at(k - 1) = StoryResponse{event.at("scores").get<std::array<int, 3>>(),
                                              event.at("ranking").get<std::array<int, 3>>()};
        if (k == kStorySets) {
            s.state = SessionState::RubricRating;
            s.set_index = 0;
        } else {
            s.set_index = k + 1;
        }
    } else if (type == "rubric-rating") {
        s.rubric_rating = event.at("suitability").get<int>();
        s.state = SessionState::Done;
    } else {
        throw SchemaError("unknown event type '" + type + "'");
    }
}

json EvalService::view(const Session& s) const {
    json synopses = json::array();
    for (std::size_t i = 0; i < kSeedSynopses; ++i) {
        json item = {{"index", i + 1}, {"text", config_.seed_synopses[i]}, {"submitted", s.preferences[i].has_value()}};
        if (s.preferences[i]) {
            item["score"] = s.preferences[i]->first;
            item["comment"] = s.preferences[i]->second;
        }
        synopses.push_back(std::move(item));
    }
    auto ready = std::count_if(s.sets.begin(), s.sets.end(), [](const auto& x) { return x.has_value(); });
    auto rated = std::count_if(s.responses.begin(), s.responses.end(), [](const auto& x) { return x.has_value(); });
    json out = {{"version", kPayloadVersion},
                {"id", s.id},
                {"state", std::string(to_string(s.state))},
                {"synopses", synopses},
                {"setsReady", ready},
                {"setsRated", rated},
                {"totalSets", kStorySets}};
    if (s.state == SessionState::StoryRating) out["setIndex"] = s.set_index;
    if (s.state == SessionState::RubricRating || s.state == SessionState::Done) out["rubric"] = s.rubric;
    if (s.rubric_rating) out["rubricRating"] = *s.rubric_rating;
    if (s.generation_error) out["generationError"] = *s.generation_error;
    return out;
}

json EvalService::create_session() {
    std::string id;
    std::size_t order;
    {
        std::lock_guard lock(sessions_mutex_);
        do {
            id = next_id_();
        } while (sessions_.count(id));
        order = created_;
    }
    json event = {{"v", kPayloadVersion}, {"type", "create"}, {"session", id}, {"order", order}};
    append_event(event);
    apply(event, false);
    return get_session(id);
}

json EvalService::get_session(const std::string& id) const {
    auto& e = entry(id);
    std::lock_guard lock(e.mutex);
    return view(e.session);
}

json EvalService::submit_preference(const std::string& id, int index, int score, const std::string& comment) {
    auto& e = entry(id);
    bool generate = false;
    json out;
    {
        std::lock_guard lock(e.mutex);
        auto& s = e.session;
        if (s.state != SessionState::PreferenceEntry) {
            throw StateError("preferences are closed in state " + std::string(to_string(s.state)));
        }
        require_range(index, 1, static_cast<long>(kSeedSynopses), "synopsis index");
        require_range(score, 1, 10, "preference score");
        if (util::trim(comment).empty()) throw EmptyComment("a review comment is required");
        if (s.preferences[static_cast<std::size_t>(index - 1)]) {
            throw DuplicateIndex("synopsis " + std::to_string(index) + " was already rated");
        }
        json event = {{"v", kPayloadVersion}, {"type", "preference"}, {"session", id},
                      {"index", index},       {"score", score},         {"comment", comment}};
        append_event(event);
        apply(event, false);
        generate = s.state == SessionState::Generating;
        out = view(s);
    }
    if (generate && mode_ == GenerationMode::Inline) {
        drain();
        return get_session(id);
    }
    return out;
}

json EvalService::get_story_set(const std::string& id, int set_index) const {
    auto& e = entry(id);
    std::lock_guard lock(e.mutex);
    const auto& s = e.session;
    require_range(set_index, 1, static_cast<long>(kStorySets), "set index");
    if (s.state == SessionState::PreferenceEntry) throw StateError("preferences are not complete");
    if (s.state == SessionState::Generating) {
        if (s.generation_error) throw StateError("generation failed: " + *s.generation_error);
        throw NotReady("stories are still being generated");
    }
    if (s.state == SessionState::StoryRating && static_cast<std::size_t>(set_index) > s.set_index) {
        throw StateError("set " + std::to_string(set_index) + " opens after set " + std::to_string(s.set_index));
    }
    const auto& set = *s.sets.at(static_cast<std::size_t>(set_index - 1));
    json stories = json::array();
    for (std::size_t i = 0; i < set.items.size(); ++i) {
        stories.push_back({{"position", i + 1}, {"text", set.items[i].text}});
    }
    json out = {{"version", kPayloadVersion}, {"sessionId", id}, {"set", set_index},
                {"premise", set.premise},     {"stories", stories}};
    if (const auto& r = s.responses.at(static_cast<std::size_t>(set_index - 1))) {
        out["submitted"] = {{"scores", r->scores}, {"ranking", r->ranking}};
    }
    return out;
}

json EvalService::submit_story_ratings(const std::string& id, int set_index, const StoryResponse& response) {
    auto& e = entry(id);
    std::lock_guard lock(e.mutex);
    auto& s = e.session;
    require_range(set_index, 1, static_cast<long>(kStorySets), "set index");
    if (s.state == SessionState::Generating && !s.generation_error) throw NotReady("stories are still being generated");
    if (s.state != SessionState::StoryRating || static_cast<std::size_t>(set_index) != s.set_index) {
        throw StateError("set " + std::to_string(set_index) + " is not open for rating");
    }
    for (int score : response.scores) require_range(score, 1, 10, "story score");
    std::set<int> ranks(response.ranking.begin(), response.ranking.end());
    if (ranks != std::set<int>{1, 2, 3}) throw InvalidRanking("ranking must be a permutation of 1, 2, 3");
    json event = {{"v", kPayloadVersion}, {"type", "ratings"},         {"session", id},
                  {"set", set_index},     {"scores", response.scores}, {"ranking", response.ranking}};
    append_event(event);
    apply(event, false);
    return view(s);
}

json EvalService::submit_rubric_rating(const std::string& id, int suitability) {
    auto& e = entry(id);
    std::lock_guard lock(e.mutex);
    auto& s = e.session;
    if (s.state != SessionState::RubricRating) {
        throw StateError("rubric rating is not open in state " + std::string(to_string(s.state)));
    }
    require_range(suitability, 1, 5, "rubric suitability");
    json event = {{"v", kPayloadVersion}, {"type", "rubric-rating"}, {"session", id}, {"suitability", suitability}};
    append_event(event);
    apply(event, false);
    return view(s);
}

void EvalService::enqueue(const std::string& session) {
    // The caller holds this session's lock.
    auto& s = entry(session).session;
    {
        std::lock_guard lock(jobs_mutex_);
        for (std::size_t p = 0; p < kStorySets; ++p) {
            for (auto m : kEvalMethods) {
                if (p < s.generated.size() && s.generated[p].count(m)) continue;
                jobs_.push_back({session, p, m});
            }
        }
    }
    jobs_cv_.notify_all();
}

void EvalService::run_job(const Job& job) {
    auto& e = entry(job.session);
    dataset::ExperimentRecord record;
    {
        std::lock_guard lock(e.mutex);
        std::vector<PerMpstInteraction> triples;
        for (std::size_t i = 0; i < kSeedSynopses; ++i) {
            const auto& p = *e.session.preferences[i];
            triples.push_back({config_.seed_synopses[i], p.second, p.first});
        }
        record.premise = config_.premises.at(job.premise);
        record.id = record.premise.id;
        record.history = UserHistory{job.session, std::move(triples)};
    }
    auto run = config_.run;
    run.dataset = Dataset::PerMPST;
    run.method = job.method == Method::PP ? MethodConfig::make(Method::PP)
                                          : MethodConfig::make(job.method, config_.iterations);
    auto trace = pipeline_.run_method(record, run);

    std::lock_guard lock(e.mutex);
    json event = {{"v", kPayloadVersion}, {"session", job.session}, {"premise", job.premise},
                  {"method", std::string(to_string(job.method))}};
    if (trace.failure) {
        event["type"] = "generation-failed";
        event["error"] = trace.failure->code + ": " + trace.failure->message;
        spdlog::warn("generation for session {} failed: {}", job.session, event["error"].get<std::string>());
    } else {
        event["type"] = "generated";
        event["text"] = trace.final_draft().text();
        if (job.method == Method::EPER && job.premise == 0 && trace.rubric) event["rubric"] = trace.rubric->criteria();
    }
    append_event(event);
    apply(event, false);
}

std::size_t EvalService::drain() {
    std::size_t done = 0;
    for (;;) {
        Job job;
        {
            std::lock_guard lock(jobs_mutex_);
            if (jobs_.empty()) break;
            job = jobs_.front();
            jobs_.pop_front();
            ++running_;
        }
        try {
            run_job(job);
        } catch (const std::exception& ex) {
            spdlog::error("generation job failed: {}", ex.what());
        }
        {
            std::lock_guard lock(jobs_mutex_);
            --running_;
        }
        idle_cv_.notify_all();
        ++done;
    }
    return done;
}

void EvalService::worker() {
    for (;;) {
        Job job;
        {
            std::unique_lock lock(jobs_mutex_);
            jobs_cv_.wait(lock, [&] { return stopping_ || !jobs_.empty(); });
            if (stopping_) return;
            job = jobs_.front();
            jobs_.pop_front();
            ++running_;
        }
        try {
            run_job(job);
        } catch (const std::exception& ex) {
            spdlog::error("generation job failed: {}", ex.what());
        }
        {
            std::lock_guard lock(jobs_mutex_);
            --running_;
        }
        idle_cv_.notify_all();
    }
}

std::size_t EvalService::pending_jobs() const {
    std::lock_guard lock(jobs_mutex_);
    return jobs_.size();
}

void EvalService::wait_idle() {
    std::unique_lock lock(jobs_mutex_);
    idle_cv_.wait(lock, [&] { return jobs_.empty() && running_ == 0; });
}

json EvalService::export_json() const {
    std::vector<const Entry*> entries;
    {
        std::lock_guard lock(sessions_mutex_);
        for (const auto& [id, e] : sessions_) entries.push_back(e.get());
    }
    std::sort(entries.begin(), entries.end(), [](auto a, auto b) { return a->session.order < b->session.order; });

    json methods = json::array();
    for (auto m : kEvalMethods) methods.push_back(std::string(to_string(m)));
    json sessions = json::array(), ratings = json::array(), rankings = json::array(), rubric_ratings = json::array();
    json scores = json::object();
    for (auto m : kEvalMethods) scores[std::string(to_string(m))] = json::array();

    for (const auto* e : entries) {
        std::lock_guard lock(e->mutex);
        const auto& s = e->session;
        json sets = json::array();
        for (std::size_t k = 0; k < kStorySets; ++k) {
            if (!s.sets[k] || !s.responses[k]) continue;
            const auto& set = *s.sets[k];
            const auto& r = *s.responses[k];
            json order = json::array(), per_rank = json::array({0, 0, 0});
            for (std::size_t pos = 0; pos < set.items.size(); ++pos) {
                auto m = set.items[pos].method;
                auto name = std::string(to_string(m));
                order.push_back(name);
                ratings.push_back({{"session", s.id}, {"set", k + 1}, {"premiseId", set.premise_id},
                                   {"method", name}, {"score", r.scores[pos]}, {"rank", r.ranking[pos]}});
                scores[name].push_back(r.scores[pos]);
                per_rank[method_slot(m)] = r.ranking[pos];
            }
            rankings.push_back(per_rank);
            sets.push_back({{"set", k + 1}, {"premiseId", set.premise_id}, {"shuffleSeed", std::to_string(set.shuffle_seed)},
                            {"order", order}, {"scores", r.scores}, {"ranking", r.ranking}});
        }
        json prefs = json::array();
        for (std::size_t i = 0; i < kSeedSynopses; ++i) {
            if (!s.preferences[i]) continue;
            prefs.push_back({{"index", i + 1}, {"score", s.preferences[i]->first}, {"comment", s.preferences[i]->second}});
        }
        if (s.rubric_rating) {
            rubric_ratings.push_back({{"session", s.id}, {"suitability", *s.rubric_rating}, {"rubric", s.rubric}});
        }
        sessions.push_back({{"id", s.id}, {"state", std::string(to_string(s.state))}, {"preferences", prefs},
                            {"sets", sets}, {"rubric", s.rubric}});
    }
    return {{"version", kPayloadVersion}, {"methods", methods},   {"sessions", sessions}, {"ratings", ratings},
            {"rankings", rankings},       {"scores", scores},     {"rubricRatings", rubric_ratings}};
}

std::string EvalService::export_csv() const {
    auto j = export_json();
    std::string out = "session,set,premiseId,method,score,rank\n";
    for (const auto& r : j.at("ratings")) {
        out += r.at("session").get<std::string>() + "," + std::to_string(r.at("set").get<int>()) + "," +
               r.at("premiseId").get<std::string>() + "," + r.at("method").get<std::string>() + "," +
               std::to_string(r.at("score").get<int>()) + "," + std::to_string(r.at("rank").get<int>()) + "\n";
    }
    return out;
}

std::map<Method, double> EvalService::method_average_ranks() const {
    std::vector<const Entry*> entries;
    {
        std::lock_guard lock(sessions_mutex_);
        for (const auto& [id, e] : sessions_) entries.push_back(e.get());
    }
    std::map<Method, double> sum;
    std::size_t n = 0;
    for (const auto* e : entries) {
        std::lock_guard session_lock(e->mutex);
        for (std::size_t k = 0; k < kStorySets; ++k) {
            const auto& set = e->session.sets[k];
            const auto& r = e->session.responses[k];
            if (!set || !r) continue;
            for (std::size_t pos = 0; pos < set->items.size(); ++pos) sum[set->items[pos].method] += r->ranking[pos];
            ++n;
        }
    }
    if (n == 0) return {};
    for (auto& [m, v] : sum) v /= static_cast<double>(n);
    return sum;
}

}  // namespace prefine::eval
