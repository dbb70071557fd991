#pragma once

#include <array>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "prefine/core/types.hpp"
#include "prefine/pipeline/pipeline.hpp"

// Human-evaluation sessions: preference entry on fixed seed synopses,
// personalized generation, blinded rating of story sets, rubric
// suitability, unblinded export.
namespace prefine::eval {

inline constexpr int kPayloadVersion = 1;
inline constexpr std::size_t kSeedSynopses = 4;
inline constexpr std::size_t kStorySets = 4;
inline constexpr std::array<Method, 3> kEvalMethods = {Method::PP, Method::SR, Method::EPER};

struct EvalConfig {
    std::vector<std::string> seed_synopses;  // shown to every participant
    std::vector<Premise> premises;           // one story set each
    pipeline::RunConfig run;                 // backend, seed, temperatures
    int iterations = kDefaultIterations;     // T for SR and EPER
    std::optional<std::filesystem::path> log_path;

    // Throws MisconfiguredSeedSet unless there are exactly four synopses
    // and four PerMPST premises.
    void validate() const;
    // Synopses of the first bundled PerMPST record, premises of all four.
    static EvalConfig from_samples();
    static EvalConfig from_json(const nlohmann::json& j);
};

enum class SessionState { PreferenceEntry, Generating, StoryRating, RubricRating, Done };
std::string_view to_string(SessionState state);

// How generation jobs run. Manual leaves them queued until `drain`.
enum class GenerationMode { Background, Inline, Manual };

struct StoryItem {
    Method method = Method::PP;
    std::string text;
};

struct StorySet {
    std::string premise_id;
    std::string premise;
    std::vector<StoryItem> items;  // presentation order
    std::uint64_t shuffle_seed = 0;
};

struct StoryResponse {
    std::array<int, 3> scores{};   // per presented position, 1..10
    std::array<int, 3> ranking{};  // rank per presented position, 1 = best
};

struct Session {
    std::string id;
    SessionState state = SessionState::PreferenceEntry;
    std::size_t set_index = 0;  // 1-based while rating
    std::array<std::optional<std::pair<int, std::string>>, kSeedSynopses> preferences;
    std::vector<std::optional<StorySet>> sets;  // one slot per premise
    std::vector<std::optional<StoryResponse>> responses;
    std::vector<std::string> rubric;  // EPER's per-user rubric
    std::optional<int> rubric_rating;
    std::vector<std::map<Method, std::string>> generated;  // finished stories per premise
    std::optional<std::string> generation_error;
    std::size_t order = 0;  // creation order, used for export
};

class EvalService {
public:
    // The pipeline must outlive the service.
    EvalService(const pipeline::Pipeline& pipeline, EvalConfig config,
                GenerationMode mode = GenerationMode::Background);
    ~EvalService();

    EvalService(const EvalService&) = delete;
    EvalService& operator=(const EvalService&) = delete;

    // Each returns the client view of the session after the change.
    nlohmann::json create_session();
    nlohmann::json get_session(const std::string& id) const;
    nlohmann::json submit_preference(const std::string& id, int index, int score, const std::string& comment);
    nlohmann::json get_story_set(const std::string& id, int set_index) const;
    nlohmann::json submit_story_ratings(const std::string& id, int set_index, const StoryResponse& response);
    nlohmann::json submit_rubric_rating(const std::string& id, int suitability);

    // Unblinded export of every session, creation order.
    nlohmann::json export_json() const;
    // One row per rated story: session,set,premiseId,method,score,rank.
    std::string export_csv() const;
    // Mean rank per method, straight from the stored responses.
    std::map<Method, double> method_average_ranks() const;

    // Manual mode: run every queued generation job now.
    std::size_t drain();
    std::size_t pending_jobs() const;
    // Blocks until no job is queued or running (Background mode).
    void wait_idle();

    const EvalConfig& config() const noexcept { return config_; }
    // Test hook: fixes the id sequence.
    void set_id_source(std::function<std::string()> next_id);

private:
    struct Job {
        std::string session;
        std::size_t premise = 0;
        Method method = Method::PP;
    };
    struct Entry {
        mutable std::mutex mutex;
        Session session;
    };

    Entry& entry(const std::string& id) const;
    nlohmann::json view(const Session& s) const;
    void append_event(const nlohmann::json& event);
    void apply(const nlohmann::json& event, bool replaying);
    void enqueue(const std::string& session);
    void run_job(const Job& job);
    void worker();
    void advance_after_generation(Session& s);
    std::uint64_t shuffle_seed_for(const std::string& session, std::size_t premise) const;

    const pipeline::Pipeline& pipeline_;
    EvalConfig config_;
    GenerationMode mode_;

    mutable std::mutex sessions_mutex_;
    std::map<std::string, std::unique_ptr<Entry>> sessions_;
    std::size_t created_ = 0;
    std::function<std::string()> next_id_;

    std::mutex log_mutex_;

    mutable std::mutex jobs_mutex_;
    std::condition_variable jobs_cv_;
    std::condition_variable idle_cv_;
    std::deque<Job> jobs_;
    std::size_t running_ = 0;
    bool stopping_ = false;
    std::vector<std::thread> workers_;
};

}  // namespace prefine::eval
