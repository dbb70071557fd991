#pragma once

#include <optional>
#include <string>
#include <vector>

#include "prefine/core/types.hpp"
#include "prefine/gateway/gateway.hpp"
#include "prefine/judge/verdicts.hpp"
#include "prefine/prompts/template.hpp"

namespace prefine::judge {

struct JudgeConfig {
    std::string backend = "mock";
    double temperature = 0.0;
    long long seed = 42;
    int max_tokens = 256;
    gateway::RetryPolicy retry;

    // The judge is deterministic by contract: temperature must be 0.
    void validate() const;
};

struct SingleVerdict {
    Side side = Side::X;
    std::string response;
    std::string cache_key;
};

struct ScoreResult {
    int value = 0;
    std::vector<std::string> warnings;  // "RoundedScore", "Retry"
    std::string response;
    std::string cache_key;
};

struct QualityResult {
    QualityScores scores;
    std::vector<std::string> warnings;
    std::string response;
    std::string cache_key;
};

// LLM-as-judge over a gateway backend. Every call goes through the gateway
// cache, so re-judging a finished run makes no live calls.
class Judge {
public:
    explicit Judge(gateway::Gateway& gateway, JudgeConfig config = {},
                   const prompts::TemplateRegistry& registry = prompts::TemplateRegistry::builtin());

    // Story X is shown first. PerDOC histories need an aspect; PerMPST
    // histories take none. Retries once (seed + 1) on UnparseableVerdict.
    SingleVerdict pairwise_once(const std::string& story_x, const std::string& story_y,
                                const UserHistory& history, const std::optional<Aspect>& aspect) const;

    // Both presentation orders, corrected per `correct`.
    PairVerdict pairwise_corrected(const std::string& story_a, const std::string& story_b,
                                   const UserHistory& history, const std::optional<Aspect>& aspect) const;

    // PerMPST reviewer score. Retries once on an unreadable or out-of-range
    // reply; the second failure propagates.
    ScoreResult score(const std::string& story, const UserHistory& history) const;

    QualityResult general_quality(const std::string& premise, const std::string& story) const;

    const JudgeConfig& config() const noexcept { return config_; }

private:
    struct Reply {
        std::string text;
        std::string key;
    };
    Reply ask(const std::string& prompt, int attempt) const;

    gateway::Gateway& gateway_;
    JudgeConfig config_;
    const prompts::TemplateRegistry& registry_;
};

// History text shown to the pairwise and score judges. PerDOC adds the
// reader's recorded choice, which the generation prompts bind separately.
std::string judge_history(const UserHistory& history);

}  // namespace prefine::judge
