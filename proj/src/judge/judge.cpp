#include "prefine/judge/judge.hpp"

#include "prefine/errors.hpp"
#include "prefine/pipeline/history_format.hpp"

namespace prefine::judge {

namespace {

void require_story(const std::string& story, const char* which) {
    if (story.empty()) throw PreconditionViolation(std::string("judge needs a non-empty ") + which);
}

bool retryable(const Error& e) {
    return e.code() == "UnparseableVerdict" || e.code() == "ScoreOutOfRange" ||
           e.code() == "MissingCriterion";
}

}  // namespace

void JudgeConfig::validate() const {
    if (temperature != 0.0) throw InvalidArgument("judge temperature must be 0");
    if (backend.empty()) throw InvalidArgument("judge backend id is empty");
    if (max_tokens <= 0) throw InvalidArgument("judge max_tokens must be positive");
    retry.validate();
}

std::string judge_history(const UserHistory& history) {
    auto text = pipeline::format_history(history);
    if (history.dataset() == Dataset::PerDOC && history.size() == 1) {
        const auto& c = history.perdoc().front();
        text += "\n\nChosen: Plot " + std::string(to_string(c.choice)) + " (aspect: " +
                std::string(display_name(c.aspect)) + ")";
    }
    return text;
}

Judge::Judge(gateway::Gateway& gateway, JudgeConfig config, const prompts::TemplateRegistry& registry)
    : gateway_(gateway), config_(std::move(config)), registry_(registry) {
    config_.validate();
}

Judge::Reply Judge::ask(const std::string& prompt, int attempt) const {
    gateway::ChatRequest req;
    req.backend = config_.backend;
    req.messages = {{Role::User, prompt}};
    req.temperature = config_.temperature;
    req.max_tokens = config_.max_tokens;
    req.seed = config_.seed + (attempt - 1);
    auto key = gateway::cache_key(req);
    return {gateway_.complete(req, config_.retry).text, std::move(key)};
}

SingleVerdict Judge::pairwise_once(const std::string& story_x, const std::string& story_y,
                                   const UserHistory& history, const std::optional<Aspect>& aspect) const {
    require_story(story_x, "first story");
    require_story(story_y, "second story");
    const bool perdoc = history.dataset() == Dataset::PerDOC;
    if (perdoc && !aspect) throw PreconditionViolation("PerDOC pairwise judging needs an aspect");
    if (!perdoc && aspect) throw PreconditionViolation("PerMPST pairwise judging takes no aspect");

    const auto& tmpl = registry_.get(perdoc ? "judge.pairwise.perdoc" : "judge.pairwise.permpst");
    prompts::Binding b{{"user_history", judge_history(history)}, {"story_1", story_x}, {"story_2", story_y}};
    if (perdoc) b["aspect"] = std::string(display_name(*aspect));
    const auto prompt = prompts::render_tagged(tmpl, b);

    for (int attempt = 1;; ++attempt) {
        auto reply = ask(prompt, attempt);
        try {
            return {parse_pairwise_reply(reply.text), std::move(reply.text), std::move(reply.key)};
        } catch (const UnparseableVerdict&) {
            if (attempt == 2) throw;
        }
    }
}

PairVerdict Judge::pairwise_corrected(const std::string& story_a, const std::string& story_b,
                                      const UserHistory& history, const std::optional<Aspect>& aspect) const {
    auto ab = pairwise_once(story_a, story_b, history, aspect);
    auto ba = pairwise_once(story_b, story_a, history, aspect);
    PairVerdict v;
    v.first = ab.side;
    v.second = ba.side;
    v.corrected = correct(ab.side, ba.side);
    v.responses = {std::move(ab.response), std::move(ba.response)};
    v.cache_keys = {std::move(ab.cache_key), std::move(ba.cache_key)};
    return v;
}

ScoreResult Judge::score(const std::string& story, const UserHistory& history) const {
    require_story(story, "story");
    if (history.dataset() != Dataset::PerMPST) {
        throw PreconditionViolation("scalar scoring needs a PerMPST history");
    }
    const auto prompt = prompts::render_tagged(
        registry_.get("judge.score.permpst"),
        {{"user_history", pipeline::format_history(history)}, {"story", story}});
    ScoreResult out;
    for (int attempt = 1;; ++attempt) {
        auto reply = ask(prompt, attempt);
        try {
            auto parsed = parse_score_reply(reply.text);
            out.value = parsed.value;
            if (parsed.rounded) out.warnings.push_back("RoundedScore");
            out.response = std::move(reply.text);
            out.cache_key = std::move(reply.key);
            return out;
        } catch (const Error& e) {
            if (attempt == 2 || !retryable(e)) throw;
            out.warnings.push_back("Retry");
        }
    }
}

QualityResult Judge::general_quality(const std::string& premise, const std::string& story) const {
    require_story(story, "story");
    const auto prompt =
        prompts::render_tagged(registry_.get("judge.quality"), {{"premise", premise}, {"story", story}});
    QualityResult out;
    for (int attempt = 1;; ++attempt) {
        auto reply = ask(prompt, attempt);
        try {
            out.scores = parse_quality_reply(reply.text);
            out.response = std::move(reply.text);
            out.cache_key = std::move(reply.key);
            return out;
        } catch (const Error& e) {
            if (attempt == 2 || !retryable(e)) throw;
            out.warnings.push_back("Retry");
        }
    }
}

}  // namespace prefine::judge
