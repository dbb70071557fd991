#include "prefine/pipeline/pipeline.hpp"

#include <algorithm>
#include <cctype>

#include "prefine/core/tokenizer.hpp"
#include "prefine/errors.hpp"
#include "prefine/pipeline/history_format.hpp"
#include "prefine/pipeline/plot_structure.hpp"
#include "prefine/prompts/parsers.hpp"
#include "prefine/util/text.hpp"

namespace prefine::pipeline {

namespace {

// Everything a prompt may draw on; each template takes what it declares.
struct Sources {
    const dataset::ExperimentRecord* record = nullptr;
    const Persona* persona = nullptr;
    const Rubric* rubric = nullptr;
    const StoryDraft* draft = nullptr;
    const Feedback* feedback = nullptr;
};

const std::string& ep_text(const Persona* persona) {
    if (!persona || !persona->ep_text()) {
        throw PreconditionViolation("template needs an explicit persona");
    }
    return *persona->ep_text();
}

std::string value_for(const prompts::Template& t, const std::string& name, const Sources& s) {
    const auto& record = *s.record;
    if (name == "premise") return record.premise.text;
    if (name == "user_history") {
        // The EP rubric prompts show the persona under a "[User Persona]" header.
        if (t.id.rfind("rubric.", 0) == 0 && t.id.size() > 3 && t.id.substr(t.id.size() - 3) == ".ep") {
            return ep_text(s.persona);
        }
        return format_history(record.history);
    }
    if (name == "user_preference") return format_preference(record.history);
    if (name == "user_preference_answer" || name == "choice") return choice_label(record.history);
    if (name == "aspect") return aspect_label(record.history, record.aspect);
    if (name == "persona_description") return ep_text(s.persona);
    if (name == "rubric_list") {
        if (!s.rubric || s.rubric->criteria().empty()) throw PreconditionViolation("template needs a rubric");
        return prompts::render_rubric_list(*s.rubric);
    }
    if (name == "story_plot" || name == "movie_synopsis" || name == "story") {
        if (!s.draft) throw PreconditionViolation("template needs a draft");
        return s.draft->text();
    }
    if (name == "feedback") {
        if (!s.feedback) throw PreconditionViolation("template needs feedback");
        return s.feedback->raw_text;
    }
    throw TemplateError("template " + t.id + " uses placeholder '" + name +
                        "' that the pipeline cannot bind");
}

std::string render_prompt(const prompts::Template& t, const Sources& s) {
    prompts::Binding b;
    for (const auto& name : t.placeholders) b[name] = value_for(t, name, s);
    return prompts::render_tagged(t, b);
}

bool is_retryable(const Error& e) {
    static const std::vector<std::string> codes = {
        "RubricArityError", "EmptyRubric",       "MissingField",   "ScoreOutOfRange",
        "CriterionMismatch", "MissingSection",   "EmptyPersona",   "StructureViolation",
        "MissingCriterion", "UnparseableVerdict"};
    return std::find(codes.begin(), codes.end(), e.code()) != codes.end();
}

bool mentions_word(const std::string& lower, std::string_view phrase) {
    for (auto pos = lower.find(phrase); pos != std::string::npos; pos = lower.find(phrase, pos + 1)) {
        auto end = pos + phrase.size();
        bool left = pos == 0 || !std::isalnum(static_cast<unsigned char>(lower[pos - 1]));
        bool right = end >= lower.size() || !std::isalnum(static_cast<unsigned char>(lower[end]));
        if (left && right) return true;
    }
    return false;
}

void warn(StageLog& log, Stage stage, int iteration, std::string code, std::string message) {
    log.warnings.push_back({stage, iteration, std::move(code), std::move(message)});
}

// Runs `produce(attempt)` and retries once on a retryable parse error.
template <typename Fn>
auto with_retry(StageLog& log, Stage stage, int iteration, Fn produce) {
    try {
        return produce(1);
    } catch (const Error& e) {
        if (!is_retryable(e)) throw;
        warn(log, stage, iteration, "Retry", e.code() + ": " + e.what());
    }
    return produce(2);
}

}  // namespace

void RunConfig::validate() const {
    if (gen_temperature < 0.0 || gen_temperature > 2.0 || eval_temperature < 0.0 ||
        eval_temperature > 2.0) {
        throw InvalidArgument("temperatures must lie in [0,2]");
    }
    if (band_low >= band_high) throw InvalidArgument("token band needs low < high");
    if (max_tokens <= 0) throw InvalidArgument("max_tokens must be positive");
    if (backend.empty()) throw InvalidArgument("backend id is empty");
    if (!has_tokenizer(tokenizer)) throw UnknownTokenizer("tokenizer '" + tokenizer + "' is not registered");
    retry.validate();
    // Re-derive the method config to reject illegal pairings built by hand.
    MethodConfig::make(method.method, method.max_iterations, method.init_from, method.early_stop,
                       std::max(method.max_iterations, kDefaultIterations));
}

void check_premise(const StoryDraft& draft, const Premise& premise) {
    const auto& text = draft.text();
    if (premise.dataset == Dataset::PerDOC) {
        PlotStructure plot;
        try {
            plot = parse_plot(text);
        } catch (const StructureViolation&) {
            throw PremiseMutation("draft " + std::to_string(draft.iteration()) + " has no Premise section");
        }
        if (plot.premise.find(premise.text) == std::string::npos) {
            throw PremiseMutation("draft " + std::to_string(draft.iteration()) +
                                  " altered the premise section");
        }
        return;
    }
    auto body = util::trim(text);
    bool ok = draft.iteration() == 0 ? body.rfind(premise.text, 0) == 0
                                     : body.find(premise.text) != std::string_view::npos;
    if (!ok) {
        throw PremiseMutation("draft " + std::to_string(draft.iteration()) +
                              (draft.iteration() == 0 ? " does not open with" : " does not contain") +
                              " the premise");
    }
}

Pipeline::Pipeline(gateway::Gateway& gateway, const prompts::TemplateRegistry& registry)
    : gateway_(gateway), registry_(registry) {}

std::string Pipeline::call(const RunConfig& config, Stage stage, int iteration,
                           const std::string& prompt_id, std::vector<ChatMessage> messages, int attempt,
                           StageLog& log) const {
    gateway::ChatRequest req;
    req.backend = config.backend;
    req.messages = std::move(messages);
    req.temperature = config.gen_temperature;
    req.max_tokens = config.max_tokens;
    req.seed = config.seed + (attempt - 1);
    auto resp = gateway_.complete(req, config.retry);
    log.transcript.push_back({prompt_id, stage, iteration, attempt, req.seed, req.temperature,
                              std::move(req.messages), resp.text});
    return resp.text;
}

StoryDraft Pipeline::generate_initial(const dataset::ExperimentRecord& record,
                                      const std::optional<Persona>& persona, const RunConfig& config,
                                      StageLog& log) const {
    const auto& t = prompts::select_template(registry_, config.method, Stage::Init, record.dataset());
    Sources s{&record, persona ? &*persona : nullptr};
    const auto prompt = render_prompt(t, s);
    return with_retry(log, Stage::Init, 0, [&](int attempt) {
        StoryDraft draft(call(config, Stage::Init, 0, t.id, {{Role::User, prompt}}, attempt, log), 0,
                         config.tokenizer);
        if (record.dataset() == Dataset::PerDOC) {
            auto problem = structure_problem(parse_plot(draft.text()), false);
            if (!problem.empty()) throw StructureViolation("initial plot: " + problem);
        }
        check_premise(draft, record.premise);
        return draft;
    });
}

Persona Pipeline::extract_persona(const dataset::ExperimentRecord& record, const RunConfig& config,
                                  StageLog& log) const {
    const auto& t = prompts::select_template(registry_, config.method, Stage::Persona, record.dataset());
    const auto prompt = render_prompt(t, Sources{&record});
    auto parsed = with_retry(log, Stage::Persona, 0, [&](int attempt) {
        return prompts::parse_persona(
            call(config, Stage::Persona, 0, t.id, {{Role::User, prompt}}, attempt, log));
    });
    if (parsed.warning) warn(log, Stage::Persona, 0, "PersonaObservationCount", *parsed.warning);
    if (record.dataset() == Dataset::PerDOC) {
        auto lower = util::to_lower(*parsed.persona.ep_text());
        for (std::string_view phrase : {"plot a", "plot b"}) {
            if (mentions_word(lower, phrase)) {
                warn(log, Stage::Persona, 0, "PersonaLexicalViolation",
                     "persona mentions '" + std::string(phrase) + "'");
            }
        }
    }
    return parsed.persona;
}

Rubric Pipeline::generate_rubric(const dataset::ExperimentRecord& record, const Persona& persona,
                                 const RunConfig& config, StageLog& log) const {
    const auto caps = method_capabilities(config.method.method);
    if (!caps.uses_explicit_rubric || config.method.method == Method::SR) {
        throw PreconditionViolation(std::string(to_string(config.method.method)) +
                                    " does not generate a user-specific rubric");
    }
    if (caps.uses_explicit_persona != (persona.kind() == PersonaKind::Explicit)) {
        throw PreconditionViolation("persona kind does not match the method");
    }
    const auto& t = prompts::select_template(registry_, config.method, Stage::Rubric, record.dataset());
    const auto prompt = render_prompt(t, Sources{&record, &persona});
    return with_retry(log, Stage::Rubric, 0, [&](int attempt) {
        return prompts::parse_rubric(
            call(config, Stage::Rubric, 0, t.id, {{Role::User, prompt}}, attempt, log));
    });
}

Feedback Pipeline::critique(const dataset::ExperimentRecord& record, const Persona& persona,
                            const std::optional<Rubric>& rubric, const StoryDraft& draft,
                            const RunConfig& config, StageLog& log) const {
    const int t_index = draft.iteration();
    if (t_index >= config.method.max_iterations) {
        throw PreconditionViolation("draft iteration " + std::to_string(t_index) +
                                    " is not below T = " + std::to_string(config.method.max_iterations));
    }
    const auto& t = prompts::select_template(registry_, config.method, Stage::Feedback, record.dataset());
    const bool structured = rubric && !rubric->criteria().empty();
    const auto prompt = render_prompt(t, Sources{&record, &persona, structured ? &*rubric : nullptr, &draft});
    auto feedback = with_retry(log, Stage::Feedback, t_index, [&](int attempt) {
        auto text = call(config, Stage::Feedback, t_index, t.id, {{Role::User, prompt}}, attempt, log);
        return structured ? prompts::parse_structured_feedback(text, *rubric)
                          : prompts::parse_freeform_feedback(text);
    });
    feedback.iteration = t_index;
    auto tokens = count_tokens(feedback.raw_text, config.tokenizer);
    if (tokens > config.feedback_token_cap) {
        warn(log, Stage::Feedback, t_index, "FeedbackTokenCap",
             "feedback has " + std::to_string(tokens) + " tokens, cap " +
                 std::to_string(config.feedback_token_cap));
    }
    return feedback;
}

StoryDraft Pipeline::refine(const dataset::ExperimentRecord& record, const StoryDraft& draft,
                            const Feedback& feedback, const RunConfig& config, StageLog& log) const {
    const int t_index = draft.iteration();
    if (feedback.iteration != t_index) {
        throw PreconditionViolation("feedback iteration " + std::to_string(feedback.iteration) +
                                    " does not match draft iteration " + std::to_string(t_index));
    }
    const auto& t = prompts::select_template(registry_, config.method, Stage::Refine, record.dataset());
    const auto prompt = render_prompt(t, Sources{&record, nullptr, nullptr, &draft, &feedback});
    // The current story goes in as the model's own previous turn.
    const std::vector<ChatMessage> messages = {{Role::Assistant, draft.text()}, {Role::User, prompt}};

    std::optional<StoryDraft> result;
    std::vector<std::string> problems;
    for (int attempt = 1; attempt <= 2; ++attempt) {
        StoryDraft next(call(config, Stage::Refine, t_index, t.id, messages, attempt, log), t_index + 1,
                        config.tokenizer);
        check_premise(next, record.premise);
        problems.clear();
        if (record.dataset() == Dataset::PerDOC) {
            try {
                auto p = structure_problem(parse_plot(next.text()), true);
                if (!p.empty()) problems.push_back("StructureViolation: " + p);
            } catch (const StructureViolation& e) {
                problems.push_back(std::string("StructureViolation: ") + e.what());
            }
            auto n = next.token_count();
            if (n < config.band_low || n > config.band_high) {
                problems.push_back("LengthBand: " + std::to_string(n) + " tokens outside [" +
                                   std::to_string(config.band_low) + "," +
                                   std::to_string(config.band_high) + "]");
            }
        }
        result = std::move(next);
        if (problems.empty()) break;
        if (attempt == 1) warn(log, Stage::Refine, t_index, "Retry", problems.front());
    }
    for (const auto& p : problems) {
        auto colon = p.find(':');
        warn(log, Stage::Refine, t_index, p.substr(0, colon), p.substr(colon + 2));
    }
    return std::move(*result);
}

RefinementTrace Pipeline::run_method(const dataset::ExperimentRecord& record,
                                     const RunConfig& config) const {
    config.validate();
    if (config.dataset != record.dataset()) {
        throw InvalidArgument("record " + record.id + " is not a " +
                              std::string(to_string(config.dataset)) + " record");
    }
    RefinementTrace trace;
    trace.record_id = record.id;
    trace.premise = record.premise;
    trace.history = record.history;
    trace.aspect = record.aspect;
    trace.config = config.method;
    trace.backend = config.backend;
    trace.seed = config.seed;
    trace.temperature = config.gen_temperature;

    const auto method = config.method.method;
    const auto caps = method_capabilities(method);
    const bool needs_ep = caps.uses_explicit_persona || config.method.init_from == InitFrom::PEP;
    StageLog log;
    Stage stage = Stage::Persona;
    int iteration = 0;
    try {
        std::optional<Persona> ep;
        if (needs_ep) ep = extract_persona(record, config, log);

        stage = Stage::Init;
        trace.drafts.push_back(generate_initial(record, ep, config, log));

        if (caps.uses_explicit_persona) {
            trace.persona = ep;
        } else if (caps.iterates) {
            trace.persona = Persona::from_history(record.history);
        }

        if (caps.iterates) {
            if (method == Method::SR) {
                trace.rubric = Rubric::fixed_general();
            } else if (caps.uses_explicit_rubric) {
                stage = Stage::Rubric;
                trace.rubric = generate_rubric(record, *trace.persona, config, log);
            }
            for (iteration = 0; iteration < config.method.max_iterations; ++iteration) {
                stage = Stage::Feedback;
                auto feedback =
                    critique(record, *trace.persona, trace.rubric, trace.drafts.back(), config, log);
                if (config.method.early_stop && feedback.form == FeedbackForm::Structured &&
                    feedback.all_scores_at_least(9)) {
                    warn(log, Stage::Feedback, iteration, "EarlyStop",
                         "every criterion scored 9 or higher");
                    trace.stopped_early = true;
                    break;
                }
                stage = Stage::Refine;
                auto next = refine(record, trace.drafts.back(), feedback, config, log);
                trace.feedbacks.push_back(std::move(feedback));
                trace.drafts.push_back(std::move(next));
            }
        }
    } catch (const Error& e) {
        trace.failure = TraceFailure{stage, iteration, e.code(), e.what()};
    } catch (const std::exception& e) {
        trace.failure = TraceFailure{stage, iteration, "InternalError", e.what()};
    }
    trace.transcript = std::move(log.transcript);
    trace.warnings = std::move(log.warnings);
    trace.check_invariants();
    return trace;
}

}  // namespace prefine::pipeline
