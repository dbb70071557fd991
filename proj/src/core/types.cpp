#include "prefine/core/types.hpp"

#include <algorithm>

#include "prefine/core/tokenizer.hpp"
#include "prefine/errors.hpp"
#include "prefine/util/text.hpp"

namespace prefine {

std::string_view to_string(Aspect aspect) {
    switch (aspect) {
        case Aspect::Interestingness: return "Interestingness";
        case Aspect::Surprise: return "Surprise";
        case Aspect::Adaptability: return "Adaptability";
        case Aspect::CharacterQuality: return "CharacterQuality";
        case Aspect::EndingSatisfaction: return "EndingSatisfaction";
    }
    return "Interestingness";
}

std::string_view display_name(Aspect aspect) {
    switch (aspect) {
        case Aspect::CharacterQuality: return "Character Quality";
        case Aspect::EndingSatisfaction: return "Ending Satisfaction";
        default: return to_string(aspect);
    }
}

Aspect parse_aspect(std::string_view text) {
    std::string compact;
    for (char c : util::trim(text)) {
        if (c != ' ' && c != '_' && c != '-') compact.push_back(c);
    }
    for (Aspect a : kAllAspects) {
        if (util::iequals(compact, to_string(a))) return a;
    }
    throw InvalidArgument("unknown aspect '" + std::string(text) + "'");
}

std::string_view to_string(Dataset dataset) {
    return dataset == Dataset::PerDOC ? "perdoc" : "permpst";
}

Dataset parse_dataset(std::string_view text) {
    auto t = util::trim(text);
    if (util::iequals(t, "perdoc")) return Dataset::PerDOC;
    if (util::iequals(t, "permpst")) return Dataset::PerMPST;
    throw InvalidArgument("unknown dataset '" + std::string(text) + "' (valid: perdoc, permpst)");
}

Premise make_premise(std::string id, std::string text, Dataset dataset) {
    if (util::trim(text).empty()) throw InvalidArgument("premise text must not be empty");
    return Premise{std::move(id), std::move(text), dataset};
}

std::string_view to_string(Choice choice) { return choice == Choice::A ? "A" : "B"; }

Choice parse_choice(std::string_view text) {
    auto t = util::trim(text);
    if (t == "A" || t == "a") return Choice::A;
    if (t == "B" || t == "b") return Choice::B;
    throw InvalidArgument("choice must be A or B, got '" + std::string(text) + "'");
}

Dataset UserHistory::dataset() const {
    return std::holds_alternative<std::vector<PerDocInteraction>>(interactions) ? Dataset::PerDOC
                                                                                : Dataset::PerMPST;
}

std::size_t UserHistory::size() const {
    return std::visit([](const auto& v) { return v.size(); }, interactions);
}

const std::vector<PerDocInteraction>& UserHistory::perdoc() const {
    if (dataset() != Dataset::PerDOC) throw InvalidArgument("history is not PerDOC");
    return std::get<std::vector<PerDocInteraction>>(interactions);
}

const std::vector<PerMpstInteraction>& UserHistory::permpst() const {
    if (dataset() != Dataset::PerMPST) throw InvalidArgument("history is not PerMPST");
    return std::get<std::vector<PerMpstInteraction>>(interactions);
}

Persona Persona::from_text(std::string ep_text, std::size_t observation_count) {
    if (util::trim(ep_text).empty()) throw EmptyPersona("explicit persona text is empty");
    Persona p;
    p.kind_ = PersonaKind::Explicit;
    p.ep_text_ = std::move(ep_text);
    p.observation_count_ = observation_count;
    return p;
}

Persona Persona::from_history(UserHistory history) {
    Persona p;
    p.kind_ = PersonaKind::Implicit;
    p.history_ = std::move(history);
    return p;
}

Rubric Rubric::user_specific(std::vector<std::string> criteria) {
    if (criteria.size() < kMinRubricCriteria || criteria.size() > kMaxRubricCriteria) {
        throw RubricArityError(criteria.size());
    }
    for (const auto& c : criteria) {
        if (util::trim(c).empty()) throw InvalidArgument("rubric criterion must not be empty");
    }
    Rubric r;
    r.kind_ = RubricKind::UserSpecific;
    r.criteria_ = std::move(criteria);
    return r;
}

Rubric Rubric::fixed_general() {
    Rubric r;
    r.kind_ = RubricKind::FixedGeneral;
    r.criteria_.assign(kGeneralCriteria.begin(), kGeneralCriteria.end());
    return r;
}

Rubric Rubric::none() { return Rubric{}; }

std::string_view to_string(RubricKind kind) {
    switch (kind) {
        case RubricKind::UserSpecific: return "UserSpecific";
        case RubricKind::FixedGeneral: return "FixedGeneral";
        case RubricKind::None: return "None";
    }
    return "None";
}

bool Feedback::all_scores_at_least(int threshold) const {
    return form == FeedbackForm::Structured && !items.empty() &&
           std::all_of(items.begin(), items.end(),
                       [threshold](const CriterionFeedback& c) { return c.score >= threshold; });
}

std::string_view to_string(Method method) {
    switch (method) {
        case Method::ZP: return "ZP";
        case Method::PP: return "PP";
        case Method::PEP: return "PEP";
        case Method::SR: return "SR";
        case Method::IPIR: return "IPIR";
        case Method::IPER: return "IPER";
        case Method::EPIR: return "EPIR";
        case Method::EPER: return "EPER";
    }
    return "ZP";
}

std::string valid_method_names() {
    std::vector<std::string> names;
    for (Method m : kAllMethods) names.emplace_back(to_string(m));
    return util::join(names, ", ");
}

Method parse_method(std::string_view text) {
    auto t = util::trim(text);
    for (Method m : kAllMethods) {
        if (util::iequals(t, to_string(m))) return m;
    }
    throw InvalidArgument("unknown method '" + std::string(text) +
                          "' (valid: " + valid_method_names() + ")");
}

std::string_view to_string(InitFrom init) { return init == InitFrom::ZP ? "ZP" : "PEP"; }

InitFrom parse_init_from(std::string_view text) {
    auto t = util::trim(text);
    if (util::iequals(t, "ZP")) return InitFrom::ZP;
    if (util::iequals(t, "PEP")) return InitFrom::PEP;
    throw InvalidArgument("initFrom must be ZP or PEP, got '" + std::string(text) + "'");
}

MethodConfig MethodConfig::make(Method method, std::optional<int> iterations, InitFrom init_from,
                                bool early_stop, int iteration_ceiling) {
    const bool iterates = method_capabilities(method).iterates;
    MethodConfig cfg;
    cfg.method = method;
    cfg.init_from = init_from;
    cfg.early_stop = early_stop;
    if (!iterates) {
        if (iterations.value_or(0) != 0) {
            throw InvalidArgument(std::string(to_string(method)) + " does not refine; T must be 0");
        }
        if (init_from != InitFrom::ZP) {
            throw InvalidArgument("initFrom applies to refining methods only");
        }
        cfg.max_iterations = 0;
        cfg.early_stop = false;
        return cfg;
    }
    int t = iterations.value_or(kDefaultIterations);
    if (t < 1 || t > iteration_ceiling) {
        throw InvalidArgument("T must lie in [1," + std::to_string(iteration_ceiling) +
                              "], got " + std::to_string(t));
    }
    cfg.max_iterations = t;
    return cfg;
}

std::string MethodConfig::label() const {
    std::string out(to_string(method));
    if (init_from == InitFrom::PEP) out += "-initPEP";
    return out;
}

Capabilities method_capabilities(Method method) {
    switch (method) {
        case Method::ZP: return {false, false, false};
        case Method::PP: return {false, false, false};
        case Method::PEP: return {true, false, false};
        case Method::SR: return {false, true, true};
        case Method::IPIR: return {false, false, true};
        case Method::IPER: return {false, true, true};
        case Method::EPIR: return {true, false, true};
        case Method::EPER: return {true, true, true};
    }
    return {};
}

Capabilities method_capabilities(const MethodConfig& config) {
    return method_capabilities(config.method);
}

RubricKind rubric_kind_for(Method method) {
    switch (method) {
        case Method::SR: return RubricKind::FixedGeneral;
        case Method::IPER:
        case Method::EPER: return RubricKind::UserSpecific;
        default: return RubricKind::None;
    }
}

std::string_view to_string(Stage stage) {
    switch (stage) {
        case Stage::Init: return "init";
        case Stage::Persona: return "persona";
        case Stage::Rubric: return "rubric";
        case Stage::Feedback: return "feedback";
        case Stage::Refine: return "refine";
    }
    return "init";
}

Stage parse_stage(std::string_view text) {
    for (Stage s : kAllStages) {
        if (util::iequals(util::trim(text), to_string(s))) return s;
    }
    throw InvalidArgument("unknown stage '" + std::string(text) + "'");
}

StoryDraft::StoryDraft(std::string text, int iteration, std::string_view tokenizer)
    : text_(std::move(text)), iteration_(iteration) {
    if (iteration < 0) throw InvalidArgument("draft iteration must be >= 0");
    token_count_ = count_tokens(text_, tokenizer);
}

StoryDraft StoryDraft::restore(std::string text, int iteration, std::size_t token_count) {
    StoryDraft d;
    d.text_ = std::move(text);
    d.iteration_ = iteration;
    d.token_count_ = token_count;
    return d;
}

std::string_view to_string(Role role) {
    switch (role) {
        case Role::System: return "system";
        case Role::User: return "user";
        case Role::Assistant: return "assistant";
    }
    return "user";
}

Role parse_role(std::string_view text) {
    if (text == "system") return Role::System;
    if (text == "user") return Role::User;
    if (text == "assistant") return Role::Assistant;
    throw InvalidArgument("unknown chat role '" + std::string(text) + "'");
}

const StoryDraft& RefinementTrace::final_draft() const {
    if (drafts.empty()) throw PreconditionViolation("trace " + record_id + " has no drafts");
    return drafts.back();
}

void RefinementTrace::check_invariants() const {
    const bool empty_failure = failure.has_value() && drafts.empty() && feedbacks.empty();
    if (!empty_failure && drafts.size() != feedbacks.size() + 1) {
        throw InvariantViolation("trace " + record_id + ": |drafts| = " +
                                 std::to_string(drafts.size()) + " but |feedbacks| = " +
                                 std::to_string(feedbacks.size()));
    }
    for (std::size_t i = 0; i < drafts.size(); ++i) {
        if (drafts[i].iteration() != static_cast<int>(i)) {
            throw InvariantViolation("trace " + record_id + ": draft " + std::to_string(i) +
                                     " has iteration " + std::to_string(drafts[i].iteration()));
        }
    }
    for (std::size_t i = 0; i < feedbacks.size(); ++i) {
        if (feedbacks[i].iteration != static_cast<int>(i)) {
            throw InvariantViolation("trace " + record_id + ": feedback " + std::to_string(i) +
                                     " has iteration " + std::to_string(feedbacks[i].iteration));
        }
    }
    if (static_cast<int>(feedbacks.size()) > config.max_iterations) {
        throw InvariantViolation("trace " + record_id + " holds more feedback rounds than T");
    }
}

}  // namespace prefine
