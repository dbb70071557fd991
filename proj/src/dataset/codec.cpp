#include "prefine/dataset/codec.hpp"

#include "prefine/errors.hpp"

namespace prefine::dataset {

namespace {

template <typename Fn>
auto enum_field(const Json& j, const char* key, Fn parse) {
    auto text = require_string(j, key);
    try {
        return parse(text);
    } catch (const InvalidArgument& e) {
        throw SchemaError(std::string(key) + ": " + e.what());
    }
}

bool require_bool(const Json& j, const char* key) {
    const auto& v = require(j, key);
    if (!v.is_boolean()) throw SchemaError(std::string("field '") + key + "' must be a boolean");
    return v.get<bool>();
}

double require_number(const Json& j, const char* key) {
    const auto& v = require(j, key);
    if (!v.is_number()) throw SchemaError(std::string("field '") + key + "' must be a number");
    return v.get<double>();
}

const Json& require_array(const Json& j, const char* key) {
    const auto& v = require(j, key);
    if (!v.is_array()) throw SchemaError(std::string("field '") + key + "' must be an array");
    return v;
}

}  // namespace

const Json& require(const Json& j, const char* key) {
    if (!j.is_object()) throw SchemaError(std::string("expected an object holding '") + key + "'");
    auto it = j.find(key);
    if (it == j.end()) throw SchemaError(std::string("missing field '") + key + "'");
    return *it;
}

std::string require_string(const Json& j, const char* key) {
    const auto& v = require(j, key);
    if (!v.is_string()) throw SchemaError(std::string("field '") + key + "' must be a string");
    return v.get<std::string>();
}

long long require_int(const Json& j, const char* key) {
    const auto& v = require(j, key);
    if (!v.is_number_integer()) throw SchemaError(std::string("field '") + key + "' must be an integer");
    return v.get<long long>();
}

Json to_json(const Premise& p) {
    return {{"id", p.id}, {"text", p.text}, {"dataset", std::string(to_string(p.dataset))}};
}

Premise premise_from_json(const Json& j) {
    try {
        return make_premise(require_string(j, "id"), require_string(j, "text"),
                            enum_field(j, "dataset", parse_dataset));
    } catch (const InvalidArgument& e) {
        throw SchemaError(std::string("premise: ") + e.what());
    }
}

Json interactions_to_json(const UserHistory& h) {
    Json items = Json::array();
    if (h.dataset() == Dataset::PerDOC) {
        for (const auto& i : h.perdoc()) {
            items.push_back({{"plotA", i.plot_a},
                             {"plotB", i.plot_b},
                             {"aspect", std::string(to_string(i.aspect))},
                             {"choice", std::string(to_string(i.choice))}});
        }
    } else {
        for (const auto& i : h.permpst()) {
            items.push_back({{"synopsis", i.synopsis}, {"review", i.review}, {"score", i.score}});
        }
    }
    return items;
}

UserHistory history_from_items(std::string user_id, const Json& items, Dataset dataset) {
    if (!items.is_array()) throw SchemaError("history must be an array");
    if (dataset == Dataset::PerDOC) {
        std::vector<PerDocInteraction> out;
        for (std::size_t k = 0; k < items.size(); ++k) {
            const auto& it = items[k];
            const auto where = "history[" + std::to_string(k) + "].";
            try {
                PerDocInteraction i;
                i.plot_a = require_string(it, "plotA");
                i.plot_b = require_string(it, "plotB");
                i.aspect = enum_field(it, "aspect", parse_aspect);
                i.choice = enum_field(it, "choice", parse_choice);
                out.push_back(std::move(i));
            } catch (const SchemaError& e) {
                throw SchemaError(where + e.what());
            }
        }
        return UserHistory{std::move(user_id), std::move(out)};
    }
    std::vector<PerMpstInteraction> out;
    for (std::size_t k = 0; k < items.size(); ++k) {
        const auto& it = items[k];
        const auto where = "history[" + std::to_string(k) + "].";
        try {
            PerMpstInteraction i;
            i.synopsis = require_string(it, "synopsis");
            i.review = require_string(it, "review");
            auto score = require_int(it, "score");
            if (score < 1 || score > 10) {
                throw SchemaError("score " + std::to_string(score) + " outside [1,10]");
            }
            i.score = static_cast<int>(score);
            out.push_back(std::move(i));
        } catch (const SchemaError& e) {
            throw SchemaError(where + e.what());
        }
    }
    return UserHistory{std::move(user_id), std::move(out)};
}

Json to_json(const UserHistory& h) {
    return {{"userId", h.user_id},
            {"dataset", std::string(to_string(h.dataset()))},
            {"interactions", interactions_to_json(h)}};
}

UserHistory history_from_json(const Json& j) {
    return history_from_items(require_string(j, "userId"), require(j, "interactions"),
                              enum_field(j, "dataset", parse_dataset));
}

Json to_json(const MethodConfig& c) {
    return {{"method", std::string(to_string(c.method))},
            {"maxIterations", c.max_iterations},
            {"initFrom", std::string(to_string(c.init_from))},
            {"earlyStop", c.early_stop}};
}

MethodConfig method_config_from_json(const Json& j) {
    auto method = enum_field(j, "method", parse_method);
    auto t = static_cast<int>(require_int(j, "maxIterations"));
    try {
        return MethodConfig::make(method, t, enum_field(j, "initFrom", parse_init_from),
                                  require_bool(j, "earlyStop"), std::max(t, kDefaultIterations));
    } catch (const InvalidArgument& e) {
        throw SchemaError(std::string("method config: ") + e.what());
    }
}

Json to_json(const Persona& p) {
    if (p.kind() == PersonaKind::Explicit) {
        return {{"kind", "Explicit"},
                {"epText", *p.ep_text()},
                {"observationCount", p.observation_count()}};
    }
    return {{"kind", "Implicit"}, {"history", to_json(*p.history())}};
}

Persona persona_from_json(const Json& j) {
    auto kind = require_string(j, "kind");
    if (kind == "Explicit") {
        auto count = require_int(j, "observationCount");
        if (count < 0) throw SchemaError("observationCount must be non-negative");
        try {
            return Persona::from_text(require_string(j, "epText"), static_cast<std::size_t>(count));
        } catch (const EmptyPersona& e) {
            throw SchemaError(std::string("persona: ") + e.what());
        }
    }
    if (kind == "Implicit") return Persona::from_history(history_from_json(require(j, "history")));
    throw SchemaError("unknown persona kind '" + kind + "'");
}

Json to_json(const Rubric& r) {
    return {{"kind", std::string(to_string(r.kind()))}, {"criteria", r.criteria()}};
}

Rubric rubric_from_json(const Json& j) {
    auto kind = require_string(j, "kind");
    const auto& criteria = require_array(j, "criteria");
    if (kind == "FixedGeneral") return Rubric::fixed_general();
    if (kind == "None") return Rubric::none();
    if (kind != "UserSpecific") throw SchemaError("unknown rubric kind '" + kind + "'");
    std::vector<std::string> items;
    for (const auto& c : criteria) {
        if (!c.is_string()) throw SchemaError("rubric criteria must be strings");
        items.push_back(c.get<std::string>());
    }
    try {
        return Rubric::user_specific(std::move(items));
    } catch (const Error& e) {
        throw SchemaError(std::string("rubric: ") + e.what());
    }
}

Json to_json(const Feedback& f) {
    Json items = Json::array();
    for (const auto& i : f.items) {
        items.push_back({{"criterion", i.criterion},
                         {"score", i.score},
                         {"explanation", i.explanation},
                         {"suggestion", i.suggestion}});
    }
    return {{"form", f.form == FeedbackForm::Structured ? "Structured" : "Freeform"},
            {"iteration", f.iteration},
            {"items", items},
            {"positives", f.positives},
            {"improvements", f.improvements},
            {"suggestions", f.suggestions},
            {"rawText", f.raw_text}};
}

Feedback feedback_from_json(const Json& j) {
    Feedback f;
    auto form = require_string(j, "form");
    if (form == "Structured") {
        f.form = FeedbackForm::Structured;
    } else if (form == "Freeform") {
        f.form = FeedbackForm::Freeform;
    } else {
        throw SchemaError("unknown feedback form '" + form + "'");
    }
    f.iteration = static_cast<int>(require_int(j, "iteration"));
    for (const auto& i : require_array(j, "items")) {
        auto score = require_int(i, "score");
        if (score < 1 || score > 10) throw SchemaError("feedback score outside [1,10]");
        f.items.push_back({require_string(i, "criterion"), static_cast<int>(score),
                           require_string(i, "explanation"), require_string(i, "suggestion")});
    }
    f.positives = require_string(j, "positives");
    f.improvements = require_string(j, "improvements");
    f.suggestions = require_string(j, "suggestions");
    f.raw_text = require_string(j, "rawText");
    return f;
}

Json to_json(const StoryDraft& d) {
    return {{"text", d.text()}, {"iteration", d.iteration()}, {"tokenCount", d.token_count()}};
}

StoryDraft draft_from_json(const Json& j) {
    auto iteration = require_int(j, "iteration");
    auto tokens = require_int(j, "tokenCount");
    if (iteration < 0 || tokens < 0) throw SchemaError("draft counters must be non-negative");
    return StoryDraft::restore(require_string(j, "text"), static_cast<int>(iteration),
                               static_cast<std::size_t>(tokens));
}

Json to_json(const TranscriptEntry& e) {
    Json messages = Json::array();
    for (const auto& m : e.messages) {
        messages.push_back({{"role", std::string(to_string(m.role))}, {"content", m.content}});
    }
    return {{"promptId", e.prompt_id},
            {"stage", std::string(to_string(e.stage))},
            {"iteration", e.iteration},
            {"attempt", e.attempt},
            {"seed", e.seed},
            {"temperature", e.temperature},
            {"messages", messages},
            {"response", e.response}};
}

TranscriptEntry transcript_entry_from_json(const Json& j) {
    TranscriptEntry e;
    e.prompt_id = require_string(j, "promptId");
    e.stage = enum_field(j, "stage", parse_stage);
    e.iteration = static_cast<int>(require_int(j, "iteration"));
    e.attempt = static_cast<int>(require_int(j, "attempt"));
    e.seed = require_int(j, "seed");
    e.temperature = require_number(j, "temperature");
    for (const auto& m : require_array(j, "messages")) {
        e.messages.push_back({enum_field(m, "role", parse_role), require_string(m, "content")});
    }
    e.response = require_string(j, "response");
    return e;
}

}  // namespace prefine::dataset
