#include "prefine/dataset/trace_io.hpp"

#include "prefine/dataset/codec.hpp"
#include "prefine/errors.hpp"
#include "prefine/util/fs.hpp"

namespace prefine::dataset {

namespace {

Json event_to_json(Stage stage, int iteration, const std::string& code, const std::string& message) {
    return {{"stage", std::string(to_string(stage))},
            {"iteration", iteration},
            {"code", code},
            {"message", message}};
}

template <typename Event>
Event event_from_json(const Json& j) {
    Event e;
    try {
        e.stage = parse_stage(require_string(j, "stage"));
    } catch (const InvalidArgument& ex) {
        throw SchemaError(ex.what());
    }
    e.iteration = static_cast<int>(require_int(j, "iteration"));
    e.code = require_string(j, "code");
    e.message = require_string(j, "message");
    return e;
}

}  // namespace

Json trace_to_json(const RefinementTrace& t) {
    Json j;
    j["schemaVersion"] = kTraceSchemaVersion;
    j["recordId"] = t.record_id;
    j["premise"] = to_json(t.premise);
    j["history"] = to_json(t.history);
    j["aspect"] = t.aspect ? Json(std::string(to_string(*t.aspect))) : Json(nullptr);
    j["config"] = to_json(t.config);
    j["backend"] = t.backend;
    j["seed"] = t.seed;
    j["temperature"] = t.temperature;
    j["persona"] = t.persona ? to_json(*t.persona) : Json(nullptr);
    j["rubric"] = t.rubric ? to_json(*t.rubric) : Json(nullptr);
    j["drafts"] = Json::array();
    for (const auto& d : t.drafts) j["drafts"].push_back(to_json(d));
    j["feedbacks"] = Json::array();
    for (const auto& f : t.feedbacks) j["feedbacks"].push_back(to_json(f));
    j["transcript"] = Json::array();
    for (const auto& e : t.transcript) j["transcript"].push_back(to_json(e));
    j["warnings"] = Json::array();
    for (const auto& w : t.warnings) {
        j["warnings"].push_back(event_to_json(w.stage, w.iteration, w.code, w.message));
    }
    j["failure"] = t.failure ? event_to_json(t.failure->stage, t.failure->iteration, t.failure->code,
                                             t.failure->message)
                             : Json(nullptr);
    j["stoppedEarly"] = t.stopped_early;
    return j;
}

RefinementTrace trace_from_json(const Json& j) {
    if (!j.is_object()) throw SchemaError("trace must be a JSON object");
    auto version = j.find("schemaVersion");
    if (version == j.end() || !version->is_number_integer()) {
        throw VersionMismatch("trace has no integer schemaVersion");
    }
    if (version->get<long long>() != kTraceSchemaVersion) {
        throw VersionMismatch("trace schemaVersion " + std::to_string(version->get<long long>()) +
                              " is not the supported version " + std::to_string(kTraceSchemaVersion));
    }
    auto array = [&](const char* key) -> const Json& {
        const auto& v = require(j, key);
        if (!v.is_array()) throw SchemaError(std::string("field '") + key + "' must be an array");
        return v;
    };

    RefinementTrace t;
    t.record_id = require_string(j, "recordId");
    t.premise = premise_from_json(require(j, "premise"));
    t.history = history_from_json(require(j, "history"));
    if (const auto& a = require(j, "aspect"); !a.is_null()) {
        if (!a.is_string()) throw SchemaError("aspect must be a string or null");
        try {
            t.aspect = parse_aspect(a.get<std::string>());
        } catch (const InvalidArgument& e) {
            throw SchemaError(e.what());
        }
    }
    t.config = method_config_from_json(require(j, "config"));
    t.backend = require_string(j, "backend");
    t.seed = require_int(j, "seed");
    const auto& temp = require(j, "temperature");
    if (!temp.is_number()) throw SchemaError("temperature must be a number");
    t.temperature = temp.get<double>();
    if (const auto& p = require(j, "persona"); !p.is_null()) t.persona = persona_from_json(p);
    if (const auto& r = require(j, "rubric"); !r.is_null()) t.rubric = rubric_from_json(r);
    for (const auto& d : array("drafts")) t.drafts.push_back(draft_from_json(d));
    for (const auto& f : array("feedbacks")) t.feedbacks.push_back(feedback_from_json(f));
    for (const auto& e : array("transcript")) t.transcript.push_back(transcript_entry_from_json(e));
    for (const auto& w : array("warnings")) t.warnings.push_back(event_from_json<TraceWarning>(w));
    if (const auto& f = require(j, "failure"); !f.is_null()) {
        t.failure = event_from_json<TraceFailure>(f);
    }
    const auto& stopped = require(j, "stoppedEarly");
    if (!stopped.is_boolean()) throw SchemaError("stoppedEarly must be a boolean");
    t.stopped_early = stopped.get<bool>();
    t.check_invariants();
    return t;
}

void save_trace(const RefinementTrace& trace, const std::filesystem::path& path) {
    trace.check_invariants();
    util::write_file_atomic(path, trace_to_json(trace).dump(2) + "\n");
}

RefinementTrace load_trace(const std::filesystem::path& path) {
    auto j = Json::parse(util::read_file(path), nullptr, false);
    if (j.is_discarded()) throw SchemaError("trace file " + path.string() + " is not valid JSON");
    return trace_from_json(j);
}

}  // namespace prefine::dataset
