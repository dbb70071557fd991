#include "prefine/dataset/records.hpp"

#include <set>

#include <spdlog/spdlog.h>

#include "prefine/dataset/codec.hpp"
#include "prefine/errors.hpp"
#include "prefine/resources.hpp"
#include "prefine/util/fs.hpp"
#include "prefine/util/text.hpp"

namespace prefine::dataset {

namespace {

const std::set<std::string> kPerDocKeys = {"id", "premise", "premiseId", "userId", "aspect", "history"};
const std::set<std::string> kPerMpstKeys = {"id", "premise", "premiseId", "userId", "history"};

bool mentions(std::string_view haystack, std::string_view needle) {
    return !needle.empty() && haystack.find(needle) != std::string_view::npos;
}

ExperimentRecord parse_record(const Json& j, Dataset dataset, const LoadOptions& options) {
    if (!j.is_object()) throw SchemaError("record must be a JSON object");
    const auto& allowed = dataset == Dataset::PerDOC ? kPerDocKeys : kPerMpstKeys;
    for (const auto& [key, value] : j.items()) {
        if (!allowed.count(key)) {
            throw SchemaError("unexpected field '" + key + "' for a " +
                              std::string(to_string(dataset)) + " record");
        }
    }

    ExperimentRecord r;
    r.id = require_string(j, "id");
    if (util::trim(r.id).empty()) throw SchemaError("record id is empty");
    auto premise_id = j.contains("premiseId") ? require_string(j, "premiseId") : r.id;
    try {
        r.premise = make_premise(premise_id, require_string(j, "premise"), dataset);
    } catch (const InvalidArgument& e) {
        throw SchemaError(e.what());
    }
    r.history = history_from_items(require_string(j, "userId"), require(j, "history"), dataset);

    const auto n = r.history.size();
    if (dataset == Dataset::PerDOC) {
        if (n != options.arity.perdoc_interactions) {
            throw ArityError("record '" + r.id + "' has " + std::to_string(n) +
                             " interactions, expected " +
                             std::to_string(options.arity.perdoc_interactions));
        }
        if (j.contains("aspect")) {
            try {
                r.aspect = parse_aspect(require_string(j, "aspect"));
            } catch (const InvalidArgument& e) {
                throw SchemaError(std::string("aspect: ") + e.what());
            }
        } else {
            r.aspect = r.history.perdoc().front().aspect;
        }
    } else {
        if (options.strict ? n != options.arity.permpst_interactions : n == 0) {
            throw ArityError("record '" + r.id + "' has " + std::to_string(n) + " triples, expected " +
                             (options.strict ? std::to_string(options.arity.permpst_interactions)
                                             : std::string("at least 1")));
        }
    }

    ArityConfig effective = options.arity;
    if (!options.strict && dataset == Dataset::PerMPST) effective.permpst_interactions = n;
    auto violations = validate_history(r.history, dataset, effective);
    if (!violations.empty()) throw SchemaError(violations.front());

    const auto needle = util::trim(r.premise.text);
    if (dataset == Dataset::PerDOC) {
        for (const auto& i : r.history.perdoc()) {
            if (mentions(i.plot_a, needle) || mentions(i.plot_b, needle)) {
                throw SchemaError("premise appears inside the user's history");
            }
        }
    } else {
        for (const auto& i : r.history.permpst()) {
            if (mentions(i.synopsis, needle)) throw SchemaError("premise appears inside the user's history");
        }
    }
    return r;
}

}  // namespace

std::vector<ExperimentRecord> parse_records(std::string_view text, Dataset dataset,
                                            const LoadOptions& options) {
    std::vector<ExperimentRecord> out;
    std::set<std::string> ids;
    auto lines = util::split_lines(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (util::trim(lines[i]).empty()) continue;
        const auto line_no = i + 1;
        auto j = Json::parse(lines[i], nullptr, false);
        if (j.is_discarded()) throw SchemaError(line_no, "invalid JSON");
        try {
            auto record = parse_record(j, dataset, options);
            if (!ids.insert(record.id).second) {
                throw SchemaError("duplicate record id '" + record.id + "'");
            }
            out.push_back(std::move(record));
        } catch (const SchemaError& e) {
            throw SchemaError(line_no, e.what());
        } catch (const ArityError& e) {
            throw ArityError("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

std::vector<ExperimentRecord> load_records(const std::filesystem::path& path, Dataset dataset,
                                           const LoadOptions& options) {
    if (!std::filesystem::is_regular_file(path)) {
        throw InvalidArgument("record file " + path.string() + " does not exist");
    }
    auto records = parse_records(util::read_file(path), dataset, options);
    if (records.empty()) {
        spdlog::warn("{}: no records", path.string());
    } else {
        spdlog::info("{}: loaded {} {} records", path.string(), records.size(), to_string(dataset));
    }
    return records;
}

std::vector<ExperimentRecord> load_perdoc(const std::filesystem::path& path, const LoadOptions& options) {
    return load_records(path, Dataset::PerDOC, options);
}

std::vector<ExperimentRecord> load_permpst(const std::filesystem::path& path,
                                           const LoadOptions& options) {
    return load_records(path, Dataset::PerMPST, options);
}

std::optional<Dataset> sniff_dataset(std::string_view text) {
    for (const auto& line : util::split_lines(text)) {
        if (util::trim(line).empty()) continue;
        auto j = Json::parse(line, nullptr, false);
        if (!j.is_object() || !j.contains("history") || !j["history"].is_array() ||
            j["history"].empty() || !j["history"][0].is_object()) {
            return std::nullopt;
        }
        const auto& first = j["history"][0];
        if (first.contains("plotA")) return Dataset::PerDOC;
        if (first.contains("synopsis")) return Dataset::PerMPST;
        return std::nullopt;
    }
    return std::nullopt;
}

std::string to_jsonl(const ExperimentRecord& r) {
    Json j = {{"id", r.id},
              {"premise", r.premise.text},
              {"userId", r.history.user_id},
              {"history", interactions_to_json(r.history)}};
    if (r.premise.id != r.id) j["premiseId"] = r.premise.id;
    if (r.aspect) j["aspect"] = std::string(to_string(*r.aspect));
    return j.dump();
}

std::vector<std::string> sample_names() {
    std::vector<std::string> out;
    for (const auto& s : resources::samples()) out.emplace_back(s.name);
    return out;
}

std::string_view sample_text(std::string_view name) {
    for (const auto& s : resources::samples()) {
        if (s.name == name) return s.content;
    }
    throw InvalidArgument("no bundled sample named '" + std::string(name) + "'");
}

}  // namespace prefine::dataset
