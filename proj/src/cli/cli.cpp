#include "prefine/cli/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "prefine/dataset/records.hpp"
#include "prefine/errors.hpp"
#include "prefine/gateway/setup.hpp"
#include "prefine/judge/evaluation.hpp"
#include "prefine/pipeline/experiment.hpp"
#include "prefine/stats/reports.hpp"
#include "prefine/stats/stats.hpp"
#include "prefine/util/fs.hpp"
#include "prefine/util/text.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace prefine::cli {

namespace {

// Bad invocation; maps to exit status 2.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

void error_line(std::ostream& err, const std::string& code, const std::string& message) {
    err << json{{"error", {{"code", code}, {"message", message}}}}.dump() << '\n';
}

// Library argument checks raised while resolving flags are usage errors.
template <typename Fn>
auto resolve(Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const Error& e) {
        throw UsageError(e.what());
    }
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream in(text);
    for (std::string item; std::getline(in, item, ',');) {
        auto t = std::string(util::trim(item));
        if (!t.empty()) out.push_back(t);
    }
    return out;
}

std::size_t default_jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

std::string read_input(const fs::path& path) {
    if (!fs::exists(path)) throw MissingInput("input not found: " + path.string());
    return util::read_file(path);
}

template <typename T, typename Parse>
std::vector<T> read_jsonl(const fs::path& path, Parse parse) {
    std::istringstream in(read_input(path));
    std::vector<T> out;
    std::size_t line_no = 0;
    for (std::string line; std::getline(in, line);) {
        ++line_no;
        if (util::trim(line).empty()) continue;
        auto j = json::parse(line, nullptr, false);
        if (j.is_discarded()) throw SchemaError(line_no, "not valid JSON");
        try {
            out.push_back(parse(j));
        } catch (const json::exception& e) {
            throw SchemaError(line_no, e.what());
        } catch (const SchemaError& e) {
            throw SchemaError(line_no, e.what());
        }
    }
    return out;
}

// Appends the items whose key is not yet in `path`, so re-running a judge
// pass neither rewrites nor duplicates earlier results.
template <typename T, typename Key, typename Parse, typename Encode>
std::size_t append_new(const fs::path& path, const std::vector<T>& items, Key key, Parse parse, Encode encode) {
    std::set<std::string> seen;
    if (fs::exists(path)) {
        for (const auto& old : read_jsonl<T>(path, parse)) seen.insert(key(old));
    }
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::app | std::ios::binary);
    std::size_t added = 0;
    for (const auto& item : items) {
        if (!seen.insert(key(item)).second) continue;
        out << encode(item).dump() << '\n';
        ++added;
    }
    if (!out) throw Error("IoError", "cannot append to " + path.string());
    return added;
}

std::string verdict_key(const judge::VerdictRecord& v) {
    return v.row + '\x1f' + v.col + '\x1f' + (v.aspect ? std::string(to_string(*v.aspect)) : "") + '\x1f' +
           v.record_id + '\x1f' + std::to_string(v.iteration);
}

std::vector<judge::ScoreRecord> read_scores(const fs::path& path) {
    return read_jsonl<judge::ScoreRecord>(path, judge::score_from_json);
}

std::vector<judge::QualityRecord> read_quality(const fs::path& path) {
    return read_jsonl<judge::QualityRecord>(path, judge::quality_from_json);
}

void write_report(const stats::Report& report, const std::string& name, const std::string& out_dir) {
    if (out_dir.empty()) return;
    util::write_file_atomic(fs::path(out_dir) / (name + ".csv"), report.csv);
    util::write_file_atomic(fs::path(out_dir) / (name + ".txt"), report.text);
}

struct BackendFlags {
    std::string kind = "mock";
    std::string url;
    std::string model;
    std::string cache;

    void add(CLI::App* app) {
        app->add_option("--backend", kind, "mock or http")->check(CLI::IsMember({"mock", "http"}));
        app->add_option("--url", url, "OpenAI-compatible base URL (http backend)");
        app->add_option("--model", model, "model name (http backend)");
        app->add_option("--cache", cache, "response cache directory");
    }

    std::unique_ptr<gateway::Gateway> make(std::ptrdiff_t concurrency) const {
        gateway::BackendSetup setup;
        setup.kind = kind;
        setup.url = url;
        setup.model = model;
        if (!cache.empty()) setup.cache = fs::path(cache);
        setup.concurrency = concurrency;
        return resolve([&] { return gateway::make_gateway(setup); });
    }
};

// --- ingest ---------------------------------------------------------------

struct IngestArgs {
    std::string dataset;
    std::string input;
    std::string sample;
    std::string out;
    bool lenient = false;
};

int run_ingest(const IngestArgs& a, std::ostream& out) {
    if (a.input.empty() == a.sample.empty()) throw UsageError("give exactly one of --input or --sample");
    std::string text = a.input.empty() ? std::string(resolve([&] { return dataset::sample_text(a.sample); }))
                                       : read_input(a.input);
    std::optional<Dataset> ds;
    if (!a.dataset.empty()) ds = resolve([&] { return parse_dataset(a.dataset); });
    if (!ds) ds = dataset::sniff_dataset(text);
    if (!ds) throw UsageError("cannot tell the dataset from the input; pass --dataset");
    dataset::LoadOptions options;
    options.strict = !a.lenient;
    auto records = dataset::parse_records(text, *ds, options);
    std::string canonical;
    for (const auto& r : records) canonical += dataset::to_jsonl(r) + "\n";
    auto path = fs::path(a.out) / "records.jsonl";
    util::write_file_atomic(path, canonical);
    out << json{{"dataset", std::string(to_string(*ds))}, {"records", records.size()}, {"out", path.string()}}.dump()
        << '\n';
    return kExitOk;
}

// --- run ------------------------------------------------------------------

struct RunArgs {
    std::string config;
    std::string methods = "all";
    std::string dataset = "permpst";
    std::string input;
    std::size_t records = 0;  // 0 means all
    int iterations = kDefaultIterations;
    std::string init_from = "ZP";
    bool early_stop = false;
    long long seed = 42;
    std::size_t jobs = default_jobs();
    BackendFlags backend;
    std::string out;
};

// Values from --config fill only the flags not given on the command line.
void apply_run_config(RunArgs& a, CLI::App* app) {
    if (a.config.empty()) return;
    auto j = json::parse(read_input(a.config), nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw UsageError("config " + a.config + " is not a JSON object");
    auto take = [&](const char* key, const char* flag, auto& target) {
        if (j.contains(key) && app->count(flag) == 0) {
            try {
                j.at(key).get_to(target);
            } catch (const json::exception&) {
                throw UsageError(std::string("config key '") + key + "' has the wrong type");
            }
        }
    };
    static const std::set<std::string> known = {"methods", "dataset", "input",   "records", "iterations", "initFrom",
                                                "earlyStop", "seed",  "jobs",    "backend", "url",        "model",
                                                "cache",   "out"};
    for (const auto& [key, value] : j.items()) {
        if (!known.count(key)) throw UsageError("unknown config key '" + key + "'");
    }
    if (j.contains("methods") && j.at("methods").is_array() && app->count("--methods") == 0) {
        std::string joined;
        for (const auto& m : j.at("methods")) joined += (joined.empty() ? "" : ",") + m.get<std::string>();
        a.methods = joined;
    } else {
        take("methods", "--methods", a.methods);
    }
    take("dataset", "--dataset", a.dataset);
    take("input", "--input", a.input);
    take("records", "--records", a.records);
    take("iterations", "--iterations", a.iterations);
    take("initFrom", "--init-from", a.init_from);
    take("earlyStop", "--early-stop", a.early_stop);
    take("seed", "--seed", a.seed);
    take("jobs", "--jobs", a.jobs);
    take("backend", "--backend", a.backend.kind);
    take("url", "--url", a.backend.url);
    take("model", "--model", a.backend.model);
    take("cache", "--cache", a.backend.cache);
    take("out", "--out", a.out);
}

std::vector<MethodConfig> resolve_methods(const RunArgs& a) {
    std::vector<Method> chosen;
    if (util::iequals(util::trim(a.methods), "all")) {
        chosen.assign(kAllMethods.begin(), kAllMethods.end());
    } else {
        for (const auto& name : split_list(a.methods)) chosen.push_back(resolve([&] { return parse_method(name); }));
    }
    if (chosen.empty()) throw UsageError("no methods given (valid: " + valid_method_names() + ")");
    const auto init = resolve([&] { return parse_init_from(a.init_from); });
    // --init-from and --iterations apply to the refining methods in the list.
    const bool any_refiner =
        std::any_of(chosen.begin(), chosen.end(), [](Method m) { return method_capabilities(m).iterates; });
    if (init != InitFrom::ZP && !any_refiner) throw UsageError("--init-from applies to refining methods only");
    std::vector<MethodConfig> out;
    for (auto m : chosen) {
        const bool iterates = method_capabilities(m).iterates;
        out.push_back(resolve([&] {
            return iterates ? MethodConfig::make(m, a.iterations, init, a.early_stop) : MethodConfig::make(m);
        }));
    }
    return out;
}

int run_run(RunArgs a, CLI::App* app, std::ostream& out) {
    apply_run_config(a, app);
    if (a.out.empty()) throw UsageError("--out is required");
    if (a.jobs == 0) throw UsageError("--jobs must be at least 1");
    auto methods = resolve_methods(a);
    const auto ds = resolve([&] { return parse_dataset(a.dataset); });
    if (a.backend.cache.empty()) a.backend.cache = (fs::path(a.out) / "cache").string();

    auto records = a.input.empty()
                       ? dataset::parse_records(dataset::sample_text(ds == Dataset::PerDOC ? "sample_perdoc.jsonl"
                                                                                           : "sample_permpst.jsonl"),
                                                ds)
                       : dataset::parse_records(read_input(a.input), ds);
    if (a.records && records.size() > a.records) records.resize(a.records);

    auto gw = a.backend.make(static_cast<std::ptrdiff_t>(a.jobs));
    pipeline::RunConfig base;
    base.dataset = ds;
    base.seed = a.seed;
    base.backend = a.backend.kind;
    pipeline::ExperimentOptions options;
    options.out_dir = a.out;
    options.threads = a.jobs;
    pipeline::Pipeline pipe(*gw);
    auto manifest = pipeline::run_experiment(pipe, records, methods, base, options);
    out << json{{"out", a.out},
                {"cells", manifest.cells.size()},
                {"ok", manifest.count(pipeline::CellStatus::Ok)},
                {"failed", manifest.count(pipeline::CellStatus::Failed)},
                {"backendCalls", gw->backend_calls()},
                {"liveCalls", gw->live_calls()},
                {"cacheHits", gw->cache_hits()}}
               .dump()
        << '\n';
    return kExitOk;
}

// --- judge ----------------------------------------------------------------

struct JudgeArgs {
    std::string traces;
    std::string out;
    bool pairwise = false;
    bool scores = false;
    bool quality = false;
    std::string looptrend;
    std::string baseline;
    std::string pairs;
    std::string aspects = "all";
    long long seed = 42;
    std::size_t jobs = default_jobs();
    BackendFlags backend;
};

int run_judge(JudgeArgs a, std::ostream& out) {
    if (!a.pairwise && !a.scores && !a.quality && a.looptrend.empty()) {
        throw UsageError("choose at least one of --pairwise, --scores, --quality, --looptrend");
    }
    if (!a.looptrend.empty() && a.baseline.empty()) throw UsageError("--looptrend needs --baseline");
    if (a.jobs == 0) throw UsageError("--jobs must be at least 1");
    judge::PairwiseOptions options;
    options.aspects = a.aspects == "record" ? judge::AspectMode::RecordOnly : judge::AspectMode::All;
    options.threads = a.jobs;
    for (const auto& pair : split_list(a.pairs)) {
        auto colon = pair.find(':');
        if (colon == std::string::npos) throw UsageError("--pairs expects ROW:COL items, got '" + pair + "'");
        options.pairs.emplace_back(pair.substr(0, colon), pair.substr(colon + 1));
    }
    if (a.out.empty()) a.out = (fs::path(a.traces) / "judgements").string();
    if (a.backend.cache.empty()) a.backend.cache = (fs::path(a.out) / "cache").string();

    auto run = judge::load_run(a.traces);
    auto gw = a.backend.make(static_cast<std::ptrdiff_t>(a.jobs));
    judge::JudgeConfig config;
    config.backend = a.backend.kind;
    config.seed = a.seed;
    judge::Judge j(*gw, config);

    const fs::path dir = a.out;
    json summary = {{"out", a.out}};
    auto store_verdicts = [&](const std::vector<judge::VerdictRecord>& v, const char* file) {
        return append_new(dir / file, v, verdict_key, judge::verdict_from_json,
                          [](const judge::VerdictRecord& r) { return judge::to_json(r); });
    };
    if (a.pairwise) {
        auto v = judge::judge_pairwise_run(j, run, options);
        summary["verdicts"] = v.size();
        summary["verdictsAdded"] = store_verdicts(v, "verdicts.jsonl");
    }
    if (!a.looptrend.empty()) {
        auto v = judge::judge_loop_trend(j, run, a.looptrend, a.baseline, options);
        summary["trendVerdicts"] = v.size();
        summary["trendVerdictsAdded"] = store_verdicts(v, "looptrend.jsonl");
    }
    if (a.scores) {
        auto s = judge::judge_scores_run(j, run, a.jobs);
        summary["scores"] = s.size();
        summary["scoresAdded"] = append_new(
            dir / "scores.jsonl", s, [](const judge::ScoreRecord& r) { return r.method + '\x1f' + r.record_id; },
            judge::score_from_json, [](const judge::ScoreRecord& r) { return judge::to_json(r); });
    }
    if (a.quality) {
        auto q = judge::judge_quality_run(j, run, a.jobs);
        summary["quality"] = q.size();
        summary["qualityAdded"] = append_new(
            dir / "quality.jsonl", q, [](const judge::QualityRecord& r) { return r.method + '\x1f' + r.record_id; },
            judge::quality_from_json, [](const judge::QualityRecord& r) { return judge::to_json(r); });
    }
    summary["backendCalls"] = gw->backend_calls();
    summary["cacheHits"] = gw->cache_hits();
    out << summary.dump() << '\n';
    return kExitOk;
}

// --- stats ----------------------------------------------------------------

struct StatsArgs {
    std::string scores;
    bool wilcoxon = false;
    std::string vs = "EPER";
    bool length_bias = false;
    std::string verdicts;
    std::string traces;
    long max_delta = 10;
    std::string out;
};

int run_stats(const StatsArgs& a, std::ostream& out) {
    if (a.length_bias) {
        if (a.verdicts.empty() || a.traces.empty()) throw UsageError("--length-bias needs --verdicts and --traces");
        if (a.max_delta < 0) throw UsageError("--max-delta must be non-negative");
        auto verdicts = read_jsonl<judge::VerdictRecord>(a.verdicts, judge::verdict_from_json);
        auto run = judge::load_run(a.traces);
        auto tokens = [&](const std::string& method, const std::string& record) -> long {
            const auto* t = run.find(method, record);
            if (!t) throw MissingInput("no trace for " + method + " / " + record);
            return static_cast<long>(t->final_draft().token_count());
        };
        auto report = stats::length_bias_report(stats::length_bias_rows(verdicts, tokens, a.max_delta), a.max_delta);
        write_report(report, "lengthbias", a.out);
        out << report.text;
        return kExitOk;
    }
    if (a.scores.empty()) throw UsageError("give --scores FILE (or --length-bias)");
    auto scores = read_scores(a.scores);
    std::vector<std::string> order;
    std::map<std::string, std::map<std::string, double>> by_method;
    for (const auto& s : scores) {
        if (!by_method.count(s.method)) order.push_back(s.method);
        by_method[s.method][s.record_id] = s.score;
    }
    if (a.wilcoxon && !by_method.count(a.vs)) throw MissingInput("no scores for reference method " + a.vs);
    json methods = json::array();
    for (const auto& m : order) {
        std::vector<double> values;
        for (const auto& [id, v] : by_method.at(m)) values.push_back(v);
        auto d = stats::describe(values);
        json row = {{"method", m}, {"n", d.n},     {"mean", d.mean},    {"std", d.std},
                    {"min", d.min}, {"max", d.max}, {"median", d.median}};
        if (a.wilcoxon && m != a.vs) {
            std::vector<double> x, y;
            for (const auto& [id, v] : by_method.at(m)) {
                auto it = by_method.at(a.vs).find(id);
                if (it == by_method.at(a.vs).end()) continue;
                x.push_back(v);
                y.push_back(it->second);
            }
            if (x.empty()) throw MissingInput("no records shared by " + m + " and " + a.vs);
            auto w = stats::wilcoxon_signed_rank(x, y);
            row["wilcoxon"] = {{"vs", a.vs},         {"w", w.w},     {"wPlus", w.w_plus},
                               {"p", w.p},           {"n", w.n_effective}, {"exact", w.exact},
                               {"allZero", w.degenerate_all_zero}};
        }
        methods.push_back(std::move(row));
    }
    json result = {{"methods", methods}};
    if (a.wilcoxon) result["reference"] = a.vs;
    if (!a.out.empty()) util::write_file_atomic(fs::path(a.out) / "stats.json", result.dump(2) + "\n");
    out << result.dump() << '\n';
    return kExitOk;
}

// --- report ---------------------------------------------------------------

struct ReportArgs {
    std::string table;
    std::string input;
    std::string out;
    std::string vs = "EPER";
    std::string methods;
    bool color = false;
};

int run_report(const ReportArgs& a, std::ostream& out) {
    if (a.input.empty()) throw MissingInput("report needs --input");
    const auto order = split_list(a.methods);
    stats::Report report;
    if (a.table == "winrate") {
        auto verdicts = read_jsonl<judge::VerdictRecord>(a.input, judge::verdict_from_json);
        std::erase_if(verdicts, [](const judge::VerdictRecord& v) { return v.iteration != -1; });
        if (verdicts.empty()) throw MissingInput("no final-draft verdicts in " + a.input);
        auto matrix = judge::build_winrate_matrix(verdicts, order);
        report = {judge::winrate_csv(matrix), judge::winrate_table(matrix)};
        write_report(report, a.table, a.out);
        out << (a.color ? judge::winrate_table(matrix, true) : report.text);
        return kExitOk;
    }
    if (a.table == "looptrend") {
        auto verdicts = read_jsonl<judge::VerdictRecord>(a.input, judge::verdict_from_json);
        if (verdicts.empty()) throw MissingInput("no verdicts in " + a.input);
        report = stats::looptrend_report(judge::loop_trend(verdicts));
    } else if (a.table == "scores") {
        report = stats::scores_report(read_scores(a.input), order, a.vs);
    } else if (a.table == "quality") {
        report = stats::quality_report(read_quality(a.input), order, a.vs);
    } else {
        auto doc = json::parse(read_input(a.input), nullptr, false);
        if (doc.is_discarded()) throw SchemaError("export " + a.input + " is not valid JSON");
        report = stats::humaneval_report(doc, a.vs);
    }
    write_report(report, a.table, a.out);
    out << report.text;
    return kExitOk;
}

// --- cache ----------------------------------------------------------------

struct CacheArgs {
    std::string action;
    std::string dir;
};

int run_cache(const CacheArgs& a, std::ostream& out) {
    if (!fs::is_directory(a.dir)) throw MissingInput("no cache at " + a.dir);
    gateway::ResponseCache cache(a.dir);
    if (a.action == "stats") {
        auto s = cache.stats();
        out << json{{"entries", s.entries}, {"bytes", s.bytes}}.dump() << '\n';
    } else {
        out << json{{"removed", cache.clear()}}.dump() << '\n';
    }
    return kExitOk;
}

}  // namespace

int execute(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"PREFINE persona and rubric guided story refinement", "prefine"};
    app.require_subcommand(1);

    IngestArgs ingest;
    auto* ingest_cmd = app.add_subcommand("ingest", "validate a record file and write it in canonical form");
    ingest_cmd->add_option("--dataset", ingest.dataset, "perdoc or permpst (sniffed when omitted)");
    ingest_cmd->add_option("--input", ingest.input, "record file (JSONL)");
    ingest_cmd->add_option("--sample", ingest.sample, "bundled sample name instead of --input");
    ingest_cmd->add_option("--out", ingest.out, "output directory")->required();
    ingest_cmd->add_flag("--lenient", ingest.lenient, "accept PerMPST histories of any non-empty length");

    RunArgs run;
    auto* run_cmd = app.add_subcommand("run", "run methods over records and write traces");
    run_cmd->add_option("--config", run.config, "JSON file with defaults for these flags");
    run_cmd->add_option("--methods", run.methods, "comma-separated methods, or 'all'");
    run_cmd->add_option("--dataset", run.dataset, "perdoc or permpst");
    run_cmd->add_option("--input", run.input, "record file (default: bundled samples)");
    run_cmd->add_option("--records", run.records, "use only the first N records");
    run_cmd->add_option("--iterations", run.iterations, "refinement iterations T for refining methods");
    run_cmd->add_option("--init-from", run.init_from, "initial draft of refining methods: ZP or PEP");
    run_cmd->add_flag("--early-stop", run.early_stop, "stop once every criterion scores 10");
    run_cmd->add_option("--seed", run.seed, "base seed");
    run_cmd->add_option("--jobs", run.jobs, "parallel cells (default: processor count)");
    run.backend.add(run_cmd);
    run_cmd->add_option("--out", run.out, "run directory");

    JudgeArgs judge_args;
    auto* judge_cmd = app.add_subcommand("judge", "judge the traces of a finished run");
    judge_cmd->add_option("--traces", judge_args.traces, "run directory")->required();
    judge_cmd->add_option("--out", judge_args.out, "output directory (default: <traces>/judgements)");
    judge_cmd->add_flag("--pairwise", judge_args.pairwise, "pairwise comparison of final drafts");
    judge_cmd->add_flag("--scores", judge_args.scores, "reviewer scores (PerMPST)");
    judge_cmd->add_flag("--quality", judge_args.quality, "general quality criteria");
    judge_cmd->add_option("--looptrend", judge_args.looptrend, "method whose drafts are judged per iteration");
    judge_cmd->add_option("--baseline", judge_args.baseline, "opponent for --looptrend");
    judge_cmd->add_option("--pairs", judge_args.pairs, "ROW:COL,... (default: every pair)");
    judge_cmd->add_option("--aspects", judge_args.aspects, "PerDOC aspects: all or record")
        ->check(CLI::IsMember({"all", "record"}));
    judge_cmd->add_option("--seed", judge_args.seed, "judge seed");
    judge_cmd->add_option("--jobs", judge_args.jobs, "parallel judge calls");
    judge_args.backend.add(judge_cmd);

    StatsArgs stats_args;
    auto* stats_cmd = app.add_subcommand("stats", "descriptive statistics and significance tests");
    stats_cmd->add_option("--scores", stats_args.scores, "scores.jsonl from judge --scores");
    stats_cmd->add_flag("--wilcoxon", stats_args.wilcoxon, "paired Wilcoxon signed-rank test per method");
    stats_cmd->add_option("--vs", stats_args.vs, "reference method");
    stats_cmd->add_flag("--length-bias", stats_args.length_bias, "win rates on length-matched pairs");
    stats_cmd->add_option("--verdicts", stats_args.verdicts, "verdicts.jsonl");
    stats_cmd->add_option("--traces", stats_args.traces, "run directory the verdicts came from");
    stats_cmd->add_option("--max-delta", stats_args.max_delta, "largest token gap kept");
    stats_cmd->add_option("--out", stats_args.out, "output directory");

    ReportArgs report;
    auto* report_cmd = app.add_subcommand("report", "render a result table as CSV and text");
    report_cmd->add_option("--table", report.table, "table kind")
        ->required()
        ->check(CLI::IsMember({"winrate", "scores", "humaneval", "quality", "looptrend"}));
    report_cmd->add_option("--input", report.input, "verdicts, scores, quality or export file");
    report_cmd->add_option("--out", report.out, "directory for <table>.csv and <table>.txt");
    report_cmd->add_option("--vs", report.vs, "reference method for p-values");
    report_cmd->add_option("--methods", report.methods, "row order, comma-separated");
    report_cmd->add_flag("--color", report.color, "colour win-rate cells");

    CacheArgs cache;
    auto* cache_cmd = app.add_subcommand("cache", "inspect or clear a response cache");
    cache_cmd->add_option("action", cache.action, "stats or clear")
        ->required()
        ->check(CLI::IsMember({"stats", "clear"}));
    cache_cmd->add_option("--cache", cache.dir, "cache directory")->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        std::string message = e.what();
        if (run_cmd->parsed() && message.find("--methods") != std::string::npos) {
            message += " (valid methods: " + valid_method_names() + ")";
        }
        error_line(err, "UsageError", message);
        return kExitUsage;
    }

    try {
        if (ingest_cmd->parsed()) return run_ingest(ingest, out);
        if (run_cmd->parsed()) return run_run(run, run_cmd, out);
        if (judge_cmd->parsed()) return run_judge(judge_args, out);
        if (stats_cmd->parsed()) return run_stats(stats_args, out);
        if (report_cmd->parsed()) return run_report(report, out);
        return run_cache(cache, out);
    } catch (const UsageError& e) {
        error_line(err, "UsageError", e.what());
        return kExitUsage;
    } catch (const Error& e) {
        error_line(err, e.code(), e.what());
        return kExitRuntime;
    } catch (const std::exception& e) {
        error_line(err, "InternalError", e.what());
        return kExitRuntime;
    }
}

}  // namespace prefine::cli
