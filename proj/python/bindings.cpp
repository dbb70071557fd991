#include <mutex>
#include <sstream>

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "prefine/cli/cli.hpp"
#include "prefine/core/tokenizer.hpp"
#include "prefine/dataset/records.hpp"
#include "prefine/dataset/trace_io.hpp"
#include "prefine/errors.hpp"
#include "prefine/gateway/setup.hpp"
#include "prefine/judge/verdicts.hpp"
#include "prefine/pipeline/pipeline.hpp"
#include "prefine/stats/stats.hpp"

namespace py = pybind11;
using namespace prefine;

namespace {

std::vector<std::string>& python_tokenizers() {
    static std::vector<std::string> names;
    return names;
}

std::mutex& python_tokenizers_mutex() {
    static std::mutex m;
    return m;
}

stats::WilcoxonMethod wilcoxon_method(const std::string& name) {
    if (name == "auto") return stats::WilcoxonMethod::Auto;
    if (name == "exact") return stats::WilcoxonMethod::Exact;
    if (name == "normal") return stats::WilcoxonMethod::Normal;
    throw InvalidArgument("method must be auto, exact or normal");
}

py::dict wilcoxon_dict(const stats::WilcoxonResult& r) {
    py::dict d;
    d["w"] = r.w;
    d["w_plus"] = r.w_plus;
    d["p"] = r.p;
    d["n_effective"] = r.n_effective;
    d["exact"] = r.exact;
    d["all_zero"] = r.degenerate_all_zero;
    return d;
}

// Runs one method on one record and returns the trace as JSON text.
std::string run_record(const std::string& record_line, const std::string& dataset, const std::string& method,
                       std::optional<int> iterations, const std::string& init_from, bool early_stop, long long seed,
                       const std::string& backend, const std::string& url, const std::string& model,
                       std::optional<std::string> cache) {
    const auto ds = parse_dataset(dataset);
    auto records = dataset::parse_records(record_line, ds);
    if (records.size() != 1) throw InvalidArgument("expected exactly one record");
    gateway::BackendSetup setup;
    setup.kind = backend;
    setup.url = url;
    setup.model = model;
    if (cache) setup.cache = *cache;
    auto gw = gateway::make_gateway(setup);
    pipeline::RunConfig config;
    config.method = MethodConfig::make(parse_method(method), iterations, parse_init_from(init_from), early_stop);
    config.dataset = ds;
    config.seed = seed;
    config.backend = backend;
    pipeline::Pipeline pipe(*gw);
    return dataset::trace_to_json(pipe.run_method(records[0], config)).dump();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Native core of the prefine package";

    py::register_exception<Error>(m, "PrefineError", PyExc_RuntimeError);
    // Attaches the error class name as `code`.
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            auto cls = py::module_::import("prefine._core").attr("PrefineError");
            py::object inst = cls(e.what());
            inst.attr("code") = e.code();
            py::set_error(cls, inst);
        }
    });

    m.def("method_names", [] {
        std::vector<std::string> names;
        for (auto method : kAllMethods) names.emplace_back(to_string(method));
        return names;
    });
    m.def("capabilities", [](const std::string& method) {
        auto c = method_capabilities(parse_method(method));
        py::dict d;
        d["explicit_persona"] = c.uses_explicit_persona;
        d["explicit_rubric"] = c.uses_explicit_rubric;
        d["iterates"] = c.iterates;
        return d;
    });

    m.def("approx_token_count", [](const std::string& text) { return approx_token_count(text); });
    m.def("count_tokens", [](const std::string& text, const std::string& tokenizer) { return count_tokens(text, tokenizer); },
          py::arg("text"), py::arg("tokenizer") = std::string(kApproxTokenizer));
    m.def("register_tokenizer", [](const std::string& name, std::function<std::size_t(std::string)> fn) {
        register_tokenizer(name, [fn](std::string_view text) { return fn(std::string(text)); });
        std::lock_guard lock(python_tokenizers_mutex());
        python_tokenizers().push_back(name);
    }, py::arg("name"), py::arg("counter"));
    m.def("unregister_tokenizer", [](const std::string& name) { return unregister_tokenizer(name); });
    // Python counters must be dropped while the interpreter is still alive.
    py::module_::import("atexit").attr("register")(py::cpp_function([] {
        std::vector<std::string> names;
        {
            std::lock_guard lock(python_tokenizers_mutex());
            names.swap(python_tokenizers());
        }
        for (const auto& name : names) unregister_tokenizer(name);
    }));

    m.def("parse_pairwise_reply", [](const std::string& text) {
        return std::string(judge::to_string(judge::parse_pairwise_reply(text)));
    });
    m.def("correct", [](const std::string& first, const std::string& second) {
        return std::string(judge::to_string(judge::correct(judge::parse_side(first), judge::parse_side(second))));
    });
    m.def("parse_score_reply", [](const std::string& text) {
        auto s = judge::parse_score_reply(text);
        return py::make_tuple(s.value, s.rounded);
    });
    m.def("parse_quality_reply", [](const std::string& text) {
        auto q = judge::parse_quality_reply(text);
        return std::vector<int>(q.scores.begin(), q.scores.end());
    });

    m.def("wilcoxon", [](const std::vector<double>& x, const std::vector<double>& y, const std::string& method) {
        return wilcoxon_dict(stats::wilcoxon_signed_rank(x, y, wilcoxon_method(method)));
    }, py::arg("x"), py::arg("y"), py::arg("method") = "auto");
    m.def("pearson", [](const std::vector<double>& x, const std::vector<double>& y) {
        auto c = stats::pearson(x, y);
        return py::make_tuple(c.r, c.p);
    });
    m.def("spearman", [](const std::vector<double>& x, const std::vector<double>& y) {
        auto c = stats::spearman(x, y);
        return py::make_tuple(c.r, c.p);
    });
    m.def("kendall", &stats::kendall);
    m.def("describe", [](const std::vector<double>& values, bool sample) {
        auto s = stats::describe(values, sample ? stats::Deviation::Sample : stats::Deviation::Population);
        py::dict d;
        d["n"] = s.n;
        d["mean"] = s.mean;
        d["std"] = s.std;
        d["min"] = s.min;
        d["max"] = s.max;
        d["median"] = s.median;
        return d;
    }, py::arg("values"), py::arg("sample") = true);
    m.def("average_rank", &stats::average_rank);

    m.def("sample_text", [](const std::string& name) { return std::string(dataset::sample_text(name)); });
    m.def("run_record", &run_record, py::call_guard<py::gil_scoped_release>(), py::arg("record"),
          py::arg("dataset"), py::arg("method"), py::arg("iterations") = std::nullopt, py::arg("init_from") = "ZP",
          py::arg("early_stop") = false, py::arg("seed") = 42, py::arg("backend") = "mock", py::arg("url") = "",
          py::arg("model") = "", py::arg("cache") = std::nullopt);
    m.def("cli", [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int status;
        {
            py::gil_scoped_release release;
            status = cli::execute(args, out, err);
        }
        return py::make_tuple(status, out.str(), err.str());
    }, py::arg("args"));
}
