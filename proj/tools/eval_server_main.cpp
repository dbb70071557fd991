#include <csignal>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include <spdlog/spdlog.h>

#include "prefine/errors.hpp"
#include "prefine/eval/server.hpp"
#include "prefine/gateway/setup.hpp"

namespace {
prefine::eval::EvalServer* g_server = nullptr;
void on_signal(int) {
    if (g_server) g_server->stop();
}
}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Human-evaluation REST service"};
    std::string host = "127.0.0.1";
    int port = 8080;
    std::string config_path, log_path;
    prefine::gateway::BackendSetup backend;
    std::string cache;
    int iterations = prefine::kDefaultIterations;
    app.add_option("--host", host, "Interface to bind");
    app.add_option("--port", port, "Port to bind (0 picks a free one)");
    app.add_option("--config", config_path, "JSON with seedSynopses and premises (default: bundled samples)");
    app.add_option("--log", log_path, "Append-only event log; replayed on start");
    app.add_option("--backend", backend.kind, "mock or http")->check(CLI::IsMember({"mock", "http"}));
    app.add_option("--url", backend.url, "Endpoint base URL for the http backend");
    app.add_option("--model", backend.model, "Model name for the http backend");
    app.add_option("--cache", cache, "Response cache directory");
    app.add_option("--iterations", iterations, "Refinement cycles for SR and EPER")->check(CLI::Range(1, 7));
    CLI11_PARSE(app, argc, argv);

    try {
        if (!cache.empty()) backend.cache = cache;
        auto gateway = prefine::gateway::make_gateway(backend);
        prefine::pipeline::Pipeline pipeline(*gateway);

        prefine::eval::EvalConfig config;
        if (config_path.empty()) {
            config = prefine::eval::EvalConfig::from_samples();
        } else {
            std::ifstream in(config_path);
            if (!in) throw prefine::MissingInput("cannot read " + config_path);
            config = prefine::eval::EvalConfig::from_json(nlohmann::json::parse(in));
        }
        config.run.backend = backend.kind;
        config.iterations = iterations;
        if (!log_path.empty()) config.log_path = log_path;

        prefine::eval::EvalService service(pipeline, config);
        prefine::eval::EvalServer server(service);
        g_server = &server;
        std::signal(SIGINT, on_signal);
        std::signal(SIGTERM, on_signal);
        int bound = server.bind(host, port);
        spdlog::info("serving on http://{}:{}", host, bound);
        std::cout << "listening " << host << ":" << bound << std::endl;
        server.serve();
    } catch (const prefine::Error& e) {
        std::cerr << nlohmann::json{{"code", e.code()}, {"message", e.what()}}.dump() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << nlohmann::json{{"code", "InternalError"}, {"message", e.what()}}.dump() << "\n";
        return 1;
    }
    return 0;
}
