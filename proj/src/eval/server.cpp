#include "prefine/eval/server.hpp"

#include <thread>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include <spdlog/spdlog.h>

#include "prefine/errors.hpp"

namespace prefine::eval {

using nlohmann::json;

int http_status(const std::string& code) {
    if (code == "UnknownSession") return 404;
    if (code == "RangeError" || code == "InvalidRanking" || code == "EmptyComment" || code == "InvalidArgument") {
        return 400;
    }
    if (code == "DuplicateIndex" || code == "StateError") return 409;
    if (code == "NotReady") return 503;
    return 500;
}

struct EvalServer::Impl {
    EvalService& service;
    httplib::Server server;
    std::thread thread;

    explicit Impl(EvalService& s) : service(s) { routes(); }

    static void send(httplib::Response& res, const json& body, int status = 200) {
        res.status = status;
        res.set_content(body.dump(), "application/json");
    }

    static void fail(httplib::Response& res, const std::string& code, const std::string& message) {
        if (code == "NotReady") res.set_header("Retry-After", "1");
        send(res, {{"code", code}, {"message", message}}, http_status(code));
    }

    // Runs a handler, turning exceptions into structured errors.
    template <typename Fn>
    static void guarded(httplib::Response& res, Fn fn) {
        try {
            fn();
        } catch (const Error& e) {
            fail(res, e.code(), e.what());
        } catch (const json::exception& e) {
            fail(res, "InvalidArgument", std::string("malformed request body: ") + e.what());
        } catch (const std::exception& e) {
            spdlog::error("request failed: {}", e.what());
            fail(res, "InternalError", "internal error");
        }
    }

    static json body(const httplib::Request& req) {
        auto j = json::parse(req.body.empty() ? "{}" : req.body);
        if (!j.is_object()) throw InvalidArgument("request body must be a JSON object");
        return j;
    }

    static int number(const std::string& text) {
        try {
            std::size_t used = 0;
            int v = std::stoi(text, &used);
            if (used == text.size()) return v;
        } catch (const std::exception&) {
        }
        throw RangeError("'" + text + "' is not a number");
    }

    void routes() {
        server.Post("/sessions", [this](const httplib::Request&, httplib::Response& res) {
            guarded(res, [&] { send(res, service.create_session(), 201); });
        });
        server.Get(R"(/sessions/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] { send(res, service.get_session(req.matches[1])); });
        });
        server.Post(R"(/sessions/([^/]+)/preferences/([^/]+))",
                    [this](const httplib::Request& req, httplib::Response& res) {
                        guarded(res, [&] {
                            auto b = body(req);
                            send(res, service.submit_preference(req.matches[1], number(req.matches[2]),
                                                                b.at("score").get<int>(),
                                                                b.value("comment", std::string())));
                        });
                    });
        server.Get(R"(/sessions/([^/]+)/sets/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] { send(res, service.get_story_set(req.matches[1], number(req.matches[2]))); });
        });
        server.Post(R"(/sessions/([^/]+)/sets/([^/]+)/ratings)",
                    [this](const httplib::Request& req, httplib::Response& res) {
                        guarded(res, [&] {
                            auto b = body(req);
                            auto scores = b.at("scores").get<std::vector<int>>();
                            auto ranking = b.at("ranking").get<std::vector<int>>();
                            if (scores.size() != 3) throw RangeError("exactly three scores are required");
                            if (ranking.size() != 3) throw InvalidRanking("exactly three ranks are required");
                            StoryResponse r;
                            std::copy(scores.begin(), scores.end(), r.scores.begin());
                            std::copy(ranking.begin(), ranking.end(), r.ranking.begin());
                            send(res, service.submit_story_ratings(req.matches[1], number(req.matches[2]), r));
                        });
                    });
        server.Post(R"(/sessions/([^/]+)/rubric-rating)", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
                send(res, service.submit_rubric_rating(req.matches[1], body(req).at("suitability").get<int>()));
            });
        });
        server.Get("/export", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
                if (req.get_param_value("format") == "csv") {
                    res.set_content(service.export_csv(), "text/csv");
                } else {
                    send(res, service.export_json());
                }
            });
        });
    }
};

EvalServer::EvalServer(EvalService& service) : impl_(std::make_unique<Impl>(service)) {}

EvalServer::~EvalServer() { stop(); }

int EvalServer::bind(const std::string& host, int port) {
    int bound = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
    if (bound < 0) throw Error("IoError", "cannot bind " + host + ":" + std::to_string(port));
    return bound;
}

void EvalServer::start() {
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
}

bool EvalServer::serve() { return impl_->server.listen_after_bind(); }

void EvalServer::stop() {
    impl_->server.stop();
    if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace prefine::eval
