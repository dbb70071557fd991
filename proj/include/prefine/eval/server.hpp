#pragma once

#include <memory>
#include <string>

#include "prefine/eval/service.hpp"

namespace prefine::eval {

// HTTP status for a service error code; 500 for anything unknown.
int http_status(const std::string& code);

// REST front end:
//   POST /sessions                           -> session view (201)
//   GET  /sessions/{id}                      -> session view
//   POST /sessions/{id}/preferences/{index}  {score, comment}
//   GET  /sessions/{id}/sets/{k}             -> blinded story set
//   POST /sessions/{id}/sets/{k}/ratings     {scores[3], ranking[3]}
//   POST /sessions/{id}/rubric-rating        {suitability}
//   GET  /export[?format=csv]
// Errors are {"code", "message"} documents.
class EvalServer {
public:
    explicit EvalServer(EvalService& service);
    ~EvalServer();

    EvalServer(const EvalServer&) = delete;
    EvalServer& operator=(const EvalServer&) = delete;

    // Port 0 binds any free port. Returns the bound port.
    int bind(const std::string& host, int port);
    // Serves on a background thread after `bind`.
    void start();
    // Serves on the calling thread after `bind`, until `stop`.
    bool serve();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace prefine::eval
