#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace prefine::cli {

// Exit statuses of `execute`.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

// Runs one verb (ingest, run, judge, stats, report, cache). `args` excludes
// the program name. Results go to `out`; failures produce exactly one JSON
// line {"error":{"code":...,"message":...}} on `err`.
int execute(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace prefine::cli
