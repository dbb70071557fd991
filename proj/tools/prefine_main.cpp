#include <iostream>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "prefine/cli/cli.hpp"

int main(int argc, char** argv) {
    // Keep stdout for results only.
    spdlog::set_default_logger(spdlog::stderr_color_mt("prefine"));
    std::vector<std::string> args(argv + 1, argv + argc);
    return prefine::cli::execute(args, std::cout, std::cerr);
}
