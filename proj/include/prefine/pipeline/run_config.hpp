#pragma once

#include <cstddef>
#include <string>

#include "prefine/core/types.hpp"
#include "prefine/gateway/chat.hpp"

namespace prefine::pipeline {

struct RunConfig {
    MethodConfig method;
    Dataset dataset = Dataset::PerMPST;
    double gen_temperature = 0.7;
    double eval_temperature = 0.0;
    long long seed = 42;
    // PerDOC refined plots must land in [band_low, band_high] tokens.
    std::size_t band_low = 500;
    std::size_t band_high = 550;
    // Soft limit on critique length; exceeding it only records a warning.
    std::size_t feedback_token_cap = 200;
    std::string backend = "mock";
    std::string tokenizer = "approx";
    int max_tokens = 1024;
    gateway::RetryPolicy retry;

    // Throws InvalidArgument.
    void validate() const;
};

}  // namespace prefine::pipeline
