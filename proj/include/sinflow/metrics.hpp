#pragma once

#include <cstddef>
#include <span>
#include <string>

namespace sinflow {

/// Probability that a random in-distribution score exceeds a random
/// out-of-distribution score, ties counted one half; computed exactly via
/// rank statistics.
double auroc(std::span<const double> scores_in, std::span<const double> scores_out);

struct OodReport {
    double auroc = 0.5;
    std::size_t n_in = 0;
    std::size_t n_out = 0;
    std::string score_kind = "log-density";
};

}  // namespace sinflow
