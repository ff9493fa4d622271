#include "sinflow/metrics.hpp"

#include <algorithm>
#include <stdexcept>
#include <vector>

namespace sinflow {

double auroc(std::span<const double> scores_in, std::span<const double> scores_out) {
    if (scores_in.empty() || scores_out.empty())
        throw std::invalid_argument("auroc: both score sets must be nonempty");

    struct Entry {
        double score;
        bool in;
    };
    std::vector<Entry> all;
    all.reserve(scores_in.size() + scores_out.size());
    for (double s : scores_in) all.push_back({s, true});
    for (double s : scores_out) all.push_back({s, false});
    std::sort(all.begin(), all.end(),
              [](const Entry& a, const Entry& b) { return a.score < b.score; });

    // average ranks over tie groups, then the Mann-Whitney statistic
    double rank_sum_in = 0.0;
    std::size_t i = 0;
    while (i < all.size()) {
        std::size_t j = i;
        while (j < all.size() && all[j].score == all[i].score) ++j;
        const double avg_rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
        for (std::size_t t = i; t < j; ++t)
            if (all[t].in) rank_sum_in += avg_rank;
        i = j;
    }
    const double n_in = static_cast<double>(scores_in.size());
    const double n_out = static_cast<double>(scores_out.size());
    return (rank_sum_in - n_in * (n_in + 1.0) / 2.0) / (n_in * n_out);
}

}  // namespace sinflow
