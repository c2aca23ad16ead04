#include "fcmon/pelt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fcmon/errors.hpp"
#include "fcmon/stats.hpp"

namespace fcmon {

Segmentation pelt(std::span<const double> x, double penalty, std::size_t min_seg_len) {
    if (min_seg_len < 2) throw InvalidArgument("min_seg_len must be >= 2");
    const std::size_t n = x.size();
    if (n < min_seg_len) throw InsufficientSample("series shorter than the minimum segment length");

    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<double> best(n + 1, kInf);
    std::vector<std::size_t> last(n + 1, 0);
    best[0] = -penalty;

    // Candidate last-changepoint positions. A candidate found prunable at time
    // t is only dropped from time t + min_seg_len on: before that, t itself
    // cannot yet start a segment, so the pruning argument does not apply.
    struct Candidate {
        std::size_t pos;
        std::size_t expires;
    };
    constexpr std::size_t kNever = std::numeric_limits<std::size_t>::max();
    std::vector<Candidate> candidates{{0, kNever}};
    std::vector<double> totals;

    for (std::size_t t = min_seg_len; t <= n; ++t) {
        std::erase_if(candidates, [t](const Candidate& c) { return c.expires <= t; });

        totals.assign(candidates.size(), kInf);
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            const std::size_t s = candidates[i].pos;
            if (t - s < min_seg_len || best[s] == kInf) continue;
            const double total = best[s] + gaussian_segment_cost(x.subspan(s, t - s)) + penalty;
            totals[i] = total;
            if (total < best[t]) {
                best[t] = total;
                last[t] = s;
            }
        }

        // F(s) + C(s, t) > F(t): s can never beat t as a later changepoint.
        const double slack = 1e-9 * (std::fabs(best[t]) + 1.0);
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            if (totals[i] == kInf || candidates[i].expires != kNever) continue;
            if (totals[i] - penalty > best[t] + slack) candidates[i].expires = t + min_seg_len;
        }
        candidates.push_back({t, kNever});
    }

    Segmentation seg;
    seg.cost = best[n];
    for (std::size_t cur = n; cur > 0 && last[cur] > 0; cur = last[cur]) seg.changepoints.push_back(last[cur]);
    std::reverse(seg.changepoints.begin(), seg.changepoints.end());
    return seg;
}

}  // namespace fcmon
