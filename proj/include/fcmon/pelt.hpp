#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fcmon {

struct Segmentation {
    // Start index of every segment after the first, ascending.
    std::vector<std::size_t> changepoints;
    // Sum of segment costs plus penalty per changepoint.
    double cost = 0.0;
};

/// Optimal partition of `x` into segments of length >= min_seg_len under the
/// Gaussian mean-and-variance segment cost, with `penalty` charged per
/// changepoint. Exact: the pruning step only discards a candidate once it can
/// no longer be the last changepoint of any optimal segmentation.
/// Throws InsufficientSample when x is shorter than min_seg_len.
Segmentation pelt(std::span<const double> x, double penalty, std::size_t min_seg_len = 2);

}  // namespace fcmon
