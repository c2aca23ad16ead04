#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "fcmon/features.hpp"

namespace fcmon {

/// Flat node of a binary regression tree. Internal nodes send x[feature] <=
/// threshold to `left`; leaves have feature == -1 and carry `value`.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
    std::size_t n_samples = 0;

    bool is_leaf() const noexcept { return feature < 0; }
};

struct RegressionTree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root

    double predict(std::span<const double> x) const;
    std::size_t depth() const;
    std::size_t n_leaves() const;
};

struct TreeGrowParams {
    std::size_t max_depth = 0;      // 0: unlimited
    std::size_t min_leaf = 1;       // minimum samples in each child
    std::size_t min_split = 2;      // nodes smaller than this become leaves
    std::size_t features_per_split = 0;  // 0: all candidate features
    double min_gain = 0.0;          // split only when SSE reduction exceeds this
    double leaf_scale = 1.0;        // leaf value = leaf_scale * mean target
};

/// CART regression tree grower over a fixed design matrix.
///
/// Each feature is sorted once at construction; every grown tree then reuses
/// those orders, partitioning them stably down the tree. A split point is the
/// midpoint between consecutive distinct feature values and is scored by the
/// drop in sum of squared errors. Ties go to the lowest feature index, then
/// the lowest threshold.
class TreeGrower {
public:
    explicit TreeGrower(const DesignMatrix& data);

    /// Grows one tree on `targets` (one per data row). `counts[i]` is the
    /// multiplicity of row i in the training sample (bootstrap counts; 0
    /// leaves a row out). `features` lists the columns a split may use.
    RegressionTree grow(std::span<const double> targets, std::span<const std::uint32_t> counts,
                        std::span<const int> features, const TreeGrowParams& params,
                        std::mt19937_64& rng) const;

private:
    const DesignMatrix* data_;
    std::vector<std::vector<double>> cols_;          // column-major copy of the design
    std::vector<std::vector<std::uint32_t>> order_;  // per feature: rows sorted by value
    // Features with few distinct values are split from per-node histograms.
    std::vector<std::vector<double>> levels_;        // sorted distinct values; empty if not binned
    std::vector<std::vector<std::uint8_t>> codes_;   // level index per row
};

}  // namespace fcmon
