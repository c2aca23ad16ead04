#include "fcmon/tree.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "fcmon/errors.hpp"

namespace fcmon {

namespace {
constexpr std::size_t kMaxLevels = 32;
}

double RegressionTree::predict(std::span<const double> x) const {
    std::size_t i = 0;
    for (;;) {
        const auto& node = nodes[i];
        if (node.is_leaf()) return node.value;
        i = static_cast<std::size_t>(x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left
                                                                                                  : node.right);
    }
}

std::size_t RegressionTree::depth() const {
    if (nodes.empty()) return 0;
    std::vector<std::size_t> d(nodes.size(), 0);
    std::size_t best = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        best = std::max(best, d[i]);
        if (!nodes[i].is_leaf()) {
            d[static_cast<std::size_t>(nodes[i].left)] = d[i] + 1;
            d[static_cast<std::size_t>(nodes[i].right)] = d[i] + 1;
        }
    }
    return best;
}

std::size_t RegressionTree::n_leaves() const {
    return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) {
        return n.is_leaf();
    }));
}

TreeGrower::TreeGrower(const DesignMatrix& data) : data_(&data) {
    const std::size_t n = data.n_rows();
    const std::size_t p = data.n_cols();
    if (n == 0) throw InsufficientData("cannot grow a tree on an empty design");
    order_.resize(p);
    cols_.resize(p);
    for (std::size_t f = 0; f < p; ++f) {
        auto& col = cols_[f];
        col.resize(n);
        for (std::size_t i = 0; i < n; ++i) col[i] = data.at(i, f);
        auto& ord = order_[f];
        ord.resize(n);
        std::iota(ord.begin(), ord.end(), 0u);
        std::stable_sort(ord.begin(), ord.end(), [&](std::uint32_t a, std::uint32_t b) { return col[a] < col[b]; });
    }

    levels_.resize(p);
    codes_.resize(p);
    for (std::size_t f = 0; f < p; ++f) {
        std::vector<double> lv;
        for (auto row : order_[f]) {
            const double v = cols_[f][row];
            if (lv.empty() || lv.back() < v) lv.push_back(v);
            if (lv.size() > kMaxLevels) break;
        }
        if (lv.size() > kMaxLevels) continue;
        auto& code = codes_[f];
        code.resize(n);
        for (std::size_t i = 0; i < n; ++i)
            code[i] = static_cast<std::uint8_t>(std::lower_bound(lv.begin(), lv.end(), cols_[f][i]) - lv.begin());
        levels_[f] = std::move(lv);
    }
}

RegressionTree TreeGrower::grow(std::span<const double> targets, std::span<const std::uint32_t> counts,
                                std::span<const int> features, const TreeGrowParams& params,
                                std::mt19937_64& rng) const {
    const DesignMatrix& data = *data_;
    const std::size_t n_rows = data.n_rows();
    const std::size_t p = data.n_cols();
    if (targets.size() != n_rows || counts.size() != n_rows) throw ShapeError("targets/counts must match rows");
    if (features.empty()) throw InvalidArgument("tree needs at least one candidate feature");

    std::vector<int> feats(features.begin(), features.end());
    std::sort(feats.begin(), feats.end());
    feats.erase(std::unique(feats.begin(), feats.end()), feats.end());
    for (int f : feats)
        if (f < 0 || static_cast<std::size_t>(f) >= p) throw InvalidArgument("feature index out of range");

    std::size_t m = 0;
    for (auto c : counts) m += c;
    if (m == 0) throw InsufficientData("empty training sample");
    // Presorted sample slots for continuous features (a row appears counts[row]
    // times); slots.back() lists the node's samples in row order.
    std::vector<int> slot_of(feats.size(), -1);
    std::vector<std::vector<std::uint32_t>> slots;
    for (std::size_t k = 0; k < feats.size(); ++k) {
        const auto f = static_cast<std::size_t>(feats[k]);
        if (!levels_[f].empty()) continue;
        slot_of[k] = static_cast<int>(slots.size());
        auto& sl = slots.emplace_back();
        sl.reserve(m);
        for (auto row : order_[f])
            for (std::uint32_t c = 0; c < counts[row]; ++c) sl.push_back(row);
    }
    {
        auto& sl = slots.emplace_back();
        sl.reserve(m);
        for (std::uint32_t row = 0; row < n_rows; ++row)
            for (std::uint32_t c = 0; c < counts[row]; ++c) sl.push_back(row);
    }
    std::vector<double> bin_sum(kMaxLevels);
    std::vector<std::size_t> bin_n(kMaxLevels);

    const std::size_t per_split =
        params.features_per_split == 0 ? feats.size() : std::min(params.features_per_split, feats.size());
    std::vector<std::size_t> candidate(feats.size());
    std::vector<char> goes_left(n_rows, 0);
    std::vector<std::uint32_t> scratch(m);

    struct Pending {
        std::size_t node, lo, hi, depth;
    };
    RegressionTree tree;
    tree.nodes.emplace_back();
    std::vector<Pending> stack{{0, 0, m, 0}};

    while (!stack.empty()) {
        const Pending job = stack.back();
        stack.pop_back();
        const std::size_t n = job.hi - job.lo;
        const auto& any = slots.back();

        double sum = 0.0;
        double sumsq = 0.0;
        double lo_y = std::numeric_limits<double>::infinity();
        double hi_y = -lo_y;
        for (std::size_t k = job.lo; k < job.hi; ++k) {
            const double y = targets[any[k]];
            sum += y;
            sumsq += y * y;
            lo_y = std::min(lo_y, y);
            hi_y = std::max(hi_y, y);
        }
        const double mean = std::clamp(sum / static_cast<double>(n), lo_y, hi_y);
        {
            auto& node = tree.nodes[job.node];
            node.n_samples = n;
            node.value = params.leaf_scale * mean;
        }

        const bool depth_ok = params.max_depth == 0 || job.depth < params.max_depth;
        if (!depth_ok || n < params.min_split || n < 2 * params.min_leaf || lo_y == hi_y) continue;

        // Candidate features for this node, ascending.
        std::iota(candidate.begin(), candidate.end(), std::size_t{0});
        if (per_split < feats.size()) {
            for (std::size_t i = 0; i < per_split; ++i) {
                std::uniform_int_distribution<std::size_t> pick(i, feats.size() - 1);
                std::swap(candidate[i], candidate[pick(rng)]);
            }
            std::sort(candidate.begin(), candidate.begin() + static_cast<std::ptrdiff_t>(per_split));
        }

        double best_gain = std::max(params.min_gain, 1e-14 * sumsq);
        std::size_t best_k = feats.size();
        double best_threshold = 0.0;
        const double nn = static_cast<double>(n);
        auto consider = [&](std::size_t k, std::size_t n_left, double left_sum, double a, double b) {
            if (n_left < params.min_leaf || n - n_left < params.min_leaf) return;
            const double nl = static_cast<double>(n_left);
            const double nr = nn - nl;
            const double diff = left_sum / nl - (sum - left_sum) / nr;
            const double gain = nl * nr / nn * diff * diff;
            if (gain > best_gain) {
                best_gain = gain;
                best_k = k;
                double mid = a + 0.5 * (b - a);
                if (!(mid < b)) mid = a;
                best_threshold = mid;
            }
        };
        for (std::size_t c = 0; c < per_split; ++c) {
            const std::size_t k = candidate[c];
            const auto f = static_cast<std::size_t>(feats[k]);
            if (slot_of[k] < 0) {
                const auto& lv = levels_[f];
                const auto& code = codes_[f];
                std::fill_n(bin_sum.begin(), lv.size(), 0.0);
                std::fill_n(bin_n.begin(), lv.size(), std::size_t{0});
                for (std::size_t i = job.lo; i < job.hi; ++i) {
                    const auto row = any[i];
                    bin_sum[code[row]] += targets[row];
                    ++bin_n[code[row]];
                }
                std::size_t n_left = 0;
                double left_sum = 0.0;
                std::size_t prev = lv.size();
                for (std::size_t j = 0; j < lv.size(); ++j) {
                    if (bin_n[j] == 0) continue;
                    if (prev != lv.size()) consider(k, n_left, left_sum, lv[prev], lv[j]);
                    n_left += bin_n[j];
                    left_sum += bin_sum[j];
                    prev = j;
                }
                continue;
            }
            const auto& sl = slots[static_cast<std::size_t>(slot_of[k])];
            const auto& v = cols_[f];
            double left_sum = 0.0;
            for (std::size_t i = job.lo; i + 1 < job.hi; ++i) {
                left_sum += targets[sl[i]];
                const double a = v[sl[i]];
                const double b = v[sl[i + 1]];
                if (a < b) consider(k, i - job.lo + 1, left_sum, a, b);
            }
        }
        if (best_k == feats.size()) continue;

        std::size_t best_left = 0;
        {
            const auto& v = cols_[static_cast<std::size_t>(feats[best_k])];
            for (std::size_t i = job.lo; i < job.hi; ++i) {
                const auto row = any[i];
                goes_left[row] = v[row] <= best_threshold ? 1 : 0;
                best_left += goes_left[row];
            }
        }
        for (auto& s : slots) {
            std::size_t l = job.lo;
            std::size_t r = 0;
            for (std::size_t i = job.lo; i < job.hi; ++i) {
                if (goes_left[s[i]])
                    s[l++] = s[i];
                else
                    scratch[r++] = s[i];
            }
            std::copy(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(r),
                      s.begin() + static_cast<std::ptrdiff_t>(l));
        }

        const auto left = tree.nodes.size();
        tree.nodes.emplace_back();
        const auto right = tree.nodes.size();
        tree.nodes.emplace_back();
        auto& node = tree.nodes[job.node];
        node.feature = feats[best_k];
        node.threshold = best_threshold;
        node.left = static_cast<int>(left);
        node.right = static_cast<int>(right);
        stack.push_back({right, job.lo + best_left, job.hi, job.depth + 1});
        stack.push_back({left, job.lo, job.lo + best_left, job.depth + 1});
    }
    return tree;
}

}  // namespace fcmon
