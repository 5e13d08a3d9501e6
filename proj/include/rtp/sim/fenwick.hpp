#pragma once

#include <bit>
#include <cstdint>
#include <vector>

namespace rtp::sim {

/// Binary indexed tree over non-negative integer weights, with O(log n)
/// point updates and inverse-CDF lookup.
class FenwickTree {
public:
    using Weight = std::int64_t;

    FenwickTree() = default;
    explicit FenwickTree(std::size_t n) : tree_(n + 1, 0) {}

    template <class Range>
    static FenwickTree from_weights(const Range& weights) {
        FenwickTree t(std::size(weights));
        std::size_t i = 1;
        for (auto w : weights) t.tree_[i++] = static_cast<Weight>(w);
        // linear-time build: push each node into its parent
        for (std::size_t j = 1; j < t.tree_.size(); ++j) {
            const std::size_t parent = j + (j & (~j + 1));
            if (parent < t.tree_.size()) t.tree_[parent] += t.tree_[j];
        }
        return t;
    }

    std::size_t size() const { return tree_.empty() ? 0 : tree_.size() - 1; }

    void add(std::size_t index, Weight delta) {
        for (std::size_t j = index + 1; j < tree_.size(); j += j & (~j + 1)) tree_[j] += delta;
    }

    /// Sum of weights [0, index).
    Weight prefix(std::size_t index) const {
        Weight acc = 0;
        for (std::size_t j = index; j > 0; j -= j & (~j + 1)) acc += tree_[j];
        return acc;
    }

    Weight total() const { return prefix(size()); }

    /// Smallest index i with prefix(i + 1) > target; target must be in [0, total()).
    std::size_t find(Weight target) const {
        std::size_t pos = 0;
        for (std::size_t step = std::bit_floor(size()); step > 0; step >>= 1) {
            const std::size_t next = pos + step;
            if (next < tree_.size() && tree_[next] <= target) {
                pos = next;
                target -= tree_[next];
            }
        }
        return pos;
    }

private:
    std::vector<Weight> tree_;
};

}  // namespace rtp::sim
