#pragma once

#include <cstdint>
#include <vector>

#include "rtp/core/spin.hpp"

namespace rtp {

/// Occupation numbers eta(x, sigma) on the discrete two-layer torus of N sites,
/// with cached class totals n(+1), n(-1).
class LatticeConfiguration {
public:
    using Count = std::int64_t;

    LatticeConfiguration() = default;
    explicit LatticeConfiguration(std::size_t n_sites);
    /// counts are site-major per layer: plus[x], minus[x].
    LatticeConfiguration(std::vector<Count> plus, std::vector<Count> minus);

    std::size_t n_sites() const { return n_sites_; }
    Count count(std::size_t x, Spin s) const { return counts_[layer(s)][x]; }
    const std::vector<Count>& layer_counts(Spin s) const { return counts_[layer(s)]; }
    Count class_total(Spin s) const { return totals_[layer(s)]; }
    Count total() const { return totals_[0] + totals_[1]; }
    bool empty() const { return total() == 0; }

    /// (n(+1) - n(-1)) / |eta|, or 0 for the empty configuration.
    double magnetization() const;

    void add(std::size_t x, Spin s, Count k = 1);
    /// Throws StateError if the site holds fewer than k particles.
    void remove(std::size_t x, Spin s, Count k = 1);

    /// Neighbour in the drift direction of s, periodic.
    std::size_t shifted(std::size_t x, Spin s) const {
        return s == Spin::plus ? (x + 1 == n_sites_ ? 0 : x + 1) : (x == 0 ? n_sites_ - 1 : x - 1);
    }

    friend bool operator==(const LatticeConfiguration&, const LatticeConfiguration&) = default;

private:
    std::size_t n_sites_ = 0;
    std::vector<Count> counts_[2];
    Count totals_[2] = {0, 0};
};

double magnetization_of_configuration(const LatticeConfiguration& cfg);

}  // namespace rtp
