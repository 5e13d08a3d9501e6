#include "rtp/core/lattice.hpp"

#include <numeric>

#include "rtp/core/errors.hpp"

namespace rtp {

LatticeConfiguration::LatticeConfiguration(std::size_t n_sites) : n_sites_(n_sites) {
    if (n_sites == 0) throw ConfigurationError("lattice needs at least one site");
    counts_[0].assign(n_sites, 0);
    counts_[1].assign(n_sites, 0);
}

LatticeConfiguration::LatticeConfiguration(std::vector<Count> plus, std::vector<Count> minus)
    : n_sites_(plus.size()) {
    if (plus.empty() || plus.size() != minus.size()) {
        throw ConfigurationError("layer count arrays must be non-empty and of equal length");
    }
    for (const auto* layer_counts : {&plus, &minus}) {
        for (Count c : *layer_counts) {
            if (c < 0) throw ConfigurationError("occupation numbers must be non-negative");
        }
    }
    totals_[0] = std::accumulate(plus.begin(), plus.end(), Count{0});
    totals_[1] = std::accumulate(minus.begin(), minus.end(), Count{0});
    counts_[0] = std::move(plus);
    counts_[1] = std::move(minus);
}

double LatticeConfiguration::magnetization() const {
    const Count n = total();
    if (n == 0) return 0.0;
    return static_cast<double>(totals_[0] - totals_[1]) / static_cast<double>(n);
}

void LatticeConfiguration::add(std::size_t x, Spin s, Count k) {
    counts_[layer(s)][x] += k;
    totals_[layer(s)] += k;
}

void LatticeConfiguration::remove(std::size_t x, Spin s, Count k) {
    Count& c = counts_[layer(s)][x];
    if (c < k) throw StateError("cannot remove particles from an under-occupied site");
    c -= k;
    totals_[layer(s)] -= k;
}

double magnetization_of_configuration(const LatticeConfiguration& cfg) { return cfg.magnetization(); }

}  // namespace rtp
