#pragma once

#include <algorithm>
#include <atomic>
#include <functional>
#include <thread>
#include <vector>

#include "rtp/sim/simulator.hpp"

namespace rtp::sim {

/// Worker count: RTP_LDP_THREADS if set and positive, else hardware concurrency.
unsigned default_thread_count();

/// Runs replicas i = 0..n-1 with seed spec.seed ^ i and maps each path through
/// `map`. Results are returned in replica order whatever the completion order.
template <class T>
std::vector<T> map_replicas(const SimulationSpec& spec, std::size_t n_replicas,
                            const std::function<T(std::size_t, const PathRecord&)>& map, unsigned threads = 0) {
    if (n_replicas == 0) return {};
    spec.validate();
    std::vector<T> out(n_replicas);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n_replicas; i = next++) {
            SimulationSpec replica = spec;
            replica.seed = replica_seed(spec.seed, i);
            out[i] = map(i, run_path(replica));
        }
    };
    if (threads == 0) threads = default_thread_count();
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, n_replicas));
    if (threads <= 1) {
        worker();
        return out;
    }
    std::vector<std::jthread> pool;
    for (unsigned k = 0; k < threads; ++k) pool.emplace_back(worker);
    pool.clear();
    return out;
}

/// Folded per-snapshot statistics of an ensemble.
struct EnsembleSummary {
    std::size_t n_replicas = 0;
    std::size_t grid_size = 0;
    std::vector<double> snapshot_times;
    std::vector<double> magnetization_mean;
    std::vector<double> magnetization_variance;
    /// Mean and variance of the binned empirical density per snapshot.
    std::vector<DensityField> density_mean;
    std::vector<DensityField> density_variance;
    std::vector<double> log_radon_nikodym;  // one sample per replica, if requested
    std::map<std::string, std::vector<double>> dynkin_final;
    std::map<std::string, std::vector<double>> quadratic_variation;
};

/// Runs `n_replicas` paths and folds them in replica order. grid_size = 0 skips
/// the density statistics.
EnsembleSummary replica_ensemble(const SimulationSpec& spec, std::size_t n_replicas, std::size_t grid_size = 0,
                                 unsigned threads = 0);

}  // namespace rtp::sim
