#include "rtp/sim/ensemble.hpp"

#include <cstdlib>
#include <string>

namespace rtp::sim {

unsigned default_thread_count() {
    if (const char* env = std::getenv("RTP_LDP_THREADS")) {
        try {
            const long v = std::stol(env);
            if (v > 0) return static_cast<unsigned>(v);
        } catch (const std::exception&) {
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

struct ReplicaDigest {
    std::vector<double> magnetization;
    std::vector<DensityField> densities;
    std::optional<double> log_rn;
    std::map<std::string, double> dynkin_final;
    std::map<std::string, double> qv;
};

// Two-pass mean/variance, summed in replica order.
void fold_fields(const std::vector<ReplicaDigest>& digests, std::size_t k, DensityField& mean, DensityField& var) {
    const double n = static_cast<double>(digests.size());
    mean = DensityField(digests.front().densities[k].grid_size());
    var = mean;
    for (const auto& d : digests) {
        for (Spin s : kSpins) {
            auto mv = mean.layer_values(s);
            auto src = d.densities[k].layer_values(s);
            for (std::size_t i = 0; i < mv.size(); ++i) mv[i] += src[i];
        }
    }
    for (Spin s : kSpins) {
        for (double& v : mean.layer_values(s)) v /= n;
    }
    if (digests.size() < 2) return;
    for (const auto& d : digests) {
        for (Spin s : kSpins) {
            auto vv = var.layer_values(s);
            auto mv = mean.layer_values(s);
            auto src = d.densities[k].layer_values(s);
            for (std::size_t i = 0; i < vv.size(); ++i) vv[i] += (src[i] - mv[i]) * (src[i] - mv[i]);
        }
    }
    for (Spin s : kSpins) {
        for (double& v : var.layer_values(s)) v /= n - 1.0;
    }
}

}  // namespace

EnsembleSummary replica_ensemble(const SimulationSpec& spec, std::size_t n_replicas, std::size_t grid_size,
                                 unsigned threads) {
    EnsembleSummary out;
    out.n_replicas = n_replicas;
    out.grid_size = grid_size;
    out.snapshot_times = spec.resolved_snapshot_times();
    if (n_replicas == 0) return out;

    const auto digests = map_replicas<ReplicaDigest>(
        spec, n_replicas,
        [grid_size](std::size_t, const PathRecord& p) {
            ReplicaDigest d;
            d.magnetization = p.magnetization_series;
            if (grid_size > 0) {
                for (const auto& cfg : p.snapshots) d.densities.push_back(empirical_density(cfg, grid_size));
            }
            d.log_rn = p.log_radon_nikodym;
            for (const auto& [id, series] : p.dynkin_residuals) d.dynkin_final[id] = series.back();
            d.qv = p.quadratic_variation;
            return d;
        },
        threads);

    const std::size_t n_snap = out.snapshot_times.size();
    const double n = static_cast<double>(n_replicas);
    out.magnetization_mean.assign(n_snap, 0.0);
    out.magnetization_variance.assign(n_snap, 0.0);
    for (const auto& d : digests) {
        for (std::size_t k = 0; k < n_snap; ++k) out.magnetization_mean[k] += d.magnetization[k];
    }
    for (double& v : out.magnetization_mean) v /= n;
    if (n_replicas > 1) {
        for (const auto& d : digests) {
            for (std::size_t k = 0; k < n_snap; ++k) {
                const double dm = d.magnetization[k] - out.magnetization_mean[k];
                out.magnetization_variance[k] += dm * dm;
            }
        }
        for (double& v : out.magnetization_variance) v /= n - 1.0;
    }
    if (grid_size > 0) {
        out.density_mean.resize(n_snap);
        out.density_variance.resize(n_snap);
        for (std::size_t k = 0; k < n_snap; ++k) fold_fields(digests, k, out.density_mean[k], out.density_variance[k]);
    }
    for (const auto& d : digests) {
        if (d.log_rn) out.log_radon_nikodym.push_back(*d.log_rn);
        for (const auto& [id, v] : d.dynkin_final) out.dynkin_final[id].push_back(v);
        for (const auto& [id, v] : d.qv) out.quadratic_variation[id].push_back(v);
    }
    return out;
}

}  // namespace rtp::sim
