#include "rtp/core/density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "rtp/core/errors.hpp"

namespace rtp {

DensityField::DensityField(std::size_t grid_size, double plus_value, double minus_value) {
    if (grid_size == 0) throw ConfigurationError("density grid needs at least one cell");
    values_[0].assign(grid_size, plus_value);
    values_[1].assign(grid_size, minus_value);
}

DensityField::DensityField(std::vector<double> plus, std::vector<double> minus) {
    if (plus.empty() || plus.size() != minus.size()) {
        throw ConfigurationError("density layers must be non-empty and of equal length");
    }
    values_[0] = std::move(plus);
    values_[1] = std::move(minus);
}

DensityField DensityField::from_profile(std::size_t grid_size, const Profile& profile) {
    DensityField f(grid_size);
    for (Spin s : kSpins) {
        auto vals = f.layer_values(s);
        for (std::size_t i = 0; i < grid_size; ++i) vals[i] = profile(f.center(i), s);
    }
    return f;
}

double DensityField::mass(Spin s) const {
    const auto& v = values_[layer(s)];
    return std::accumulate(v.begin(), v.end(), 0.0) * dx();
}

double DensityField::magnetization() const {
    const double plus = mass(Spin::plus);
    const double minus = mass(Spin::minus);
    const double total = plus + minus;
    if (total == 0.0) return 0.0;
    return (plus - minus) / total;
}

double DensityField::min_value() const {
    double lo = std::numeric_limits<double>::infinity();
    for (const auto& v : values_) lo = std::min(lo, *std::min_element(v.begin(), v.end()));
    return lo;
}

double DensityField::pair(const Profile& f) const {
    double acc = 0.0;
    for (Spin s : kSpins) {
        const auto& v = values_[layer(s)];
        for (std::size_t i = 0; i < v.size(); ++i) acc += v[i] * f(center(i), s);
    }
    return acc * dx();
}

double magnetization_of_density(const DensityField& rho) { return rho.magnetization(); }

DensityTrajectory::DensityTrajectory(double dt, std::vector<DensityField> slices)
    : dt_(dt), slices_(std::move(slices)) {
    if (slices_.size() > 1 && !(dt > 0.0)) throw ConfigurationError("trajectory time step must be positive");
    for (const auto& s : slices_) {
        if (s.grid_size() != slices_.front().grid_size()) {
            throw ConfigurationError("trajectory slices must share one grid");
        }
    }
}

void DensityTrajectory::push_back(DensityField f) {
    if (!slices_.empty() && f.grid_size() != slices_.front().grid_size()) {
        throw ConfigurationError("trajectory slices must share one grid");
    }
    slices_.push_back(std::move(f));
}

double DensityTrajectory::relative_mass_drift() const {
    if (slices_.empty()) return 0.0;
    const double m0 = slices_.front().total_mass();
    if (m0 == 0.0) return 0.0;
    double drift = 0.0;
    for (const auto& s : slices_) drift = std::max(drift, std::abs(s.total_mass() - m0) / m0);
    return drift;
}

DensityTrajectory regularize_trajectory(const DensityTrajectory& traj, double epsilon) {
    if (!(epsilon >= 0.0 && epsilon < 1.0)) throw DomainError("regularization epsilon must lie in [0, 1)");
    DensityTrajectory out = traj;
    if (epsilon == 0.0) return out;
    for (std::size_t k = 0; k < out.size(); ++k) {
        for (Spin s : kSpins) {
            for (double& v : out[k].layer_values(s)) v = (1.0 - epsilon) * v + epsilon;
        }
    }
    return out;
}

}  // namespace rtp
