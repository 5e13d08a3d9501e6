#pragma once

#include <functional>
#include <span>
#include <vector>

#include "rtp/core/spin.hpp"

namespace rtp {

/// Macroscopic density rho(x, sigma) on M cells of the periodic unit torus.
/// Values live at cell centers x_i = (i + 1/2) / M.
class DensityField {
public:
    using Profile = std::function<double(double x, Spin s)>;

    DensityField() = default;
    explicit DensityField(std::size_t grid_size, double plus_value = 0.0, double minus_value = 0.0);
    DensityField(std::vector<double> plus, std::vector<double> minus);

    /// Samples a closed-form profile at the cell centers.
    static DensityField from_profile(std::size_t grid_size, const Profile& profile);

    std::size_t grid_size() const { return values_[0].size(); }
    double dx() const { return 1.0 / static_cast<double>(grid_size()); }
    double center(std::size_t i) const { return (static_cast<double>(i) + 0.5) * dx(); }

    double operator()(std::size_t i, Spin s) const { return values_[layer(s)][i]; }
    double& operator()(std::size_t i, Spin s) { return values_[layer(s)][i]; }
    std::span<const double> layer_values(Spin s) const { return values_[layer(s)]; }
    std::span<double> layer_values(Spin s) { return values_[layer(s)]; }

    double mass(Spin s) const;
    double total_mass() const { return mass(Spin::plus) + mass(Spin::minus); }
    /// (mass(+1) - mass(-1)) / total; 0 when the total mass vanishes.
    double magnetization() const;
    double min_value() const;

    /// Cell-midpoint quadrature of sum_sigma int f(x, sigma) rho(x, sigma) dx.
    double pair(const Profile& f) const;

    friend bool operator==(const DensityField&, const DensityField&) = default;

private:
    std::vector<double> values_[2];
};

double magnetization_of_density(const DensityField& rho);

/// Density slices on a uniform time grid t_k = k * dt.
class DensityTrajectory {
public:
    DensityTrajectory() = default;
    DensityTrajectory(double dt, std::vector<DensityField> slices);

    double dt() const { return dt_; }
    std::size_t size() const { return slices_.size(); }
    double time(std::size_t k) const { return dt_ * static_cast<double>(k); }
    double t_final() const { return slices_.empty() ? 0.0 : time(slices_.size() - 1); }
    std::size_t grid_size() const { return slices_.empty() ? 0 : slices_.front().grid_size(); }

    const DensityField& operator[](std::size_t k) const { return slices_[k]; }
    DensityField& operator[](std::size_t k) { return slices_[k]; }
    const DensityField& front() const { return slices_.front(); }
    const DensityField& back() const { return slices_.back(); }
    const std::vector<DensityField>& slices() const { return slices_; }

    void push_back(DensityField f);

    /// max_k |mass_k - mass_0| / mass_0 (0 for a zero-mass trajectory).
    double relative_mass_drift() const;

    friend bool operator==(const DensityTrajectory&, const DensityTrajectory&) = default;

private:
    double dt_ = 0.0;
    std::vector<DensityField> slices_;
};

/// Replaces every value by (1 - eps) rho + eps. eps must lie in [0, 1).
DensityTrajectory regularize_trajectory(const DensityTrajectory& traj, double epsilon);

}  // namespace rtp
