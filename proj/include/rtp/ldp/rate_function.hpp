#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rtp/core/density.hpp"
#include "rtp/core/perturbation.hpp"
#include "rtp/core/rate_family.hpp"

namespace rtp::ldp {

/// Values on the (t_k, x_i) grid of a trajectory, time-major.
struct SpaceTimeGrid {
    std::size_t n_times = 0;
    std::size_t grid_size = 0;
    double dt = 0.0;
    std::vector<double> values;

    SpaceTimeGrid() = default;
    SpaceTimeGrid(std::size_t times, std::size_t grid, double step)
        : n_times(times), grid_size(grid), dt(step), values(times * grid, 0.0) {}

    double operator()(std::size_t k, std::size_t i) const { return values[k * grid_size + i]; }
    double& operator()(std::size_t k, std::size_t i) { return values[k * grid_size + i]; }
    double sup_norm() const;
};

/// g(t, x, sigma) = d_t rho + sigma d_x rho split as sigma f + h.
struct FluxDecomposition {
    SpaceTimeGrid f;
    SpaceTimeGrid h_residual;
    SpaceTimeGrid g_plus;
    SpaceTimeGrid g_minus;
    /// sup over t of the L1-in-x norms.
    double f_norm = 0.0;
    double h_residual_norm = 0.0;
};

/// Reconstructed tilt H~ = -log Psi(., +1) with the reciprocity diagnostics.
struct TiltReconstruction {
    SpaceTimeGrid tilde;
    /// max |Psi(+1) Psi(-1) - 1|.
    double reciprocal_error = 0.0;
    double min_psi = 0.0;
};

/// <rho_hat, log(rho_hat / rho)> - <rho_hat - rho, 1> by cell sums; +infinity
/// when rho vanishes on a cell where rho_hat does not.
double static_rate(const DensityField& rho_hat, const DensityField& rho_ref);

/// <a_T, G_T> - <a_0, G_0> - int <a_t, (d_t + sigma d_x) G_t> dt (trapezoid in t).
double linear_functional_ell(const DensityTrajectory& traj, const PerturbationField& g);

/// ell(a; G) - int <a_t, c(sigma, m_t)(e^{-sigma G~} - 1)> dt.
double dynamic_rate_with_G(const DensityTrajectory& traj, const PerturbationField& g, const SwitchRateFamily& rates);

/// Second-order differences: central in x (periodic) and t, one-sided at the
/// time endpoints. Needs >= 3 slices.
FluxDecomposition flux_extraction(const DensityTrajectory& traj);

/// Positive root Psi of rho(s) c(s) Psi^2 + s f Psi - rho(-s) c(-s) = 0 per
/// (t, x, s). Throws DomainError on a non-positive density cell.
TiltReconstruction psi_reconstruction(const DensityTrajectory& traj, const FluxDecomposition& flux,
                                      const SwitchRateFamily& rates);

/// int <a_t, (e^{-sigma H~}(-sigma H~ - 1) + 1) c(sigma, m_t)> dt for a tilt
/// given on the trajectory grid.
double dynamic_rate_exact(const DensityTrajectory& traj, const SpaceTimeGrid& tilde, const SwitchRateFamily& rates);
/// Same with H~ evaluated from a field at the cell centers.
double dynamic_rate_exact(const DensityTrajectory& traj, const PerturbationField& tilt, const SwitchRateFamily& rates);

struct NamedField {
    std::string id;
    PerturbationField field;
};

struct SweepResult {
    double best_value = 0.0;
    std::string best_id;
    std::vector<double> values;
};

/// Max of dynamic_rate_with_G over a finite family. Throws ConfigurationError
/// on an empty family.
SweepResult variational_lower_bound_sweep(const DensityTrajectory& traj, const std::vector<NamedField>& family,
                                          const SwitchRateFamily& rates);

/// `count` fields with one Fourier mode on one layer: k in 0..max_k, cos or
/// sin, amplitude uniform in [-max_amplitude, max_amplitude] plus a linear-in-t
/// part of at most half that size.
std::vector<NamedField> random_single_mode_family(std::size_t count, std::uint64_t seed, int max_k = 4,
                                                  double max_amplitude = 0.6);

struct RateOptions {
    /// Forced regularization; when absent it is applied automatically with
    /// `auto_epsilon` if a cell falls below floor_fraction * mean density.
    std::optional<double> epsilon;
    double floor_fraction = 1e-8;
    double auto_epsilon = 1e-6;
    /// h_residual_norm above singular_threshold * (1 + f_norm) flags the
    /// trajectory as a direction of infinite rate. The slack absorbs the
    /// O(dx^2) differencing error of smooth solver output on coarse grids.
    double singular_threshold = 5e-2;
};

struct RateReport {
    double h0 = 0.0;
    double i_tr = 0.0;
    double total = 0.0;
    std::string method = "exact-formula";
    TiltReconstruction reconstruction;
    double h_residual_norm = 0.0;
    double f_norm = 0.0;
    double epsilon = 0.0;
    bool regularized = false;
    bool singular = false;
    /// i_tr recomputed on every other time slice, for a refinement estimate.
    std::optional<double> i_tr_coarse;

    nlohmann::json to_json(bool include_grid = true) const;
};

RateReport total_rate(const DensityTrajectory& traj, const DensityField& rho_ref, const SwitchRateFamily& rates,
                      const RateOptions& options = {});

}  // namespace rtp::ldp
