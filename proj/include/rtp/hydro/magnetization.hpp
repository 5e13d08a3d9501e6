#pragma once

#include <optional>
#include <vector>

#include "rtp/core/density.hpp"
#include "rtp/core/perturbation.hpp"
#include "rtp/core/rate_family.hpp"

namespace rtp::hydro {

struct MagnetizationSeries {
    double dt = 0.0;
    std::vector<double> values;  // m at t_k = k dt
    /// Set when |m| left [-1, 1] by more than 1e-10; the series stops there.
    bool blow_up = false;

    double final_value() const { return values.back(); }
};

/// RK4 for dm/dt = c(-1, m)(1 - m) - c(+1, m)(1 + m) with round(T / dt) steps
/// of length dt (the last step is shortened to land on T).
MagnetizationSeries integrate_magnetization_ode(const SwitchRateFamily& rates, double m0, double t_final, double dt);

/// Largest |dm/dt - rhs| along a solver trajectory, where dm/dt is taken by
/// second-order finite differences (one-sided at the ends) and the right side
/// is <rho_t, -2 sigma e^{-sigma H~} c(sigma, m)> / <rho_t, 1> on each slice.
/// Zero-mass trajectories return 0.
double perturbed_magnetization_check(const DensityTrajectory& traj, const std::optional<PerturbationField>& tilt,
                                     const SwitchRateFamily& rates);

}  // namespace rtp::hydro
