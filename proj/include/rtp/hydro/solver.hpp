#pragma once

#include <optional>
#include <span>
#include <vector>

#include "rtp/core/density.hpp"
#include "rtp/core/perturbation.hpp"
#include "rtp/core/rate_family.hpp"

namespace rtp::hydro {

/// Discretization of the transport-reaction system on M cells.
///
/// One macro step has length dt = dx = 1/M: a half step of reaction, an exact
/// cyclic shift (sigma = +1 one cell right, sigma = -1 one cell left) and a
/// second half step of reaction. Each reaction half step is split into
/// `reaction_substeps` classical RK4 steps. The number of macro steps is
/// round(T * M); the stored trajectory reports the time actually reached.
struct SolverSpec {
    std::size_t grid_size = 0;
    std::size_t reaction_substeps = 1;
    double t_final = 1.0;
    SwitchRateFamily rate_family;
    std::optional<PerturbationField> tilt;
    DensityField initial;
    /// Store every `stride`-th macro step; must divide the step count.
    std::size_t stride = 1;
    /// Multiplies every flip rate. 0 switches the reaction off (test hook).
    double reaction_scale = 1.0;

    /// Throws ConfigurationError / DomainError on invalid input.
    void validate() const;
    double dt() const { return 1.0 / static_cast<double>(grid_size); }
    std::size_t n_steps() const;
};

struct SolveResult {
    DensityTrajectory trajectory;
    /// m of the field at every RK stage, in evaluation order.
    std::vector<double> stage_magnetization;
    /// m at each stored slice.
    std::vector<double> magnetization;
    double mass_drift = 0.0;
    double min_value = 0.0;
};

SolveResult solve_detailed(const SolverSpec& spec);

/// Solution of the perturbed system (the tilt may be absent or zero).
DensityTrajectory solve_perturbed(const SolverSpec& spec);

/// Solution with the tilt ignored.
DensityTrajectory solve_hydrodynamic(const SolverSpec& spec);

/// Solves the linear system obtained by freezing c(sigma, m_t) at the given
/// stage magnetizations, which must come from a run with the same spec.
SolveResult solve_frozen(const SolverSpec& spec, std::span<const double> stage_magnetization);

/// Picard iterates rho^(0), ..., rho^(n). rho^(0) is the initial profile held
/// constant in time; rho^(k+1) solves the frozen system with the magnetization
/// of rho^(k).
std::vector<DensityTrajectory> picard_iterate(const SolverSpec& spec, std::size_t n_iterations);

/// sum_sigma sum_i |a - b| dx.
double l1_distance(const DensityField& a, const DensityField& b);
/// sup over slices of the field distance.
double l1_distance(const DensityTrajectory& a, const DensityTrajectory& b);

/// Cell averages of a field on a grid that divides the field's grid.
DensityField restrict_field(const DensityField& fine, std::size_t grid_size);

}  // namespace rtp::hydro
