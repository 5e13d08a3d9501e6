#include "rtp/hydro/solver.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "rtp/core/errors.hpp"

namespace rtp::hydro {

namespace {

constexpr double kNegativeTolerance = 1e-12;

void check_nonnegative(const DensityField& f, const char* what) {
    for (Spin s : kSpins) {
        for (double v : f.layer_values(s)) {
            if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError(std::string(what) + " must be finite and >= 0");
        }
    }
}

/// Reaction half steps with either live or frozen magnetization.
class Reaction {
public:
    Reaction(const SolverSpec& spec, std::span<const double> frozen)
        : spec_(spec), m_size_(spec.grid_size), frozen_(frozen) {
        const auto& tilt = spec.tilt;
        tilted_ = tilt && !tilt->is_zero();
        constant_tilt_ = !tilted_ || tilt->is_time_constant();
        gain_plus_.assign(m_size_, 1.0);
        gain_minus_.assign(m_size_, 1.0);
        if (tilted_ && constant_tilt_) fill_tilt(0.0);
        for (auto& v : k_) {
            v[0].resize(m_size_);
            v[1].resize(m_size_);
        }
        stage_[0].resize(m_size_);
        stage_[1].resize(m_size_);
    }

    /// Advances f from t by h using `substeps` RK4 steps.
    void advance(DensityField& f, double t, double h, std::size_t substeps) {
        const double step = h / static_cast<double>(substeps);
        for (std::size_t j = 0; j < substeps; ++j) rk4(f, t + static_cast<double>(j) * step, step);
    }

    const std::vector<double>& stage_magnetization() const { return stages_; }

private:
    void fill_tilt(double t) {
        for (std::size_t i = 0; i < m_size_; ++i) {
            const double x = (static_cast<double>(i) + 0.5) / static_cast<double>(m_size_);
            const double tilde = spec_.tilt->tilde(t, x);
            gain_plus_[i] = std::exp(tilde);    // multiplies the -1 -> +1 rate
            gain_minus_[i] = std::exp(-tilde);  // multiplies the +1 -> -1 rate
        }
    }

    /// Records m of the given stage field; returns the coefficient magnetization
    /// (the frozen value when one is supplied).
    double next_magnetization(std::span<const double> plus, std::span<const double> minus) {
        double mp = 0.0, mm = 0.0;
        for (std::size_t i = 0; i < m_size_; ++i) {
            mp += plus[i];
            mm += minus[i];
        }
        const double total = mp + mm;
        const double live = total > 0.0 ? std::clamp((mp - mm) / total, -1.0, 1.0) : 0.0;
        stages_.push_back(live);
        if (frozen_.empty()) return live;
        if (cursor_ >= frozen_.size()) throw ConfigurationError("frozen magnetization series is too short");
        return frozen_[cursor_++];
    }

    // d rho(+1) = c(-1,m) e^{H~} rho(-1) - c(+1,m) e^{-H~} rho(+1); d rho(-1) = -d rho(+1)
    void rhs(std::span<const double> plus, std::span<const double> minus, double t, std::array<std::vector<double>, 2>& out) {
        const double m = next_magnetization(plus, minus);
        if (tilted_ && !constant_tilt_) fill_tilt(t);
        const double c_plus = spec_.reaction_scale * spec_.rate_family.evaluate_unchecked(Spin::plus, m);
        const double c_minus = spec_.reaction_scale * spec_.rate_family.evaluate_unchecked(Spin::minus, m);
        for (std::size_t i = 0; i < m_size_; ++i) {
            const double flux = c_minus * gain_plus_[i] * minus[i] - c_plus * gain_minus_[i] * plus[i];
            out[0][i] = flux;
            out[1][i] = -flux;
        }
    }

    void rk4(DensityField& f, double t, double h) {
        auto plus = f.layer_values(Spin::plus);
        auto minus = f.layer_values(Spin::minus);
        rhs(plus, minus, t, k_[0]);
        combine(plus, minus, 0.5 * h, k_[0]);
        rhs(stage_[0], stage_[1], t + 0.5 * h, k_[1]);
        combine(plus, minus, 0.5 * h, k_[1]);
        rhs(stage_[0], stage_[1], t + 0.5 * h, k_[2]);
        combine(plus, minus, h, k_[2]);
        rhs(stage_[0], stage_[1], t + h, k_[3]);
        const double w = h / 6.0;
        for (std::size_t i = 0; i < m_size_; ++i) {
            plus[i] += w * (k_[0][0][i] + 2.0 * k_[1][0][i] + 2.0 * k_[2][0][i] + k_[3][0][i]);
            minus[i] += w * (k_[0][1][i] + 2.0 * k_[1][1][i] + 2.0 * k_[2][1][i] + k_[3][1][i]);
        }
    }

    void combine(std::span<const double> plus, std::span<const double> minus, double a,
                 const std::array<std::vector<double>, 2>& k) {
        for (std::size_t i = 0; i < m_size_; ++i) {
            stage_[0][i] = plus[i] + a * k[0][i];
            stage_[1][i] = minus[i] + a * k[1][i];
        }
    }

    const SolverSpec& spec_;
    std::size_t m_size_;
    std::span<const double> frozen_;
    std::size_t cursor_ = 0;
    bool tilted_ = false;
    bool constant_tilt_ = true;
    std::vector<double> gain_plus_, gain_minus_;
    std::array<std::array<std::vector<double>, 2>, 4> k_;
    std::array<std::vector<double>, 2> stage_;
    std::vector<double> stages_;
};

void shift(DensityField& f) {
    auto plus = f.layer_values(Spin::plus);
    auto minus = f.layer_values(Spin::minus);
    std::rotate(plus.rbegin(), plus.rbegin() + 1, plus.rend());  // i -> i + 1
    std::rotate(minus.begin(), minus.begin() + 1, minus.end());  // i -> i - 1
}

SolveResult run(const SolverSpec& spec, std::span<const double> frozen) {
    spec.validate();
    const std::size_t steps = spec.n_steps();
    const double dt = spec.dt();
    Reaction reaction(spec, frozen);

    DensityField f = spec.initial;
    std::vector<DensityField> slices{f};
    SolveResult out;
    out.magnetization.push_back(f.magnetization());
    double min_value = f.min_value();

    for (std::size_t n = 0; n < steps; ++n) {
        const double t = static_cast<double>(n) * dt;
        reaction.advance(f, t, 0.5 * dt, spec.reaction_substeps);
        shift(f);
        reaction.advance(f, t + 0.5 * dt, 0.5 * dt, spec.reaction_substeps);
        const double lo = f.min_value();
        if (lo < -kNegativeTolerance) {
            throw StabilityError("reaction step produced a negative density (" + std::to_string(lo) +
                                 "); increase reaction_substeps");
        }
        min_value = std::min(min_value, lo);
        if ((n + 1) % spec.stride == 0) {
            slices.push_back(f);
            out.magnetization.push_back(f.magnetization());
        }
    }
    out.trajectory = DensityTrajectory(dt * static_cast<double>(spec.stride), std::move(slices));
    out.stage_magnetization = reaction.stage_magnetization();
    out.mass_drift = out.trajectory.relative_mass_drift();
    out.min_value = min_value;
    return out;
}

}  // namespace

void SolverSpec::validate() const {
    if (grid_size == 0) throw ConfigurationError("grid size must be positive");
    if (reaction_substeps == 0) throw ConfigurationError("reaction substeps must be >= 1");
    if (!(t_final >= 0.0) || !std::isfinite(t_final)) throw ConfigurationError("t_final must be finite and >= 0");
    if (initial.grid_size() != grid_size) throw ConfigurationError("initial density has the wrong grid size");
    if (stride == 0 || n_steps() % stride != 0) throw ConfigurationError("stride must divide the number of steps");
    if (!(reaction_scale >= 0.0)) throw ConfigurationError("reaction scale must be >= 0");
    check_nonnegative(initial, "initial density");
}

std::size_t SolverSpec::n_steps() const {
    return static_cast<std::size_t>(std::llround(t_final * static_cast<double>(grid_size)));
}

SolveResult solve_detailed(const SolverSpec& spec) { return run(spec, {}); }

DensityTrajectory solve_perturbed(const SolverSpec& spec) { return run(spec, {}).trajectory; }

DensityTrajectory solve_hydrodynamic(const SolverSpec& spec) {
    SolverSpec plain = spec;
    plain.tilt.reset();
    return run(plain, {}).trajectory;
}

SolveResult solve_frozen(const SolverSpec& spec, std::span<const double> stage_magnetization) {
    if (stage_magnetization.empty() && spec.n_steps() > 0) {
        throw ConfigurationError("frozen solve needs a magnetization series");
    }
    return run(spec, stage_magnetization);
}

std::vector<DensityTrajectory> picard_iterate(const SolverSpec& spec, std::size_t n_iterations) {
    if (n_iterations == 0) throw ConfigurationError("picard_iterate needs at least one iteration");
    spec.validate();
    const std::size_t slices = spec.n_steps() / spec.stride + 1;
    std::vector<DensityTrajectory> out;
    out.emplace_back(spec.dt() * static_cast<double>(spec.stride), std::vector<DensityField>(slices, spec.initial));

    const std::size_t n_stages = spec.n_steps() * 2 * spec.reaction_substeps * 4;
    std::vector<double> stages(n_stages, spec.initial.magnetization());
    for (std::size_t k = 0; k < n_iterations; ++k) {
        SolveResult next = run(spec, stages);
        stages = std::move(next.stage_magnetization);
        out.push_back(std::move(next.trajectory));
    }
    return out;
}

double l1_distance(const DensityField& a, const DensityField& b) {
    if (a.grid_size() != b.grid_size()) throw ConfigurationError("l1_distance: grid sizes differ");
    double acc = 0.0;
    for (Spin s : kSpins) {
        const auto av = a.layer_values(s);
        const auto bv = b.layer_values(s);
        for (std::size_t i = 0; i < av.size(); ++i) acc += std::abs(av[i] - bv[i]);
    }
    return acc * a.dx();
}

double l1_distance(const DensityTrajectory& a, const DensityTrajectory& b) {
    if (a.size() != b.size()) throw ConfigurationError("l1_distance: trajectories have different lengths");
    double out = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) out = std::max(out, l1_distance(a[k], b[k]));
    return out;
}

DensityField restrict_field(const DensityField& fine, std::size_t grid_size) {
    const std::size_t n = fine.grid_size();
    if (grid_size == 0 || n % grid_size != 0) throw ConfigurationError("restriction grid must divide the field grid");
    const std::size_t ratio = n / grid_size;
    DensityField out(grid_size);
    for (Spin s : kSpins) {
        const auto src = fine.layer_values(s);
        auto dst = out.layer_values(s);
        for (std::size_t i = 0; i < n; ++i) dst[i / ratio] += src[i];
        for (double& v : dst) v /= static_cast<double>(ratio);
    }
    return out;
}

}  // namespace rtp::hydro
