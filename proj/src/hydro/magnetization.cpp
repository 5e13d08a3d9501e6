#include "rtp/hydro/magnetization.hpp"

#include <algorithm>
#include <cmath>

#include "rtp/core/errors.hpp"

namespace rtp::hydro {

namespace {

constexpr double kBlowUp = 1e-10;

double drift(const SwitchRateFamily& rates, double m) {
    const double mc = std::clamp(m, -1.0, 1.0);
    return rates.evaluate_unchecked(Spin::minus, mc) * (1.0 - m) - rates.evaluate_unchecked(Spin::plus, mc) * (1.0 + m);
}

double slice_rhs(const DensityField& rho, double t, const std::optional<PerturbationField>& tilt,
                 const SwitchRateFamily& rates) {
    const double total = rho.total_mass();
    if (!(total > 0.0)) return 0.0;
    const double m = rho.magnetization();
    const bool tilted = tilt && !tilt->is_zero();
    double acc = 0.0;
    for (std::size_t i = 0; i < rho.grid_size(); ++i) {
        const double tilde = tilted ? tilt->tilde(t, rho.center(i)) : 0.0;
        for (Spin s : kSpins) {
            const double sg = sign(s);
            acc += rho(i, s) * (-2.0 * sg) * std::exp(-sg * tilde) * rates.evaluate_unchecked(s, m);
        }
    }
    return acc * rho.dx() / total;
}

}  // namespace

MagnetizationSeries integrate_magnetization_ode(const SwitchRateFamily& rates, double m0, double t_final,
                                                double dt) {
    if (!(m0 >= -1.0 && m0 <= 1.0)) throw DomainError("initial magnetization must lie in [-1, 1]");
    if (!(dt > 0.0) || !(t_final >= 0.0)) throw ConfigurationError("dt must be positive and T >= 0");
    const auto steps = static_cast<std::size_t>(std::max<long long>(std::llround(t_final / dt), t_final > 0 ? 1 : 0));
    const double h = steps > 0 ? t_final / static_cast<double>(steps) : dt;

    MagnetizationSeries out;
    out.dt = h;
    out.values.reserve(steps + 1);
    out.values.push_back(m0);
    double m = m0;
    for (std::size_t n = 0; n < steps; ++n) {
        const double k1 = drift(rates, m);
        const double k2 = drift(rates, m + 0.5 * h * k1);
        const double k3 = drift(rates, m + 0.5 * h * k2);
        const double k4 = drift(rates, m + h * k3);
        m += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        out.values.push_back(m);
        if (std::abs(m) > 1.0 + kBlowUp) {
            out.blow_up = true;
            break;
        }
    }
    return out;
}

double perturbed_magnetization_check(const DensityTrajectory& traj, const std::optional<PerturbationField>& tilt,
                                     const SwitchRateFamily& rates) {
    const std::size_t k_max = traj.size();
    if (k_max < 3) throw ConfigurationError("magnetization check needs at least 3 time slices");
    if (!(traj.front().total_mass() > 0.0)) return 0.0;

    std::vector<double> m(k_max);
    for (std::size_t k = 0; k < k_max; ++k) m[k] = traj[k].magnetization();
    const double dt = traj.dt();
    double worst = 0.0;
    for (std::size_t k = 0; k < k_max; ++k) {
        double dm;
        if (k == 0) {
            dm = (-3.0 * m[0] + 4.0 * m[1] - m[2]) / (2.0 * dt);
        } else if (k + 1 == k_max) {
            dm = (3.0 * m[k] - 4.0 * m[k - 1] + m[k - 2]) / (2.0 * dt);
        } else {
            dm = (m[k + 1] - m[k - 1]) / (2.0 * dt);
        }
        worst = std::max(worst, std::abs(dm - slice_rhs(traj[k], traj.time(k), tilt, rates)));
    }
    return worst;
}

}  // namespace rtp::hydro
