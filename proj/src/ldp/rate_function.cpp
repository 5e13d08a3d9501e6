#include "rtp/ldp/rate_function.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "rtp/core/errors.hpp"

namespace rtp::ldp {

namespace {

double trapezoid_weight(std::size_t k, std::size_t n, double dt) {
    if (n < 2) return 0.0;
    return (k == 0 || k + 1 == n) ? 0.5 * dt : dt;
}

double pair_field(const DensityField& rho, const PerturbationField& g, double t) {
    double acc = 0.0;
    for (std::size_t i = 0; i < rho.grid_size(); ++i) {
        const double x = rho.center(i);
        for (Spin s : kSpins) acc += rho(i, s) * g.value(t, x, s);
    }
    return acc * rho.dx();
}

// <rho, (e^{-sigma u}(-sigma u - 1) + 1) c(sigma, m)> with u = H~ per cell
template <class Tilde>
double exact_integrand(const DensityField& rho, const SwitchRateFamily& rates, Tilde tilde) {
    const double m = rho.magnetization();
    double acc = 0.0;
    for (std::size_t i = 0; i < rho.grid_size(); ++i) {
        const double h = tilde(i);
        for (Spin s : kSpins) {
            const double u = sign(s) * h;
            // e^{-u}(-u - 1) + 1 >= 0, written to avoid cancellation near u = 0
            const double weight = -std::expm1(-u) - u * std::exp(-u);
            acc += rho(i, s) * weight * rates.evaluate_unchecked(s, m);
        }
    }
    return acc * rho.dx();
}

DensityTrajectory every_other_slice(const DensityTrajectory& traj) {
    std::vector<DensityField> slices;
    for (std::size_t k = 0; k < traj.size(); k += 2) slices.push_back(traj[k]);
    return DensityTrajectory(2.0 * traj.dt(), std::move(slices));
}

double exact_from_reconstruction(const DensityTrajectory& traj, const SwitchRateFamily& rates, double* h_norm,
                                 double* f_norm, TiltReconstruction* rec) {
    const auto flux = flux_extraction(traj);
    auto tilt = psi_reconstruction(traj, flux, rates);
    const double value = dynamic_rate_exact(traj, tilt.tilde, rates);
    if (h_norm) *h_norm = flux.h_residual_norm;
    if (f_norm) *f_norm = flux.f_norm;
    if (rec) *rec = std::move(tilt);
    return value;
}

}  // namespace

double SpaceTimeGrid::sup_norm() const {
    double out = 0.0;
    for (double v : values) out = std::max(out, std::abs(v));
    return out;
}

double static_rate(const DensityField& rho_hat, const DensityField& rho_ref) {
    if (rho_hat.grid_size() != rho_ref.grid_size()) throw ConfigurationError("static_rate: grid sizes differ");
    double acc = 0.0;
    for (Spin s : kSpins) {
        const auto a = rho_hat.layer_values(s);
        const auto r = rho_ref.layer_values(s);
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (!(a[i] >= 0.0) || !(r[i] >= 0.0)) throw DomainError("static_rate: densities must be >= 0");
            if (r[i] == 0.0) {
                if (a[i] > 0.0) return std::numeric_limits<double>::infinity();
                continue;
            }
            const double entropy = a[i] > 0.0 ? a[i] * std::log(a[i] / r[i]) : 0.0;
            acc += entropy - a[i] + r[i];
        }
    }
    return std::max(0.0, acc * rho_hat.dx());
}

double linear_functional_ell(const DensityTrajectory& traj, const PerturbationField& g) {
    const std::size_t n = traj.size();
    if (n == 0) return 0.0;
    double integral = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double w = trapezoid_weight(k, n, traj.dt());
        if (w == 0.0) continue;
        const DensityField& rho = traj[k];
        const double t = traj.time(k);
        double acc = 0.0;
        for (std::size_t i = 0; i < rho.grid_size(); ++i) {
            const double x = rho.center(i);
            for (Spin s : kSpins) {
                acc += rho(i, s) * (g.time_derivative(t, x, s) + sign(s) * g.space_derivative(t, x, s));
            }
        }
        integral += w * acc * rho.dx();
    }
    return pair_field(traj.back(), g, traj.t_final()) - pair_field(traj.front(), g, 0.0) - integral;
}

double dynamic_rate_with_G(const DensityTrajectory& traj, const PerturbationField& g, const SwitchRateFamily& rates) {
    const std::size_t n = traj.size();
    double flips = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double w = trapezoid_weight(k, n, traj.dt());
        if (w == 0.0) continue;
        const DensityField& rho = traj[k];
        const double t = traj.time(k);
        const double m = rho.magnetization();
        double acc = 0.0;
        for (std::size_t i = 0; i < rho.grid_size(); ++i) {
            const double tilde = g.tilde(t, rho.center(i));
            for (Spin s : kSpins) {
                acc += rho(i, s) * rates.evaluate_unchecked(s, m) * std::expm1(-sign(s) * tilde);
            }
        }
        flips += w * acc * rho.dx();
    }
    return linear_functional_ell(traj, g) - flips;
}

FluxDecomposition flux_extraction(const DensityTrajectory& traj) {
    const std::size_t n = traj.size();
    if (n < 3) throw ConfigurationError("flux extraction needs at least 3 time slices");
    const std::size_t m = traj.grid_size();
    const double dt = traj.dt();
    const double dx = 1.0 / static_cast<double>(m);

    FluxDecomposition out;
    out.f = SpaceTimeGrid(n, m, dt);
    out.h_residual = SpaceTimeGrid(n, m, dt);
    out.g_plus = SpaceTimeGrid(n, m, dt);
    out.g_minus = SpaceTimeGrid(n, m, dt);
    for (std::size_t k = 0; k < n; ++k) {
        double f_l1 = 0.0, h_l1 = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const std::size_t left = (i + m - 1) % m, right = (i + 1) % m;
            double g[2];
            for (Spin s : kSpins) {
                double d_t;
                if (k == 0) {
                    d_t = (-3.0 * traj[0](i, s) + 4.0 * traj[1](i, s) - traj[2](i, s)) / (2.0 * dt);
                } else if (k + 1 == n) {
                    d_t = (3.0 * traj[k](i, s) - 4.0 * traj[k - 1](i, s) + traj[k - 2](i, s)) / (2.0 * dt);
                } else {
                    d_t = (traj[k + 1](i, s) - traj[k - 1](i, s)) / (2.0 * dt);
                }
                const double d_x = (traj[k](right, s) - traj[k](left, s)) / (2.0 * dx);
                g[layer(s)] = d_t + sign(s) * d_x;
            }
            const double gp = g[layer(Spin::plus)], gm = g[layer(Spin::minus)];
            out.g_plus(k, i) = gp;
            out.g_minus(k, i) = gm;
            out.f(k, i) = 0.5 * (gp - gm);
            out.h_residual(k, i) = 0.5 * (gp + gm);
            f_l1 += std::abs(out.f(k, i));
            h_l1 += std::abs(out.h_residual(k, i));
        }
        out.f_norm = std::max(out.f_norm, f_l1 * dx);
        out.h_residual_norm = std::max(out.h_residual_norm, h_l1 * dx);
    }
    return out;
}

TiltReconstruction psi_reconstruction(const DensityTrajectory& traj, const FluxDecomposition& flux,
                                      const SwitchRateFamily& rates) {
    const std::size_t n = traj.size();
    const std::size_t m = traj.grid_size();
    if (flux.f.n_times != n || flux.f.grid_size != m) {
        throw ConfigurationError("flux decomposition does not match the trajectory grid");
    }
    TiltReconstruction out;
    out.tilde = SpaceTimeGrid(n, m, traj.dt());
    out.min_psi = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n; ++k) {
        const DensityField& rho = traj[k];
        const double mag = rho.magnetization();
        const double c_plus = rates.evaluate_unchecked(Spin::plus, mag);
        const double c_minus = rates.evaluate_unchecked(Spin::minus, mag);
        for (std::size_t i = 0; i < m; ++i) {
            const double a = rho(i, Spin::plus) * c_plus;    // rho(+1) c(+1)
            const double b = rho(i, Spin::minus) * c_minus;  // rho(-1) c(-1)
            if (!(a > 0.0) || !(b > 0.0)) {
                throw DomainError("Psi reconstruction needs a strictly positive density; regularize first");
            }
            const double f = flux.f(k, i);
            const double disc = f * f + 4.0 * a * b;
            if (!(disc > 0.0)) throw StabilityError("Psi reconstruction: non-positive discriminant");
            const double root = std::sqrt(disc);
            // positive root of A Psi^2 + s f Psi - B = 0 in the cancellation-free form
            auto psi = [root](double s_f, double own, double other) {
                return s_f > 0.0 ? 2.0 * other / (s_f + root) : (-s_f + root) / (2.0 * own);
            };
            const double psi_plus = psi(f, a, b);
            const double psi_minus = psi(-f, b, a);
            out.reciprocal_error = std::max(out.reciprocal_error, std::abs(psi_plus * psi_minus - 1.0));
            out.min_psi = std::min({out.min_psi, psi_plus, psi_minus});
            out.tilde(k, i) = -std::log(psi_plus);
        }
    }
    return out;
}

double dynamic_rate_exact(const DensityTrajectory& traj, const SpaceTimeGrid& tilde, const SwitchRateFamily& rates) {
    const std::size_t n = traj.size();
    if (tilde.n_times != n || tilde.grid_size != traj.grid_size()) {
        throw ConfigurationError("tilt grid does not match the trajectory grid");
    }
    double out = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double w = trapezoid_weight(k, n, traj.dt());
        if (w == 0.0) continue;
        out += w * exact_integrand(traj[k], rates, [&](std::size_t i) { return tilde(k, i); });
    }
    return out;
}

double dynamic_rate_exact(const DensityTrajectory& traj, const PerturbationField& tilt, const SwitchRateFamily& rates) {
    const std::size_t n = traj.size();
    double out = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double w = trapezoid_weight(k, n, traj.dt());
        if (w == 0.0) continue;
        const double t = traj.time(k);
        out += w * exact_integrand(traj[k], rates, [&](std::size_t i) { return tilt.tilde(t, traj[k].center(i)); });
    }
    return out;
}

SweepResult variational_lower_bound_sweep(const DensityTrajectory& traj, const std::vector<NamedField>& family,
                                          const SwitchRateFamily& rates) {
    if (family.empty()) throw ConfigurationError("variational sweep needs a non-empty field family");
    SweepResult out;
    out.best_value = -std::numeric_limits<double>::infinity();
    for (const auto& [id, field] : family) {
        const double v = dynamic_rate_with_G(traj, field, rates);
        out.values.push_back(v);
        if (v > out.best_value) {
            out.best_value = v;
            out.best_id = id;
        }
    }
    return out;
}

std::vector<NamedField> random_single_mode_family(std::size_t count, std::uint64_t seed, int max_k,
                                                  double max_amplitude) {
    std::mt19937_64 gen(seed);
    std::uniform_int_distribution<int> wave(0, max_k);
    std::uniform_real_distribution<double> amp(-max_amplitude, max_amplitude);
    std::vector<NamedField> out;
    for (std::size_t j = 0; j < count; ++j) {
        const Spin s = (gen() & 1) ? Spin::plus : Spin::minus;
        FourierMode mode;
        mode.k = wave(gen);
        const bool use_sin = mode.k > 0 && (gen() & 1);
        std::vector<double> coeffs{amp(gen), 0.5 * amp(gen)};
        (use_sin ? mode.sin_coeffs : mode.cos_coeffs) = coeffs;
        std::vector<FourierMode> plus, minus;
        (s == Spin::plus ? plus : minus).push_back(mode);
        out.push_back({"random-" + std::to_string(j), PerturbationField(plus, minus)});
    }
    return out;
}

nlohmann::json RateReport::to_json(bool include_grid) const {
    nlohmann::json doc = {
        {"h0", h0},
        {"i_tr", i_tr},
        {"total", total},
        {"method", method},
        {"h_residual_norm", h_residual_norm},
        {"f_norm", f_norm},
        {"epsilon", epsilon},
        {"regularized", regularized},
        {"singular", singular},
        {"psi_reciprocal_error", reconstruction.reciprocal_error},
        {"psi_min", reconstruction.min_psi},
        {"reconstructed_tilt_sup", reconstruction.tilde.sup_norm()},
    };
    doc["i_tr_coarse"] = i_tr_coarse ? nlohmann::json(*i_tr_coarse) : nlohmann::json(nullptr);
    doc["refinement_delta"] = i_tr_coarse ? nlohmann::json(std::abs(i_tr - *i_tr_coarse)) : nlohmann::json(nullptr);
    if (include_grid) {
        doc["reconstructed_tilt"] = {{"n_times", reconstruction.tilde.n_times},
                                     {"grid_size", reconstruction.tilde.grid_size},
                                     {"dt", reconstruction.tilde.dt},
                                     {"values", reconstruction.tilde.values}};
    }
    return doc;
}

RateReport total_rate(const DensityTrajectory& traj, const DensityField& rho_ref, const SwitchRateFamily& rates,
                      const RateOptions& options) {
    if (traj.size() == 0) throw ConfigurationError("total_rate: empty trajectory");
    RateReport report;
    report.h0 = static_rate(traj.front(), rho_ref);

    double epsilon = 0.0;
    if (options.epsilon) {
        epsilon = *options.epsilon;
    } else {
        double floor_level = 0.0, lowest = std::numeric_limits<double>::infinity();
        for (const auto& slice : traj.slices()) {
            floor_level = std::max(floor_level, options.floor_fraction * slice.total_mass() / 2.0);
            lowest = std::min(lowest, slice.min_value());
        }
        if (lowest < floor_level) epsilon = options.auto_epsilon;
    }
    report.epsilon = epsilon;
    report.regularized = epsilon > 0.0;
    const DensityTrajectory work = report.regularized ? regularize_trajectory(traj, epsilon) : traj;

    report.i_tr = exact_from_reconstruction(work, rates, &report.h_residual_norm, &report.f_norm, &report.reconstruction);
    report.singular = report.h_residual_norm > options.singular_threshold * (1.0 + report.f_norm);
    if (work.size() >= 5 && work.size() % 2 == 1) {
        report.i_tr_coarse = exact_from_reconstruction(every_other_slice(work), rates, nullptr, nullptr, nullptr);
    }
    report.total = report.h0 + report.i_tr;
    return report;
}

}  // namespace rtp::ldp
