#pragma once

#include <memory>
#include <vector>

#include "rtp/core/lattice.hpp"
#include "rtp/core/perturbation.hpp"
#include "rtp/core/rate_family.hpp"

namespace rtp::sim {

/// Per-particle integrand of an additive path functional
///
///     int_0^T sum_{x,sigma} eta_t(x,sigma) [ a(t,x,sigma) + c(sigma, m_t) b(t,x,sigma) ] dt.
///
/// The split into a and b lets the integrator handle the mean-field factor
/// c(sigma, m_t), which changes at every flip, without touching every site.
class SiteIntegrand {
public:
    virtual ~SiteIntegrand() = default;
    virtual bool time_constant() const = 0;
    virtual double a(double t, std::size_t x, Spin s) const = 0;
    virtual double b(double t, std::size_t x, Spin s) const = 0;
};

/// e^{-N<pi,H>} (d/dt + L_N) e^{N<pi,H>} for the untilted generator.
std::unique_ptr<SiteIntegrand> exponential_martingale_integrand(const PerturbationField& h, std::size_t n_sites);

/// <pi, (d/dt + sigma d/dx) H> + <pi, c (e^{-sigma H~} - 1)>, scaled by N.
std::unique_ptr<SiteIntegrand> path_rate_integrand(const PerturbationField& h, std::size_t n_sites);

/// (d/dt + L^K) <pi, G> for the path generator tilted by K (K = 0: plain dynamics).
std::unique_ptr<SiteIntegrand> dynkin_integrand(const PerturbationField& g, const PerturbationField& tilt,
                                                std::size_t n_sites);

/// Carre du champ of <pi, G> under the generator tilted by K.
std::unique_ptr<SiteIntegrand> carre_du_champ_integrand(const PerturbationField& g, const PerturbationField& tilt,
                                                        std::size_t n_sites);

/// <pi, H_t> = (1/N) sum eta(x,sigma) H_t(x/N, sigma).
double pairing(const LatticeConfiguration& cfg, const PerturbationField& h, double t);

/// Exact integration of several SiteIntegrands along a piecewise-constant path.
///
/// Each site remembers when its occupation last changed; its contribution is
/// integrated lazily when the occupation changes again (or on flush). The
/// magnetization history is kept as a list of constant segments so that
/// time-dependent integrands see the correct c(sigma, m_t). Time-constant
/// integrands use cumulative integrals of c(sigma, m_t) and cost O(1) per touch;
/// time-dependent ones use adaptive Gauss-Legendre quadrature per segment.
class PathIntegrator {
public:
    PathIntegrator(SwitchRateFamily rates, std::vector<const SiteIntegrand*> integrands);

    void start(const LatticeConfiguration& cfg, double t0);
    /// Integrates site (x, s) up to t using its current (pre-event) occupation.
    void touch(const LatticeConfiguration& cfg, std::size_t x, Spin s, double t);
    /// Starts a new magnetization segment at t (call after a flip was applied).
    void magnetization_changed(double t, double m);
    /// Integrates every site up to t.
    void flush(const LatticeConfiguration& cfg, double t);

    double value(std::size_t j) const { return totals_[j]; }
    std::size_t size() const { return totals_.size(); }

private:
    double cumulative_rate(Spin s, double t) const;
    void integrate_site(const LatticeConfiguration& cfg, std::size_t x, Spin s, double t);

    SwitchRateFamily rates_;
    std::vector<const SiteIntegrand*> integrands_;
    std::vector<double> totals_;
    std::size_t n_sites_ = 0;

    std::vector<bool> constant_;
    // cached a, b for time-constant integrands: [integrand][layer][x]
    std::vector<std::array<std::vector<double>, 2>> cached_a_;
    std::vector<std::array<std::vector<double>, 2>> cached_b_;

    std::array<std::vector<double>, 2> site_time_;
    std::array<std::vector<std::size_t>, 2> site_segment_;
    std::array<std::vector<double>, 2> site_cumulative_;

    std::vector<double> segment_start_;
    std::vector<double> segment_m_;
    std::array<std::vector<double>, 2> segment_cumulative_;
    std::array<double, 2> segment_rate_{};
};

}  // namespace rtp::sim
