#include "rtp/sim/path_integrals.hpp"

#include <cmath>

#include "rtp/core/quadrature.hpp"

namespace rtp::sim {

namespace {

class LatticeIntegrand : public SiteIntegrand {
protected:
    explicit LatticeIntegrand(std::size_t n_sites) : n_(n_sites), inv_n_(1.0 / static_cast<double>(n_sites)) {}
    double pos(std::size_t x) const { return static_cast<double>(x) * inv_n_; }
    double next_pos(std::size_t x, Spin s) const {
        const std::size_t y = s == Spin::plus ? (x + 1) % n_ : (x + n_ - 1) % n_;
        return pos(y);
    }
    std::size_t n_;
    double inv_n_;
};

class ExponentialMartingale final : public LatticeIntegrand {
public:
    ExponentialMartingale(PerturbationField h, std::size_t n) : LatticeIntegrand(n), h_(std::move(h)) {}
    bool time_constant() const override { return h_.is_time_constant(); }
    double a(double t, std::size_t x, Spin s) const override {
        const double jump = h_.value(t, next_pos(x, s), s) - h_.value(t, pos(x), s);
        return h_.time_derivative(t, pos(x), s) + static_cast<double>(n_) * std::expm1(jump);
    }
    double b(double t, std::size_t x, Spin s) const override {
        return std::expm1(-sign(s) * h_.tilde(t, pos(x)));
    }

private:
    PerturbationField h_;
};

class PathRate final : public LatticeIntegrand {
public:
    PathRate(PerturbationField h, std::size_t n) : LatticeIntegrand(n), h_(std::move(h)) {}
    bool time_constant() const override { return h_.is_time_constant(); }
    double a(double t, std::size_t x, Spin s) const override {
        return h_.time_derivative(t, pos(x), s) + sign(s) * h_.space_derivative(t, pos(x), s);
    }
    double b(double t, std::size_t x, Spin s) const override {
        return std::expm1(-sign(s) * h_.tilde(t, pos(x)));
    }

private:
    PerturbationField h_;
};

class TiltedGeneratorIntegrand : public LatticeIntegrand {
public:
    TiltedGeneratorIntegrand(PerturbationField g, PerturbationField k, std::size_t n)
        : LatticeIntegrand(n), g_(std::move(g)), k_(std::move(k)), untilted_(k_.is_zero()) {}
    double jump_weight(double t, std::size_t x, Spin s) const {
        if (untilted_) return 1.0;
        return std::exp(k_.value(t, next_pos(x, s), s) - k_.value(t, pos(x), s));
    }
    double flip_weight(double t, std::size_t x, Spin s) const {
        if (untilted_) return 1.0;
        return std::exp(-sign(s) * k_.tilde(t, pos(x)));
    }
    double jump_increment(double t, std::size_t x, Spin s) const {
        return g_.value(t, next_pos(x, s), s) - g_.value(t, pos(x), s);
    }
    double flip_increment(double t, std::size_t x, Spin s) const {
        return g_.value(t, pos(x), flipped(s)) - g_.value(t, pos(x), s);
    }

public:
    bool time_constant() const override { return g_.is_time_constant() && k_.is_time_constant(); }

protected:
    PerturbationField g_;
    PerturbationField k_;
    bool untilted_;
};

class Dynkin final : public TiltedGeneratorIntegrand {
public:
    using TiltedGeneratorIntegrand::TiltedGeneratorIntegrand;
    double a(double t, std::size_t x, Spin s) const override {
        return inv_n_ * g_.time_derivative(t, pos(x), s) + jump_weight(t, x, s) * jump_increment(t, x, s);
    }
    double b(double t, std::size_t x, Spin s) const override {
        return inv_n_ * flip_weight(t, x, s) * flip_increment(t, x, s);
    }
};

class CarreDuChamp final : public TiltedGeneratorIntegrand {
public:
    using TiltedGeneratorIntegrand::TiltedGeneratorIntegrand;
    double a(double t, std::size_t x, Spin s) const override {
        // rate N * weight, increment (1/N) dG
        const double d = jump_increment(t, x, s);
        return inv_n_ * jump_weight(t, x, s) * d * d;
    }
    double b(double t, std::size_t x, Spin s) const override {
        const double d = inv_n_ * flip_increment(t, x, s);
        return flip_weight(t, x, s) * d * d;
    }
};

}  // namespace

std::unique_ptr<SiteIntegrand> exponential_martingale_integrand(const PerturbationField& h, std::size_t n_sites) {
    return std::make_unique<ExponentialMartingale>(h, n_sites);
}

std::unique_ptr<SiteIntegrand> path_rate_integrand(const PerturbationField& h, std::size_t n_sites) {
    return std::make_unique<PathRate>(h, n_sites);
}

std::unique_ptr<SiteIntegrand> dynkin_integrand(const PerturbationField& g, const PerturbationField& tilt,
                                                std::size_t n_sites) {
    return std::make_unique<Dynkin>(g, tilt, n_sites);
}

std::unique_ptr<SiteIntegrand> carre_du_champ_integrand(const PerturbationField& g, const PerturbationField& tilt,
                                                        std::size_t n_sites) {
    return std::make_unique<CarreDuChamp>(g, tilt, n_sites);
}

double pairing(const LatticeConfiguration& cfg, const PerturbationField& h, double t) {
    const double inv_n = 1.0 / static_cast<double>(cfg.n_sites());
    double acc = 0.0;
    for (Spin s : kSpins) {
        const auto& counts = cfg.layer_counts(s);
        for (std::size_t x = 0; x < counts.size(); ++x) {
            if (counts[x] != 0) acc += static_cast<double>(counts[x]) * h.value(t, static_cast<double>(x) * inv_n, s);
        }
    }
    return acc * inv_n;
}

PathIntegrator::PathIntegrator(SwitchRateFamily rates, std::vector<const SiteIntegrand*> integrands)
    : rates_(std::move(rates)), integrands_(std::move(integrands)), totals_(integrands_.size(), 0.0) {}

void PathIntegrator::start(const LatticeConfiguration& cfg, double t0) {
    n_sites_ = cfg.n_sites();
    std::fill(totals_.begin(), totals_.end(), 0.0);
    cached_a_.assign(integrands_.size(), {});
    cached_b_.assign(integrands_.size(), {});
    constant_.assign(integrands_.size(), false);
    for (std::size_t j = 0; j < integrands_.size(); ++j) {
        constant_[j] = integrands_[j]->time_constant();
        if (!constant_[j]) continue;
        for (Spin s : kSpins) {
            auto& av = cached_a_[j][layer(s)];
            auto& bv = cached_b_[j][layer(s)];
            av.resize(n_sites_);
            bv.resize(n_sites_);
            for (std::size_t x = 0; x < n_sites_; ++x) {
                av[x] = integrands_[j]->a(t0, x, s);
                bv[x] = integrands_[j]->b(t0, x, s);
            }
        }
    }
    segment_start_.assign(1, t0);
    segment_m_.assign(1, cfg.magnetization());
    for (Spin s : kSpins) {
        segment_cumulative_[layer(s)].assign(1, 0.0);
        segment_rate_[layer(s)] = rates_.evaluate_unchecked(s, segment_m_.back());
        site_time_[layer(s)].assign(n_sites_, t0);
        site_segment_[layer(s)].assign(n_sites_, 0);
        site_cumulative_[layer(s)].assign(n_sites_, 0.0);
    }
}

double PathIntegrator::cumulative_rate(Spin s, double t) const {
    return segment_cumulative_[layer(s)].back() + segment_rate_[layer(s)] * (t - segment_start_.back());
}

void PathIntegrator::magnetization_changed(double t, double m) {
    for (Spin s : kSpins) segment_cumulative_[layer(s)].push_back(cumulative_rate(s, t));
    segment_start_.push_back(t);
    segment_m_.push_back(m);
    for (Spin s : kSpins) segment_rate_[layer(s)] = rates_.evaluate_unchecked(s, m);
}

namespace {

// Inter-event intervals are O(1/(N |eta|)); on intervals this short a single
// 8-point panel is exact to rounding for the smooth integrands used here.
constexpr double kShortInterval = 1.0 / 64.0;

template <class F>
double smooth_integral(F&& f, double lo, double hi) {
    if (hi <= lo) return 0.0;
    if (hi - lo <= kShortInterval) return gauss_legendre_8(f, lo, hi);
    return adaptive_gauss_legendre(f, lo, hi);
}

}  // namespace

void PathIntegrator::integrate_site(const LatticeConfiguration& cfg, std::size_t x, Spin s, double t) {
    const std::size_t l = layer(s);
    const double tau = site_time_[l][x];
    const auto eta = static_cast<double>(cfg.count(x, s));
    const double cum_now = cumulative_rate(s, t);
    if (eta != 0.0 && t > tau) {
        const double dc = cum_now - site_cumulative_[l][x];
        const std::size_t first_segment = site_segment_[l][x];
        for (std::size_t j = 0; j < integrands_.size(); ++j) {
            const SiteIntegrand& f = *integrands_[j];
            double integral = 0.0;
            if (constant_[j]) {
                integral = cached_a_[j][l][x] * (t - tau) + cached_b_[j][l][x] * dc;
            } else {
                integral = smooth_integral([&](double u) { return f.a(u, x, s); }, tau, t);
                for (std::size_t seg = first_segment; seg < segment_start_.size(); ++seg) {
                    const double lo = std::max(tau, segment_start_[seg]);
                    const double hi = seg + 1 < segment_start_.size() ? std::min(t, segment_start_[seg + 1]) : t;
                    if (hi <= lo) continue;
                    const double c = rates_.evaluate_unchecked(s, segment_m_[seg]);
                    integral += c * smooth_integral([&](double u) { return f.b(u, x, s); }, lo, hi);
                }
            }
            totals_[j] += eta * integral;
        }
    }
    site_time_[l][x] = t;
    site_segment_[l][x] = segment_start_.size() - 1;
    site_cumulative_[l][x] = cum_now;
}

void PathIntegrator::touch(const LatticeConfiguration& cfg, std::size_t x, Spin s, double t) {
    if (integrands_.empty()) return;
    integrate_site(cfg, x, s, t);
}

void PathIntegrator::flush(const LatticeConfiguration& cfg, double t) {
    if (integrands_.empty()) return;
    for (Spin s : kSpins) {
        for (std::size_t x = 0; x < n_sites_; ++x) integrate_site(cfg, x, s, t);
    }
}

}  // namespace rtp::sim
