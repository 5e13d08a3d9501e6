#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "rtp/core/errors.hpp"
#include "rtp/verify/criteria.hpp"

namespace rtp::verify {

std::size_t pair_index(std::size_t n_single_states, std::size_t a, std::size_t b) {
    if (a > b) std::swap(a, b);
    // row-major upper triangle including the diagonal
    return a * n_single_states - a * (a - 1) / 2 + (b - a);
}

std::vector<double> two_particle_law(std::size_t n_sites, const SwitchRateFamily& rates, std::size_t site_a,
                                     Spin spin_a, std::size_t site_b, Spin spin_b, double t) {
    if (n_sites == 0 || site_a >= n_sites || site_b >= n_sites) throw ConfigurationError("site outside the torus");
    if (t < 0.0) throw ConfigurationError("time must be non-negative");
    const std::size_t single = 2 * n_sites;
    const std::size_t states = single * single;
    auto encode = [](std::size_t x, Spin s) { return 2 * x + layer(s); };
    auto site_of = [](std::size_t s) { return s / 2; };
    auto spin_of = [](std::size_t s) { return spin_of_layer(s % 2); };

    // generator Q(a, b) = rate a -> b on labeled states (s1, s2)
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(states), static_cast<Eigen::Index>(states));
    const double jump = static_cast<double>(n_sites);
    for (std::size_t s1 = 0; s1 < single; ++s1) {
        for (std::size_t s2 = 0; s2 < single; ++s2) {
            const auto from = static_cast<Eigen::Index>(s1 * single + s2);
            const double m = 0.5 * (sign(spin_of(s1)) + sign(spin_of(s2)));
            std::size_t own[2] = {s1, s2};
            for (int p = 0; p < 2; ++p) {
                const std::size_t x = site_of(own[p]);
                const Spin s = spin_of(own[p]);
                const std::size_t y = s == Spin::plus ? (x + 1) % n_sites : (x + n_sites - 1) % n_sites;
                std::size_t moved[2] = {s1, s2};
                moved[p] = encode(y, s);
                q(from, static_cast<Eigen::Index>(moved[0] * single + moved[1])) += jump;
                std::size_t turned[2] = {s1, s2};
                turned[p] = encode(x, flipped(s));
                q(from, static_cast<Eigen::Index>(turned[0] * single + turned[1])) += rates(s, m);
                q(from, from) -= jump + rates(s, m);
            }
        }
    }

    const Eigen::MatrixXd propagator = (q * t).exp();
    const auto start = static_cast<Eigen::Index>(encode(site_a, spin_a) * single + encode(site_b, spin_b));
    std::vector<double> law(single * (single + 1) / 2, 0.0);
    for (std::size_t s1 = 0; s1 < single; ++s1) {
        for (std::size_t s2 = 0; s2 < single; ++s2) {
            law[pair_index(single, s1, s2)] += propagator(start, static_cast<Eigen::Index>(s1 * single + s2));
        }
    }
    return law;
}

}  // namespace rtp::verify
