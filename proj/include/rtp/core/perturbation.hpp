#pragma once

#include <array>
#include <vector>

#include <nlohmann/json.hpp>

#include "rtp/core/spin.hpp"

namespace rtp {

/// One Fourier mode of a layer: a_k(t) cos(2 pi k x) + b_k(t) sin(2 pi k x),
/// with a_k, b_k polynomials in t (constant term first).
struct FourierMode {
    int k = 0;
    std::vector<double> cos_coeffs;
    std::vector<double> sin_coeffs;

    friend bool operator==(const FourierMode&, const FourierMode&) = default;
};

/// Smooth tilt H_t(x, sigma) given analytically per layer. The default-constructed
/// field is H = 0.
class PerturbationField {
public:
    PerturbationField() = default;
    PerturbationField(std::vector<FourierMode> plus, std::vector<FourierMode> minus);

    /// H_t(x, sigma) = amplitude * cos(2 pi k x) on one layer, zero on the other.
    static PerturbationField single_cosine(Spin s, int k, double amplitude);

    double value(double t, double x, Spin s) const;
    double time_derivative(double t, double x, Spin s) const;
    double space_derivative(double t, double x, Spin s) const;
    /// H_t(x, +1) - H_t(x, -1).
    double tilde(double t, double x) const { return value(t, x, Spin::plus) - value(t, x, Spin::minus); }

    const std::vector<FourierMode>& modes(Spin s) const { return modes_[layer(s)]; }

    bool is_zero() const;
    bool is_time_constant() const;

    /// Upper bound on sup |H| over [0, horizon] x torus.
    double sup_bound(double horizon) const;
    /// Upper bound on sup |dH/dx| over [0, horizon] x torus.
    double slope_bound(double horizon) const;

    nlohmann::json to_json() const;
    /// Accepts the bare object or {"field": {...}}; keys sigma_plus / sigma_minus.
    static PerturbationField from_json(const nlohmann::json& doc);

    friend bool operator==(const PerturbationField&, const PerturbationField&) = default;

private:
    std::array<std::vector<FourierMode>, 2> modes_;
};

}  // namespace rtp
