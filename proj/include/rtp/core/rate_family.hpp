#pragma once

#include <cmath>
#include <vector>

#include <nlohmann/json.hpp>

#include "rtp/core/spin.hpp"

namespace rtp {

/// Mean-field flip rate c(sigma, m): bounded away from zero and Lipschitz in m.
///
/// Three families are supported. `constant` gives the non-interacting
/// run-and-tumble process, `curie_weiss` the Glauber rates exp(-sigma*beta*m),
/// and `tabulated` a piecewise-linear rate per layer on sample points that
/// cover [-1, 1].
class SwitchRateFamily {
public:
    enum class Kind { constant, curie_weiss, tabulated };

    /// The constant rate 1.
    SwitchRateFamily() = default;

    static SwitchRateFamily constant(double value = 1.0);
    static SwitchRateFamily curie_weiss(double beta);
    static SwitchRateFamily tabulated(std::vector<double> m_points, std::vector<double> plus_values,
                                      std::vector<double> minus_values);

    /// Throws DomainError if m is outside [-1, 1] (a rounding slack of 1e-12 is tolerated).
    double operator()(Spin s, double m) const;

    /// Hot-path evaluation; m must already lie in [-1, 1].
    double evaluate_unchecked(Spin s, double m) const noexcept {
        switch (kind_) {
        case Kind::constant:
            return value_;
        case Kind::curie_weiss:
            return std::exp(-sign(s) * beta_ * m);
        case Kind::tabulated:
            break;
        }
        return interpolate(s, m);
    }

    Kind kind() const { return kind_; }
    double beta() const { return beta_; }
    double c_min() const { return c_min_; }
    double c_max() const { return c_max_; }
    double lipschitz() const { return lipschitz_; }

    const std::vector<double>& m_points() const { return m_points_; }
    const std::vector<double>& values(Spin s) const { return values_[layer(s)]; }

    nlohmann::json to_json() const;

    friend bool operator==(const SwitchRateFamily&, const SwitchRateFamily&) = default;

    /// Accepts either the bare object or one wrapped as {"rate": {...}}.
    static SwitchRateFamily from_json(const nlohmann::json& doc);

private:
    double interpolate(Spin s, double m) const noexcept;

    Kind kind_ = Kind::constant;
    double value_ = 1.0;
    double beta_ = 0.0;
    double c_min_ = 1.0;
    double c_max_ = 1.0;
    double lipschitz_ = 0.0;
    std::vector<double> m_points_;
    std::vector<double> values_[2];
};

}  // namespace rtp
