#include "rtp/core/rate_family.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "rtp/core/errors.hpp"

namespace rtp {

namespace {
constexpr double kMagnetizationSlack = 1e-12;
}

SwitchRateFamily SwitchRateFamily::constant(double value) {
    if (!(value > 0.0) || !std::isfinite(value)) {
        throw ConfigurationError("constant switch rate must be positive and finite");
    }
    SwitchRateFamily f;
    f.kind_ = Kind::constant;
    f.value_ = value;
    f.c_min_ = value;
    f.c_max_ = value;
    f.lipschitz_ = 0.0;
    return f;
}

SwitchRateFamily SwitchRateFamily::curie_weiss(double beta) {
    if (!(beta > 0.0) || !std::isfinite(beta)) {
        throw ConfigurationError("Curie-Weiss beta must be positive and finite");
    }
    SwitchRateFamily f;
    f.kind_ = Kind::curie_weiss;
    f.beta_ = beta;
    f.c_min_ = std::exp(-beta);
    f.c_max_ = std::exp(beta);
    // |d/dm exp(-sigma beta m)| = beta exp(-sigma beta m) <= beta e^beta
    f.lipschitz_ = beta * std::exp(beta);
    return f;
}

SwitchRateFamily SwitchRateFamily::tabulated(std::vector<double> m_points, std::vector<double> plus_values,
                                             std::vector<double> minus_values) {
    const auto n = m_points.size();
    if (n < 2 || plus_values.size() != n || minus_values.size() != n) {
        throw ConfigurationError("tabulated rate needs >= 2 sample points and one value per point and layer");
    }
    if (std::abs(m_points.front() + 1.0) > 1e-12 || std::abs(m_points.back() - 1.0) > 1e-12) {
        throw ConfigurationError("tabulated rate sample points must span [-1, 1]");
    }
    for (std::size_t j = 1; j < n; ++j) {
        if (!(m_points[j] > m_points[j - 1])) {
            throw ConfigurationError("tabulated rate sample points must be strictly increasing");
        }
    }
    SwitchRateFamily f;
    f.kind_ = Kind::tabulated;
    f.c_min_ = std::numeric_limits<double>::infinity();
    f.c_max_ = 0.0;
    f.lipschitz_ = 0.0;
    for (const auto* vals : {&plus_values, &minus_values}) {
        for (std::size_t j = 0; j < n; ++j) {
            const double v = (*vals)[j];
            if (!(v > 0.0) || !std::isfinite(v)) {
                throw ConfigurationError("tabulated rate values must be positive and finite");
            }
            f.c_min_ = std::min(f.c_min_, v);
            f.c_max_ = std::max(f.c_max_, v);
            if (j > 0) {
                const double slope = std::abs(v - (*vals)[j - 1]) / (m_points[j] - m_points[j - 1]);
                f.lipschitz_ = std::max(f.lipschitz_, slope);
            }
        }
    }
    f.m_points_ = std::move(m_points);
    f.values_[0] = std::move(plus_values);
    f.values_[1] = std::move(minus_values);
    return f;
}

double SwitchRateFamily::operator()(Spin s, double m) const {
    if (!(std::abs(m) <= 1.0 + kMagnetizationSlack)) {
        throw DomainError("magnetization " + std::to_string(m) + " outside [-1, 1]");
    }
    return evaluate_unchecked(s, std::clamp(m, -1.0, 1.0));
}

double SwitchRateFamily::interpolate(Spin s, double m) const noexcept {
    const auto& vals = values_[layer(s)];
    auto it = std::upper_bound(m_points_.begin(), m_points_.end(), m);
    std::size_t hi = static_cast<std::size_t>(it - m_points_.begin());
    if (hi == 0) return vals.front();
    if (hi >= m_points_.size()) return vals.back();
    const std::size_t lo = hi - 1;
    const double w = (m - m_points_[lo]) / (m_points_[hi] - m_points_[lo]);
    return vals[lo] + w * (vals[hi] - vals[lo]);
}

nlohmann::json SwitchRateFamily::to_json() const {
    switch (kind_) {
    case Kind::constant:
        return {{"kind", "constant"}, {"value", value_}};
    case Kind::curie_weiss:
        return {{"kind", "curie_weiss"}, {"beta", beta_}};
    case Kind::tabulated:
        break;
    }
    return {{"kind", "tabulated"}, {"m", m_points_}, {"plus", values_[0]}, {"minus", values_[1]}};
}

SwitchRateFamily SwitchRateFamily::from_json(const nlohmann::json& doc) {
    const nlohmann::json& obj = doc.contains("rate") ? doc.at("rate") : doc;
    if (!obj.is_object() || !obj.contains("kind")) {
        throw ConfigurationError("rate document needs a \"kind\" field");
    }
    try {
        const auto kind = obj.at("kind").get<std::string>();
        if (kind == "constant") {
            return constant(obj.value("value", 1.0));
        }
        if (kind == "curie_weiss") {
            return curie_weiss(obj.at("beta").get<double>());
        }
        if (kind == "tabulated") {
            return tabulated(obj.at("m").get<std::vector<double>>(), obj.at("plus").get<std::vector<double>>(),
                             obj.at("minus").get<std::vector<double>>());
        }
        throw ConfigurationError("unknown rate kind '" + kind + "'");
    } catch (const nlohmann::json::exception& e) {
        throw ConfigurationError(std::string("malformed rate document: ") + e.what());
    }
}

}  // namespace rtp
