#include "rtp/core/perturbation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "rtp/core/errors.hpp"

namespace rtp {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double horner(const std::vector<double>& c, double t) {
    double acc = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * t + *it;
    return acc;
}

double horner_derivative(const std::vector<double>& c, double t) {
    double acc = 0.0;
    for (std::size_t j = c.size(); j-- > 1;) acc = acc * t + static_cast<double>(j) * c[j];
    return acc;
}

// sup over t in [0, horizon] of |p(t)|, bounded by sum |c_j| max(1, horizon)^j
double poly_bound(const std::vector<double>& c, double horizon) {
    const double h = std::max(1.0, horizon);
    double acc = 0.0;
    double pw = 1.0;
    for (double cj : c) {
        acc += std::abs(cj) * pw;
        pw *= h;
    }
    return acc;
}

bool is_all_zero(const std::vector<double>& c) {
    return std::all_of(c.begin(), c.end(), [](double v) { return v == 0.0; });
}

void validate(const std::vector<FourierMode>& modes) {
    for (const auto& m : modes) {
        if (m.k < 0) throw ConfigurationError("Fourier wavenumbers must be non-negative");
    }
}

std::vector<FourierMode> modes_from_json(const nlohmann::json& arr) {
    std::vector<FourierMode> out;
    if (arr.is_null()) return out;
    if (!arr.is_array()) throw ConfigurationError("field layer must be an array of modes");
    for (const auto& m : arr) {
        FourierMode mode;
        mode.k = m.at("k").get<int>();
        mode.cos_coeffs = m.value("cos", std::vector<double>{});
        mode.sin_coeffs = m.value("sin", std::vector<double>{});
        out.push_back(std::move(mode));
    }
    return out;
}

nlohmann::json modes_to_json(const std::vector<FourierMode>& modes) {
    auto arr = nlohmann::json::array();
    for (const auto& m : modes) arr.push_back({{"k", m.k}, {"cos", m.cos_coeffs}, {"sin", m.sin_coeffs}});
    return arr;
}

}  // namespace

PerturbationField::PerturbationField(std::vector<FourierMode> plus, std::vector<FourierMode> minus) {
    validate(plus);
    validate(minus);
    modes_[0] = std::move(plus);
    modes_[1] = std::move(minus);
}

PerturbationField PerturbationField::single_cosine(Spin s, int k, double amplitude) {
    std::vector<FourierMode> active{FourierMode{k, {amplitude}, {}}};
    return s == Spin::plus ? PerturbationField(std::move(active), {}) : PerturbationField({}, std::move(active));
}

double PerturbationField::value(double t, double x, Spin s) const {
    double acc = 0.0;
    for (const auto& m : modes_[layer(s)]) {
        const double arg = kTwoPi * m.k * x;
        if (!m.cos_coeffs.empty()) acc += horner(m.cos_coeffs, t) * std::cos(arg);
        if (!m.sin_coeffs.empty()) acc += horner(m.sin_coeffs, t) * std::sin(arg);
    }
    return acc;
}

double PerturbationField::time_derivative(double t, double x, Spin s) const {
    double acc = 0.0;
    for (const auto& m : modes_[layer(s)]) {
        const double arg = kTwoPi * m.k * x;
        if (m.cos_coeffs.size() > 1) acc += horner_derivative(m.cos_coeffs, t) * std::cos(arg);
        if (m.sin_coeffs.size() > 1) acc += horner_derivative(m.sin_coeffs, t) * std::sin(arg);
    }
    return acc;
}

double PerturbationField::space_derivative(double t, double x, Spin s) const {
    double acc = 0.0;
    for (const auto& m : modes_[layer(s)]) {
        if (m.k == 0) continue;
        const double w = kTwoPi * m.k;
        const double arg = w * x;
        if (!m.cos_coeffs.empty()) acc -= w * horner(m.cos_coeffs, t) * std::sin(arg);
        if (!m.sin_coeffs.empty()) acc += w * horner(m.sin_coeffs, t) * std::cos(arg);
    }
    return acc;
}

bool PerturbationField::is_zero() const {
    for (const auto& layer_modes : modes_) {
        for (const auto& m : layer_modes) {
            if (!is_all_zero(m.cos_coeffs) || !is_all_zero(m.sin_coeffs)) return false;
        }
    }
    return true;
}

bool PerturbationField::is_time_constant() const {
    auto higher_zero = [](const std::vector<double>& c) {
        return c.size() <= 1 || std::all_of(c.begin() + 1, c.end(), [](double v) { return v == 0.0; });
    };
    for (const auto& layer_modes : modes_) {
        for (const auto& m : layer_modes) {
            if (!higher_zero(m.cos_coeffs) || !higher_zero(m.sin_coeffs)) return false;
        }
    }
    return true;
}

double PerturbationField::sup_bound(double horizon) const {
    double bound = 0.0;
    for (const auto& layer_modes : modes_) {
        double b = 0.0;
        for (const auto& m : layer_modes) b += poly_bound(m.cos_coeffs, horizon) + poly_bound(m.sin_coeffs, horizon);
        bound = std::max(bound, b);
    }
    return bound;
}

double PerturbationField::slope_bound(double horizon) const {
    double bound = 0.0;
    for (const auto& layer_modes : modes_) {
        double b = 0.0;
        for (const auto& m : layer_modes) {
            b += kTwoPi * m.k * (poly_bound(m.cos_coeffs, horizon) + poly_bound(m.sin_coeffs, horizon));
        }
        bound = std::max(bound, b);
    }
    return bound;
}

nlohmann::json PerturbationField::to_json() const {
    return {{"sigma_plus", modes_to_json(modes_[0])}, {"sigma_minus", modes_to_json(modes_[1])}};
}

PerturbationField PerturbationField::from_json(const nlohmann::json& doc) {
    const nlohmann::json& obj = doc.contains("field") ? doc.at("field") : doc;
    if (!obj.is_object()) throw ConfigurationError("field document must be an object");
    try {
        return PerturbationField(modes_from_json(obj.value("sigma_plus", nlohmann::json())),
                                 modes_from_json(obj.value("sigma_minus", nlohmann::json())));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigurationError(std::string("malformed field document: ") + e.what());
    }
}

}  // namespace rtp
