#pragma once

#include <algorithm>
#include <array>
#include <cmath>

namespace rtp {

namespace detail {
// 8-point Gauss-Legendre nodes/weights on [-1, 1] (positive half).
inline constexpr std::array<double, 4> kGaussNodes8{0.1834346424956498, 0.5255324099163290, 0.7966664774136267,
                                                    0.9602898564975363};
inline constexpr std::array<double, 4> kGaussWeights8{0.3626837833783620, 0.3137066458778873,
                                                      0.2223810344533745, 0.1012285362903763};
}  // namespace detail

/// Composite 8-point Gauss-Legendre rule with `panels` equal panels.
template <class F>
double gauss_legendre_8(F&& f, double lo, double hi, int panels = 1) {
    const double width = (hi - lo) / panels;
    double acc = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double mid = lo + (p + 0.5) * width;
        const double half = 0.5 * width;
        double panel = 0.0;
        for (std::size_t j = 0; j < detail::kGaussNodes8.size(); ++j) {
            const double d = half * detail::kGaussNodes8[j];
            panel += detail::kGaussWeights8[j] * (f(mid - d) + f(mid + d));
        }
        acc += panel * half;
    }
    return acc;
}

/// Doubles the panel count until two successive composite rules agree to
/// rel_tol (relative, with an absolute floor of rel_tol * 1e-12).
template <class F>
double adaptive_gauss_legendre(F&& f, double lo, double hi, double rel_tol = 1e-10, int max_panels = 1 << 12) {
    if (hi <= lo) return 0.0;
    int panels = 1;
    double prev = gauss_legendre_8(f, lo, hi, panels);
    while (panels < max_panels) {
        panels *= 2;
        const double next = gauss_legendre_8(f, lo, hi, panels);
        if (std::abs(next - prev) <= rel_tol * std::max(std::abs(next), 1e-12)) return next;
        prev = next;
    }
    return prev;
}

}  // namespace rtp
