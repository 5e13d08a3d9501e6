#include "rtp/core/fixed_points.hpp"

#include <cmath>

#include "rtp/core/errors.hpp"

namespace rtp {

namespace {
constexpr int kPartition = 2048;
}

std::vector<double> curie_weiss_fixed_points(double beta, double tol) {
    if (!(tol > 0.0)) throw DomainError("fixed-point tolerance must be positive");
    if (!(beta > 0.0)) throw DomainError("beta must be positive");

    auto g = [beta](double m) { return m - std::tanh(beta * m); };
    // |g'| <= 1 + beta, so this width keeps the residual below tol.
    const double width_tol = tol / (1.0 + beta);

    std::vector<double> roots;
    const double h = 2.0 / kPartition;
    double a = -1.0;
    double ga = g(a);
    for (int j = 1; j <= kPartition; ++j) {
        const double b = -1.0 + j * h;
        const double gb = g(b);
        if (ga == 0.0) {
            roots.push_back(a);
        } else if (gb != 0.0 && std::signbit(ga) != std::signbit(gb)) {
            double lo = a, hi = b, glo = ga;
            while (hi - lo > width_tol) {
                const double mid = 0.5 * (lo + hi);
                const double gm = g(mid);
                if (gm == 0.0) {
                    lo = hi = mid;
                    break;
                }
                if (std::signbit(gm) == std::signbit(glo)) {
                    lo = mid;
                    glo = gm;
                } else {
                    hi = mid;
                }
            }
            roots.push_back(0.5 * (lo + hi));
        }
        a = b;
        ga = gb;
    }
    if (ga == 0.0) roots.push_back(a);
    return roots;
}

}  // namespace rtp
