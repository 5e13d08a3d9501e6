#pragma once

#include <vector>

namespace rtp {

/// All solutions of m = tanh(beta m) in [-1, 1], ascending, to absolute
/// tolerance tol. Sign changes of m - tanh(beta m) are bracketed on 2048
/// uniform subintervals and refined by bisection; exact zeros on the
/// partition (m = 0 always) are returned as is.
std::vector<double> curie_weiss_fixed_points(double beta, double tol = 1e-12);

}  // namespace rtp
