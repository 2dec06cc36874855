#include "gmc/bounds.hpp"

#include "gmc/core.hpp"

#include <algorithm>
#include <cmath>

namespace gmc {

std::int64_t stable_ceil(double x) {
    const double guard = 1e-9 * std::max(1.0, std::abs(x));
    return static_cast<std::int64_t>(std::ceil(x - guard));
}

std::int64_t iteration_bound(double k_L, double B, double c_u, double c_l, double alpha) {
    if (!(alpha > 0.0)) throw Error(ErrorCode::NonPositiveAlpha, "alpha must be positive");
    if (!(k_L > 0.0) || !(B > 0.0))
        throw Error(ErrorCode::InvalidArgument, "k_L and B must be positive");
    if (c_u < c_l) throw Error(ErrorCode::InvalidArgument, "c_u must be >= c_l");
    return stable_ceil(2.0 * k_L * B * (c_u - c_l) / (alpha * alpha));
}

std::int64_t sample_complexity(std::int64_t class_size, double A, double C2, double alpha, double delta) {
    if (!(delta > 0.0 && delta < 1.0)) throw Error(ErrorCode::InvalidDelta, "delta must lie in (0, 1)");
    if (!(alpha > 0.0)) throw Error(ErrorCode::NonPositiveAlpha, "alpha must be positive");
    if (class_size < 1) throw Error(ErrorCode::InvalidArgument, "class_size must be >= 1");
    if (!(A > 0.0) || !(C2 > 0.0)) throw Error(ErrorCode::InvalidArgument, "A and C2 must be positive");
    const double ac = A * C2;
    const double x = 2.0 * ac * ac / (alpha * alpha) * std::log(2.0 * static_cast<double>(class_size) / delta);
    return stable_ceil(x);
}

}  // namespace gmc
