#pragma once

#include "gmc/core.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace gmc {

// Euclidean projection onto the probability simplex (sort-and-threshold).
// Inputs that are already feasible up to round-off are returned unchanged,
// which makes the projection exactly idempotent.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> project_simplex(
    const Eigen::MatrixBase<Derived>& v) {
    using Scalar = typename Derived::Scalar;
    using Out = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    const Eigen::Index m = v.size();
    if (m < 1) throw Error(ErrorCode::DimensionMismatch, "project_simplex: empty vector");
    if (!v.allFinite()) throw Error(ErrorCode::NonFiniteInput, "project_simplex: non-finite input");

    const Scalar eps = std::numeric_limits<Scalar>::epsilon();
    const Scalar tol = std::max(Scalar(1e-12), Scalar(4) * Scalar(m) * eps);
    if (v.minCoeff() >= Scalar(0) && std::abs(v.sum() - Scalar(1)) <= tol) return Out(v);

    std::vector<Scalar> u(static_cast<std::size_t>(m));
    for (Eigen::Index i = 0; i < m; ++i) u[static_cast<std::size_t>(i)] = v(i);
    std::sort(u.begin(), u.end(), [](Scalar a, Scalar b) { return a > b; });

    Scalar cumulative = 0;
    Scalar theta = 0;
    for (std::size_t j = 0; j < u.size(); ++j) {
        cumulative += u[j];
        const Scalar candidate = (cumulative - Scalar(1)) / Scalar(j + 1);
        if (u[j] - candidate > Scalar(0)) theta = candidate;
    }
    Out out(m);
    for (Eigen::Index i = 0; i < m; ++i) out(i) = std::max(v(i) - theta, Scalar(0));
    return out;
}

inline double project_box(double v, double lo, double hi) {
    if (!(lo < hi)) throw Error(ErrorCode::InvalidBox, "project_box: requires lo < hi");
    return std::clamp(v, lo, hi);
}

template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> project_box(
    const Eigen::MatrixBase<Derived>& v, typename Derived::Scalar lo, typename Derived::Scalar hi) {
    if (!(lo < hi)) throw Error(ErrorCode::InvalidBox, "project_box: requires lo < hi");
    return v.cwiseMax(lo).cwiseMin(hi);
}

struct ProjectionSpec {
    enum class Kind { Simplex, Box };
    Kind kind = Kind::Box;
    int dim = 1;
    double lo = -1.0;
    double hi = 1.0;

    static ProjectionSpec simplex(int m);
    static ProjectionSpec box(double lo, double hi);

    FValue::Kind value_kind() const {
        return kind == Kind::Simplex ? FValue::Kind::Distribution : FValue::Kind::Threshold;
    }
    Vector apply(const Vector& v) const;
};

}  // namespace gmc
