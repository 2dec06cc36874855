#include "gmc/projections.hpp"

namespace gmc {

ProjectionSpec ProjectionSpec::simplex(int m) {
    if (m < 1) throw Error(ErrorCode::InvalidArgument, "simplex dimension must be >= 1");
    ProjectionSpec p;
    p.kind = Kind::Simplex;
    p.dim = m;
    return p;
}

ProjectionSpec ProjectionSpec::box(double lo, double hi) {
    if (!(lo < hi)) throw Error(ErrorCode::InvalidBox, "box projection requires lo < hi");
    ProjectionSpec p;
    p.kind = Kind::Box;
    p.dim = 1;
    p.lo = lo;
    p.hi = hi;
    return p;
}

Vector ProjectionSpec::apply(const Vector& v) const {
    if (kind == Kind::Simplex) {
        if (v.size() != dim)
            throw Error(ErrorCode::DimensionMismatch, "simplex projection dimension mismatch");
        return project_simplex(v);
    }
    return project_box(v, lo, hi);
}

}  // namespace gmc
