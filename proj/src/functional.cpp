#include "gmc/functional.hpp"

#include <algorithm>
#include <set>

namespace gmc {

Vector GroupFunction::operator()(const FValue& f, const Sample& x) const {
    Vector out = Vector::Zero(dim);
    eval(f, x, out);
    return out;
}

FunctionTable::FunctionTable(FunctionClass functions) : functions_(sorted_class(std::move(functions))) {}

const GroupFunction* FunctionTable::find(const std::string& id) const {
    auto it = std::lower_bound(functions_.begin(), functions_.end(), id,
                               [](const GroupFunction& g, const std::string& key) { return g.id < key; });
    if (it == functions_.end() || it->id != id) return nullptr;
    return &*it;
}

const GroupFunction& FunctionTable::at(const std::string& id) const {
    if (auto g = find(id)) return *g;
    throw Error(ErrorCode::UnknownGroupId, "unknown group function '" + id + "'");
}

std::shared_ptr<const FunctionTable> make_table(FunctionClass functions) {
    return std::make_shared<const FunctionTable>(std::move(functions));
}

FunctionClass sorted_class(FunctionClass functions) {
    if (functions.empty()) throw Error(ErrorCode::EmptyClass, "function class is empty");
    std::sort(functions.begin(), functions.end(),
              [](const GroupFunction& a, const GroupFunction& b) { return a.id < b.id; });
    for (std::size_t i = 1; i < functions.size(); ++i)
        if (functions[i].id == functions[i - 1].id)
            throw Error(ErrorCode::InvalidArgument, "duplicate group function id '" + functions[i].id + "'");
    for (const auto& g : functions) {
        if (!g.eval) throw Error(ErrorCode::InvalidArgument, "group function '" + g.id + "' has no evaluator");
        if (g.dim < 1) throw Error(ErrorCode::DimensionMismatch, "group function '" + g.id + "' has dim < 1");
    }
    return functions;
}

Vector MappingFunctional::compute_stats(const std::vector<FValue>& f, const std::vector<Sample>& x) const {
    if (!stats) return Vector();
    return stats(f, x);
}

Vector MappingFunctional::operator()(const FValue& f, const Sample& x, const Vector& st) const {
    Vector out = Vector::Zero(dim);
    eval(f, x, st, out);
    return out;
}

const char* to_string(PotentialKind kind) {
    switch (kind) {
        case PotentialKind::Quadratic: return "quadratic";
        case PotentialKind::PiecewiseLinearCoverage: return "piecewise_linear_coverage";
        case PotentialKind::PiecewiseLinearFNR: return "piecewise_linear_fnr";
        case PotentialKind::Pointwise: return "pointwise";
    }
    return "pointwise";
}

Potential Potential::quadratic() {
    Potential p;
    p.kind = PotentialKind::Quadratic;
    p.smoothness = 1.0;
    p.c_lower = 0.0;
    p.c_upper = 1.0;
    p.exact_smoothness = true;
    return p;
}

Potential Potential::custom(PointwisePotential term, double smoothness, double c_lower, double c_upper,
                            bool exact_smoothness) {
    if (!(smoothness > 0.0)) throw Error(ErrorCode::InvalidArgument, "potential smoothness must be > 0");
    if (c_upper < c_lower) throw Error(ErrorCode::InvalidArgument, "potential requires c_upper >= c_lower");
    Potential p;
    p.kind = PotentialKind::Pointwise;
    p.smoothness = smoothness;
    p.c_lower = c_lower;
    p.c_upper = c_upper;
    p.pointwise = std::move(term);
    p.exact_smoothness = exact_smoothness;
    return p;
}

void Potential::check_kind(DataKind data_kind) const {
    bool ok = true;
    switch (kind) {
        case PotentialKind::Quadratic:
            ok = data_kind == DataKind::TextGen || data_kind == DataKind::Generic;
            break;
        case PotentialKind::PiecewiseLinearCoverage: ok = data_kind == DataKind::Hierarchy; break;
        case PotentialKind::PiecewiseLinearFNR: ok = data_kind == DataKind::Segmentation; break;
        case PotentialKind::Pointwise: ok = true; break;
    }
    if (!ok)
        throw Error(ErrorCode::KindMismatch, std::string("potential kind ") + to_string(kind) +
                                                 " does not apply to " + to_string(data_kind) + " data");
}

double Potential::value(const std::vector<FValue>& f, const Dataset& data) const {
    check_kind(data.kind);
    if (data.empty()) throw Error(ErrorCode::EmptyDataset, "potential on empty dataset");
    if (f.size() != data.size()) throw Error(ErrorCode::DimensionMismatch, "f / dataset size mismatch");
    const double n = static_cast<double>(data.size());
    if (kind == PotentialKind::Quadratic) {
        Vector mean = Vector::Zero(f.front().dim());
        for (const auto& v : f) mean += v.value;
        mean /= n;
        double total = 0.0;
        for (const auto& v : f) total += (v.value - mean).squaredNorm();
        return 0.5 * total / n;
    }
    if (!pointwise) throw Error(ErrorCode::InvalidArgument, "potential has no pointwise term");
    double total = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) total += pointwise(f[i], data.samples[i]);
    return total / n;
}

}  // namespace gmc
