#include "gmc/trace.hpp"

#include <map>

namespace gmc {

FValue PredictorTrace::initial_value(const Sample& x) const {
    Vector v;
    if (init.kind == Initializer::Kind::CopyScores) {
        if (projection.kind == ProjectionSpec::Kind::Simplex) {
            if (x.scores.size() != projection.dim)
                throw Error(ErrorCode::DimensionMismatch,
                            "sample '" + x.id + "' score dimension does not match the trace");
            v = x.scores;
        } else {
            if (x.scores.size() < 1)
                throw Error(ErrorCode::DimensionMismatch, "sample '" + x.id + "' has no scores");
            v = x.scores.head(1);
        }
    } else {
        v = init.constant;
    }
    return FValue{projection.value_kind(), projection.apply(v)};
}

PredictorTrace make_trace(Initializer init, ProjectionSpec projection, FunctionClass functions) {
    PredictorTrace t;
    t.init = std::move(init);
    t.projection = projection;
    if (!functions.empty()) t.functions = make_table(std::move(functions));
    return t;
}

FValue apply_update(const ProjectionSpec& projection, const FValue& f, const Eigen::Ref<const Vector>& g,
                    double eta) {
    if (g.size() != f.dim()) throw Error(ErrorCode::DimensionMismatch, "update direction dimension mismatch");
    bool zero = true;
    for (Eigen::Index i = 0; i < g.size() && zero; ++i) zero = g(i) == 0.0;
    if (zero) return f;
    Vector moved = f.value - eta * g;
    return FValue{f.kind, projection.apply(moved)};
}

namespace {

struct StepRef {
    const GroupFunction* g;
    double eta;
};

std::vector<StepRef> resolve(const PredictorTrace& trace) {
    std::vector<StepRef> out;
    out.reserve(trace.steps.size());
    if (!trace.steps.empty() && !trace.functions)
        throw Error(ErrorCode::UnknownGroupId, "trace has steps but no function table");
    for (const auto& step : trace.steps) out.push_back({&trace.functions->at(step.g_id), step.eta});
    return out;
}

FValue replay(const PredictorTrace& trace, const std::vector<StepRef>& steps, const Sample& x) {
    FValue f = trace.initial_value(x);
    Vector g;
    for (const auto& step : steps) {
        g.setZero(step.g->dim);
        step.g->eval(f, x, g);
        f = apply_update(trace.projection, f, g, step.eta);
    }
    return f;
}

}  // namespace

FValue apply_predictor(const PredictorTrace& trace, const Sample& x) {
    return replay(trace, resolve(trace), x);
}

std::vector<FValue> apply_predictor(const PredictorTrace& trace, const std::vector<Sample>& samples) {
    const auto steps = resolve(trace);
    bool by_pattern = trace.init.kind == Initializer::Kind::Constant;
    for (const auto& s : steps) by_pattern = by_pattern && s.g->groups_only;

    std::vector<FValue> out;
    out.reserve(samples.size());
    if (!by_pattern) {
        for (const auto& x : samples) out.push_back(replay(trace, steps, x));
        return out;
    }
    // f depends on x only through its membership pattern: replay once per pattern.
    std::map<std::vector<std::string>, FValue> memo;
    for (const auto& x : samples) {
        auto it = memo.find(x.groups);
        if (it == memo.end()) it = memo.emplace(x.groups, replay(trace, steps, x)).first;
        out.push_back(it->second);
    }
    return out;
}

std::vector<FValue> apply_predictor(const PredictorTrace& trace, const Dataset& data) {
    return apply_predictor(trace, data.samples);
}

}  // namespace gmc
