#pragma once

#include "gmc/core.hpp"
#include "gmc/functional.hpp"
#include "gmc/projections.hpp"

#include <memory>
#include <string>
#include <vector>

namespace gmc {

struct Initializer {
    enum class Kind { CopyScores, Constant };
    Kind kind = Kind::CopyScores;
    Vector constant;

    static Initializer copy_scores() { return {Kind::CopyScores, Vector()}; }
    static Initializer constant_value(double c) { return {Kind::Constant, Vector::Constant(1, c)}; }
    static Initializer constant_vector(Vector c) { return {Kind::Constant, std::move(c)}; }
};

struct TraceStep {
    std::string g_id;
    double eta = 0.0;
    int iteration = 0;
};

// The learned f: initializer, projection and the ordered update steps. The
// function table resolves step ids to evaluators.
struct PredictorTrace {
    Initializer init;
    ProjectionSpec projection;
    std::vector<TraceStep> steps;
    std::shared_ptr<const FunctionTable> functions;

    FValue initial_value(const Sample& x) const;
};

PredictorTrace make_trace(Initializer init, ProjectionSpec projection, FunctionClass functions);

// f <- Proj(f - eta * g). An all-zero g leaves f untouched (bit-exact).
FValue apply_update(const ProjectionSpec& projection, const FValue& f, const Eigen::Ref<const Vector>& g,
                    double eta);

FValue apply_predictor(const PredictorTrace& trace, const Sample& x);
std::vector<FValue> apply_predictor(const PredictorTrace& trace, const Dataset& data);
std::vector<FValue> apply_predictor(const PredictorTrace& trace, const std::vector<Sample>& samples);

}  // namespace gmc
