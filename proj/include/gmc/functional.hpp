#pragma once

#include "gmc/core.hpp"

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace gmc {

using GroupEvaluator = std::function<void(const FValue&, const Sample&, Eigen::Ref<Vector>)>;

// One test function g of the class G. The evaluator writes g(f(x), x) into a
// pre-sized output of length `dim`.
struct GroupFunction {
    std::string id;
    int dim = 1;
    double norm_bound = 1.0;  // A with ||g|| <= A pointwise
    std::string description;
    GroupEvaluator eval;
    // Evaluator reads f(x). When false the engine never re-evaluates g after
    // an update.
    bool reads_f = true;
    // Evaluator reads only f(x) and x's group memberships. Lets replay
    // memoise by membership pattern when the initializer is constant.
    bool groups_only = false;

    Vector operator()(const FValue& f, const Sample& x) const;
};

using FunctionClass = std::vector<GroupFunction>;

// Immutable id -> function lookup shared by a trace and everything replaying it.
class FunctionTable {
public:
    FunctionTable() = default;
    explicit FunctionTable(FunctionClass functions);

    const GroupFunction* find(const std::string& id) const;
    const GroupFunction& at(const std::string& id) const;  // UnknownGroupId
    const FunctionClass& functions() const { return functions_; }  // sorted by id
    std::size_t size() const { return functions_.size(); }

private:
    FunctionClass functions_;
};

std::shared_ptr<const FunctionTable> make_table(FunctionClass functions);

// Sorted copy of a class; rejects duplicate ids and empty classes.
FunctionClass sorted_class(FunctionClass functions);

using StatsPass = std::function<Vector(const std::vector<FValue>&, const std::vector<Sample>&)>;
using MappingEvaluator =
    std::function<void(const FValue&, const Sample&, const Vector& stats, Eigen::Ref<Vector>)>;

// The mapping functional s. `stats`, when set, is a dataset-level reduction
// computed once per evaluation pass and handed to every per-sample call.
struct MappingFunctional {
    std::string id;
    int dim = 1;
    double s_inf_bound = 1.0;  // C2
    StatsPass stats;
    MappingEvaluator eval;

    bool has_stats() const { return static_cast<bool>(stats); }
    Vector compute_stats(const std::vector<FValue>& f, const std::vector<Sample>& x) const;
    Vector operator()(const FValue& f, const Sample& x, const Vector& stats) const;
};

enum class PotentialKind { Quadratic, PiecewiseLinearCoverage, PiecewiseLinearFNR, Pointwise };

const char* to_string(PotentialKind kind);

using PointwisePotential = std::function<double(const FValue&, const Sample&)>;

struct Potential {
    PotentialKind kind = PotentialKind::Quadratic;
    double smoothness = 1.0;  // K_L (K_p for the piecewise-linear kinds)
    double c_lower = 0.0;
    double c_upper = 1.0;
    // Slope parameter of the piecewise-linear kinds (a in a*lambda - min(lambda, r)).
    double level = 0.0;
    // Per-sample term; the potential is its empirical mean. Unused for Quadratic.
    PointwisePotential pointwise;
    // True when smoothness holds for every realisation (not only in
    // expectation over injected noise); enables the per-step descent abort.
    bool exact_smoothness = true;

    static Potential quadratic();
    static Potential custom(PointwisePotential term, double smoothness, double c_lower,
                            double c_upper, bool exact_smoothness);

    void check_kind(DataKind data_kind) const;  // KindMismatch
    double value(const std::vector<FValue>& f, const Dataset& data) const;
};

}  // namespace gmc
