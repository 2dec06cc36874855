#pragma once

#include "gmc/engine.hpp"
#include "gmc/groups.hpp"

#include <optional>
#include <string>
#include <vector>

namespace gmc {

struct Vocabulary {
    std::vector<std::string> tokens;

    static Vocabulary from_tokens(std::vector<std::string> tokens);  // unique, >= 2
    static Vocabulary indexed(int m);                               // "t0", "t1", ...
    int size() const { return static_cast<int>(tokens.size()); }
    int index_of(const std::string& token) const;                   // InvalidArgument if absent
};

// A set U of sensitive tokens and its indicator vector v.
struct AttributeSet {
    std::string id;
    std::vector<int> members;  // sorted, unique
    Vector indicator;

    static AttributeSet make(std::string id, std::vector<int> members, int vocab_size);
    int size() const { return static_cast<int>(members.size()); }
};

// +-1{x in A} v for every (A, U); ids "+A|U" / "-A|U", norm bound sqrt(|U|).
FunctionClass build_textgen_class(const std::vector<PromptGroup>& groups, const std::vector<AttributeSet>& attrs);

// s = f(x) - E f(x), with the mean as the stats pass.
MappingFunctional textgen_s(int vocab_size);

PredictorTrace textgen_init(int vocab_size);

double bias_gap(const std::vector<FValue>& p, const Dataset& data, const PromptGroup& A, const AttributeSet& U);
double bias_gap(const PredictorTrace& trace, const Dataset& data, const PromptGroup& A, const AttributeSet& U);

// (gap_F + gap_M) / gamma: bound on |P(o in U | F) - P(o in U | M)|.
double conditional_disparity_bound(double gap_F, double gap_M, double gamma);

// Mean -log p(label); probabilities below 1e-300 are floored.
double cross_entropy(const std::vector<FValue>& p, const Dataset& data);

struct CalibrationOptions {
    std::optional<int> max_iter;  // default: the iteration bound
    std::optional<double> eta;
    Selection selection = Selection::FirstInOrder;
};

RunResult calibrate_textgen(const Dataset& data, const std::vector<PromptGroup>& groups,
                            const std::vector<AttributeSet>& attrs, double alpha,
                            const CalibrationOptions& options = {});

}  // namespace gmc
