#pragma once

#include "gmc/engine.hpp"
#include "gmc/groups.hpp"
#include "gmc/textgen.hpp"

#include <optional>
#include <vector>

namespace gmc {

struct FnrTarget {
    double sigma = 0.075;  // target false-negative rate
    double alpha = 0.005;
    double M = 1.5;        // box for the threshold
    double f0 = 1.5;       // initial threshold
    double noise_half_width = 0.1;
    std::optional<double> k_p;  // default: density of the noise, 1 / (2 w)

    void validate() const;
    double smoothness() const;
};

// Noisy pixel scores h_i + eps_i, eps_i uniform in [-w, w] from the sample's seed.
Vector noisy_scores(const Sample& sample, double noise_half_width);

// 1 - #{positives with noisy score > lambda} / #positives.
double fnr(const Sample& sample, double lambda, double noise_half_width);

struct FnrProblem {
    FnrTarget target;
    MappingFunctional s;
    FunctionClass functions;
    Potential potential;
    PredictorTrace init;
};

FnrProblem make_fnr_problem(const FnrTarget& target, const std::vector<PromptGroup>& groups);

// Copy of `data` with the sorted noisy positive-pixel scores cached per sample.
// Rejects (InvariantViolation) samples without positive pixels.
Dataset prepare_segmentation(const Dataset& data, double noise_half_width);

RunResult calibrate_fnr(const Dataset& data, const FnrTarget& target, const std::vector<PromptGroup>& groups,
                        const CalibrationOptions& options = {});

// Pooled fraction of pixels with 1{h_i + eps_i > lambda(x)} == y_i.
double pixel_accuracy(const Dataset& data, const std::vector<FValue>& lambda, double noise_half_width);
double pixel_accuracy(const Dataset& data, const PredictorTrace& trace, double noise_half_width);

struct GroupFnr {
    std::string id;
    double mass = 0.0;
    double fnr = 0.0;        // mean FNR within the group; NaN when empty
    double deviation = 0.0;  // |E[1{x in A}(FNR - sigma)]|
};

struct FnrSummary {
    double mean_fnr = 0.0;
    std::vector<GroupFnr> groups;
    double max_deviation = 0.0;
};

FnrSummary fnr_summary(const FnrTarget& target, const std::vector<PromptGroup>& groups, const Dataset& data,
                       const std::vector<FValue>& lambda);

// Split-conformal global threshold: the largest lambda with
// n/(n+1) * mean_i(FNR_i(lambda) - sigma) + (1 - sigma)/(n+1) <= 0.
double conformal_baseline_fnr(const Dataset& calibration, const FnrTarget& target);

}  // namespace gmc
