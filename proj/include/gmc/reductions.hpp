#pragma once

#include "gmc/engine.hpp"
#include "gmc/groups.hpp"

#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace gmc {

enum class PresetKind { HappyMap, OutcomeIndistinguishability, MultivalidBuckets, QuantileLinearized };

const char* to_string(PresetKind kind);
PresetKind preset_kind_from_string(const std::string& name);

using PresetPair = std::pair<MappingFunctional, FunctionClass>;

// Identity embedding of a scalar s-HappyMap instance; every function must be scalar.
PresetPair happymap_preset(const MappingFunctional& s_scalar, const FunctionClass& class_C);

// s = f(x) - y for a 0/1 label (multiaccuracy when paired with group indicators).
MappingFunctional multiaccuracy_s();

// A distinguisher A(x, ., p~) given as an explicit vector over the K outcomes.
struct Discriminator {
    std::string id;
    std::function<Vector(const FValue& p, const Sample& x)> eval;
    double norm_bound = 1.0;
};

// s = p~(x) - e_y; G = {+A, -A} for every discriminator.
PresetPair oi_preset(const std::vector<Discriminator>& discriminators, int class_count);

// s = 1{h <= q(x)} - (1 - delta) with h = scores(0); G = +-1{x in G'} 1{q(x) in bucket i}
// for i = 1..m over [0, 1] (the last bucket is closed).
PresetPair multivalid_preset(int bucket_count, double delta, const std::vector<PromptGroup>& groups);

// Linearised quantile calibration: s = 1{h <= f(x)} - q, G = +-1{x in G'}.
// This bounds |E[1{g'}(q - 1{h <= f})]| only. It is not the squared quantile
// calibration error Q(f, g') = sum_v P(f = v | g') (q - P(h <= f | f = v, g'))^2:
// the linear form lets levels with opposite errors cancel, while Q charges
// every level set separately (see quantile_calibration_error).
PresetPair quantile_linearized_preset(double q, const std::vector<PromptGroup>& groups);

double linearized_quantile_violation(const std::vector<FValue>& f, const Dataset& data, const PromptGroup& group,
                                     double q);
double quantile_calibration_error(const std::vector<FValue>& f, const Dataset& data, const PromptGroup& group,
                                  double q);

// Potentials whose gradient is the preset's s.
Potential squared_residual_potential();   // 1/2 ||f - e_y||^2 (scalar: 1/2 (f - y)^2)
Potential pinball_potential(double tau);  // max(f - h, 0) - tau f on [0, 1]

}  // namespace gmc
