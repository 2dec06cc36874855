#pragma once

#include "gmc/core.hpp"
#include "gmc/hierarchy.hpp"
#include "gmc/io.hpp"
#include "gmc/textgen.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace gmc {

struct SyntheticSpec {
    DataKind kind = DataKind::TextGen;
    int n = 1000;
    std::uint64_t seed = 1;
    double disparity = 0.0;

    // textgen: groups "female" / "male" (each w.p. 1/2); attribute set k is a
    // block of consecutive tokens carrying mass base_k +- 2 disparity weight_k
    // (+ for female), with multiplicative jitter. The pre-calibration
    // violation of (female, set k) is about disparity * weight_k.
    int vocab_size = 50;
    std::vector<int> attribute_sizes{5, 4, 3};
    std::vector<double> attribute_base{0.25, 0.12, 0.08};
    std::vector<double> attribute_weights{1.0, 0.5, 0.25};
    double jitter = 0.1;

    // hierarchy: uniform leaf labels, softmax scores with logits
    // signal 1{j = y} + sibling_signal 1{j sibling of y} + N(0, 1); group "b"
    // (w.p. 1/2, else "a") has its logits scaled by 1 + 4 disparity.
    std::optional<LabelTree> tree;  // default: LabelTree::figure_one()
    double signal = 2.0;
    double sibling_signal = 1.0;

    // segmentation: `pixels` pixels, a random positive rectangle (or run),
    // positive scores 0.7 - shift + 0.15 N(0,1), negatives 0.3 + 0.15 N(0,1),
    // clamped to [0, 1]. Groups female/male and white/nonwhite; shift is
    // disparity for male and disparity/2 for white.
    int pixels = 64;

    void validate() const;
};

SyntheticSpec synthetic_spec_from_json(const Json& j);
Dataset synth(const SyntheticSpec& spec);

// Attribute sets matching the textgen generator's token blocks ("U1", "U2", ...).
std::vector<AttributeSet> synthetic_attributes(const SyntheticSpec& spec);
std::vector<std::string> synthetic_groups(const SyntheticSpec& spec);

}  // namespace gmc
