#include "gmc/reductions.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace gmc {

const char* to_string(PresetKind kind) {
    switch (kind) {
        case PresetKind::HappyMap: return "happymap";
        case PresetKind::OutcomeIndistinguishability: return "oi";
        case PresetKind::MultivalidBuckets: return "multivalid";
        case PresetKind::QuantileLinearized: return "quantile";
    }
    return "happymap";
}

PresetKind preset_kind_from_string(const std::string& name) {
    if (name == "happymap") return PresetKind::HappyMap;
    if (name == "oi") return PresetKind::OutcomeIndistinguishability;
    if (name == "multivalid") return PresetKind::MultivalidBuckets;
    if (name == "quantile") return PresetKind::QuantileLinearized;
    throw Error(ErrorCode::InvalidConfig, "unknown preset '" + name + "'");
}

PresetPair happymap_preset(const MappingFunctional& s_scalar, const FunctionClass& class_C) {
    if (s_scalar.dim != 1) throw Error(ErrorCode::DimensionNotOne, "HappyMap needs a scalar s");
    for (const auto& c : class_C)
        if (c.dim != 1) throw Error(ErrorCode::DimensionNotOne, "HappyMap function '" + c.id + "' is not scalar");
    return {s_scalar, class_C};
}

MappingFunctional multiaccuracy_s() {
    MappingFunctional s;
    s.id = "f_minus_y";
    s.dim = 1;
    s.s_inf_bound = 1.0;
    s.eval = [](const FValue& f, const Sample& x, const Vector&, Eigen::Ref<Vector> out) {
        out(0) = f.lambda() - static_cast<double>(label_index(x.label));
    };
    return s;
}

PresetPair oi_preset(const std::vector<Discriminator>& discriminators, int class_count) {
    if (class_count < 2) throw Error(ErrorCode::InvalidArgument, "OI needs at least 2 outcomes");
    if (discriminators.empty()) throw Error(ErrorCode::EmptyClass, "OI needs at least one discriminator");
    MappingFunctional s;
    s.id = "p_minus_onehot";
    s.dim = class_count;
    s.s_inf_bound = 1.0;
    s.eval = [class_count](const FValue& f, const Sample& x, const Vector&, Eigen::Ref<Vector> out) {
        const int y = label_index(x.label);
        if (y < 0 || y >= class_count) throw Error(ErrorCode::InvariantViolation, "sample '" + x.id + "' label out of range");
        out = f.value;
        out(y) -= 1.0;
    };
    FunctionClass cls;
    for (const auto& d : discriminators) {
        for (double sign : {1.0, -1.0}) {
            GroupFunction g;
            g.id = std::string(sign > 0 ? "+" : "-") + d.id;
            g.dim = class_count;
            g.norm_bound = d.norm_bound;
            g.description = std::string(sign > 0 ? "+" : "-") + "discriminator " + d.id;
            auto eval = d.eval;
            g.eval = [eval, sign, class_count](const FValue& f, const Sample& x, Eigen::Ref<Vector> out) {
                const Vector v = eval(f, x);
                if (v.size() != class_count) throw Error(ErrorCode::DimensionMismatch, "discriminator output size");
                out = sign * v;
            };
            cls.push_back(std::move(g));
        }
    }
    return {s, cls};
}

namespace {

MappingFunctional below_threshold_s(std::string id, double level) {
    MappingFunctional s;
    s.id = std::move(id);
    s.dim = 1;
    s.s_inf_bound = std::max(level, 1.0 - level);
    s.eval = [level](const FValue& f, const Sample& x, const Vector&, Eigen::Ref<Vector> out) {
        out(0) = (x.scores(0) <= f.lambda() ? 1.0 : 0.0) - level;
    };
    return s;
}

}  // namespace

PresetPair multivalid_preset(int bucket_count, double delta, const std::vector<PromptGroup>& groups) {
    if (bucket_count < 1) throw Error(ErrorCode::InvalidArgument, "bucket count must be >= 1");
    if (!(delta > 0.0 && delta < 1.0)) throw Error(ErrorCode::InvalidDelta, "delta must lie in (0, 1)");
    if (groups.empty()) throw Error(ErrorCode::EmptyClass, "multivalid preset needs groups");
    MappingFunctional s = below_threshold_s("covered_minus_target", 1.0 - delta);
    FunctionClass cls;
    const double m = bucket_count;
    for (const auto& a : groups) {
        for (int i = 1; i <= bucket_count; ++i) {
            const double lo = (i - 1) / m;
            const double hi = i / m;
            const bool last = i == bucket_count;
            for (double sign : {1.0, -1.0}) {
                GroupFunction g;
                g.id = std::string(sign > 0 ? "+" : "-") + a.id + "|bucket" + std::to_string(i);
                g.dim = 1;
                g.norm_bound = 1.0;
                g.description = "1{x in " + a.id + "} 1{q(x) in bucket " + std::to_string(i) + "}";
                g.reads_f = true;
                g.groups_only = a.membership_only;
                auto contains = a.contains;
                g.eval = [contains, lo, hi, last, sign](const FValue& f, const Sample& x, Eigen::Ref<Vector> out) {
                    const double q = f.lambda();
                    const bool in_bucket = q >= lo && (q < hi || (last && q <= hi));
                    out(0) = contains(x) && in_bucket ? sign : 0.0;
                };
                cls.push_back(std::move(g));
            }
        }
    }
    return {s, cls};
}

PresetPair quantile_linearized_preset(double q, const std::vector<PromptGroup>& groups) {
    if (!(q > 0.0 && q < 1.0)) throw Error(ErrorCode::InvalidArgument, "quantile level must lie in (0, 1)");
    return {below_threshold_s("covered_minus_q", q), group_indicator_class(groups)};
}

double linearized_quantile_violation(const std::vector<FValue>& f, const Dataset& data, const PromptGroup& group,
                                     double q) {
    if (data.empty()) throw Error(ErrorCode::EmptyDataset, "empty dataset");
    double total = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const Sample& x = data.samples[i];
        if (group.contains(x)) total += q - (x.scores(0) <= f[i].lambda() ? 1.0 : 0.0);
    }
    return std::abs(total / static_cast<double>(data.size()));
}

double quantile_calibration_error(const std::vector<FValue>& f, const Dataset& data, const PromptGroup& group,
                                  double q) {
    std::map<double, std::pair<double, double>> levels;  // v -> (count, covered)
    double in_group = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const Sample& x = data.samples[i];
        if (!group.contains(x)) continue;
        in_group += 1.0;
        auto& level = levels[f[i].lambda()];
        level.first += 1.0;
        level.second += x.scores(0) <= f[i].lambda() ? 1.0 : 0.0;
    }
    if (in_group == 0.0) return 0.0;
    double total = 0.0;
    for (const auto& [v, cc] : levels) {
        const double gap = q - cc.second / cc.first;
        total += cc.first / in_group * gap * gap;
    }
    return total;
}

Potential squared_residual_potential() {
    return Potential::custom(
        [](const FValue& f, const Sample& x) {
            const int y = label_index(x.label);
            if (f.dim() == 1) {
                const double r = f.lambda() - static_cast<double>(y);
                return 0.5 * r * r;
            }
            Vector r = f.value;
            r(y) -= 1.0;
            return 0.5 * r.squaredNorm();
        },
        1.0, 0.0, 1.0, true);
}

Potential pinball_potential(double tau) {
    return Potential::custom(
        [tau](const FValue& f, const Sample& x) {
            const double v = f.lambda();
            return std::max(v - x.scores(0), 0.0) - tau * v;
        },
        1.0, -tau, 1.0, false);
}

}  // namespace gmc
