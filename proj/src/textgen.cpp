#include "gmc/textgen.hpp"

#include "gmc/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace gmc {

Vocabulary Vocabulary::from_tokens(std::vector<std::string> tokens) {
    if (tokens.size() < 2) throw Error(ErrorCode::InvalidArgument, "vocabulary needs at least 2 tokens");
    std::set<std::string> seen(tokens.begin(), tokens.end());
    if (seen.size() != tokens.size()) throw Error(ErrorCode::InvalidArgument, "vocabulary tokens must be unique");
    return Vocabulary{std::move(tokens)};
}

Vocabulary Vocabulary::indexed(int m) {
    std::vector<std::string> tokens;
    for (int i = 0; i < m; ++i) tokens.push_back("t" + std::to_string(i));
    return from_tokens(std::move(tokens));
}

int Vocabulary::index_of(const std::string& token) const {
    auto it = std::find(tokens.begin(), tokens.end(), token);
    if (it == tokens.end()) throw Error(ErrorCode::InvalidArgument, "token '" + token + "' not in vocabulary");
    return static_cast<int>(it - tokens.begin());
}

AttributeSet AttributeSet::make(std::string id, std::vector<int> members, int vocab_size) {
    std::sort(members.begin(), members.end());
    members.erase(std::unique(members.begin(), members.end()), members.end());
    Vector v = Vector::Zero(vocab_size);
    for (int i : members) {
        if (i < 0 || i >= vocab_size)
            throw Error(ErrorCode::InvalidArgument, "attribute '" + id + "' token index out of range");
        v(i) = 1.0;
    }
    return AttributeSet{std::move(id), std::move(members), std::move(v)};
}

FunctionClass build_textgen_class(const std::vector<PromptGroup>& groups, const std::vector<AttributeSet>& attrs) {
    if (groups.empty() || attrs.empty()) throw Error(ErrorCode::EmptyClass, "textgen class needs groups and attributes");
    FunctionClass out;
    for (const auto& a : groups) {
        for (const auto& u : attrs) {
            for (double sign : {1.0, -1.0}) {
                GroupFunction g;
                g.id = std::string(sign > 0 ? "+" : "-") + a.id + "|" + u.id;
                g.dim = static_cast<int>(u.indicator.size());
                g.norm_bound = std::sqrt(static_cast<double>(u.size()));
                g.description = std::string(sign > 0 ? "+" : "-") + "1{x in " + a.id + "} v(" + u.id + ")";
                g.reads_f = false;
                g.groups_only = a.membership_only;
                Vector v = sign * u.indicator;
                auto contains = a.contains;
                g.eval = [contains, v](const FValue&, const Sample& x, Eigen::Ref<Vector> out) {
                    if (contains(x)) out = v;
                    else out.setZero();
                };
                out.push_back(std::move(g));
            }
        }
    }
    return out;
}

MappingFunctional textgen_s(int vocab_size) {
    MappingFunctional s;
    s.id = "f_minus_mean";
    s.dim = vocab_size;
    s.s_inf_bound = 1.0;
    s.stats = [](const std::vector<FValue>& f, const std::vector<Sample>&) {
        Vector mean = Vector::Zero(f.empty() ? 0 : f.front().dim());
        for (const auto& v : f) mean += v.value;
        if (!f.empty()) mean /= static_cast<double>(f.size());
        return mean;
    };
    s.eval = [](const FValue& f, const Sample&, const Vector& mean, Eigen::Ref<Vector> out) {
        out = f.value - mean;
    };
    return s;
}

PredictorTrace textgen_init(int vocab_size) {
    return make_trace(Initializer::copy_scores(), ProjectionSpec::simplex(vocab_size), {});
}

double bias_gap(const std::vector<FValue>& p, const Dataset& data, const PromptGroup& A, const AttributeSet& U) {
    if (data.empty()) return 0.0;
    const double n = static_cast<double>(data.size());
    std::vector<double> mass(p.size());
    double mean = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        mass[i] = 0.0;
        for (int k : U.members) mass[i] += p[i].value(k);
        mean += mass[i];
    }
    mean /= n;
    double total = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i)
        if (A.contains(data.samples[i])) total += mass[i] - mean;
    return std::abs(total / n);
}

double bias_gap(const PredictorTrace& trace, const Dataset& data, const PromptGroup& A, const AttributeSet& U) {
    return bias_gap(apply_predictor(trace, data), data, A, U);
}

double conditional_disparity_bound(double gap_F, double gap_M, double gamma) {
    if (!(gamma > 0.0)) throw Error(ErrorCode::NonPositiveGamma, "gamma must be positive");
    return (gap_F + gap_M) / gamma;
}

double cross_entropy(const std::vector<FValue>& p, const Dataset& data) {
    if (data.empty()) throw Error(ErrorCode::EmptyDataset, "cross entropy on empty dataset");
    double total = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const int y = label_index(data.samples[i].label);
        total -= std::log(std::max(p[i].value(y), 1e-300));
    }
    return total / static_cast<double>(data.size());
}

RunResult calibrate_textgen(const Dataset& data, const std::vector<PromptGroup>& groups,
                            const std::vector<AttributeSet>& attrs, double alpha,
                            const CalibrationOptions& options) {
    if (data.kind != DataKind::TextGen) throw Error(ErrorCode::KindMismatch, "calibrate_textgen needs textgen data");
    data.validate();
    for (const auto& u : attrs)
        if (u.indicator.size() != data.score_dim)
            throw Error(ErrorCode::DimensionMismatch, "attribute '" + u.id + "' does not match the vocabulary size");
    FunctionClass cls = build_textgen_class(groups, attrs);
    const MappingFunctional s = textgen_s(data.score_dim);
    const Potential potential = Potential::quadratic();

    GmcConfig config;
    config.alpha = alpha;
    config.eta = options.eta;
    config.selection = options.selection;
    config.B = class_b_bound(cls);
    config.max_iter = options.max_iter ? *options.max_iter
                                       : static_cast<int>(iteration_bound(potential.smoothness, *config.B,
                                                                          potential.c_upper, potential.c_lower, alpha));
    return run_gmc(config, s, cls, data, potential, textgen_init(data.score_dim));
}

}  // namespace gmc
