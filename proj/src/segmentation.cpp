#include "gmc/segmentation.hpp"

#include "gmc/bounds.hpp"
#include "gmc/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gmc {

void FnrTarget::validate() const {
    if (!(sigma > 0.0 && sigma < 1.0)) throw Error(ErrorCode::InvalidConfig, "sigma must lie in (0, 1)");
    if (!(alpha > 0.0)) throw Error(ErrorCode::NonPositiveAlpha, "alpha must be positive");
    if (!(M > 0.0)) throw Error(ErrorCode::InvalidConfig, "M must be positive");
    if (!(-M <= f0 && f0 <= M)) throw Error(ErrorCode::InvalidConfig, "f0 must lie in [-M, M]");
    if (!(noise_half_width >= 0.0)) throw Error(ErrorCode::InvalidConfig, "noise_half_width must be >= 0");
    if (k_p && !(*k_p > 0.0)) throw Error(ErrorCode::InvalidConfig, "k_p must be positive");
    if (!k_p && noise_half_width == 0.0)
        throw Error(ErrorCode::InvalidConfig, "k_p must be given when noise_half_width = 0");
}

double FnrTarget::smoothness() const { return k_p ? *k_p : 1.0 / (2.0 * noise_half_width); }

Vector noisy_scores(const Sample& sample, double w) {
    Vector h = sample.scores;
    if (w != 0.0)
        for (Eigen::Index i = 0; i < h.size(); ++i)
            h(i) += uniform_noise(sample.noise_seed, rng_stream::segmentation_noise, static_cast<std::uint64_t>(i), w);
    return h;
}

namespace {

const BinaryVector& checked_bits(const Sample& x) {
    const BinaryVector& y = label_bits(x.label);
    if (static_cast<Eigen::Index>(y.bits.size()) != x.scores.size())
        throw Error(ErrorCode::DimensionMismatch, "sample '" + x.id + "' label and scores differ in length");
    return y;
}

// Sorted noisy scores of the positive pixels.
std::vector<double> positive_scores(const Sample& x, double w) {
    const BinaryVector& y = checked_bits(x);
    const Vector h = noisy_scores(x, w);
    std::vector<double> pos;
    for (std::size_t i = 0; i < y.bits.size(); ++i)
        if (y.bits[i]) pos.push_back(h(static_cast<Eigen::Index>(i)));
    std::sort(pos.begin(), pos.end());
    return pos;
}

// Cached layout on Sample::derived: [w, sorted positive noisy scores...].
struct Positives {
    std::vector<double> owned;
    const double* begin = nullptr;
    const double* end = nullptr;
};

Positives positives_of(const Sample& x, double w) {
    Positives p;
    if (x.derived.size() >= 2 && x.derived(0) == w) {
        p.begin = x.derived.data() + 1;
        p.end = x.derived.data() + x.derived.size();
        return p;
    }
    p.owned = positive_scores(x, w);
    if (p.owned.empty()) throw Error(ErrorCode::NoPositivePixels, "sample '" + x.id + "' has no positive pixels");
    p.begin = p.owned.data();
    p.end = p.owned.data() + p.owned.size();
    return p;
}

// #{positives <= lambda} / #positives.
double fnr_of(const Positives& p, double lambda) {
    const auto count = std::upper_bound(p.begin, p.end, lambda) - p.begin;
    return static_cast<double>(count) / static_cast<double>(p.end - p.begin);
}

}  // namespace

double fnr(const Sample& sample, double lambda, double noise_half_width) {
    const auto pos = positive_scores(sample, noise_half_width);
    if (pos.empty()) throw Error(ErrorCode::NoPositivePixels, "sample '" + sample.id + "' has no positive pixels");
    double detected = 0.0;
    for (double h : pos) detected += h > lambda ? 1.0 : 0.0;
    return 1.0 - detected / static_cast<double>(pos.size());
}

Dataset prepare_segmentation(const Dataset& data, double w) {
    Dataset out = data;
    for (auto& x : out.samples) {
        const auto pos = positive_scores(x, w);
        if (pos.empty())
            throw Error(ErrorCode::InvariantViolation, "sample '" + x.id + "' has no positive pixels");
        x.derived.resize(static_cast<Eigen::Index>(pos.size()) + 1);
        x.derived(0) = w;
        for (std::size_t i = 0; i < pos.size(); ++i) x.derived(static_cast<Eigen::Index>(i) + 1) = pos[i];
    }
    return out;
}

FnrProblem make_fnr_problem(const FnrTarget& target, const std::vector<PromptGroup>& groups) {
    target.validate();
    const double w = target.noise_half_width;
    const double sigma = target.sigma;
    FnrProblem p;
    p.target = target;

    p.s.id = "fnr_minus_sigma";
    p.s.dim = 1;
    p.s.s_inf_bound = std::max(sigma, 1.0 - sigma);
    p.s.eval = [w, sigma](const FValue& f, const Sample& x, const Vector&, Eigen::Ref<Vector> out) {
        out(0) = fnr_of(positives_of(x, w), f.lambda()) - sigma;
    };
    p.functions = group_indicator_class(groups);

    const double a = 1.0 - sigma;
    const double M = target.M;
    p.potential.kind = PotentialKind::PiecewiseLinearFNR;
    p.potential.smoothness = target.smoothness();
    p.potential.level = sigma;
    p.potential.c_upper = a * target.f0 + M;
    p.potential.c_lower = sigma <= 0.5 ? -(1.0 - sigma) * M : -sigma * M;
    p.potential.exact_smoothness = false;
    p.potential.pointwise = [w, a](const FValue& f, const Sample& x) {
        const Positives pos = positives_of(x, w);
        const double lambda = f.lambda();
        double total = 0.0;
        for (const double* h = pos.begin; h != pos.end; ++h) total += std::min(lambda, *h);
        return a * lambda - total / static_cast<double>(pos.end - pos.begin);
    };

    p.init = make_trace(Initializer::constant_value(target.f0), ProjectionSpec::box(-M, M), {});
    return p;
}

RunResult calibrate_fnr(const Dataset& data, const FnrTarget& target, const std::vector<PromptGroup>& groups,
                        const CalibrationOptions& options) {
    if (data.kind != DataKind::Segmentation)
        throw Error(ErrorCode::KindMismatch, "calibrate_fnr needs segmentation data");
    data.validate();
    const Dataset prepared = prepare_segmentation(data, target.noise_half_width);
    FnrProblem p = make_fnr_problem(target, groups);

    GmcConfig config;
    config.alpha = target.alpha;
    config.eta = options.eta;
    config.selection = options.selection;
    config.B = 1.0;
    config.max_iter = options.max_iter ? *options.max_iter
                                       : static_cast<int>(iteration_bound(p.potential.smoothness, 1.0,
                                                                          p.potential.c_upper, p.potential.c_lower,
                                                                          target.alpha));
    return run_gmc(config, p.s, p.functions, prepared, p.potential, p.init);
}

double pixel_accuracy(const Dataset& data, const std::vector<FValue>& lambda, double w) {
    if (data.empty()) throw Error(ErrorCode::EmptyDataset, "pixel accuracy on empty dataset");
    double correct = 0.0, total = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const Sample& x = data.samples[i];
        const BinaryVector& y = checked_bits(x);
        const Vector h = noisy_scores(x, w);
        for (std::size_t k = 0; k < y.bits.size(); ++k) {
            const bool predicted = h(static_cast<Eigen::Index>(k)) > lambda[i].lambda();
            correct += predicted == static_cast<bool>(y.bits[k]) ? 1.0 : 0.0;
            total += 1.0;
        }
    }
    return correct / total;
}

double pixel_accuracy(const Dataset& data, const PredictorTrace& trace, double w) {
    return pixel_accuracy(data, apply_predictor(trace, data), w);
}

FnrSummary fnr_summary(const FnrTarget& target, const std::vector<PromptGroup>& groups, const Dataset& data,
                       const std::vector<FValue>& lambda) {
    if (data.empty()) throw Error(ErrorCode::EmptyDataset, "fnr summary on empty dataset");
    const double n = static_cast<double>(data.size());
    std::vector<double> rates(data.size());
    FnrSummary out;
    for (std::size_t i = 0; i < data.size(); ++i) {
        rates[i] = fnr_of(positives_of(data.samples[i], target.noise_half_width), lambda[i].lambda());
        out.mean_fnr += rates[i];
    }
    out.mean_fnr /= n;
    for (const auto& a : groups) {
        GroupFnr g;
        g.id = a.id;
        double in = 0.0, sum = 0.0, dev = 0.0;
        for (std::size_t i = 0; i < data.size(); ++i) {
            if (!a.contains(data.samples[i])) continue;
            in += 1.0;
            sum += rates[i];
            dev += rates[i] - target.sigma;
        }
        g.mass = in / n;
        g.fnr = in > 0 ? sum / in : std::numeric_limits<double>::quiet_NaN();
        g.deviation = std::abs(dev / n);
        out.max_deviation = std::max(out.max_deviation, g.deviation);
        out.groups.push_back(g);
    }
    return out;
}

double conformal_baseline_fnr(const Dataset& calibration, const FnrTarget& target) {
    if (calibration.empty()) throw Error(ErrorCode::EmptyCalibration, "conformal baseline needs calibration data");
    target.validate();
    const double w = target.noise_half_width;
    const double nn = static_cast<double>(calibration.size());
    std::vector<Positives> pos;
    std::vector<double> candidates;
    for (const auto& x : calibration.samples) {
        pos.push_back(positives_of(x, w));
        candidates.insert(candidates.end(), pos.back().begin, pos.back().end);
    }
    // positives_of may own its storage; re-point after the vector stopped growing.
    for (auto& p : pos)
        if (!p.owned.empty()) {
            p.begin = p.owned.data();
            p.end = p.owned.data() + p.owned.size();
        }
    const double lo = -target.M;
    candidates.push_back(lo);
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    // n/(n+1) (mean FNR - sigma) + (1 - sigma)/(n+1) <= 0 is
    // sum FNR <= (n+1) sigma - 1; compared in that form (with round-off
    // slack on the sum) so exact boundaries are kept.
    auto ok = [&](double lambda) {
        double total = 0.0;
        for (const auto& p : pos) total += fnr_of(p, lambda);
        return total <= (nn + 1.0) * target.sigma - 1.0 + 1e-9 * std::max(1.0, nn);
    };
    // FNR is non-decreasing in lambda, so `ok` is monotone along the sorted
    // breakpoints: binary search for the last one that passes.
    auto first = std::lower_bound(candidates.begin(), candidates.end(), lo);
    auto last = std::upper_bound(candidates.begin(), candidates.end(), target.M);
    double best = lo;
    std::ptrdiff_t left = 0, right = last - first;  // invariant: [first, first+left) pass
    while (left < right) {
        const std::ptrdiff_t mid = left + (right - left) / 2;
        if (ok(first[mid])) left = mid + 1;
        else right = mid;
    }
    if (left > 0) best = first[left - 1];
    return best;
}

}  // namespace gmc
