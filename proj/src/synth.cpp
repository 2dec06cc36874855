#include "gmc/synth.hpp"

#include "gmc/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gmc {

void SyntheticSpec::validate() const {
    if (n < 1) throw Error(ErrorCode::InvalidSpec, "n must be >= 1");
    if (!(disparity >= 0.0) || !std::isfinite(disparity)) throw Error(ErrorCode::InvalidSpec, "disparity must be >= 0");
    if (kind == DataKind::TextGen) {
        if (vocab_size < 2) throw Error(ErrorCode::InvalidSpec, "vocab_size must be >= 2");
        if (attribute_sizes.empty()) throw Error(ErrorCode::InvalidSpec, "need at least one attribute set");
        if (attribute_base.size() != attribute_sizes.size() || attribute_weights.size() != attribute_sizes.size())
            throw Error(ErrorCode::InvalidSpec, "attribute_base / attribute_weights must match attribute_sizes");
        int used = 0;
        double worst = 0.0;
        for (std::size_t k = 0; k < attribute_sizes.size(); ++k) {
            if (attribute_sizes[k] < 1) throw Error(ErrorCode::InvalidSpec, "attribute sizes must be >= 1");
            used += attribute_sizes[k];
            const double shift = 2.0 * disparity * attribute_weights[k];
            if (attribute_base[k] < shift - 1e-12)
                throw Error(ErrorCode::InvalidSpec, "disparity too large for attribute set base mass");
            worst += (attribute_base[k] + shift) * (1.0 + jitter);
        }
        if (used >= vocab_size) throw Error(ErrorCode::InvalidSpec, "attribute sets must leave at least one free token");
        if (worst >= 1.0) throw Error(ErrorCode::InvalidSpec, "attribute masses exceed the simplex");
        if (!(jitter >= 0.0 && jitter < 1.0)) throw Error(ErrorCode::InvalidSpec, "jitter must lie in [0, 1)");
    } else if (kind == DataKind::Hierarchy) {
        if (tree && tree->node_count() < 3) throw Error(ErrorCode::InvalidSpec, "tree needs at least 3 nodes");
    } else if (kind == DataKind::Segmentation) {
        if (pixels < 1) throw Error(ErrorCode::InvalidSpec, "pixels must be >= 1");
        if (disparity > 0.7) throw Error(ErrorCode::InvalidSpec, "segmentation disparity must be <= 0.7");
    } else {
        throw Error(ErrorCode::InvalidSpec, "no generator for generic data");
    }
}

SyntheticSpec synthetic_spec_from_json(const Json& j) {
    try {
        SyntheticSpec s;
        s.kind = data_kind_from_string(j.at("application").get<std::string>());
        s.n = j.value("n", s.n);
        s.seed = j.value("seed", s.seed);
        s.disparity = j.value("disparity", s.disparity);
        s.vocab_size = j.value("vocab_size", s.vocab_size);
        s.attribute_sizes = j.value("attribute_sizes", s.attribute_sizes);
        s.attribute_base = j.value("attribute_base", s.attribute_base);
        s.attribute_weights = j.value("attribute_weights", s.attribute_weights);
        s.jitter = j.value("jitter", s.jitter);
        if (j.contains("tree")) s.tree = tree_from_json(j["tree"]);
        s.signal = j.value("signal", s.signal);
        s.sibling_signal = j.value("sibling_signal", s.sibling_signal);
        s.pixels = j.value("pixels", s.pixels);
        s.validate();
        return s;
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::InvalidSpec, std::string("synthetic spec: ") + e.what());
    } catch (const Error& e) {
        if (e.code() == ErrorCode::InvalidSpec) throw;
        throw Error(ErrorCode::InvalidSpec, e.what());
    }
}

std::vector<AttributeSet> synthetic_attributes(const SyntheticSpec& spec) {
    std::vector<AttributeSet> out;
    int next = 0;
    for (std::size_t k = 0; k < spec.attribute_sizes.size(); ++k) {
        std::vector<int> members(static_cast<std::size_t>(spec.attribute_sizes[k]));
        std::iota(members.begin(), members.end(), next);
        next += spec.attribute_sizes[k];
        out.push_back(AttributeSet::make("U" + std::to_string(k + 1), members, spec.vocab_size));
    }
    return out;
}

std::vector<std::string> synthetic_groups(const SyntheticSpec& spec) {
    switch (spec.kind) {
        case DataKind::TextGen: return {"female", "male"};
        case DataKind::Hierarchy: return {"a", "b"};
        case DataKind::Segmentation: return {"female", "male", "nonwhite", "white"};
        default: return {};
    }
}

namespace {

void fill_block(CounterRng& rng, Vector& p, int start, int size, double mass) {
    std::vector<double> w(static_cast<std::size_t>(size));
    double total = 0.0;
    for (auto& v : w) total += (v = rng.exponential());
    for (int j = 0; j < size; ++j) p(start + j) = mass * w[static_cast<std::size_t>(j)] / total;
}

int sample_index(CounterRng& rng, const Vector& p) {
    const double u = rng.uniform() * p.sum();
    double acc = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        acc += p(i);
        if (u < acc) return static_cast<int>(i);
    }
    return static_cast<int>(p.size() - 1);
}

Sample textgen_sample(const SyntheticSpec& spec, CounterRng& rng) {
    Sample x;
    const bool female = rng.bernoulli(0.5);
    x.groups = {female ? "female" : "male"};
    const double sign = female ? 1.0 : -1.0;
    Vector p = Vector::Zero(spec.vocab_size);
    int start = 0;
    double used = 0.0;
    for (std::size_t k = 0; k < spec.attribute_sizes.size(); ++k) {
        const double target = spec.attribute_base[k] + sign * 2.0 * spec.disparity * spec.attribute_weights[k];
        const double mass = std::max(0.0, target * (1.0 + spec.jitter * (2.0 * rng.uniform() - 1.0)));
        fill_block(rng, p, start, spec.attribute_sizes[k], mass);
        start += spec.attribute_sizes[k];
        used += mass;
    }
    fill_block(rng, p, start, spec.vocab_size - start, 1.0 - used);
    p /= p.sum();
    x.scores = p;
    x.label = TokenIndex{sample_index(rng, p)};
    return x;
}

Sample hierarchy_sample(const SyntheticSpec& spec, const LabelTree& tree, CounterRng& rng) {
    Sample x;
    const bool b = rng.bernoulli(0.5);
    x.groups = {b ? "b" : "a"};
    const int K = tree.leaf_count();
    const int y = static_cast<int>(rng.below(static_cast<std::uint64_t>(K)));
    Vector z(K);
    const int py = tree.parent(y);
    for (int j = 0; j < K; ++j) {
        z(j) = rng.normal();
        if (j == y) z(j) += spec.signal;
        else if (tree.parent(j) == py) z(j) += spec.sibling_signal;
    }
    if (b) z *= 1.0 + 4.0 * spec.disparity;
    z.array() -= z.maxCoeff();
    Vector h = z.array().exp();
    x.scores = h / h.sum();
    x.label = ClassIndex{y};
    return x;
}

Sample segmentation_sample(const SyntheticSpec& spec, CounterRng& rng) {
    Sample x;
    const bool male = rng.bernoulli(0.5);
    const bool white = rng.bernoulli(0.5);
    x.groups = {male ? "male" : "female", white ? "white" : "nonwhite"};
    std::sort(x.groups.begin(), x.groups.end());
    const int m = spec.pixels;
    BinaryVector y;
    y.bits.assign(static_cast<std::size_t>(m), 0);
    const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(m))));
    if (side * side == m && side >= 4) {
        const int w = 2 + static_cast<int>(rng.below(static_cast<std::uint64_t>(side / 2)));
        const int h = 2 + static_cast<int>(rng.below(static_cast<std::uint64_t>(side / 2)));
        const int r0 = static_cast<int>(rng.below(static_cast<std::uint64_t>(side - h + 1)));
        const int c0 = static_cast<int>(rng.below(static_cast<std::uint64_t>(side - w + 1)));
        for (int r = r0; r < r0 + h; ++r)
            for (int c = c0; c < c0 + w; ++c) y.bits[static_cast<std::size_t>(r * side + c)] = 1;
    } else {
        const int len = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(std::max(1, m / 2))));
        const int start = static_cast<int>(rng.below(static_cast<std::uint64_t>(m - len + 1)));
        for (int i = start; i < start + len; ++i) y.bits[static_cast<std::size_t>(i)] = 1;
    }
    const double shift = (male ? spec.disparity : 0.0) + (white ? 0.5 * spec.disparity : 0.0);
    x.scores.resize(m);
    for (int i = 0; i < m; ++i) {
        const double mu = y.bits[static_cast<std::size_t>(i)] ? 0.7 - shift : 0.3;
        x.scores(i) = std::clamp(mu + 0.15 * rng.normal(), 0.0, 1.0);
    }
    x.label = std::move(y);
    return x;
}

}  // namespace

Dataset synth(const SyntheticSpec& spec) {
    spec.validate();
    Dataset data;
    data.kind = spec.kind;
    const LabelTree tree = spec.tree ? *spec.tree : LabelTree::figure_one();
    data.samples.reserve(static_cast<std::size_t>(spec.n));
    for (int i = 0; i < spec.n; ++i) {
        CounterRng rng(counter_hash(spec.seed, rng_stream::synth, static_cast<std::uint64_t>(i)), rng_stream::synth);
        Sample x;
        switch (spec.kind) {
            case DataKind::TextGen: x = textgen_sample(spec, rng); break;
            case DataKind::Hierarchy: x = hierarchy_sample(spec, tree, rng); break;
            default: x = segmentation_sample(spec, rng); break;
        }
        x.id = "s" + std::to_string(i);
        x.noise_seed = rng.next_u64();
        data.samples.push_back(std::move(x));
    }
    data.score_dim = static_cast<int>(data.samples.front().scores.size());
    data.group_universe = synthetic_groups(spec);
    std::sort(data.group_universe.begin(), data.group_universe.end());
    return data;
}

}  // namespace gmc
