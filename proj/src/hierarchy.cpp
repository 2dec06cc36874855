#include "gmc/hierarchy.hpp"

#include "gmc/bounds.hpp"
#include "gmc/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace gmc {

LabelTree LabelTree::from_parents(std::vector<int> parents, int leaves, std::vector<std::string> names) {
    const int n = static_cast<int>(parents.size());
    if (n < 2) throw Error(ErrorCode::InvalidArgument, "tree needs at least a leaf and a root");
    if (leaves < 1 || leaves >= n) throw Error(ErrorCode::InvalidArgument, "leaf count must be in [1, |V|)");
    LabelTree t;
    t.parent_ = std::move(parents);
    t.leaves_ = leaves;
    t.children_.assign(static_cast<std::size_t>(n), {});
    int roots = 0;
    for (int v = 0; v < n; ++v) {
        const int p = t.parent_[static_cast<std::size_t>(v)];
        if (p < 0 || p >= n) throw Error(ErrorCode::UnknownNode, "parent of node " + std::to_string(v) + " out of range");
        if (p == v) {
            ++roots;
            t.root_ = v;
        } else {
            t.children_[static_cast<std::size_t>(p)].push_back(v);
        }
    }
    if (roots != 1) throw Error(ErrorCode::InvalidArgument, "tree must have exactly one self-parented root");
    for (int v = 0; v < n; ++v) {
        const bool has_children = !t.children_[static_cast<std::size_t>(v)].empty();
        if (v < leaves && has_children)
            throw Error(ErrorCode::InvalidArgument, "leaf " + std::to_string(v) + " has children");
        if (v >= leaves && !has_children)
            throw Error(ErrorCode::InvalidArgument, "internal node " + std::to_string(v) + " has no children");
    }
    t.depth_.assign(static_cast<std::size_t>(n), 0);
    for (int v = 0; v < n; ++v) {
        int d = 0;
        for (int u = v; u != t.root_; u = t.parent_[static_cast<std::size_t>(u)]) {
            if (++d > n) throw Error(ErrorCode::InvalidArgument, "tree contains a cycle");
        }
        t.depth_[static_cast<std::size_t>(v)] = d;
        t.height_ = std::max(t.height_, d);
    }
    t.bottom_up_.resize(static_cast<std::size_t>(n));
    std::iota(t.bottom_up_.begin(), t.bottom_up_.end(), 0);
    std::stable_sort(t.bottom_up_.begin(), t.bottom_up_.end(),
                     [&](int a, int b) { return t.depth_[static_cast<std::size_t>(a)] > t.depth_[static_cast<std::size_t>(b)]; });
    if (names.empty()) {
        for (int v = 0; v < n; ++v) names.push_back(std::to_string(v));
    }
    if (static_cast<int>(names.size()) != n)
        throw Error(ErrorCode::InvalidArgument, "tree names must have one entry per node");
    t.names_ = std::move(names);
    return t;
}

LabelTree LabelTree::figure_one() {
    return from_parents({4, 4, 5, 5, 6, 6, 6}, 4,
                        {"GreenBuilding", "WaterPollution", "Cancer", "Alzheimers", "Civil", "Medical", "Root"});
}

void LabelTree::check(int v) const {
    if (v < 0 || v >= node_count()) throw Error(ErrorCode::UnknownNode, "unknown node " + std::to_string(v));
}

int LabelTree::parent(int v) const {
    check(v);
    return parent_[static_cast<std::size_t>(v)];
}

int LabelTree::depth_of(int v) const {
    check(v);
    return depth_[static_cast<std::size_t>(v)];
}

const std::vector<int>& LabelTree::children(int v) const {
    check(v);
    return children_[static_cast<std::size_t>(v)];
}

const std::string& LabelTree::name(int v) const {
    check(v);
    return names_[static_cast<std::size_t>(v)];
}

int LabelTree::node_by_name(const std::string& name) const {
    auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) throw Error(ErrorCode::UnknownNode, "unknown node '" + name + "'");
    return static_cast<int>(it - names_.begin());
}

std::vector<int> ancestors(const LabelTree& tree, int v) {
    std::vector<int> out{v};
    tree.depth_of(v);
    while (v != tree.root()) {
        v = tree.parent(v);
        out.push_back(v);
    }
    return out;
}

int nca(const LabelTree& tree, int i, int j) {
    int di = tree.depth_of(i);
    int dj = tree.depth_of(j);
    while (di > dj) { i = tree.parent(i); --di; }
    while (dj > di) { j = tree.parent(j); --dj; }
    while (i != j) {
        i = tree.parent(i);
        j = tree.parent(j);
    }
    return i;
}

Vector cumulative_scores(const LabelTree& tree, const Vector& leaf_scores) {
    if (leaf_scores.size() != tree.leaf_count())
        throw Error(ErrorCode::DimensionMismatch, "expected " + std::to_string(tree.leaf_count()) + " leaf scores");
    Vector R = Vector::Zero(tree.node_count());
    for (int v : tree.bottom_up_) {
        if (tree.is_leaf(v)) {
            R(v) = leaf_scores(v);
        } else {
            double sum = 0.0;
            for (int c : tree.children_[static_cast<std::size_t>(v)]) sum += R(c);
            R(v) = sum;
        }
    }
    return R;
}

Vector cumulative_scores(const LabelTree& tree, const Sample& sample, double noise_half_width) {
    Vector r = cumulative_scores(tree, sample.scores);
    if (noise_half_width != 0.0)
        for (int v = 0; v < tree.node_count(); ++v)
            r(v) += uniform_noise(sample.noise_seed, rng_stream::hierarchy_noise, static_cast<std::uint64_t>(v),
                                  noise_half_width);
    return r;
}

int point_prediction(const Vector& leaf_scores) {
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < leaf_scores.size(); ++i)
        if (leaf_scores(i) > leaf_scores(best)) best = i;
    return static_cast<int>(best);
}

namespace {

int shallowest_below(const LabelTree& tree, const double* r, int u, double lambda, bool& found) {
    // Walk the chain u -> root and keep the last (shallowest) qualifying node.
    int best = -1;
    for (int v = u;; v = tree.parent(v)) {
        if (r[v] < lambda) best = v;
        if (v == tree.root()) break;
    }
    found = best >= 0;
    return best;
}

int output_from(const LabelTree& tree, const double* r, int u, double lambda, FallbackPolicy fallback) {
    bool found = false;
    const int o = shallowest_below(tree, r, u, lambda, found);
    if (found) return o;
    return fallback == FallbackPolicy::Root ? tree.root() : u;
}

bool covers_fast(const LabelTree& tree, int o, int y) {
    const int d = tree.depth_of(o);
    int v = y;
    for (int k = tree.depth_of(y); k > d; --k) v = tree.parent(v);
    return v == o;
}

}  // namespace

int output_node(const LabelTree& tree, const Vector& r, int u, double lambda, FallbackPolicy fallback) {
    if (r.size() != tree.node_count()) throw Error(ErrorCode::DimensionMismatch, "r must have one entry per node");
    if (!tree.is_leaf(u)) throw Error(ErrorCode::UnknownNode, "u must be a leaf");
    return output_from(tree, r.data(), u, lambda, fallback);
}

bool is_fallback(const LabelTree& tree, const Vector& r, int u, double lambda) {
    bool found = false;
    shallowest_below(tree, r.data(), u, lambda, found);
    return !found;
}

bool covers(const LabelTree& tree, int o, int y) {
    tree.depth_of(o);
    if (!tree.is_leaf(y)) throw Error(ErrorCode::UnknownNode, "covers: y must be a leaf");
    return covers_fast(tree, o, y);
}

bool coverage_identity_check(const LabelTree& tree, const Sample& sample, double lambda, double noise_half_width) {
    const Vector r = cumulative_scores(tree, sample, noise_half_width);
    const int u = point_prediction(sample.scores);
    const int y = label_index(sample.label);
    const bool lhs = r(nca(tree, y, u)) < lambda;
    const bool rhs = covers(tree, output_node(tree, r, u, lambda), y);
    return lhs == rhs;
}

std::vector<EventSet> singleton_events(const LabelTree& tree) {
    std::vector<EventSet> out;
    for (int v = 0; v < tree.node_count(); ++v) out.push_back({tree.name(v), {v}});
    return out;
}

void CoverageTarget::validate() const {
    if (!(sigma > 0.0 && sigma < 1.0)) throw Error(ErrorCode::InvalidConfig, "sigma must lie in (0, 1)");
    if (!(alpha > 0.0)) throw Error(ErrorCode::NonPositiveAlpha, "alpha must be positive");
    if (!(M > 0.0)) throw Error(ErrorCode::InvalidConfig, "M must be positive");
    if (!(noise_half_width >= 0.0)) throw Error(ErrorCode::InvalidConfig, "noise_half_width must be >= 0");
    if (k_p && !(*k_p > 0.0)) throw Error(ErrorCode::InvalidConfig, "k_p must be positive");
    if (!k_p && noise_half_width == 0.0)
        throw Error(ErrorCode::InvalidConfig, "k_p must be given when noise_half_width = 0");
}

double CoverageTarget::smoothness() const { return k_p ? *k_p : 1.0 / (2.0 * noise_half_width); }

namespace {

// Cached layout on Sample::derived: [|V|, w, r_0 .. r_{|V|-1}, u, q(y, u)].
struct Chain {
    Vector owned;
    const double* r = nullptr;
    int u = 0;
    int q = 0;
};

Chain chain_of(const LabelTree& tree, const Sample& x, double w) {
    const int V = tree.node_count();
    Chain c;
    const Vector& d = x.derived;
    if (d.size() == V + 4 && d(0) == static_cast<double>(V) && d(1) == w) {
        c.r = d.data() + 2;
        c.u = static_cast<int>(d(V + 2));
        c.q = static_cast<int>(d(V + 3));
        return c;
    }
    c.owned = cumulative_scores(tree, x, w);
    c.r = c.owned.data();
    c.u = point_prediction(x.scores);
    c.q = nca(tree, label_index(x.label), c.u);
    return c;
}

void check_hierarchy_sample(const LabelTree& tree, const Sample& x) {
    if (x.scores.size() != tree.leaf_count())
        throw Error(ErrorCode::DimensionMismatch, "sample '" + x.id + "' needs one score per leaf");
    const int y = label_index(x.label);
    if (!tree.is_leaf(y))
        throw Error(ErrorCode::InvariantViolation, "sample '" + x.id + "' label is not a leaf of the tree");
}

}  // namespace

Dataset prepare_hierarchy(const Dataset& data, const LabelTree& tree, double noise_half_width) {
    Dataset out = data;
    const int V = tree.node_count();
    for (auto& x : out.samples) {
        check_hierarchy_sample(tree, x);
        const Vector r = cumulative_scores(tree, x, noise_half_width);
        const int u = point_prediction(x.scores);
        x.derived.resize(V + 4);
        x.derived(0) = V;
        x.derived(1) = noise_half_width;
        x.derived.segment(2, V) = r;
        x.derived(V + 2) = u;
        x.derived(V + 3) = nca(tree, label_index(x.label), u);
    }
    return out;
}

CoverageProblem make_coverage_problem(const LabelTree& tree, const CoverageTarget& target,
                                      const std::vector<EventSet>& events) {
    target.validate();
    if (events.empty()) throw Error(ErrorCode::EmptyClass, "no output events given");
    auto shared = std::make_shared<const LabelTree>(tree);
    const double w = target.noise_half_width;
    const double sigma = target.sigma;
    const FallbackPolicy fallback = target.fallback;

    CoverageProblem p;
    p.tree = shared;
    p.target = target;

    p.s.id = "covers_minus_sigma";
    p.s.dim = 1;
    p.s.s_inf_bound = std::max(sigma, 1.0 - sigma);
    p.s.eval = [shared, w, sigma, fallback](const FValue& f, const Sample& x, const Vector&, Eigen::Ref<Vector> out) {
        const Chain c = chain_of(*shared, x, w);
        const int o = output_from(*shared, c.r, c.u, f.lambda(), fallback);
        out(0) = (covers_fast(*shared, o, label_index(x.label)) ? 1.0 : 0.0) - sigma;
    };

    for (const auto& e : events) {
        if (e.nodes.empty()) throw Error(ErrorCode::InvalidArgument, "event '" + e.id + "' is empty");
        std::vector<char> member(static_cast<std::size_t>(tree.node_count()), 0);
        for (int v : e.nodes) {
            tree.depth_of(v);
            member[static_cast<std::size_t>(v)] = 1;
        }
        for (double sign : {1.0, -1.0}) {
            GroupFunction g;
            g.id = std::string(sign > 0 ? "+" : "-") + "o in " + e.id;
            g.dim = 1;
            g.norm_bound = 1.0;
            g.description = std::string(sign > 0 ? "+" : "-") + "1{o(x) in " + e.id + "}";
            g.reads_f = true;
            g.groups_only = false;
            g.eval = [shared, w, fallback, member, sign](const FValue& f, const Sample& x, Eigen::Ref<Vector> out) {
                const Chain c = chain_of(*shared, x, w);
                const int o = output_from(*shared, c.r, c.u, f.lambda(), fallback);
                out(0) = member[static_cast<std::size_t>(o)] ? sign : 0.0;
            };
            p.functions.push_back(std::move(g));
        }
    }

    const double a = 1.0 - sigma;
    const double M = target.M;
    p.potential.kind = PotentialKind::PiecewiseLinearCoverage;
    p.potential.smoothness = target.smoothness();
    p.potential.level = a;
    p.potential.c_lower = (a - 1.0) * M;
    p.potential.c_upper = (a + 1.0) * M;
    p.potential.exact_smoothness = false;
    p.potential.pointwise = [shared, w, a](const FValue& f, const Sample& x) {
        const Chain c = chain_of(*shared, x, w);
        const double lambda = f.lambda();
        return a * lambda - std::min(lambda, c.r[c.q]);
    };

    p.init = make_trace(Initializer::constant_value(M), ProjectionSpec::box(-M, M), {});
    return p;
}

RunResult calibrate_coverage(const Dataset& data, const LabelTree& tree, const CoverageTarget& target,
                             const std::vector<EventSet>& events, const CalibrationOptions& options) {
    if (data.kind != DataKind::Hierarchy) throw Error(ErrorCode::KindMismatch, "calibrate_coverage needs hierarchy data");
    data.validate();
    const Dataset prepared = prepare_hierarchy(data, tree, target.noise_half_width);
    CoverageProblem p = make_coverage_problem(tree, target, events);

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

namespace {

CoverageSummary summarize(const LabelTree& tree, const CoverageTarget& target, const std::vector<EventSet>& events,
                          const Dataset& data, const std::vector<int>& outputs) {
    const double n = static_cast<double>(data.size());
    CoverageSummary out;
    std::vector<char> cov(data.size());
    double covered = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        cov[i] = covers_fast(tree, outputs[i], label_index(data.samples[i].label));
        covered += cov[i];
    }
    out.marginal_coverage = covered / n;
    for (const auto& e : events) {
        EventCoverage ec;
        ec.id = e.id;
        double in = 0.0, in_cov = 0.0, dev = 0.0;
        for (std::size_t i = 0; i < data.size(); ++i) {
            if (std::find(e.nodes.begin(), e.nodes.end(), outputs[i]) == e.nodes.end()) continue;
            in += 1.0;
            in_cov += cov[i];
            dev += (cov[i] ? 1.0 : 0.0) - target.sigma;
        }
        ec.mass = in / n;
        ec.coverage = in > 0 ? in_cov / in : std::numeric_limits<double>::quiet_NaN();
        ec.deviation = std::abs(dev / n);
        out.max_deviation = std::max(out.max_deviation, ec.deviation);
        out.events.push_back(ec);
    }
    return out;
}

}  // namespace

CoverageSummary coverage_summary(const LabelTree& tree, const CoverageTarget& target,
                                 const std::vector<EventSet>& events, const Dataset& data,
                                 const std::vector<FValue>& lambda) {
    if (data.empty()) throw Error(ErrorCode::EmptyDataset, "coverage summary on empty dataset");
    std::vector<int> outputs(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        const Chain c = chain_of(tree, data.samples[i], target.noise_half_width);
        outputs[i] = output_from(tree, c.r, c.u, lambda[i].lambda(), target.fallback);
    }
    return summarize(tree, target, events, data, outputs);
}

CoverageSummary leaf_summary(const LabelTree& tree, const CoverageTarget& target,
                             const std::vector<EventSet>& events, const Dataset& data) {
    if (data.empty()) throw Error(ErrorCode::EmptyDataset, "coverage summary on empty dataset");
    std::vector<int> outputs(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) outputs[i] = point_prediction(data.samples[i].scores);
    return summarize(tree, target, events, data, outputs);
}

double conformal_baseline(const Dataset& calibration, const LabelTree& tree, const CoverageTarget& target) {
    if (calibration.empty()) throw Error(ErrorCode::EmptyCalibration, "conformal baseline needs calibration data");
    target.validate();
    const std::size_t n = calibration.size();
    std::vector<double> rq;
    rq.reserve(n);
    for (const auto& x : calibration.samples) {
        check_hierarchy_sample(tree, x);
        const Chain c = chain_of(tree, x, target.noise_half_width);
        rq.push_back(c.r[c.q]);
    }
    std::sort(rq.begin(), rq.end());
    const double sigma = target.sigma;
    const double nn = static_cast<double>(n);
    // With k samples covered, n/(n+1) (sigma - k/n) + sigma/(n+1) <= 0 is
    // k >= (n+1) sigma; compared in that form so exact boundaries are kept.
    auto ok = [&](std::size_t k) { return static_cast<double>(k) >= (nn + 1.0) * sigma - 1e-9; };
    const double lo = -target.M;
    std::size_t k = static_cast<std::size_t>(std::lower_bound(rq.begin(), rq.end(), lo) - rq.begin());
    if (ok(k)) return lo;
    for (std::size_t i = k; i < n;) {
        std::size_t j = i;
        while (j < n && rq[j] == rq[i]) ++j;  // lambda just above rq[i] covers all of them
        if (ok(j)) return std::nextafter(std::max(rq[i], lo), std::numeric_limits<double>::infinity());
        i = j;
    }
    return target.M;
}

}  // namespace gmc
