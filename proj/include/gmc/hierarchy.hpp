#pragma once

#include "gmc/engine.hpp"
#include "gmc/textgen.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace gmc {

// Rooted label tree in parent-array form. Nodes are 0-based; the first
// `leaves` nodes are the leaves (class labels) and the root is its own parent.
class LabelTree {
public:
    static LabelTree from_parents(std::vector<int> parents, int leaves, std::vector<std::string> names = {});
    // Two-level example tree: GreenBuilding, WaterPollution | Cancer, Alzheimers
    // under Civil and Medical, both under Root.
    static LabelTree figure_one();

    int node_count() const { return static_cast<int>(parent_.size()); }
    int leaf_count() const { return leaves_; }
    int root() const { return root_; }
    int height() const { return height_; }
    int parent(int v) const;
    int depth_of(int v) const;
    bool is_leaf(int v) const { return v >= 0 && v < leaves_; }
    const std::vector<int>& children(int v) const;
    const std::string& name(int v) const;
    int node_by_name(const std::string& name) const;  // UnknownNode
    const std::vector<int>& parents() const { return parent_; }
    const std::vector<std::string>& names() const { return names_; }

private:
    void check(int v) const;

    std::vector<int> parent_;
    std::vector<int> depth_;
    std::vector<std::vector<int>> children_;
    std::vector<int> bottom_up_;  // nodes by decreasing depth
    std::vector<std::string> names_;
    int leaves_ = 0;
    int root_ = 0;
    int height_ = 0;

    friend Vector cumulative_scores(const LabelTree&, const Vector&);
};

// v, parent(v), ..., root.
std::vector<int> ancestors(const LabelTree& tree, int v);
int nca(const LabelTree& tree, int i, int j);

// R_v = sum of leaf scores under v.
Vector cumulative_scores(const LabelTree& tree, const Vector& leaf_scores);
// r = R + eps, eps_v uniform in [-w, w] from the sample's noise seed.
Vector cumulative_scores(const LabelTree& tree, const Sample& sample, double noise_half_width = 0.0);

// argmax leaf score, ties to the lowest index.
int point_prediction(const Vector& leaf_scores);

// What to output when no node on u's chain has r_v < lambda.
enum class FallbackPolicy { Root, PointPrediction };

// Shallowest v in ancestors(u) with r_v < lambda.
int output_node(const LabelTree& tree, const Vector& r, int u, double lambda,
                FallbackPolicy fallback = FallbackPolicy::Root);
bool is_fallback(const LabelTree& tree, const Vector& r, int u, double lambda);
bool covers(const LabelTree& tree, int o, int y);

// 1{r_{q(y,u)} < lambda} == 1{o covers y}. Holds whenever r is non-decreasing
// towards the root and the output is not a fallback.
bool coverage_identity_check(const LabelTree& tree, const Sample& sample, double lambda,
                             double noise_half_width = 0.0);

struct EventSet {
    std::string id;
    std::vector<int> nodes;
};

std::vector<EventSet> singleton_events(const LabelTree& tree);

struct CoverageTarget {
    double sigma = 0.95;        // target coverage
    double alpha = 0.025;
    double M = 1.01;            // box for lambda and bound on |r|
    double noise_half_width = 0.005;
    std::optional<double> k_p;  // default: density of the noise, 1 / (2 w)
    FallbackPolicy fallback = FallbackPolicy::Root;

    void validate() const;
    double smoothness() const;
};

struct CoverageProblem {
    std::shared_ptr<const LabelTree> tree;
    CoverageTarget target;
    MappingFunctional s;
    FunctionClass functions;
    Potential potential;
    PredictorTrace init;
};

CoverageProblem make_coverage_problem(const LabelTree& tree, const CoverageTarget& target,
                                      const std::vector<EventSet>& events);

// Copy of `data` with the noisy cumulative scores cached on each sample.
Dataset prepare_hierarchy(const Dataset& data, const LabelTree& tree, double noise_half_width);

RunResult calibrate_coverage(const Dataset& data, const LabelTree& tree, const CoverageTarget& target,
                             const std::vector<EventSet>& events, const CalibrationOptions& options = {});

struct EventCoverage {
    std::string id;
    double mass = 0.0;       // P(o in U)
    double coverage = 0.0;   // P(covers | o in U); NaN when mass = 0
    double deviation = 0.0;  // |E[1{o in U}(covers - sigma)]|
};

struct CoverageSummary {
    double marginal_coverage = 0.0;
    std::vector<EventCoverage> events;
    double max_deviation = 0.0;
};

CoverageSummary coverage_summary(const LabelTree& tree, const CoverageTarget& target,
                                 const std::vector<EventSet>& events, const Dataset& data,
                                 const std::vector<FValue>& lambda);
// Summary when always outputting the point prediction u(x).
CoverageSummary leaf_summary(const LabelTree& tree, const CoverageTarget& target,
                             const std::vector<EventSet>& events, const Dataset& data);

// Split-conformal global threshold: the smallest lambda with
// n/(n+1) * mean_i(sigma - 1{r_q < lambda}) + sigma/(n+1) <= 0.
double conformal_baseline(const Dataset& calibration, const LabelTree& tree, const CoverageTarget& target);

}  // namespace gmc
