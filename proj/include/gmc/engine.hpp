#pragma once

#include "gmc/core.hpp"
#include "gmc/functional.hpp"
#include "gmc/trace.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace gmc {

enum class SplitMode { Empirical, Split2T };
// Which violating g to update on: the first in sorted id order, or the largest.
enum class Selection { FirstInOrder, MaxViolation };

struct GmcConfig {
    double alpha = 0.01;
    std::optional<double> eta;  // default alpha / (K_L * B)
    std::optional<double> B;    // default max_g norm_bound^2
    int max_iter = 100000;      // 0 = audit only
    SplitMode split_mode = SplitMode::Empirical;
    Selection selection = Selection::FirstInOrder;
    std::uint64_t rng_seed = 0;

    void validate() const;
};

enum class RunStatus { Clean, MaxIterExceeded, AssumptionViolated };
const char* to_string(RunStatus status);

struct AuditReport {
    std::map<std::string, double> per_g_violation;
    double max_violation = 0.0;
    std::string worst_g;
    int iterations_used = 0;
    bool halted_clean = false;
    double initial_potential = 0.0;
    std::vector<double> potential_trace;  // value after each accepted update
    double threshold = 0.0;
    double eta = 0.0;
    double B = 0.0;
    RunStatus status = RunStatus::Clean;
    std::string diagnostic;
};

struct RunResult {
    PredictorTrace trace;
    AuditReport report;
};

// Bound B on the squared norm of every g: max norm_bound^2.
double class_b_bound(const FunctionClass& functions);

double violation(const PredictorTrace& trace, const GroupFunction& g, const MappingFunctional& s,
                 const Dataset& data);

std::optional<std::string> find_violation(const PredictorTrace& trace, const FunctionClass& functions,
                                          const MappingFunctional& s, const Dataset& data, double threshold,
                                          Selection selection = Selection::FirstInOrder);

// Independent single pass: replays the trace and evaluates every g once.
AuditReport audit(const PredictorTrace& trace, const FunctionClass& functions, const MappingFunctional& s,
                  const Dataset& data, double threshold);

// The GMC loop on one dataset. `init` supplies initializer and projection (and
// optionally warm-start steps); the returned trace's table is `functions`.
RunResult run_gmc(const GmcConfig& config, const MappingFunctional& s, const FunctionClass& functions,
                  const Dataset& data, const Potential& potential, const PredictorTrace& init);

// Split-sample loop: iteration t evaluates expectations on folds[2t] and the
// statistics of s on folds[2t+1], accepting at 3/4 alpha.
RunResult run_gmc_split(const GmcConfig& config, const MappingFunctional& s, const FunctionClass& functions,
                        const std::vector<Dataset>& folds, const Potential& potential,
                        const PredictorTrace& init);

// Disjoint folds by a seeded shuffle; `count` folds of floor(n / count) samples each.
std::vector<Dataset> make_folds(const Dataset& data, int count, std::uint64_t seed);

double potential_value(const Potential& potential, const PredictorTrace& trace, const Dataset& data);

struct SmoothnessOptions {
    double scale = 1e-2;        // size of the random perturbations
    double fd_step = 1e-6;      // central-difference step
    double rel_tol = 1e-4;      // gradient-check tolerance
    double abs_tol = 1e-10;     // slack allowed in the smoothness inequality
    // Zero the perturbation of any sample whose s changes along the trial's
    // points, so piecewise-linear potentials are probed on linear pieces.
    // Only meaningful for s without a stats pass.
    bool avoid_kinks = false;
};

struct SmoothnessReport {
    bool pass = true;
    int trials = 0;
    int kink_crossing_trials = 0;   // excluded from pass/fail
    int evaluated_trials = 0;
    int masked_components = 0;
    double worst_slack = -1e300;    // max of lhs - rhs (<= 0 when smooth)
    double worst_gradient_rel_error = 0.0;
};

// Randomised audit of K-smoothness and of s being the derivative of L,
// around the base point `base` (one FValue per sample).
SmoothnessReport check_smoothness(const Potential& potential, const MappingFunctional& s, const Dataset& data,
                                  const std::vector<FValue>& base, int trials, std::uint64_t seed,
                                  const SmoothnessOptions& options = {});

// Internal parallelism cap from GMC_THREADS (>= 1).
int thread_budget();

}  // namespace gmc
