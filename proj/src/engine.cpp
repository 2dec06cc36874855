#include "gmc/engine.hpp"

#include "gmc/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <sstream>
#include <thread>

namespace gmc {

void GmcConfig::validate() const {
    if (!(alpha > 0.0) || !std::isfinite(alpha))
        throw Error(ErrorCode::NonPositiveAlpha, "alpha must be a positive finite number");
    if (eta && !(*eta > 0.0)) throw Error(ErrorCode::InvalidConfig, "eta must be positive");
    if (B && !(*B > 0.0)) throw Error(ErrorCode::InvalidConfig, "B must be positive");
    if (max_iter < 0) throw Error(ErrorCode::InvalidConfig, "max_iter must be >= 0");
}

const char* to_string(RunStatus status) {
    switch (status) {
        case RunStatus::Clean: return "clean";
        case RunStatus::MaxIterExceeded: return "max_iter_exceeded";
        case RunStatus::AssumptionViolated: return "assumption_violated";
    }
    return "unknown";
}

double class_b_bound(const FunctionClass& functions) {
    double b = 0.0;
    for (const auto& g : functions) b = std::max(b, g.norm_bound * g.norm_bound);
    return b;
}

int thread_budget() {
    if (const char* env = std::getenv("GMC_THREADS")) {
        const int v = std::atoi(env);
        if (v >= 1) return v;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

template <typename Fn>
void parallel_for(std::size_t count, std::size_t work_per_item, Fn&& fn) {
    const int threads = thread_budget();
    if (threads <= 1 || count < 2 || count * work_per_item < 200000) {
        for (std::size_t j = 0; j < count; ++j) fn(j);
        return;
    }
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(threads), count);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
            for (std::size_t j = w; j < count; j += workers) fn(j);
        });
    for (auto& t : pool) t.join();
}

// Cached per-sample values of s and of every g (one column per sample).
struct EvalState {
    const MappingFunctional& s;
    const FunctionClass& functions;
    const std::vector<Sample>& x;
    std::vector<FValue> f;
    Vector stats;
    Eigen::MatrixXd S;
    std::vector<Eigen::MatrixXd> G;
    std::vector<double> viol;

    EvalState(const MappingFunctional& s_, const FunctionClass& fns, const std::vector<Sample>& samples,
              std::vector<FValue> f0)
        : s(s_), functions(fns), x(samples), f(std::move(f0)) {
        const Eigen::Index n = static_cast<Eigen::Index>(x.size());
        S.setZero(s.dim, n);
        G.assign(functions.size(), Eigen::MatrixXd::Zero(s.dim, n));
        viol.assign(functions.size(), 0.0);
        refresh_stats();
        for (Eigen::Index i = 0; i < n; ++i) eval_s(i);
        parallel_for(functions.size(), x.size() * s.dim, [&](std::size_t j) {
            for (Eigen::Index i = 0; i < n; ++i) eval_g(j, i);
        });
    }

    // Statistics may come from another fold (split-sample mode).
    void set_stats(Vector st) {
        stats = std::move(st);
        for (Eigen::Index i = 0; i < S.cols(); ++i) eval_s(i);
    }

    void refresh_stats() {
        if (s.has_stats()) stats = s.compute_stats(f, x);
    }

    void eval_s(Eigen::Index i) {
        auto col = S.col(i);
        col.setZero();
        s.eval(f[static_cast<std::size_t>(i)], x[static_cast<std::size_t>(i)], stats, col);
    }

    void eval_g(std::size_t j, Eigen::Index i) {
        auto col = G[j].col(i);
        col.setZero();
        functions[j].eval(f[static_cast<std::size_t>(i)], x[static_cast<std::size_t>(i)], col);
    }

    void compute_violations() {
        parallel_for(functions.size(), x.size() * s.dim, [&](std::size_t j) {
            double total = 0.0;
            for (Eigen::Index i = 0; i < S.cols(); ++i) total += S.col(i).dot(G[j].col(i));
            viol[j] = total / static_cast<double>(S.cols());
        });
    }

    // Applies f <- Proj(f - eta g_j) to every sample and refreshes caches.
    void step(std::size_t j, double eta, const ProjectionSpec& projection) {
        std::vector<Eigen::Index> changed;
        for (Eigen::Index i = 0; i < S.cols(); ++i) {
            auto& fi = f[static_cast<std::size_t>(i)];
            FValue next = apply_update(projection, fi, G[j].col(i), eta);
            if (!(next == fi)) {
                fi = std::move(next);
                changed.push_back(i);
            }
        }
        if (s.has_stats()) {
            refresh_stats();
            for (Eigen::Index i = 0; i < S.cols(); ++i) eval_s(i);
        } else {
            for (auto i : changed) eval_s(i);
        }
        parallel_for(functions.size(), changed.size() * s.dim, [&](std::size_t k) {
            if (!functions[k].reads_f) return;
            for (auto i : changed) eval_g(k, i);
        });
    }
};

void check_dims(const MappingFunctional& s, const FunctionClass& functions) {
    if (!s.eval) throw Error(ErrorCode::InvalidArgument, "mapping functional has no evaluator");
    for (const auto& g : functions)
        if (g.dim != s.dim)
            throw Error(ErrorCode::DimensionMismatch, "group function '" + g.id + "' has dimension " +
                                                          std::to_string(g.dim) + " but s has dimension " +
                                                          std::to_string(s.dim));
}

std::optional<std::size_t> select(const std::vector<double>& viol, double threshold, Selection selection) {
    std::optional<std::size_t> best;
    for (std::size_t j = 0; j < viol.size(); ++j) {
        if (!(viol[j] > threshold)) continue;
        if (selection == Selection::FirstInOrder) return j;
        if (!best || viol[j] > viol[*best]) best = j;
    }
    return best;
}

void fill_report(AuditReport& report, const FunctionClass& functions, const std::vector<double>& viol,
                 double threshold) {
    report.per_g_violation.clear();
    report.max_violation = -std::numeric_limits<double>::infinity();
    report.worst_g.clear();
    for (std::size_t j = 0; j < functions.size(); ++j) {
        report.per_g_violation[functions[j].id] = viol[j];
        if (viol[j] > report.max_violation) {
            report.max_violation = viol[j];
            report.worst_g = functions[j].id;
        }
    }
    report.threshold = threshold;
    report.halted_clean = report.max_violation <= threshold;
}

PredictorTrace output_trace(const PredictorTrace& init, const FunctionClass& functions) {
    PredictorTrace trace = init;
    trace.functions = make_table(functions);
    return trace;
}

double resolve_eta(const GmcConfig& config, const Potential& potential, double B) {
    if (config.eta) return *config.eta;
    return config.alpha / (potential.smoothness * B);
}

}  // namespace

double violation(const PredictorTrace& trace, const GroupFunction& g, const MappingFunctional& s,
                 const Dataset& data) {
    if (data.empty()) throw Error(ErrorCode::EmptyDataset, "violation on empty dataset");
    if (g.dim != s.dim) throw Error(ErrorCode::DimensionMismatch, "s and g dimensions differ");
    FunctionClass one{g};
    EvalState st(s, one, data.samples, apply_predictor(trace, data));
    st.compute_violations();
    return st.viol[0];
}

std::optional<std::string> find_violation(const PredictorTrace& trace, const FunctionClass& functions,
                                          const MappingFunctional& s, const Dataset& data, double threshold,
                                          Selection selection) {
    if (!(threshold >= 0.0)) throw Error(ErrorCode::InvalidArgument, "threshold must be >= 0");
    if (data.empty()) throw Error(ErrorCode::EmptyDataset, "violation search on empty dataset");
    const FunctionClass sorted = sorted_class(functions);
    check_dims(s, sorted);
    EvalState st(s, sorted, data.samples, apply_predictor(trace, data));
    st.compute_violations();
    if (auto j = select(st.viol, threshold, selection)) return sorted[*j].id;
    return std::nullopt;
}

AuditReport audit(const PredictorTrace& trace, const FunctionClass& functions, const MappingFunctional& s,
                  const Dataset& data, double threshold) {
    if (data.empty()) throw Error(ErrorCode::EmptyDataset, "audit on empty dataset");
    const FunctionClass sorted = sorted_class(functions);
    check_dims(s, sorted);
    EvalState st(s, sorted, data.samples, apply_predictor(trace, data));
    st.compute_violations();
    AuditReport report;
    fill_report(report, sorted, st.viol, threshold);
    report.iterations_used = static_cast<int>(trace.steps.size());
    report.status = report.halted_clean ? RunStatus::Clean : RunStatus::MaxIterExceeded;
    return report;
}

RunResult run_gmc(const GmcConfig& config, const MappingFunctional& s, const FunctionClass& functions,
                  const Dataset& data, const Potential& potential, const PredictorTrace& init) {
    config.validate();
    if (config.split_mode != SplitMode::Empirical)
        throw Error(ErrorCode::InvalidConfig, "run_gmc requires split_mode = Empirical");
    if (data.empty()) throw Error(ErrorCode::EmptyDataset, "run_gmc on empty dataset");
    potential.check_kind(data.kind);
    const FunctionClass sorted = sorted_class(functions);
    check_dims(s, sorted);

    RunResult result{output_trace(init, sorted), {}};
    AuditReport& report = result.report;
    report.B = config.B ? *config.B : class_b_bound(sorted);
    report.eta = resolve_eta(config, potential, report.B);
    const double threshold = config.alpha;

    EvalState st(s, sorted, data.samples, apply_predictor(init, data));
    st.compute_violations();
    double current = potential.value(st.f, data);
    report.initial_potential = current;

    int iteration = static_cast<int>(init.steps.size());
    int used = 0;
    report.status = RunStatus::MaxIterExceeded;
    while (true) {
        const auto pick = select(st.viol, threshold, config.selection);
        if (!pick) {
            report.status = RunStatus::Clean;
            break;
        }
        if (used >= config.max_iter) {
            std::ostringstream msg;
            msg << "max_iter = " << config.max_iter << " reached with violation " << st.viol[*pick]
                << " > " << threshold << " for '" << sorted[*pick].id << "'";
            report.diagnostic = msg.str();
            break;
        }
        st.step(*pick, report.eta, result.trace.projection);
        result.trace.steps.push_back({sorted[*pick].id, report.eta, iteration++});
        ++used;
        st.compute_violations();
        const double next = potential.value(st.f, data);
        report.potential_trace.push_back(next);
        if (potential.exact_smoothness && !(next < current)) {
            std::ostringstream msg;
            msg << "potential did not decrease on step " << used << " (g = '" << sorted[*pick].id
                << "', before " << current << ", after " << next
                << "); s is not the gradient of the potential or K_L/B are wrong";
            report.diagnostic = msg.str();
            report.status = RunStatus::AssumptionViolated;
            current = next;
            break;
        }
        current = next;
    }
    fill_report(report, sorted, st.viol, threshold);
    report.iterations_used = used;
    report.halted_clean = report.status == RunStatus::Clean;
    return result;
}

RunResult run_gmc_split(const GmcConfig& config, const MappingFunctional& s, const FunctionClass& functions,
                        const std::vector<Dataset>& folds, const Potential& potential,
                        const PredictorTrace& init) {
    config.validate();
    const std::size_t needed = 2 * static_cast<std::size_t>(std::max(config.max_iter, 1));
    if (folds.size() < needed)
        throw Error(ErrorCode::InsufficientFolds, "need " + std::to_string(needed) + " folds, got " +
                                                      std::to_string(folds.size()));
    for (const auto& fold : folds) {
        if (fold.empty()) throw Error(ErrorCode::EmptyDataset, "empty fold");
        potential.check_kind(fold.kind);
    }
    const FunctionClass sorted = sorted_class(functions);
    check_dims(s, sorted);

    RunResult result{output_trace(init, sorted), {}};
    AuditReport& report = result.report;
    report.B = config.B ? *config.B : class_b_bound(sorted);
    report.eta = resolve_eta(config, potential, report.B);
    const double threshold = 0.75 * config.alpha;
    report.status = RunStatus::MaxIterExceeded;
    report.initial_potential = potential.value(apply_predictor(init, folds[0]), folds[0]);

    int iteration = static_cast<int>(init.steps.size());
    std::vector<double> last_viol(sorted.size(), 0.0);
    const int rounds = std::max(config.max_iter, 1);
    for (int t = 0; t < rounds; ++t) {
        const Dataset& expect_fold = folds[2 * static_cast<std::size_t>(t)];
        const Dataset& stats_fold = folds[2 * static_cast<std::size_t>(t) + 1];
        EvalState st(s, sorted, expect_fold.samples, apply_predictor(result.trace, expect_fold));
        if (s.has_stats()) st.set_stats(s.compute_stats(apply_predictor(result.trace, stats_fold), stats_fold.samples));
        st.compute_violations();
        last_viol = st.viol;
        const auto pick = select(st.viol, threshold, config.selection);
        if (!pick) {
            report.status = RunStatus::Clean;
            break;
        }
        if (t >= config.max_iter) break;
        st.step(*pick, report.eta, result.trace.projection);
        result.trace.steps.push_back({sorted[*pick].id, report.eta, iteration++});
        report.potential_trace.push_back(potential.value(st.f, expect_fold));
    }
    fill_report(report, sorted, last_viol, threshold);
    report.iterations_used = static_cast<int>(result.trace.steps.size() - init.steps.size());
    report.halted_clean = report.status == RunStatus::Clean;
    if (!report.halted_clean)
        report.diagnostic = "folds exhausted after " + std::to_string(report.iterations_used) +
                            " updates without a clean round";
    return result;
}

std::vector<Dataset> make_folds(const Dataset& data, int count, std::uint64_t seed) {
    if (count < 1) throw Error(ErrorCode::InvalidArgument, "fold count must be >= 1");
    const std::size_t size = data.size() / static_cast<std::size_t>(count);
    if (size == 0) throw Error(ErrorCode::InsufficientFolds, "not enough samples for the requested folds");
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);
    CounterRng rng(seed, rng_stream::folds);
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    std::vector<Dataset> folds(static_cast<std::size_t>(count));
    for (std::size_t k = 0; k < folds.size(); ++k) {
        folds[k].score_dim = data.score_dim;
        folds[k].group_universe = data.group_universe;
        folds[k].kind = data.kind;
        folds[k].samples.reserve(size);
        for (std::size_t i = 0; i < size; ++i) folds[k].samples.push_back(data.samples[order[k * size + i]]);
    }
    return folds;
}

double potential_value(const Potential& potential, const PredictorTrace& trace, const Dataset& data) {
    potential.check_kind(data.kind);
    return potential.value(apply_predictor(trace, data), data);
}

namespace {

std::vector<FValue> shifted(const std::vector<FValue>& base, const std::vector<Vector>& w, double a) {
    std::vector<FValue> out = base;
    for (std::size_t i = 0; i < out.size(); ++i) out[i].value += a * w[i];
    return out;
}

// E<s(f), w> with the stats pass evaluated at f.
double directional(const MappingFunctional& s, const std::vector<FValue>& f, const std::vector<Sample>& x,
                   const std::vector<Vector>& w) {
    const Vector st = s.compute_stats(f, x);
    double total = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) total += s(f[i], x[i], st).dot(w[i]);
    return total / static_cast<double>(f.size());
}

std::vector<Vector> s_values(const MappingFunctional& s, const std::vector<FValue>& f,
                             const std::vector<Sample>& x) {
    const Vector st = s.compute_stats(f, x);
    std::vector<Vector> out;
    out.reserve(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) out.push_back(s(f[i], x[i], st));
    return out;
}

}  // namespace

SmoothnessReport check_smoothness(const Potential& potential, const MappingFunctional& s, const Dataset& data,
                                  const std::vector<FValue>& base, int trials, std::uint64_t seed,
                                  const SmoothnessOptions& options) {
    if (trials < 1) throw Error(ErrorCode::InvalidArgument, "trials must be >= 1");
    if (base.size() != data.size()) throw Error(ErrorCode::DimensionMismatch, "base / dataset size mismatch");
    SmoothnessReport report;
    report.trials = trials;
    const std::size_t n = data.size();
    const double a = options.scale;
    const double h = options.fd_step;
    CounterRng rng(seed, rng_stream::smoothness);

    for (int t = 0; t < trials; ++t) {
        std::vector<Vector> w1(n), w2(n);
        for (std::size_t i = 0; i < n; ++i) {
            const Eigen::Index l = base[i].dim();
            w1[i].resize(l);
            w2[i].resize(l);
            for (Eigen::Index k = 0; k < l; ++k) {
                w1[i](k) = rng.normal();
                w2[i](k) = rng.normal();
            }
        }
        // Trial points: f2 = base + a w2, f1 = f2 + a w1, fd points f2 +- h w1.
        auto points = [&](std::vector<FValue>& f2, std::vector<FValue>& f1, std::vector<FValue>& fp,
                          std::vector<FValue>& fm) {
            f2 = shifted(base, w2, a);
            f1 = shifted(f2, w1, a);
            fp = shifted(f2, w1, h);
            fm = shifted(f2, w1, -h);
        };
        std::vector<FValue> f2, f1, fp, fm;
        points(f2, f1, fp, fm);

        auto kinks = [&](bool mask) {
            const auto sb = s_values(s, base, data.samples);
            const auto s2 = s_values(s, f2, data.samples);
            const auto s1 = s_values(s, f1, data.samples);
            const auto sp = s_values(s, fp, data.samples);
            const auto sm = s_values(s, fm, data.samples);
            bool any = false;
            for (std::size_t i = 0; i < n; ++i) {
                const bool differs = s2[i] != sb[i] || s1[i] != s2[i] || sp[i] != s2[i] || sm[i] != s2[i];
                if (!differs) continue;
                any = true;
                if (mask) {
                    w1[i].setZero();
                    w2[i].setZero();
                    ++report.masked_components;
                }
            }
            return any;
        };
        if (!potential.exact_smoothness) {
            if (options.avoid_kinks && !s.has_stats() && kinks(true)) points(f2, f1, fp, fm);
            if (kinks(false)) {
                ++report.kink_crossing_trials;
                continue;
            }
        }
        ++report.evaluated_trials;

        const double L1 = potential.value(f1, data);
        const double L2 = potential.value(f2, data);
        std::vector<Vector> d(n);
        double sq = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            d[i] = f1[i].value - f2[i].value;
            sq += d[i].squaredNorm();
        }
        sq /= static_cast<double>(n);
        const double lin = directional(s, f2, data.samples, d);
        const double slack = (L1 - L2) - (lin + 0.5 * potential.smoothness * sq);
        report.worst_slack = std::max(report.worst_slack, slack);
        if (slack > options.abs_tol * (1.0 + std::abs(L2))) report.pass = false;

        const double fd = (potential.value(fp, data) - potential.value(fm, data)) / (2.0 * h);
        const double analytic = directional(s, f2, data.samples, w1);
        const double scale = std::max({std::abs(fd), std::abs(analytic), 1e-12});
        const double rel = std::abs(fd - analytic) / scale;
        if (std::abs(fd - analytic) > 1e-12) {
            report.worst_gradient_rel_error = std::max(report.worst_gradient_rel_error, rel);
            if (rel > options.rel_tol) report.pass = false;
        }
    }
    if (report.evaluated_trials == 0) report.pass = false;
    return report;
}

}  // namespace gmc
