#include "gmc/runner.hpp"

#include "gmc/bounds.hpp"
#include "gmc/hierarchy.hpp"
#include "gmc/reductions.hpp"
#include "gmc/segmentation.hpp"
#include "gmc/textgen.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>
#include <sstream>

namespace gmc {

namespace {

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); }

void check_keys(const Json& j, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) config_error(where + " must be an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || it.key() == a;
        if (!ok) config_error(where + ": unknown key '" + it.key() + "'");
    }
}

double num(const Json& j, const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number()) config_error(std::string("'") + key + "' must be a number");
    return j[key].get<double>();
}

std::optional<double> opt_num(const Json& j, const char* key) {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    if (!j[key].is_number()) config_error(std::string("'") + key + "' must be a number");
    return j[key].get<double>();
}

std::vector<std::string> string_list(const Json& j, const char* key, std::vector<std::string> fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_array()) config_error(std::string("'") + key + "' must be an array of strings");
    std::vector<std::string> out;
    for (const auto& v : j[key]) {
        if (!v.is_string()) config_error(std::string("'") + key + "' must be an array of strings");
        out.push_back(v.get<std::string>());
    }
    return out;
}

Json row(const std::string& section, const std::string& key, double value) {
    return Json{{"section", section}, {"key", key}, {"value", value}};
}

Json nan_to_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

void set_optional(Json& j, const char* key, const std::optional<double>& v) {
    if (v) j[key] = *v;
}

// ---------------------------------------------------------------- textgen

AppProblem textgen_problem(const Json& app, const Dataset& raw, const std::optional<SyntheticSpec>& spec) {
    check_keys(app, "textgen", {"groups", "attributes", "gamma", "vocabulary"});
    AppProblem p;
    p.application = "textgen";
    const std::vector<std::string> groups =
        string_list(app, "groups", spec ? synthetic_groups(*spec) : raw.group_universe);
    std::optional<Vocabulary> vocab;
    if (app.contains("vocabulary")) vocab = Vocabulary::from_tokens(string_list(app, "vocabulary", {}));
    if (vocab && vocab->size() != raw.score_dim) config_error("textgen: vocabulary size differs from score dimension");

    std::vector<AttributeSet> attrs;
    if (app.contains("attributes")) {
        if (!app["attributes"].is_array()) config_error("textgen: 'attributes' must be an array");
        for (const auto& a : app["attributes"]) {
            check_keys(a, "textgen attribute", {"id", "tokens"});
            if (!a.contains("id") || !a["id"].is_string() || !a.contains("tokens") || !a["tokens"].is_array())
                config_error("textgen attribute needs 'id' and 'tokens'");
            std::vector<int> members;
            for (const auto& t : a["tokens"]) {
                if (t.is_number_integer()) members.push_back(t.get<int>());
                else if (t.is_string() && vocab) members.push_back(vocab->index_of(t.get<std::string>()));
                else config_error("textgen attribute tokens must be indices (or strings with a vocabulary)");
            }
            attrs.push_back(AttributeSet::make(a["id"].get<std::string>(), members, raw.score_dim));
        }
    } else if (spec) {
        attrs = synthetic_attributes(*spec);
    } else {
        config_error("textgen: 'attributes' is required for file data");
    }
    const std::optional<double> gamma = opt_num(app, "gamma");

    Json resolved{{"groups", groups}, {"attributes", Json::array()}};
    for (const auto& a : attrs) resolved["attributes"].push_back({{"id", a.id}, {"tokens", a.members}});
    set_optional(resolved, "gamma", gamma);
    p.app_config = resolved;

    const auto prompt_groups = named_groups(groups);
    p.s = textgen_s(raw.score_dim);
    p.functions = build_textgen_class(prompt_groups, attrs);
    p.potential = Potential::quadratic();
    p.init = textgen_init(raw.score_dim);
    p.prepare = [](const Dataset& d) { return d; };
    p.metrics = [prompt_groups, attrs, gamma](const std::vector<FValue>& f, const Dataset& d) {
        Json rows = Json::array();
        double worst = 0.0;
        std::map<std::string, std::vector<double>> gaps_by_attr;
        for (const auto& a : prompt_groups)
            for (const auto& u : attrs) {
                const double gap = bias_gap(f, d, a, u);
                worst = std::max(worst, gap);
                gaps_by_attr[u.id].push_back(gap);
                rows.push_back(row("bias_gap", a.id + "|" + u.id, gap));
            }
        Json summary{{"max_bias_gap", worst}, {"cross_entropy", cross_entropy(f, d)}};
        if (gamma && prompt_groups.size() == 2) {
            for (const auto& [u, gaps] : gaps_by_attr)
                rows.push_back(row("disparity_bound", u, conditional_disparity_bound(gaps[0], gaps[1], *gamma)));
        }
        return Json{{"summary", summary}, {"rows", rows}};
    };
    p.baseline = [](const Dataset&) { return std::optional<PredictorTrace>(); };
    return p;
}

// -------------------------------------------------------------- hierarchy

AppProblem hierarchy_problem(const Json& app, const std::optional<SyntheticSpec>& spec) {
    check_keys(app, "hierarchy", {"tree", "sigma", "M", "noise_half_width", "k_p", "fallback", "events"});
    AppProblem p;
    p.application = "hierarchy";
    LabelTree tree = LabelTree::figure_one();
    if (app.contains("tree")) {
        if (!app["tree"].is_object()) config_error("hierarchy: 'tree' must be a tree object or a path");
        tree = tree_from_json(app["tree"]);
    } else if (spec && spec->tree) {
        tree = *spec->tree;
    }
    CoverageTarget target;
    target.sigma = num(app, "sigma", 0.95);
    target.M = num(app, "M", 1.01);
    target.noise_half_width = num(app, "noise_half_width", 0.005);
    target.k_p = opt_num(app, "k_p");
    const std::string fallback = app.value("fallback", std::string("root"));
    if (fallback == "root") target.fallback = FallbackPolicy::Root;
    else if (fallback == "point") target.fallback = FallbackPolicy::PointPrediction;
    else config_error("hierarchy: 'fallback' must be 'root' or 'point'");

    std::vector<EventSet> events;
    if (!app.contains("events") || app["events"] == "singletons") {
        events = singleton_events(tree);
    } else {
        if (!app["events"].is_array()) config_error("hierarchy: 'events' must be \"singletons\" or an array");
        for (const auto& e : app["events"]) {
            check_keys(e, "hierarchy event", {"id", "nodes"});
            EventSet ev;
            ev.id = e.at("id").get<std::string>();
            for (const auto& v : e.at("nodes")) {
                if (v.is_number_integer()) {
                    tree.depth_of(v.get<int>());
                    ev.nodes.push_back(v.get<int>());
                } else {
                    ev.nodes.push_back(tree.node_by_name(v.get<std::string>()));
                }
            }
            events.push_back(ev);
        }
    }

    Json resolved{{"tree", tree_to_json(tree)}, {"sigma", target.sigma}, {"M", target.M},
                  {"noise_half_width", target.noise_half_width}, {"fallback", fallback}, {"events", Json::array()}};
    set_optional(resolved, "k_p", target.k_p);
    for (const auto& e : events) resolved["events"].push_back({{"id", e.id}, {"nodes", e.nodes}});
    p.app_config = resolved;

    // Alpha is only needed for the target's own validation; the engine uses the run's alpha.
    target.alpha = 1.0;
    CoverageProblem cp = make_coverage_problem(tree, target, events);
    p.s = cp.s;
    p.functions = cp.functions;
    p.potential = cp.potential;
    p.init = cp.init;
    const double w = target.noise_half_width;
    p.prepare = [tree, w](const Dataset& d) { return prepare_hierarchy(d, tree, w); };
    p.metrics = [tree, target, events](const std::vector<FValue>& f, const Dataset& d) {
        const CoverageSummary cs = coverage_summary(tree, target, events, d, f);
        Json rows = Json::array();
        for (const auto& e : cs.events) {
            rows.push_back(row("event_deviation", e.id, e.deviation));
            rows.push_back(row("event_mass", e.id, e.mass));
            rows.push_back({{"section", "event_coverage"}, {"key", e.id}, {"value", nan_to_null(e.coverage)}});
        }
        return Json{{"summary", {{"marginal_coverage", cs.marginal_coverage}, {"max_deviation", cs.max_deviation}}},
                    {"rows", rows}};
    };
    const PredictorTrace init = cp.init;
    p.baseline = [tree, target, init](const Dataset& calib) {
        const double lambda = conformal_baseline(calib, tree, target);
        PredictorTrace t = init;
        t.init = Initializer::constant_value(lambda);
        return std::optional<PredictorTrace>(t);
    };
    return p;
}

// ----------------------------------------------------------- segmentation

AppProblem segmentation_problem(const Json& app, const Dataset& raw, const std::optional<SyntheticSpec>& spec) {
    check_keys(app, "segmentation", {"sigma", "M", "f0", "noise_half_width", "k_p", "groups"});
    AppProblem p;
    p.application = "segmentation";
    FnrTarget target;
    target.sigma = num(app, "sigma", 0.075);
    target.M = num(app, "M", 1.5);
    target.f0 = num(app, "f0", 1.5);
    target.noise_half_width = num(app, "noise_half_width", 0.1);
    target.k_p = opt_num(app, "k_p");
    target.alpha = 1.0;
    const std::vector<std::string> groups =
        string_list(app, "groups", spec ? synthetic_groups(*spec) : raw.group_universe);
    Json resolved{{"sigma", target.sigma}, {"M", target.M}, {"f0", target.f0},
                  {"noise_half_width", target.noise_half_width}, {"groups", groups}};
    set_optional(resolved, "k_p", target.k_p);
    p.app_config = resolved;

    const auto prompt_groups = named_groups(groups);
    FnrProblem fp = make_fnr_problem(target, prompt_groups);
    p.s = fp.s;
    p.functions = fp.functions;
    p.potential = fp.potential;
    p.init = fp.init;
    const double w = target.noise_half_width;
    p.prepare = [w](const Dataset& d) { return prepare_segmentation(d, w); };
    p.metrics = [target, prompt_groups, w](const std::vector<FValue>& f, const Dataset& d) {
        const FnrSummary fs = fnr_summary(target, prompt_groups, d, f);
        Json rows = Json::array();
        for (const auto& g : fs.groups) {
            rows.push_back(row("group_deviation", g.id, g.deviation));
            rows.push_back({{"section", "group_fnr"}, {"key", g.id}, {"value", nan_to_null(g.fnr)}});
            rows.push_back(row("group_mass", g.id, g.mass));
        }
        return Json{{"summary",
                     {{"mean_fnr", fs.mean_fnr}, {"max_deviation", fs.max_deviation},
                      {"pixel_accuracy", pixel_accuracy(d, f, w)}}},
                    {"rows", rows}};
    };
    const PredictorTrace init = fp.init;
    p.baseline = [target, init](const Dataset& calib) {
        PredictorTrace t = init;
        t.init = Initializer::constant_value(conformal_baseline_fnr(calib, target));
        return std::optional<PredictorTrace>(t);
    };
    return p;
}

// ---------------------------------------------------------------- presets

AppProblem preset_problem(const Json& app, const Dataset& raw) {
    check_keys(app, "preset", {"kind", "groups", "buckets", "delta", "q", "discriminators", "init"});
    if (!app.contains("kind") || !app["kind"].is_string()) config_error("preset: 'kind' is required");
    const PresetKind kind = preset_kind_from_string(app["kind"].get<std::string>());
    AppProblem p;
    p.application = "generic-preset";
    const std::vector<std::string> groups = string_list(app, "groups", raw.group_universe);
    Json resolved{{"kind", to_string(kind)}, {"groups", groups}};
    const auto prompt_groups = named_groups(groups);
    p.prepare = [](const Dataset& d) { return d; };
    p.baseline = [](const Dataset&) { return std::optional<PredictorTrace>(); };

    auto scalar_init = [&](double fallback_const, bool default_scores) {
        if (app.contains("init") && app["init"].is_number()) {
            resolved["init"] = app["init"];
            return Initializer::constant_value(app["init"].get<double>());
        }
        const bool scores = app.contains("init") ? app["init"] == "scores" : default_scores;
        resolved["init"] = scores ? Json("scores") : Json(fallback_const);
        return scores ? Initializer::copy_scores() : Initializer::constant_value(fallback_const);
    };

    switch (kind) {
        case PresetKind::HappyMap: {
            auto [s, cls] = happymap_preset(multiaccuracy_s(), group_indicator_class(prompt_groups));
            p.s = s;
            p.functions = cls;
            p.potential = squared_residual_potential();
            p.init = make_trace(scalar_init(0.5, true), ProjectionSpec::box(0.0, 1.0), {});
            break;
        }
        case PresetKind::OutcomeIndistinguishability: {
            std::vector<Discriminator> ds;
            if (!app.contains("discriminators") || !app["discriminators"].is_array())
                config_error("preset oi: 'discriminators' must be an array of {id, vector}");
            resolved["discriminators"] = app["discriminators"];
            for (const auto& d : app["discriminators"]) {
                check_keys(d, "oi discriminator", {"id", "vector"});
                const auto v = d.at("vector").get<std::vector<double>>();
                Vector vec = Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
                if (vec.size() != raw.score_dim) config_error("oi discriminator length differs from score dimension");
                ds.push_back({d.at("id").get<std::string>(), [vec](const FValue&, const Sample&) { return vec; },
                              vec.norm()});
            }
            auto [s, cls] = oi_preset(ds, raw.score_dim);
            p.s = s;
            p.functions = cls;
            p.potential = squared_residual_potential();
            p.init = make_trace(Initializer::copy_scores(), ProjectionSpec::simplex(raw.score_dim), {});
            resolved["init"] = "scores";
            break;
        }
        case PresetKind::MultivalidBuckets: {
            const int m = static_cast<int>(num(app, "buckets", 10));
            const double delta = num(app, "delta", 0.1);
            resolved["buckets"] = m;
            resolved["delta"] = delta;
            auto [s, cls] = multivalid_preset(m, delta, prompt_groups);
            p.s = s;
            p.functions = cls;
            p.potential = pinball_potential(1.0 - delta);
            p.init = make_trace(scalar_init(1.0, false), ProjectionSpec::box(0.0, 1.0), {});
            break;
        }
        case PresetKind::QuantileLinearized: {
            const double q = num(app, "q", 0.9);
            resolved["q"] = q;
            auto [s, cls] = quantile_linearized_preset(q, prompt_groups);
            p.s = s;
            p.functions = cls;
            p.potential = pinball_potential(q);
            p.init = make_trace(scalar_init(1.0, false), ProjectionSpec::box(0.0, 1.0), {});
            break;
        }
    }
    p.app_config = resolved;
    const double q_level = kind == PresetKind::QuantileLinearized ? resolved["q"].get<double>() : 0.0;
    p.metrics = [kind, prompt_groups, q_level](const std::vector<FValue>& f, const Dataset& d) {
        Json rows = Json::array();
        if (kind == PresetKind::QuantileLinearized)
            for (const auto& g : prompt_groups) {
                rows.push_back(row("linearized_violation", g.id, linearized_quantile_violation(f, d, g, q_level)));
                rows.push_back(row("squared_quantile_error", g.id, quantile_calibration_error(f, d, g, q_level)));
            }
        return Json{{"summary", Json::object()}, {"rows", rows}};
    };
    return p;
}

Json resolve_paths(Json app, const std::filesystem::path& base) {
    if (app.is_object() && app.contains("tree") && app["tree"].is_string())
        app["tree"] = read_json_file((base / app["tree"].get<std::string>()).string());
    return app;
}

std::string resolve(const std::filesystem::path& base, const std::string& path) {
    const std::filesystem::path p(path);
    return p.is_absolute() ? p.string() : (base / p).string();
}

}  // namespace

DataKind application_kind(const std::string& application) {
    if (application == "textgen") return DataKind::TextGen;
    if (application == "hierarchy") return DataKind::Hierarchy;
    if (application == "segmentation") return DataKind::Segmentation;
    if (application == "generic-preset") return DataKind::Generic;
    config_error("unknown application '" + application + "'");
}

AppProblem build_problem(const std::string& application, const Json& app_config, const Dataset& raw,
                         const std::optional<SyntheticSpec>& synth_spec) {
    const DataKind kind = application_kind(application);
    if (raw.kind != kind) throw Error(ErrorCode::KindMismatch, "dataset kind does not match the application");
    raw.validate();
    AppProblem p;
    switch (kind) {
        case DataKind::TextGen: p = textgen_problem(app_config, raw, synth_spec); break;
        case DataKind::Hierarchy: p = hierarchy_problem(app_config, synth_spec); break;
        case DataKind::Segmentation: p = segmentation_problem(app_config, raw, synth_spec); break;
        case DataKind::Generic: p = preset_problem(app_config, raw); break;
    }
    p.data = p.prepare(raw);
    return p;
}

GmcConfig gmc_config_from_json(const Json& j) {
    check_keys(j, "gmc", {"alpha", "eta", "B", "max_iter", "selection", "split_mode", "rng_seed"});
    GmcConfig c;
    if (!j.contains("alpha")) config_error("gmc: 'alpha' is required");
    c.alpha = num(j, "alpha", 0.0);
    c.eta = opt_num(j, "eta");
    c.B = opt_num(j, "B");
    if (j.contains("max_iter")) {
        if (!j["max_iter"].is_number_integer()) config_error("gmc: 'max_iter' must be an integer");
        c.max_iter = j["max_iter"].get<int>();
    }
    const std::string sel = j.value("selection", std::string("first"));
    if (sel == "first") c.selection = Selection::FirstInOrder;
    else if (sel == "max") c.selection = Selection::MaxViolation;
    else config_error("gmc: 'selection' must be 'first' or 'max'");
    const std::string split = j.value("split_mode", std::string("empirical"));
    if (split == "empirical") c.split_mode = SplitMode::Empirical;
    else if (split == "split2t") c.split_mode = SplitMode::Split2T;
    else config_error("gmc: 'split_mode' must be 'empirical' or 'split2t'");
    if (j.contains("rng_seed")) c.rng_seed = j["rng_seed"].get<std::uint64_t>();
    c.validate();
    return c;
}

RunConfig RunConfig::from_json(const Json& j, const std::string& base_dir) {
    try {
        check_keys(j, "config", {"application", "data", "synth", "holdout", "holdout_synth", "gmc", "textgen",
                                 "hierarchy", "segmentation", "preset", "baseline", "output", "report_format"});
        RunConfig c;
        if (!j.contains("application") || !j["application"].is_string()) config_error("'application' is required");
        c.application = j["application"].get<std::string>();
        const DataKind kind = application_kind(c.application);
        const std::filesystem::path base(base_dir);
        if (j.contains("data") == j.contains("synth")) config_error("exactly one of 'data' and 'synth' is required");
        if (j.contains("data")) c.data_path = resolve(base, j["data"].get<std::string>());
        Json synth_json;
        if (j.contains("synth")) {
            synth_json = j["synth"];
            synth_json["application"] = c.application;
            if (synth_json.contains("tree") && synth_json["tree"].is_string())
                synth_json["tree"] = read_json_file(resolve(base, synth_json["tree"].get<std::string>()));
            c.synth = synthetic_spec_from_json(synth_json);
            if (c.synth->kind != kind) config_error("synth application differs from the run application");
        }
        if (j.contains("holdout")) c.holdout_path = resolve(base, j["holdout"].get<std::string>());
        if (j.contains("holdout_synth")) {
            if (!c.synth) config_error("'holdout_synth' requires 'synth'");
            Json h = synth_json;
            h.update(j["holdout_synth"]);
            c.holdout_synth = synthetic_spec_from_json(h);
        }
        if (!j.contains("gmc")) config_error("'gmc' section is required");
        c.gmc = gmc_config_from_json(j["gmc"]);
        c.max_iter_given = j["gmc"].contains("max_iter");
        if (c.gmc.split_mode == SplitMode::Split2T && !c.max_iter_given)
            config_error("split2t runs need an explicit gmc.max_iter");
        const std::string section = c.application == "generic-preset" ? "preset" : c.application;
        for (const char* other : {"textgen", "hierarchy", "segmentation", "preset"})
            if (other != section && j.contains(other))
                config_error(std::string("section '") + other + "' does not apply to application " + c.application);
        c.app_config = j.contains(section) ? resolve_paths(j[section], base) : Json::object();
        c.baseline = j.value("baseline", true);
        if (j.contains("output")) {
            check_keys(j["output"], "output", {"report", "csv", "trace"});
            const auto& o = j["output"];
            if (o.contains("report")) c.report_path = resolve(base, o["report"].get<std::string>());
            if (o.contains("csv")) c.csv_path = resolve(base, o["csv"].get<std::string>());
            if (o.contains("trace")) c.trace_path = resolve(base, o["trace"].get<std::string>());
        }
        c.report_format = j.value("report_format", std::string("json"));
        if (c.report_format != "json" && c.report_format != "csv") config_error("'report_format' must be json or csv");
        return c;
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::InvalidConfig, std::string("config: ") + e.what());
    }
}

Json report_section(const AuditReport& report) {
    Json per = Json::object();
    for (const auto& [id, v] : report.per_g_violation) per[id] = v;
    return Json{{"max_violation", report.max_violation}, {"worst_g", report.worst_g},
                {"threshold", report.threshold}, {"pass", report.max_violation <= report.threshold},
                {"per_g", per}};
}

Json error_record(const std::string& code, const std::string& message) {
    return Json{{"error", {{"code", code}, {"message", message}}}};
}

namespace {

void append_metric_rows(std::ostringstream& out, const Json& metrics, const std::string& method) {
    if (!metrics.is_object() || !metrics.contains("rows")) return;
    for (const auto& r : metrics["rows"]) {
        out << r["section"].get<std::string>() << "," << r["key"].get<std::string>() << "," << method << ",";
        if (r["value"].is_number()) out << format_double(r["value"].get<double>());
        out << "\n";
    }
}

void append_audit_rows(std::ostringstream& out, const Json& audit, const std::string& method) {
    if (!audit.is_object()) return;
    for (auto it = audit["per_g"].begin(); it != audit["per_g"].end(); ++it)
        out << "violation," << it.key() << "," << method << "," << format_double(it.value().get<double>()) << "\n";
}

Json metrics_for(const AppProblem& p, const PredictorTrace& trace, const Dataset& data) {
    return p.metrics(apply_predictor(trace, data), data);
}

}  // namespace

std::string report_csv(const Json& report) {
    std::ostringstream out;
    out << "section,key,method,value\n";
    append_audit_rows(out, report["pre_audit"], "pre");
    append_audit_rows(out, report["post_audit"], "gmc");
    const Json& m = report["metrics"];
    append_metric_rows(out, m["pre"], "pre");
    append_metric_rows(out, m["gmc"], "gmc");
    if (m.contains("baseline")) append_metric_rows(out, m["baseline"], "baseline");
    if (report.contains("holdout")) {
        const Json& h = report["holdout"];
        append_audit_rows(out, h["post_audit"], "holdout_gmc");
        append_metric_rows(out, h["metrics"]["gmc"], "holdout_gmc");
        if (h["metrics"].contains("baseline")) append_metric_rows(out, h["metrics"]["baseline"], "holdout_baseline");
    }
    return out.str();
}

RunOutcome run(const RunConfig& config) {
    const DataKind kind = application_kind(config.application);
    const Dataset raw = config.data_path ? ingest(*config.data_path, kind) : synth(*config.synth);
    AppProblem p = build_problem(config.application, config.app_config, raw, config.synth);

    GmcConfig gmc = config.gmc;
    const double B = gmc.B ? *gmc.B : class_b_bound(p.functions);
    const std::int64_t bound =
        iteration_bound(p.potential.smoothness, B, p.potential.c_upper, p.potential.c_lower, gmc.alpha);
    if (!config.max_iter_given) gmc.max_iter = static_cast<int>(std::min<std::int64_t>(bound, 10000000));

    const AuditReport pre = audit(p.init, p.functions, p.s, p.data, gmc.alpha);
    RunResult result;
    if (gmc.split_mode == SplitMode::Split2T) {
        const auto folds = make_folds(p.data, 2 * std::max(gmc.max_iter, 1), gmc.rng_seed);
        result = run_gmc_split(gmc, p.s, p.functions, folds, p.potential, p.init);
    } else {
        result = run_gmc(gmc, p.s, p.functions, p.data, p.potential, p.init);
    }
    const AuditReport post = audit(result.trace, p.functions, p.s, p.data, gmc.alpha);

    Json metrics{{"pre", metrics_for(p, p.init, p.data)}, {"gmc", metrics_for(p, result.trace, p.data)}};
    std::optional<PredictorTrace> baseline;
    if (config.baseline) baseline = p.baseline(p.data);
    if (baseline) {
        metrics["baseline"] = metrics_for(p, *baseline, p.data);
        metrics["baseline"]["summary"]["threshold"] = baseline->init.constant(0);
    }

    Json report;
    report["schema"] = "gmc-report/1";
    report["application"] = config.application;
    report["n_calibration"] = p.data.size();
    report["config"] = {{"alpha", gmc.alpha},
                        {"eta", result.report.eta},
                        {"B", result.report.B},
                        {"max_iter", gmc.max_iter},
                        {"selection", gmc.selection == Selection::FirstInOrder ? "first" : "max"},
                        {"split_mode", gmc.split_mode == SplitMode::Empirical ? "empirical" : "split2t"},
                        {"rng_seed", gmc.rng_seed},
                        {"application", p.app_config}};
    report["bounds"] = {{"iteration_bound", bound},
                        {"K_L", p.potential.smoothness},
                        {"C_u", p.potential.c_upper},
                        {"C_l", p.potential.c_lower},
                        {"potential", to_string(p.potential.kind)}};
    report["status"] = to_string(result.report.status);
    report["halted_clean"] = result.report.halted_clean;
    report["iterations_used"] = result.report.iterations_used;
    report["acceptance_threshold"] = result.report.threshold;
    report["diagnostic"] = result.report.diagnostic;
    report["pre_audit"] = report_section(pre);
    report["post_audit"] = report_section(post);
    report["potential"] = {{"initial", result.report.initial_potential}, {"trace", result.report.potential_trace}};
    report["metrics"] = metrics;

    std::optional<Dataset> holdout_raw;
    if (config.holdout_path) holdout_raw = ingest(*config.holdout_path, kind);
    else if (config.holdout_synth) holdout_raw = synth(*config.holdout_synth);
    if (holdout_raw) {
        const Dataset held = p.prepare(*holdout_raw);
        const AuditReport h = audit(result.trace, p.functions, p.s, held, gmc.alpha);
        Json hm{{"gmc", metrics_for(p, result.trace, held)}};
        if (baseline) hm["baseline"] = metrics_for(p, *baseline, held);
        report["holdout"] = {{"n", held.size()}, {"post_audit", report_section(h)}, {"metrics", hm}};
    }

    RunOutcome out;
    out.report = report;
    out.csv = report_csv(report);
    out.trace = trace_to_json(result.trace, config.application, p.app_config, gmc.alpha);
    out.exit_code = result.report.halted_clean && post.max_violation <= gmc.alpha ? 0 : 1;

    if (config.report_path)
        write_text_file(*config.report_path, config.report_format == "csv" ? out.csv : dump_json(report, 2) + "\n");
    if (config.csv_path) write_text_file(*config.csv_path, out.csv);
    if (config.trace_path) write_text_file(*config.trace_path, dump_json(out.trace, 2) + "\n");
    return out;
}

RunOutcome audit_trace(const std::string& data_path, const std::string& trace_path) {
    TraceDocument doc = trace_from_json(read_json_file(trace_path));
    const Dataset raw = ingest(data_path, application_kind(doc.application));
    AppProblem p = build_problem(doc.application, doc.app_config, raw);
    PredictorTrace trace = doc.trace;
    trace.functions = make_table(p.functions);
    const AuditReport a = audit(trace, p.functions, p.s, p.data, doc.alpha);
    RunOutcome out;
    out.report = {{"schema", "gmc-audit/1"},
                  {"application", doc.application},
                  {"n", p.data.size()},
                  {"alpha", doc.alpha},
                  {"steps", trace.steps.size()},
                  {"audit", report_section(a)},
                  {"metrics", metrics_for(p, trace, p.data)}};
    out.exit_code = a.max_violation <= doc.alpha ? 0 : 1;
    return out;
}

Json bounds_report(std::int64_t class_size, double alpha, double delta, double A, double C2, double k_L, double B,
                   double c_u, double c_l) {
    return Json{{"inputs",
                 {{"class_size", class_size}, {"alpha", alpha}, {"delta", delta}, {"A", A}, {"C2", C2},
                  {"K_L", k_L}, {"B", B}, {"C_u", c_u}, {"C_l", c_l}}},
                {"iteration_bound", iteration_bound(k_L, B, c_u, c_l, alpha)},
                {"sample_complexity", sample_complexity(class_size, A, C2, alpha, delta)}};
}

}  // namespace gmc
