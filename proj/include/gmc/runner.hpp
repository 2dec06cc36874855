#pragma once

#include "gmc/engine.hpp"
#include "gmc/io.hpp"
#include "gmc/synth.hpp"

#include <functional>
#include <optional>
#include <string>

namespace gmc {

// One application instance ready for the engine: prepared data, s, G, the
// potential and the initial trace, plus application metrics.
struct AppProblem {
    std::string application;
    Json app_config;  // fully resolved (defaults filled in), embedded in traces
    Dataset data;     // prepared calibration data
    MappingFunctional s;
    FunctionClass functions;
    Potential potential;
    PredictorTrace init;
    std::function<Dataset(const Dataset&)> prepare;
    // {"summary": {...}, "rows": [{"section", "key", "value"}]} for f on prepared data.
    std::function<Json(const std::vector<FValue>&, const Dataset&)> metrics;
    // Baseline predictor fitted on prepared calibration data (absent if none).
    std::function<std::optional<PredictorTrace>(const Dataset&)> baseline;
};

DataKind application_kind(const std::string& application);

AppProblem build_problem(const std::string& application, const Json& app_config, const Dataset& raw,
                         const std::optional<SyntheticSpec>& synth_spec = std::nullopt);

struct RunConfig {
    std::string application;
    std::optional<std::string> data_path;
    std::optional<SyntheticSpec> synth;
    std::optional<std::string> holdout_path;
    std::optional<SyntheticSpec> holdout_synth;
    Json app_config = Json::object();
    GmcConfig gmc;
    bool max_iter_given = false;
    bool baseline = true;
    std::optional<std::string> report_path;
    std::optional<std::string> csv_path;
    std::optional<std::string> trace_path;
    std::string report_format = "json";  // json | csv (primary report file)

    // Validates the schema; relative paths resolve against base_dir.
    static RunConfig from_json(const Json& j, const std::string& base_dir = ".");
};

GmcConfig gmc_config_from_json(const Json& j);

struct RunOutcome {
    int exit_code = 0;
    Json report;
    std::string csv;
    Json trace;
};

RunOutcome run(const RunConfig& config);

// Re-audits a saved trace on a dataset; exit 0 iff every violation <= alpha.
RunOutcome audit_trace(const std::string& data_path, const std::string& trace_path);

Json bounds_report(std::int64_t class_size, double alpha, double delta, double A, double C2, double k_L, double B,
                   double c_u, double c_l);

Json report_section(const AuditReport& report);
std::string report_csv(const Json& report);

// {"error": {"code": ..., "message": ...}}
Json error_record(const std::string& code, const std::string& message);

}  // namespace gmc
