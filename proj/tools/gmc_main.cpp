#include "gmc/runner.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

namespace {

int report_error(const char* code, const std::string& message) {
    std::cerr << gmc::dump_json(gmc::error_record(code, message)) << "\n";
    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Generalized multicalibration: calibrate, audit and bound"};
    app.require_subcommand(1);

    std::string config_path;
    auto* run_cmd = app.add_subcommand("run", "Calibrate per a JSON config and write reports");
    run_cmd->add_option("--config", config_path, "Run config (JSON)")->required();

    std::string spec_path, out_path;
    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic JSON-lines dataset");
    synth_cmd->add_option("--spec", spec_path, "Synthetic spec (JSON)")->required();
    synth_cmd->add_option("--out", out_path, "Output JSON-lines path")->required();

    std::string data_path, trace_path;
    auto* audit_cmd = app.add_subcommand("audit", "Re-audit a saved trace on a dataset");
    audit_cmd->add_option("--data", data_path, "Dataset (JSON-lines)")->required();
    audit_cmd->add_option("--trace", trace_path, "Trace (JSON)")->required();

    std::int64_t class_size = 0;
    double alpha = 0, delta = 0, norm_a = 0, c2 = 0, k_l = 1, b = 1, c_u = 1, c_l = 0;
    auto* bounds_cmd = app.add_subcommand("bounds", "Print the iteration bound and sample complexity");
    bounds_cmd->add_option("--class-size", class_size, "|G|")->required();
    bounds_cmd->add_option("--alpha", alpha, "Tolerance")->required();
    bounds_cmd->add_option("--delta", delta, "Failure probability")->required();
    bounds_cmd->add_option("--A", norm_a, "Bound on ||g||")->required();
    bounds_cmd->add_option("--c2", c2, "Bound on ||s||")->required();
    bounds_cmd->add_option("--k-l", k_l, "Smoothness of the potential")->capture_default_str();
    bounds_cmd->add_option("--b", b, "Bound on ||g||^2")->capture_default_str();
    bounds_cmd->add_option("--c-u", c_u, "Upper bound of the potential")->capture_default_str();
    bounds_cmd->add_option("--c-l", c_l, "Lower bound of the potential")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        app.exit(e);
        return 2;
    }

    try {
        if (*run_cmd) {
            const auto base = std::filesystem::path(config_path).parent_path();
            const auto config =
                gmc::RunConfig::from_json(gmc::read_json_file(config_path), base.empty() ? "." : base.string());
            const auto outcome = gmc::run(config);
            if (!config.report_path) std::cout << gmc::dump_json(outcome.report, 2) << "\n";
            return outcome.exit_code;
        }
        if (*synth_cmd) {
            const auto spec = gmc::synthetic_spec_from_json(gmc::read_json_file(spec_path));
            gmc::emit(gmc::synth(spec), out_path);
            return 0;
        }
        if (*audit_cmd) {
            const auto outcome = gmc::audit_trace(data_path, trace_path);
            std::cout << gmc::dump_json(outcome.report, 2) << "\n";
            return outcome.exit_code;
        }
        if (*bounds_cmd) {
            std::cout << gmc::dump_json(gmc::bounds_report(class_size, alpha, delta, norm_a, c2, k_l, b, c_u, c_l), 2)
                      << "\n";
            return 0;
        }
    } catch (const gmc::Error& e) {
        return report_error(gmc::to_string(e.code()), e.what());
    } catch (const std::exception& e) {
        return report_error("InternalError", e.what());
    } catch (...) {
        return report_error("InternalError", "unknown exception");
    }
    return 2;
}
