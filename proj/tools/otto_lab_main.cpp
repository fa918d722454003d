// otto-lab: scenario-driven front end for the semigroup / interpolation lab.
//
//   otto-lab run <config-or-builtin-id> [--out DIR]
//   otto-lab list
//   otto-lab plot <report.json> --series <name> [--out FILE]
//
// Exit codes: 0 all checks pass, 1 numerical failure, 2 configuration or
// curvature refusal, 3 I/O error. OTTO_LAB_OUT overrides the output root.

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <iostream>

#include "ottolab/scenario.hpp"

using namespace ottolab;

namespace {

int run_command(const std::string& config_arg, const std::string& out_override) {
    ExperimentConfig cfg;
    if (is_builtin_scenario(config_arg)) {
        cfg = parse_config_text(builtin_config_text(config_arg), "builtin:" + config_arg);
    } else {
        cfg = parse_config(config_arg);
    }
    if (!out_override.empty()) {
        cfg.out_dir = out_override;
    } else if (const char* root = std::getenv("OTTO_LAB_OUT")) {
        cfg.out_dir = std::string(root) + "/" + cfg.id;
    }

    try {
        RunReport report = run_scenario(cfg);
        const std::string path = write_report(report, cfg.out_dir);
        int failed = 0;
        for (const auto& r : report.inequalities)
            if (!r.informational && !r.pass) ++failed;
        std::cout << "scenario " << cfg.id << ": " << report.inequalities.size() << " inequality reports, "
                  << failed << " failing; exit status " << report.exit_status << "\n"
                  << "report: " << path << "\n";
        return report.exit_status;
    } catch (...) {
        // flush a failure marker next to whatever partial outputs exist
        try {
            ensure_directory(cfg.out_dir);
            write_text_file(cfg.out_dir + "/FAILED", "scenario " + cfg.id + " did not complete\n");
        } catch (...) {
        }
        throw;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical laboratory for heat-semigroup calculus, bridge interpolations and local inequalities"};
    app.require_subcommand(1);

    std::string run_config, run_out;
    auto* run = app.add_subcommand("run", "run a scenario from a config file or built-in id");
    run->add_option("config", run_config, "config path or built-in scenario id")->required();
    run->add_option("--out", run_out, "output directory (overrides config and OTTO_LAB_OUT)");

    auto* list = app.add_subcommand("list", "list built-in scenarios");

    std::string plot_report, plot_series, plot_out;
    auto* plot = app.add_subcommand("plot", "extract a series from a report as plot-ready text");
    plot->add_option("report", plot_report, "path to report.json")->required();
    plot->add_option("--series", plot_series, "series name (see report)")->required();
    plot->add_option("--out", plot_out, "output file (default: <series>.dat beside the report)");

    try {
        app.parse(argc, argv);
        if (run->parsed()) return run_command(run_config, run_out);
        if (list->parsed()) {
            for (const auto& [id, desc] : builtin_scenarios()) std::cout << id << "  -  " << desc << "\n";
            return 0;
        }
        if (plot->parsed()) {
            if (plot_out.empty()) {
                std::string stem = plot_series;
                for (char& c : stem)
                    if (c == ':' || c == '/' || c == ' ') c = '_';
                plot_out = (std::filesystem::path(plot_report).parent_path() / (stem + ".dat")).string();
            }
            emit_plot_data(plot_report, plot_series, plot_out);
            std::cout << "wrote " << plot_out << "\n";
            return 0;
        }
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const CurvatureError& e) {
        std::cerr << "curvature refusal: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
