#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "thermelt/experiments.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;

int cmd_run(const std::string& config_path, const std::vector<std::string>& overrides) {
    const thermelt::ExperimentResult res = thermelt::run_config_file(config_path, overrides);
    std::printf("%s: %s, %d steps, outputs in %s\n", res.summary.case_name.c_str(),
                res.summary.scheme.c_str(), res.summary.converged_steps,
                res.setup.output_dir.string().c_str());
    if (!res.sim.completed) {
        std::fprintf(stderr, "run did not finish: %s\n", res.sim.failure_reason.c_str());
        return kExitSolver;
    }
    return kExitOk;
}

int cmd_sweep(const std::string& dir, const std::vector<std::string>& overrides, bool serial) {
    const thermelt::SweepOutcome out = thermelt::run_sweep(dir, overrides, serial);
    for (const auto& line : out.messages) std::printf("%s\n", line.c_str());
    std::printf("%d runs, %d config errors, %d failures\n", out.runs, out.config_errors,
                out.solver_failures);
    if (out.config_errors > 0) return kExitConfig;
    if (out.solver_failures > 0) return kExitSolver;
    return kExitOk;
}

int cmd_report(const std::string& dir) {
    std::printf("%s", thermelt::build_report(dir).c_str());
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"transient heat conduction with melting for powder bed fusion"};
    app.require_subcommand(1);

    std::vector<std::string> overrides;
    app.add_option("--override", overrides, "replace a config entry, as key=value")
        ->type_name("KEY=VALUE");
    bool serial = false;
    app.add_flag("--serial", serial, "single-threaded, bitwise-reproducible outputs");

    std::string run_config;
    CLI::App* run = app.add_subcommand("run", "execute one experiment config");
    run->fallthrough();
    run->add_option("config", run_config, "path to a .cfg file")->required();

    std::string sweep_dir;
    CLI::App* sweep = app.add_subcommand("sweep", "execute every .cfg in a directory");
    sweep->fallthrough();
    sweep->add_option("dir", sweep_dir, "directory holding .cfg files")->required();

    std::string report_dir;
    CLI::App* report = app.add_subcommand("report", "aggregate results into one table");
    report->fallthrough();
    report->add_option("dir", report_dir, "directory holding run outputs")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (run->parsed()) return cmd_run(run_config, overrides);
        if (sweep->parsed()) return cmd_sweep(sweep_dir, overrides, serial);
        return cmd_report(report_dir);
    } catch (const thermelt::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitSolver;
    }
}
