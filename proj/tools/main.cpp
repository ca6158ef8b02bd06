#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "vhftrack/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"vhftrack - terrain-aware VHF tag tracking simulation"};
    app.require_subcommand(1);

    std::string default_out = ".";
    if (const char* env = std::getenv("VHFTRACK_OUTPUT_DIR")) default_out = env;

    vhft::RunOptions run_opts;
    run_opts.out_dir = default_out;
    auto* run = app.add_subcommand("run", "run a Monte-Carlo experiment from a config");
    run->add_option("--config", run_opts.config_path, "scenario config (JSON)")->required();
    run->add_option("--out", run_opts.out_dir, "output directory");
    run->add_option("--trials", run_opts.trials, "trial count override");
    run->add_option("--seed", run_opts.seed, "base seed override");
    run->add_option("--jobs", run_opts.jobs, "parallel trial workers")->check(CLI::Range(1, 256));
    run->add_option("--override", run_opts.overrides, "config override key.path=value");
    run->add_flag("--trace", run_opts.write_traces, "write per-trial mission traces");

    vhft::SweepOptions sweep_opts;
    sweep_opts.base.out_dir = default_out;
    auto* sweep = app.add_subcommand("sweep", "cross-product sweep over config keys");
    sweep->add_option("--config", sweep_opts.base.config_path, "scenario config (JSON)")->required();
    sweep->add_option("--out", sweep_opts.base.out_dir, "output directory");
    sweep->add_option("--trials", sweep_opts.base.trials, "trial count override");
    sweep->add_option("--seed", sweep_opts.base.seed, "base seed override");
    sweep->add_option("--jobs", sweep_opts.base.jobs, "parallel trial workers")
        ->check(CLI::Range(1, 256));
    sweep->add_option("--override", sweep_opts.base.overrides, "config override key.path=value");
    sweep->add_option("--axis", sweep_opts.axes, "sweep axis key.path=v1,v2,...")->required();

    std::string validate_path;
    std::vector<std::string> validate_overrides;
    auto* validate = app.add_subcommand("validate-config", "parse and echo a config");
    validate->add_option("--config", validate_path, "scenario config (JSON)")->required();
    validate->add_option("--override", validate_overrides, "config override key.path=value");

    vhft::DetectorStudyOptions study_opts;
    study_opts.out_dir = default_out;
    auto* study = app.add_subcommand("detector-study", "offline bearing detector study");
    study->add_option("--out", study_opts.out_dir, "output directory");
    study->add_option("--log", study_opts.log_csv, "rotation log CSV to analyze");
    study->add_option("--rotations", study_opts.rotations, "synthetic rotation count");
    study->add_option("--rate", study_opts.detection_rate, "target detection rate");
    study->add_option("--sigma", study_opts.sigma_db, "RSSI noise sigma (dB)");
    study->add_option("--pulses", study_opts.pulses, "pulses per rotation");
    study->add_option("--seed", study_opts.seed, "study seed");

    CLI11_PARSE(app, argc, argv);

    if (run->parsed()) return vhft::cmd_run(run_opts, std::cout, std::cerr);
    if (sweep->parsed()) return vhft::cmd_sweep(sweep_opts, std::cout, std::cerr);
    if (validate->parsed())
        return vhft::cmd_validate(validate_path, validate_overrides, std::cout, std::cerr);
    if (study->parsed()) return vhft::cmd_detector_study(study_opts, std::cout, std::cerr);
    return 1;
}
