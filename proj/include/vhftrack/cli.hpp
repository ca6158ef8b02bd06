#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace vhft {

struct RunOptions {
    std::string config_path;
    std::string out_dir = ".";
    std::vector<std::string> overrides;
    int trials = -1;            // -1: use the config value
    std::int64_t seed = -1;     // -1: use the config value
    int jobs = 1;
    bool write_traces = false;
};

struct SweepOptions {
    RunOptions base;
    std::vector<std::string> axes;  // "key.path=v1,v2,v3"
};

struct DetectorStudyOptions {
    std::string out_dir = ".";
    std::string log_csv;        // when set, analyze an imported rotation log instead
    std::size_t rotations = 500;
    double detection_rate = 0.3;
    double sigma_db = 1.0;
    std::size_t pulses = 24;
    std::uint64_t seed = 7;
};

/// Monte-Carlo run: writes results.csv and summary.json under out_dir and
/// prints one summary line per method. Returns a process exit status.
int cmd_run(const RunOptions& opts, std::ostream& log, std::ostream& err);

/// Cross-product sweep over config keys; long-format CSV with axis columns.
int cmd_sweep(const SweepOptions& opts, std::ostream& log, std::ostream& err);

/// Parse + validate, print the canonical config.
int cmd_validate(const std::string& config_path, const std::vector<std::string>& overrides,
                 std::ostream& out, std::ostream& err);

/// Offline bearing-detector study; writes detector_study.csv and prints the
/// error statistics.
int cmd_detector_study(const DetectorStudyOptions& opts, std::ostream& log, std::ostream& err);

}  // namespace vhft
