#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "vhftrack/cli.hpp"
#include "vhftrack/config.hpp"

using namespace vhft;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TempDir {
    fs::path path;
    TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string str() const { return path.string(); }
};

std::string tiny_config_json() {
    return R"({
      "terrain": {"kind": "flat", "extent_m": 500, "seed": 9},
      "tags": {"count": 1, "mobility": "static"},
      "filter": {"particles": 400},
      "mission": {"time_cap_s": 240},
      "trials": {"count": 2, "base_seed": 7}
    })";
}

}  // namespace

TEST_CASE("empty config yields the documented defaults") {
    const ScenarioConfig cfg = parse_config("{}");
    CHECK(cfg.method == MethodKind::metap);
    CHECK(cfg.radio.source_dbm == 40.0);
    CHECK(cfg.radio.path_loss_exponent == 4.0);
    CHECK(cfg.radio.noise_db == 4.0);
    CHECK(cfg.radio.sensitivity_dbm == -120.0);
    CHECK(cfg.radio.freq_mhz == 150.0);
    CHECK(cfg.filter.particles == 3000);
    CHECK(cfg.filter.birth_prob == 1e-5);
    CHECK(cfg.filter.survival_prob == 0.999);
    CHECK(cfg.filter.det_threshold_m4 == 2e4);
    CHECK(cfg.filter.clutter_rate == 0.05);
    CHECK(cfg.filter.mu_min_db == -16.0);
    CHECK(cfg.filter.mu_max_db == 9.0);
    CHECK(cfg.filter.sigma_aoa_rad == 0.095);
    CHECK(cfg.planner.headings == 8);
    CHECK(cfg.planner.horizon_s == 30.0);
    CHECK(cfg.planner.rotate_s == 20.0);
    CHECK(cfg.planner.alpha == 0.1);
    CHECK(cfg.planner.void_radius_m == 50.0);
    CHECK(cfg.planner.void_min_prob == 0.95);
    CHECK(cfg.uav.v_max == 10.0);
    CHECK(cfg.uav.altitude_agl_m == 80.0);
    CHECK(cfg.mission.time_cap_s == 3600.0);
    CHECK(cfg.terrain.relief_m == 6.0);  // default for the flat class
    CHECK(cfg.tags.count == 20);
    CHECK(cfg.tags.height_above_ground_m == 0.2);
}

TEST_CASE("validation errors carry the key path") {
    try {
        parse_config(R"({"radio": {"noise_db": -1}})");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.path() == "radio.noise_db");
    }
    try {
        parse_config(R"({"filter": {"imprecision_db": [9, -16]}})");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.path() == "filter.imprecision_db");
    }
    try {
        parse_config(R"({"planner": {"rotate_s": 31}})");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.path() == "planner.rotate_s");
    }
}

TEST_CASE("unknown keys are rejected with their path") {
    try {
        parse_config(R"({"radio": {"nois_db": 4}})");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.path() == "radio.nois_db");
    }
    CHECK_THROWS_AS(parse_config(R"({"radios": {}})"), ConfigError);
}

TEST_CASE("paper-style config round-trips through serialize/parse") {
    const std::string text = slurp(std::string(VHFT_SOURCE_DIR) + "/configs/paper_flat.json");
    REQUIRE_FALSE(text.empty());
    const ScenarioConfig cfg = parse_config(text);
    CHECK(cfg.tags.count == 20);
    CHECK(cfg.filter.pd_model == "complex");
    const std::string canon = serialize_config(cfg);
    const ScenarioConfig cfg2 = parse_config(canon);
    CHECK(serialize_config(cfg2) == canon);
}

TEST_CASE("overrides patch dotted paths before parsing") {
    const std::string base = R"({"planner": {"reward": "renyi"}})";
    const std::string patched =
        apply_overrides(base, {"planner.reward=shannon", "filter.particles=500",
                               "tags.mobility=static"});
    const ScenarioConfig cfg = parse_config(patched);
    CHECK(cfg.planner.reward == "shannon");
    CHECK(cfg.filter.particles == 500);
    CHECK_FALSE(cfg.tags.wandering);
    CHECK_THROWS_AS(apply_overrides(base, {"no_equals_sign"}), ConfigError);
}

TEST_CASE("method table and effective horizons") {
    for (const char* name :
         {"metap", "imp_rssi", "caoa20", "aoa_rssi20", "aoa_rssi45", "pf_baseline"}) {
        const MethodKind m = method_from_string(name);
        CHECK(to_string(m) == name);
    }
    CHECK_THROWS_AS(method_from_string("bogus"), ConfigError);

    ScenarioConfig cfg = parse_config(R"({"method": "aoa_rssi45"})");
    CHECK(cfg.effective_rotate_s() == 45.0);
    CHECK(cfg.effective_horizon_s() == 55.0);  // same 10 s travel leg
    cfg = parse_config(R"({"method": "metap"})");
    CHECK(cfg.effective_rotate_s() == 20.0);
    CHECK(cfg.effective_horizon_s() == 30.0);
}

TEST_CASE("cmd_validate echoes a canonical config and rejects bad input") {
    TempDir dir("vhft_validate_test");
    const std::string cfg_path = dir.str() + "/c.json";
    std::ofstream(cfg_path) << tiny_config_json();
    std::ostringstream out, err;
    CHECK(cmd_validate(cfg_path, {}, out, err) == 0);
    CHECK(out.str().find("\"particles\": 400") != std::string::npos);

    std::ofstream(cfg_path + ".bad") << R"({"filter": {"particles": -3}})";
    std::ostringstream out2, err2;
    CHECK(cmd_validate(cfg_path + ".bad", {}, out2, err2) == 1);
    CHECK(err2.str().find("filter.particles") != std::string::npos);
}

TEST_CASE("cmd_run writes deterministic results and leaves the config untouched") {
    TempDir dir("vhft_run_test");
    const std::string cfg_path = dir.str() + "/c.json";
    std::ofstream(cfg_path) << tiny_config_json();
    const std::string before = slurp(cfg_path);

    RunOptions opts;
    opts.config_path = cfg_path;
    opts.out_dir = dir.str() + "/out1";
    std::ostringstream log, err;
    REQUIRE(cmd_run(opts, log, err) == 0);
    CHECK(err.str().empty());
    CHECK(log.str().find("method=metap") != std::string::npos);

    opts.out_dir = dir.str() + "/out2";
    opts.jobs = 2;
    std::ostringstream log2, err2;
    REQUIRE(cmd_run(opts, log2, err2) == 0);

    const std::string csv1 = slurp(dir.str() + "/out1/results.csv");
    const std::string csv2 = slurp(dir.str() + "/out2/results.csv");
    CHECK_FALSE(csv1.empty());
    CHECK(csv1 == csv2);  // byte-identical rerun, different worker count
    CHECK(slurp(cfg_path) == before);

    // schema: stable header and one row per (trial, tag)
    std::istringstream csv(csv1);
    std::string header;
    std::getline(csv, header);
    CHECK(header ==
          "trial,seed,method,terrain,reward,tag_id,localized,loc_time_s,error_m,det_m4,"
          "mission_time_s,timed_out");
    int rows = 0;
    for (std::string line; std::getline(csv, line);) ++rows;
    CHECK(rows == 2);  // 2 trials x 1 tag

    // summary.json exists and mentions the method
    CHECK(slurp(dir.str() + "/out1/summary.json").find("\"metap\"") != std::string::npos);
}

TEST_CASE("cmd_sweep crosses axes into cells") {
    TempDir dir("vhft_sweep_test");
    const std::string cfg_path = dir.str() + "/c.json";
    std::ofstream(cfg_path) << tiny_config_json();

    SweepOptions opts;
    opts.base.config_path = cfg_path;
    opts.base.out_dir = dir.str() + "/out";
    opts.base.trials = 1;
    opts.axes = {"method=metap,imp_rssi", "terrain.kind=flat,hilly"};
    std::ostringstream log, err;
    REQUIRE(cmd_sweep(opts, log, err) == 0);
    CHECK(err.str().empty());

    const std::string csv = slurp(dir.str() + "/out/results.csv");
    std::istringstream in(csv);
    std::string header;
    std::getline(in, header);
    CHECK(header.find(",method,terrain,reward,method,terrain.kind,") != std::string::npos);
    int rows = 0;
    for (std::string line; std::getline(in, line);) ++rows;
    CHECK(rows == 4);  // 2 methods x 2 terrains x 1 trial x 1 tag

    // empty axis list is an error
    SweepOptions bad = opts;
    bad.axes = {};
    std::ostringstream log2, err2;
    CHECK(cmd_sweep(bad, log2, err2) == 1);
}

TEST_CASE("cmd_detector_study emits the study csv and summary line") {
    TempDir dir("vhft_study_test");
    DetectorStudyOptions opts;
    opts.out_dir = dir.str();
    opts.rotations = 60;
    opts.detection_rate = 0.5;
    std::ostringstream log, err;
    REQUIRE(cmd_detector_study(opts, log, err) == 0);
    CHECK(log.str().find("comp_median_deg=") != std::string::npos);
    const std::string csv = slurp(dir.str() + "/detector_study.csv");
    std::istringstream in(csv);
    std::string header;
    std::getline(in, header);
    CHECK(header == "rotation,truth_deg,corr_err_deg,cross_err_deg,comp_err_deg,detections,expected");
    int rows = 0;
    for (std::string line; std::getline(in, line);) ++rows;
    CHECK(rows == 60);
}
