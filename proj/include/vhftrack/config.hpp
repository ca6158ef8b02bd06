#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "vhftrack/geom.hpp"
#include "vhftrack/planner.hpp"
#include "vhftrack/radio.hpp"
#include "vhftrack/terrain.hpp"

namespace vhft {

enum class MethodKind { metap, imp_rssi, caoa20, aoa_rssi20, aoa_rssi45, pf_baseline };

std::string to_string(MethodKind m);
MethodKind method_from_string(const std::string& s);
std::string to_string(RewardKind k);
std::string to_string(TerrainKind k);

/// Configuration error with the offending key path.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& path, const std::string& what)
        : std::runtime_error(path + ": " + what), path_(path) {}
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

struct TerrainConfig {
    std::string source = "synthetic";  // "synthetic" | "file"
    std::string file;
    TerrainKind kind = TerrainKind::flat;
    double extent_m = 2000.0;
    double relief_m = -1.0;  // < 0: default for the kind
    std::uint64_t seed = 1;
};

struct TagsConfig {
    int count = 20;
    bool wandering = true;
    double height_above_ground_m = 0.2;
};

struct PropagationConfig {
    bool terrain_loss = true;
    double vegetation_depth_m = 1.0;  // 0 disables the vegetation term
    std::string gain_source = "synthetic";  // "synthetic" | "file"
    std::string gain_file;
    double gain_peak_db = 4.0;
    double gain_f2b_db = 10.0;
};

struct FilterConfig {
    int particles = 3000;
    double birth_prob = 1e-5;
    double survival_prob = 0.999;
    double initial_existence = 0.5;
    double det_threshold_m4 = 2e4;
    double clutter_rate = 0.05;
    double rssi_clutter_min_dbm = -120.0;
    double rssi_clutter_max_dbm = 0.0;
    double mu_min_db = -16.0;
    double mu_max_db = 9.0;
    double sigma_aoa_rad = 0.095;
    std::string rssi_likelihood = "imprecise";  // "imprecise" | "precise"
    std::string pd_model = "complex";           // "complex" | "ideal"
    double forced_pd = -1.0;                    // in (0,1] pins P_D, bypassing the threshold model
    double forced_pd_false_rate = 0.2;          // fraction of missed scans that emit a false peak
};

struct AoaConfig {
    double grid_step_deg = 1.0;
    int min_detections = 8;
    double decision_threshold_rad = kPi / 2.0;
};

struct PlannerSection {
    int headings = 8;
    double horizon_s = 30.0;
    double rotate_s = 20.0;
    std::string reward = "renyi";  // "renyi" | "shannon" | "cs"
    double alpha = 0.1;
    double void_radius_m = 50.0;
    double void_min_prob = 0.95;
    double entropy_cell_m = 20.0;
};

struct UavConfig {
    double x = 1.0;
    double y = 1.0;
    double altitude_agl_m = 80.0;
    double heading_rad = kPi / 4.0;
    double v_max = 10.0;
    double rotation_rate_rad_s = kPi / 3.0;
};

struct MissionConfig {
    double time_cap_s = 3600.0;
};

struct TrialsConfig {
    int count = 1;
    std::uint64_t base_seed = 0;
};

struct ScenarioConfig {
    MethodKind method = MethodKind::metap;
    TerrainConfig terrain;
    TagsConfig tags;
    RadioParams radio;
    PropagationConfig propagation;
    FilterConfig filter;
    AoaConfig aoa;
    PlannerSection planner;
    UavConfig uav;
    MissionConfig mission;
    TrialsConfig trials;

    RewardKind reward_kind() const;
    /// Effective planning horizon / rotation split; the 45 s bearing variant
    /// runs on its own 55 s horizon.
    double effective_horizon_s() const;
    double effective_rotate_s() const;
};

/// Parse a JSON document; unknown keys are rejected, holes get the documented
/// defaults, and every numeric bound is validated before any trial starts.
ScenarioConfig parse_config(const std::string& json_text);
ScenarioConfig load_config_file(const std::string& path);

/// Canonical JSON form; parse(serialize(c)) round-trips identically.
std::string serialize_config(const ScenarioConfig& cfg);

/// Apply "dotted.path=value" overrides to a JSON document before parsing.
std::string apply_overrides(const std::string& json_text,
                            const std::vector<std::string>& overrides);

}  // namespace vhft
