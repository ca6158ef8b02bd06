#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "vhftrack/bearing.hpp"
#include "vhftrack/bernoulli.hpp"
#include "vhftrack/config.hpp"
#include "vhftrack/planner.hpp"

namespace vhft {

struct TagTruth {
    int id = 0;
    Vec3 pos;
    bool wandering = true;
};

/// One wandering step: identity transition plus diagonal process noise, with
/// the height re-clamped to the terrain surface. Static tags are unchanged.
void step_object(TagTruth& tag, const Vec3& process_var, const TerrainGrid& terrain,
                 double height_above_ground, Rng& rng);

/// Pose along the current action, clipped to the search area (sets *clipped
/// when the planner let the observer reach the boundary).
UavState step_uav(const UavState& anchor, const PlannedAction& action, double elapsed_s,
                  double rotation_rate, const Rect& area, bool* clipped = nullptr);

struct TagOutcome {
    int tag_id = 0;
    bool localized = false;
    double time_s = 0.0;
    double error_m = 0.0;   // horizontal error at the localization instant
    double det_m4 = 0.0;    // x-y covariance determinant when declared localized
};

struct EpochRecord {
    double time_s = 0.0;
    int action_index = 0;
    ActionKind kind = ActionKind::rssi;
    double heading_rad = 0.0;
    double reward = 0.0;
    bool void_ok = true;
    bool fallback = false;
    double min_margin = 0.0;
};

struct MissionResult {
    std::uint64_t seed = 0;
    std::vector<TagOutcome> tags;
    double total_time_s = 0.0;
    bool timed_out = false;
    std::vector<EpochRecord> epochs;
    int existence_clamps = 0;
    int pf_reinits = 0;
    int aoa_measurements = 0;
    int boundary_clips = 0;
    long rssi_scans = 0;
    long rssi_clutter_injected = 0;
};

TerrainGrid build_terrain(const ScenarioConfig& cfg);
GainPattern build_gain(const ScenarioConfig& cfg);
Rect search_area(const TerrainGrid& terrain);

/// One full mission at 1 Hz: plan, move, synthesize measurements, filter,
/// and terminate when every tag is localized or the time cap is hit.
/// Bit-identical for identical (config, terrain, seed).
MissionResult run_mission(const ScenarioConfig& cfg, const TerrainGrid& terrain,
                          const GainPattern& gain, std::uint64_t seed,
                          std::ostream* trace = nullptr);

/// Independent trials with seeds base_seed + trial index; results are indexed
/// by trial regardless of worker scheduling. trace_dir, when non-empty, gets
/// one trace_<trial>.csv per trial.
std::vector<MissionResult> run_monte_carlo(const ScenarioConfig& cfg, const TerrainGrid& terrain,
                                           const GainPattern& gain, int jobs = 1,
                                           const std::string& trace_dir = "");

struct McStats {
    int missions = 0;
    int timeouts = 0;
    int tags_total = 0;
    int tags_localized = 0;
    double mean_time = 0.0;
    double median_time = 0.0;
    double std_time = 0.0;
    double mean_error = 0.0;    // over localized tags
    double median_error = 0.0;
};

McStats summarize(std::span<const MissionResult> results);

}  // namespace vhft
