#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "vhftrack/antenna.hpp"
#include "vhftrack/geom.hpp"

namespace vhft {

/// RSSI samples collected over one rotation maneuver, one entry per detected
/// pulse, with the observer heading at detection time.
struct RotationLog {
    struct Sample {
        double rssi_dbm = 0.0;
        double heading_rad = 0.0;
    };
    int tag_id = 0;
    std::vector<Sample> samples;
    std::size_t expected_pulses = 0;  // pulses emitted during the rotation
    double duration_s = 0.0;
    double end_time_s = 0.0;
};

/// Absolute bearing measurement produced at the end of a rotation.
struct AoaMeasurement {
    int tag_id = 0;
    double bearing_rad = 0.0;      // [0, 2*pi), observer -> tag
    double detection_fraction = 1.0;
    double time_s = 0.0;
};

struct AoaDetectorConfig {
    double grid_step_deg = 1.0;          // candidate offset resolution
    std::size_t min_detections = 8;      // pulses required before an AoA is emitted
    double decision_threshold_rad = kPi / 2.0;  // detector disagreement -> 180 deg correction
};

/// Pattern-match offset maximizing the Pearson correlation between the logged
/// RSSI values (dB) and gain(heading + alpha). Needs >= 2 detections with
/// non-constant RSSI; returns nullopt otherwise. Invariant under affine
/// transforms of the RSSI values.
std::optional<double> corr_coef_aoa(const RotationLog& log, const GainPattern& pattern,
                                    double grid_step_deg = 1.0);

/// Offset maximizing the dot product of the RSSI values in linear power with
/// gain(heading + alpha), so the strongest detections dominate the match.
/// Needs >= 1 detection.
std::optional<double> cross_corr_aoa(const RotationLog& log, const GainPattern& pattern,
                                     double grid_step_deg = 1.0);

/// z1 when the two detectors agree within the threshold (circular distance),
/// otherwise z1 - pi: the correlation detector's back-lobe ambiguity corrected
/// by the cross-correlation detector. Result in [0, 2*pi).
double compensated_aoa(double z1, double z2, double threshold_rad);

/// Composite detector: both detectors on a shared candidate grid, compensation
/// applied, offset converted to an absolute bearing. Returns nullopt below
/// min_detections (treated upstream as a missed detection).
std::optional<AoaMeasurement> measure_aoa(const RotationLog& log, const GainPattern& pattern,
                                          const AoaDetectorConfig& cfg = {});

/// Rows of (timestamp, tag_id, rssi_dbm, heading_rad), comma separated, one
/// log per tag id. An optional header row is skipped.
std::vector<RotationLog> load_rotation_logs_csv(std::istream& in);

/// One synthetic rotation evaluated by all three detectors. Errors are signed
/// circular residuals against the true bearing, in radians.
struct DetectorStudyRecord {
    double truth_rad = 0.0;
    double corr_error = 0.0;
    double cross_error = 0.0;
    double compensated_error = 0.0;
    std::size_t detections = 0;
    std::size_t expected = 0;
};

/// Offline detector study: rotations with headings spanning a full turn and a
/// physical detection model (noisy level vs. receiver threshold) calibrated so
/// the mean detection rate matches detection_rate. Detector gating is k >= 2;
/// the mission-level min_detections cut does not apply here.
std::vector<DetectorStudyRecord> detector_study(std::size_t n_rotations, double detection_rate,
                                                const GainPattern& pattern, double sigma_db,
                                                std::uint64_t seed,
                                                std::size_t pulses_per_rotation = 24,
                                                double grid_step_deg = 1.0);

}  // namespace vhft
