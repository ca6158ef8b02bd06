#pragma once

#include <optional>

#include "vhftrack/antenna.hpp"
#include "vhftrack/geom.hpp"
#include "vhftrack/rng.hpp"
#include "vhftrack/terrain.hpp"

namespace vhft {
class Rng;

struct RadioParams {
    double source_dbm = 40.0;        // source level measured at the reference distance
    double ref_distance_m = 1.0;
    double path_loss_exponent = 4.0;
    double noise_db = 4.0;           // RSSI measurement noise sigma
    double sensitivity_dbm = -120.0; // receiver threshold; weaker draws are discarded
    double freq_mhz = 150.0;
};

struct RssiMeasurement {
    int tag_id = 0;
    double value_dbm = 0.0;
    double time_s = 0.0;
    UavState uav;
};

/// Azimuth of the tag in the observer's frame: bearing(u -> x) - heading,
/// wrapped to [0, 2*pi). Throws std::domain_error when the two are
/// horizontally coincident (the bearing is undefined).
double relative_azimuth(const Vec3& tag, const UavState& uav);

/// Log-distance path loss model:
/// source - 10 n log10(d / d0) + gain(zeta), with d the 3-D distance.
double ideal_rssi(const Vec3& tag, const UavState& uav, const RadioParams& p,
                  const GainPattern& g);

/// ideal_rssi minus vegetation and terrain diffraction losses. The elevation
/// angle for the vegetation term is atan(|dz| / horizontal distance) in
/// degrees, floored at 0.1 deg.
double complex_rssi(const Vec3& tag, const UavState& uav, const RadioParams& p,
                    const GainPattern& g, const TerrainGrid& grid, const VegetationSpec& veg,
                    std::size_t profile_samples = 256);

/// One noisy receiver sample: truth + N(0, noise^2), absent below sensitivity.
std::optional<double> draw_rssi_measurement(double truth_dbm, const RadioParams& p, Rng& rng);

/// Probability that a noisy sample of the given noiseless level clears the
/// sensitivity threshold: 1 - C(threshold; level, noise^2).
double detection_probability(double noiseless_dbm, const RadioParams& p);

/// Detection probability at a geometry, with the noiseless level taken from
/// the complex model when a grid is supplied and the ideal model otherwise.
double detection_probability(const Vec3& tag, const UavState& uav, const RadioParams& p,
                             const GainPattern& g, const TerrainGrid* grid = nullptr,
                             const VegetationSpec* veg = nullptr);

}  // namespace vhft
