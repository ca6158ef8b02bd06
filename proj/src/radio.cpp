#include "vhftrack/radio.hpp"

#include <cmath>
#include <stdexcept>

#include "vhftrack/stats.hpp"

namespace vhft {

double relative_azimuth(const Vec3& tag, const UavState& uav) {
    const double dx = tag.x - uav.pos.x;
    const double dy = tag.y - uav.pos.y;
    if (dx == 0.0 && dy == 0.0)
        throw std::domain_error("relative azimuth undefined: tag above/below observer");
    return wrap_two_pi(std::atan2(dx, dy) - uav.heading);
}

double ideal_rssi(const Vec3& tag, const UavState& uav, const RadioParams& p,
                  const GainPattern& g) {
    const double d = distance(tag, uav.pos);
    if (d <= 0.0) throw std::domain_error("ideal_rssi undefined at zero distance");
    const double zeta = relative_azimuth(tag, uav);
    return p.source_dbm - 10.0 * p.path_loss_exponent * std::log10(d / p.ref_distance_m) +
           g.gain_db(zeta);
}

double complex_rssi(const Vec3& tag, const UavState& uav, const RadioParams& p,
                    const GainPattern& g, const TerrainGrid& grid, const VegetationSpec& veg,
                    std::size_t profile_samples) {
    double level = ideal_rssi(tag, uav, p, g);
    if (veg.enabled && veg.depth_m > 0.0) {
        const double horiz = distance_xy(tag, uav.pos);
        const double dz = std::abs(uav.pos.z - tag.z);
        const double phi_deg = std::max(0.1, std::atan2(dz, horiz) * 180.0 / kPi);
        level -= vegetation_loss(p.freq_mhz, veg.depth_m, phi_deg);
    }
    const LosProfile profile = los_profile(grid, tag, uav.pos, profile_samples);
    level -= terrain_diffraction_loss(profile, p.freq_mhz / 1000.0);
    return level;
}

std::optional<double> draw_rssi_measurement(double truth_dbm, const RadioParams& p, Rng& rng) {
    const double value = truth_dbm + p.noise_db * rng.normal();
    if (value < p.sensitivity_dbm) return std::nullopt;
    return value;
}

double detection_probability(double noiseless_dbm, const RadioParams& p) {
    return 1.0 - normal_cdf(p.sensitivity_dbm, noiseless_dbm, p.noise_db);
}

double detection_probability(const Vec3& tag, const UavState& uav, const RadioParams& p,
                             const GainPattern& g, const TerrainGrid* grid,
                             const VegetationSpec* veg) {
    static const VegetationSpec no_veg{};
    const double level = grid ? complex_rssi(tag, uav, p, g, *grid, veg ? *veg : no_veg)
                              : ideal_rssi(tag, uav, p, g);
    return detection_probability(level, p);
}

}  // namespace vhft
