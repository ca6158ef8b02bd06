#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace vhft {

/// Azimuth gain pattern of the directional antenna, tabulated in dB over
/// relative azimuth [0, 2*pi). Lookup interpolates linearly and wraps across
/// the 0/2*pi seam.
class GainPattern {
public:
    /// Table of (angle in radians, gain in dB); angles strictly increasing,
    /// spanning less than a full turn.
    explicit GainPattern(std::vector<std::pair<double, double>> table_rad_db);

    /// Two-lobe reference pattern: peak_db - (f2b_db / 2) * (1 - cos(zeta)),
    /// tabulated at step_deg resolution. Front-to-back ratio is f2b_db.
    static GainPattern synthetic_two_lobe(double peak_db = 4.0, double f2b_db = 10.0,
                                          double step_deg = 1.0);

    /// Two-column text table: angle in degrees, gain in dB.
    static GainPattern load(std::istream& in);
    static GainPattern load_file(const std::string& path);

    double gain_db(double zeta_rad) const;
    std::size_t size() const { return angles_.size(); }

private:
    std::vector<double> angles_;  // rad, ascending, in [0, 2*pi)
    std::vector<double> gains_;   // dB
    double uniform_step_ = 0.0;   // > 0 when knots are evenly spaced from 0
};

}  // namespace vhft
