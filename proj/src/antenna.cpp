#include "vhftrack/antenna.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>

#include "vhftrack/geom.hpp"

namespace vhft {

GainPattern::GainPattern(std::vector<std::pair<double, double>> table) {
    if (table.size() < 2) throw std::invalid_argument("gain table needs at least 2 entries");
    angles_.reserve(table.size());
    gains_.reserve(table.size());
    for (const auto& [ang, g] : table) {
        if (ang < 0.0 || ang >= kTwoPi)
            throw std::invalid_argument("gain table angle outside [0, 2*pi)");
        if (!angles_.empty() && ang <= angles_.back())
            throw std::invalid_argument("gain table angles must be strictly increasing");
        angles_.push_back(ang);
        gains_.push_back(g);
    }

    // uniform-spacing fast path (the synthetic pattern and most measured tables)
    if (angles_.front() == 0.0) {
        const double step = kTwoPi / static_cast<double>(angles_.size());
        bool uniform = true;
        for (std::size_t i = 0; i < angles_.size(); ++i) {
            if (std::abs(angles_[i] - step * static_cast<double>(i)) > 1e-9) {
                uniform = false;
                break;
            }
        }
        if (uniform) uniform_step_ = step;
    }
}

GainPattern GainPattern::synthetic_two_lobe(double peak_db, double f2b_db, double step_deg) {
    if (!(step_deg > 0.0)) throw std::invalid_argument("step must be positive");
    std::vector<std::pair<double, double>> table;
    const int n = static_cast<int>(std::lround(360.0 / step_deg));
    table.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double zeta = kTwoPi * static_cast<double>(i) / static_cast<double>(n);
        table.emplace_back(zeta, peak_db - 0.5 * f2b_db * (1.0 - std::cos(zeta)));
    }
    return GainPattern(std::move(table));
}

GainPattern GainPattern::load(std::istream& in) {
    std::vector<std::pair<double, double>> table;
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        double deg = 0.0, db = 0.0;
        if (ls >> deg >> db) table.emplace_back(deg * kPi / 180.0, db);
    }
    return GainPattern(std::move(table));
}

GainPattern GainPattern::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open gain pattern file: " + path);
    return load(in);
}

double GainPattern::gain_db(double zeta_rad) const {
    const double z = wrap_two_pi(zeta_rad);
    const std::size_t n = angles_.size();

    std::size_t i0;
    if (uniform_step_ > 0.0) {
        i0 = static_cast<std::size_t>(z / uniform_step_);
        if (i0 >= n) i0 = n - 1;
    } else {
        // last knot <= z
        auto it = std::upper_bound(angles_.begin(), angles_.end(), z);
        i0 = it == angles_.begin() ? n - 1 : static_cast<std::size_t>(it - angles_.begin()) - 1;
    }

    if (i0 == n - 1 || z < angles_.front()) {
        // wrap segment between the last knot and the first knot + 2*pi
        const double a0 = angles_.back();
        const double span = angles_.front() + kTwoPi - a0;
        double off = z - a0;
        if (off < 0.0) off += kTwoPi;
        const double t = span > 0.0 ? off / span : 0.0;
        return gains_.back() + (gains_.front() - gains_.back()) * t;
    }
    const double a0 = angles_[i0];
    const double a1 = angles_[i0 + 1];
    const double t = (z - a0) / (a1 - a0);
    return gains_[i0] + (gains_[i0 + 1] - gains_[i0]) * t;
}

}  // namespace vhft
