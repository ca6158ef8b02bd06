#include "vhftrack/bearing.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <istream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "vhftrack/rng.hpp"
#include "vhftrack/stats.hpp"

namespace vhft {

namespace {

std::size_t grid_size(double step_deg) {
    if (!(step_deg > 0.0) || step_deg > 180.0)
        throw std::invalid_argument("candidate grid step out of range");
    return static_cast<std::size_t>(std::lround(360.0 / step_deg));
}

}  // namespace

std::optional<double> corr_coef_aoa(const RotationLog& log, const GainPattern& pattern,
                                    double grid_step_deg) {
    const std::size_t k = log.samples.size();
    if (k < 2) return std::nullopt;

    double z_mean = 0.0;
    for (const auto& s : log.samples) z_mean += s.rssi_dbm;
    z_mean /= static_cast<double>(k);
    double z_var = 0.0;
    for (const auto& s : log.samples) {
        const double d = s.rssi_dbm - z_mean;
        z_var += d * d;
    }
    if (z_var <= 0.0) return std::nullopt;

    const std::size_t n = grid_size(grid_step_deg);
    double best_rho = 0.0;
    std::optional<double> best_alpha;
    std::vector<double> g(k);
    for (std::size_t j = 0; j < n; ++j) {
        const double alpha = kTwoPi * static_cast<double>(j) / static_cast<double>(n);
        double g_mean = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            g[i] = pattern.gain_db(log.samples[i].heading_rad + alpha);
            g_mean += g[i];
        }
        g_mean /= static_cast<double>(k);
        double g_var = 0.0, cov = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            const double dg = g[i] - g_mean;
            g_var += dg * dg;
            cov += dg * (log.samples[i].rssi_dbm - z_mean);
        }
        if (g_var <= 0.0) continue;  // constant template, correlation undefined
        const double rho = cov / std::sqrt(g_var * z_var);
        if (!best_alpha || rho > best_rho) {
            best_rho = rho;
            best_alpha = alpha;
        }
    }
    return best_alpha;
}

std::optional<double> cross_corr_aoa(const RotationLog& log, const GainPattern& pattern,
                                     double grid_step_deg) {
    const std::size_t k = log.samples.size();
    if (k == 0) return std::nullopt;

    // dBm -> linear power, so the strongest detection dominates the match
    std::vector<double> z_lin(k);
    for (std::size_t i = 0; i < k; ++i) z_lin[i] = std::pow(10.0, log.samples[i].rssi_dbm / 10.0);

    const std::size_t n = grid_size(grid_step_deg);
    double best_score = 0.0;
    std::optional<double> best_alpha;
    for (std::size_t j = 0; j < n; ++j) {
        const double alpha = kTwoPi * static_cast<double>(j) / static_cast<double>(n);
        double score = 0.0;
        for (std::size_t i = 0; i < k; ++i)
            score += z_lin[i] * pattern.gain_db(log.samples[i].heading_rad + alpha);
        if (!best_alpha || score > best_score) {
            best_score = score;
            best_alpha = alpha;
        }
    }
    return best_alpha;
}

double compensated_aoa(double z1, double z2, double threshold_rad) {
    if (angular_distance(z1, z2) < threshold_rad) return wrap_two_pi(z1);
    return wrap_two_pi(z1 - kPi);
}

std::optional<AoaMeasurement> measure_aoa(const RotationLog& log, const GainPattern& pattern,
                                          const AoaDetectorConfig& cfg) {
    if (log.samples.size() < cfg.min_detections) return std::nullopt;
    const auto corr = corr_coef_aoa(log, pattern, cfg.grid_step_deg);
    const auto cross = cross_corr_aoa(log, pattern, cfg.grid_step_deg);
    if (!corr || !cross) return std::nullopt;
    const double alpha = compensated_aoa(*corr, *cross, cfg.decision_threshold_rad);

    AoaMeasurement m;
    m.tag_id = log.tag_id;
    // best-fit template gain(heading + alpha) corresponds to a source at
    // bearing -alpha for the symmetric patterns used here
    m.bearing_rad = wrap_two_pi(-alpha);
    m.detection_fraction =
        log.expected_pulses > 0
            ? static_cast<double>(log.samples.size()) / static_cast<double>(log.expected_pulses)
            : 1.0;
    m.time_s = log.end_time_s;
    return m;
}

std::vector<RotationLog> load_rotation_logs_csv(std::istream& in) {
    std::map<int, std::size_t> index;  // tag id -> position in result
    std::vector<RotationLog> logs;
    std::map<int, std::pair<double, double>> time_range;

    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string f0, f1, f2, f3;
        if (!std::getline(ls, f0, ',') || !std::getline(ls, f1, ',') ||
            !std::getline(ls, f2, ',') || !std::getline(ls, f3))
            throw std::runtime_error("rotation CSV line " + std::to_string(line_no) +
                                     ": expected 4 comma-separated fields");
        char* end = nullptr;
        const double ts = std::strtod(f0.c_str(), &end);
        if (end == f0.c_str()) {
            if (line_no == 1) continue;  // header row
            throw std::runtime_error("rotation CSV line " + std::to_string(line_no) +
                                     ": non-numeric timestamp");
        }
        const int tag = std::atoi(f1.c_str());
        const double rssi = std::strtod(f2.c_str(), nullptr);
        const double heading = std::strtod(f3.c_str(), nullptr);

        auto [it, inserted] = index.try_emplace(tag, logs.size());
        if (inserted) {
            RotationLog l;
            l.tag_id = tag;
            logs.push_back(l);
            time_range[tag] = {ts, ts};
        }
        auto& range = time_range[tag];
        range.first = std::min(range.first, ts);
        range.second = std::max(range.second, ts);
        logs[it->second].samples.push_back({rssi, wrap_two_pi(heading)});
    }
    for (auto& l : logs) {
        l.expected_pulses = l.samples.size();
        const auto& range = time_range[l.tag_id];
        l.duration_s = range.second - range.first;
        l.end_time_s = range.second;
    }
    return logs;
}

std::vector<DetectorStudyRecord> detector_study(std::size_t n_rotations, double detection_rate,
                                                const GainPattern& pattern, double sigma_db,
                                                std::uint64_t seed,
                                                std::size_t pulses_per_rotation,
                                                double grid_step_deg) {
    if (detection_rate <= 0.0 || detection_rate > 1.0)
        throw std::invalid_argument("detection rate must be in (0, 1]");
    if (pulses_per_rotation < 2) throw std::invalid_argument("need at least 2 pulses");

    const double threshold = -120.0;
    Rng root(seed);
    std::vector<DetectorStudyRecord> out;
    out.reserve(n_rotations);

    for (std::size_t r = 0; r < n_rotations; ++r) {
        Rng rng = root.fork(r + 1);
        const double truth = rng.uniform(0.0, kTwoPi);
        const double theta0 = rng.uniform(0.0, kTwoPi);

        std::vector<double> headings(pulses_per_rotation);
        std::vector<double> gains(pulses_per_rotation);
        for (std::size_t i = 0; i < pulses_per_rotation; ++i) {
            headings[i] = wrap_two_pi(theta0 + kTwoPi * static_cast<double>(i) /
                                                   static_cast<double>(pulses_per_rotation));
            gains[i] = pattern.gain_db(truth - headings[i]);
        }

        // calibrate the source level so the mean detection probability over the
        // rotation equals the requested rate
        auto mean_pd = [&](double level) {
            double acc = 0.0;
            for (double g : gains)
                acc += 1.0 - normal_cdf(threshold, level + g, sigma_db);
            return acc / static_cast<double>(pulses_per_rotation);
        };
        double lo = threshold - 10.0 * sigma_db - 20.0;
        double hi = threshold + 10.0 * sigma_db + 20.0;
        for (int it = 0; it < 80; ++it) {
            const double mid = 0.5 * (lo + hi);
            (mean_pd(mid) < detection_rate ? lo : hi) = mid;
        }
        const double level = 0.5 * (lo + hi);

        RotationLog log;
        log.expected_pulses = pulses_per_rotation;
        for (int attempt = 0;; ++attempt) {
            log.samples.clear();
            for (std::size_t i = 0; i < pulses_per_rotation; ++i) {
                const double value = level + gains[i] + sigma_db * rng.normal();
                if (value >= threshold) log.samples.push_back({value, headings[i]});
            }
            const bool usable =
                log.samples.size() >= 2 &&
                std::any_of(log.samples.begin(), log.samples.end(), [&](const auto& s) {
                    return s.rssi_dbm != log.samples.front().rssi_dbm;
                });
            if (usable) break;
            if (attempt > 200) throw std::runtime_error("detector study: rate too low to sample");
        }

        const auto corr = corr_coef_aoa(log, pattern, grid_step_deg);
        const auto cross = cross_corr_aoa(log, pattern, grid_step_deg);
        const double comp = compensated_aoa(*corr, *cross, kPi / 2.0);

        DetectorStudyRecord rec;
        rec.truth_rad = truth;
        rec.corr_error = wrap_pi(wrap_two_pi(-*corr) - truth);
        rec.cross_error = wrap_pi(wrap_two_pi(-*cross) - truth);
        rec.compensated_error = wrap_pi(wrap_two_pi(-comp) - truth);
        rec.detections = log.samples.size();
        rec.expected = pulses_per_rotation;
        out.push_back(rec);
    }
    return out;
}

}  // namespace vhft
