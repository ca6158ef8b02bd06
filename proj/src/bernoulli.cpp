#include "vhftrack/bernoulli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "vhftrack/stats.hpp"

namespace vhft {

namespace {
constexpr double kWeightFloor = 1e-300;
}

void BernoulliBelief::normalize() {
    double total = 0.0;
    for (double w : weights) total += w;
    if (!(total > 0.0)) throw std::runtime_error("belief weights sum to zero");
    const double inv = 1.0 / total;
    for (double& w : weights) w *= inv;
}

Vec3 BernoulliBelief::mean() const {
    Vec3 m;
    for (std::size_t i = 0; i < states.size(); ++i) m += states[i] * weights[i];
    return m;
}

void predict(BernoulliBelief& belief, const DynamicsModel& dyn, Rng& rng) {
    const double r = belief.existence;
    const double birth_mass = dyn.birth_prob * (1.0 - r);
    const double survive_mass = dyn.survival_prob * r;
    const double r_pred = birth_mass + survive_mass;

    const double sx = std::sqrt(dyn.process_var.x);
    const double sy = std::sqrt(dyn.process_var.y);
    const double sz = std::sqrt(dyn.process_var.z);
    for (Vec3& x : belief.states) {
        if (sx > 0.0) x.x += sx * rng.normal();
        if (sy > 0.0) x.y += sy * rng.normal();
        if (sz > 0.0) x.z += sz * rng.normal();
    }
    belief.existence = std::clamp(r_pred, 0.0, 1.0);

    // Spatial birth mixing. The birth fraction is birth_mass / r_pred; with
    // the tiny birth probabilities used here it usually rounds to zero
    // particles and the (negligible) mass is absorbed by renormalization.
    if (r_pred <= 0.0 || !dyn.birth_sampler) return;
    const double birth_frac = birth_mass / r_pred;
    const std::size_t n = belief.size();
    const auto n_birth = static_cast<std::size_t>(
        std::llround(birth_frac * static_cast<double>(n)));
    if (n_birth == 0) return;

    const double survive_frac = 1.0 - birth_frac;
    for (double& w : belief.weights) w *= survive_frac;
    const double w_birth = birth_frac / static_cast<double>(n_birth);
    for (std::size_t i = 0; i < n_birth; ++i) {
        belief.states.push_back(dyn.birth_sampler(rng));
        belief.weights.push_back(w_birth);
    }
    belief.normalize();

    // restore the nominal particle count
    BernoulliBelief reduced;
    reduced.existence = belief.existence;
    reduced.states.reserve(n);
    reduced.weights.assign(n, 1.0 / static_cast<double>(n));
    double u = rng.uniform() / static_cast<double>(n);
    double cum = belief.weights[0];
    std::size_t j = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double target = u + static_cast<double>(i) / static_cast<double>(n);
        while (cum < target && j + 1 < belief.size()) cum += belief.weights[++j];
        reduced.states.push_back(belief.states[j]);
    }
    belief.states = std::move(reduced.states);
    belief.weights = std::move(reduced.weights);
}

UpdateDiag update(BernoulliBelief& belief, std::span<const double> measurements,
                  const LikelihoodFn& likelihood, const DetectionFn& detection_prob,
                  const ClutterModel& clutter) {
    UpdateDiag diag;
    const std::size_t n = belief.size();
    const double r = belief.existence;
    const double kappa = clutter.rate * clutter.density;  // lambda * c(z)

    double mean_pd = 0.0;                 // integral of P_D against the prior
    double meas_evidence = 0.0;           // sum over z of <P_D L(z|.)> / (lambda c)
    std::vector<double> factor(n, 0.0);   // per-particle posterior multiplier
    for (std::size_t i = 0; i < n; ++i) {
        const double pd = std::clamp(detection_prob(belief.states[i]), 0.0, 1.0);
        const double w = belief.weights[i];
        mean_pd += w * pd;
        double like_sum = 0.0;
        for (double z : measurements) like_sum += likelihood(z, belief.states[i]);
        if (!measurements.empty()) {
            if (kappa > 0.0) {
                meas_evidence += w * pd * like_sum / kappa;
                factor[i] = 1.0 - pd + pd * like_sum / kappa;
            } else {
                // clutter-free: any measurement is object-originated
                factor[i] = pd * like_sum;
            }
        } else {
            factor[i] = 1.0 - pd;
        }
    }

    if (!measurements.empty() && kappa <= 0.0) {
        // limit of the update as the clutter rate vanishes
        belief.existence = 1.0;
        diag.delta = -1.0;
    } else {
        const double delta = mean_pd - meas_evidence;
        diag.delta = delta;
        const double denom = 1.0 - r * delta;
        if (std::abs(denom) < 1e-12) {
            // certain detection, empty measurement set: object declared absent,
            // spatial density kept as the prior
            diag.degenerate = true;
            belief.existence = 0.0;
            return diag;
        }
        double r_post = r * (1.0 - delta) / denom;
        if (r_post < 0.0 || r_post > 1.0) {
            diag.clamped = true;
            r_post = std::clamp(r_post, 0.0, 1.0);
        }
        belief.existence = r_post;
    }

    for (std::size_t i = 0; i < n; ++i)
        belief.weights[i] *= std::max(factor[i], kWeightFloor);
    belief.normalize();
    return diag;
}

double rssi_precise_likelihood(double z, double predicted_dbm, double sigma_db) {
    return normal_pdf(z, predicted_dbm, sigma_db);
}

double rssi_imprecise_likelihood(double z, double predicted_dbm, double sigma_db, double mu_min,
                                 double mu_max) {
    if (mu_min > mu_max) throw std::invalid_argument("imprecision interval inverted");
    const double lo = normal_cdf(z, predicted_dbm + mu_min, sigma_db);
    const double hi = normal_cdf(z, predicted_dbm + mu_max, sigma_db);
    return std::max(0.0, lo - hi);
}

double aoa_likelihood(double z_rad, double predicted_rad, double sigma_rad) {
    if (!(sigma_rad > 0.0)) throw std::invalid_argument("aoa sigma must be positive");
    const double residual = wrap_pi(z_rad - predicted_rad);
    return normal_pdf(residual, 0.0, sigma_rad);
}

double effective_sample_size(const BernoulliBelief& belief) {
    double sum_sq = 0.0;
    for (double w : belief.weights) sum_sq += w * w;
    return sum_sq > 0.0 ? 1.0 / sum_sq : 0.0;
}

void resample(BernoulliBelief& belief, Rng& rng) {
    const std::size_t n = belief.size();
    if (n == 0) return;
    double total = 0.0;
    for (double w : belief.weights) total += w;
    if (!(total > 0.0)) throw std::runtime_error("resample: all weights zero");

    std::vector<Vec3> out;
    out.reserve(n);
    const double step = total / static_cast<double>(n);
    double target = rng.uniform() * step;
    double cum = belief.weights[0];
    std::size_t j = 0;
    for (std::size_t i = 0; i < n; ++i) {
        while (cum < target && j + 1 < n) cum += belief.weights[++j];
        out.push_back(belief.states[j]);
        target += step;
    }
    belief.states = std::move(out);
    belief.weights.assign(n, 1.0 / static_cast<double>(n));
}

bool maybe_resample(BernoulliBelief& belief, Rng& rng) {
    if (effective_sample_size(belief) >= static_cast<double>(belief.size()) / 2.0) return false;
    resample(belief, rng);
    return true;
}

EstimateSummary estimate(const BernoulliBelief& belief, double det_threshold) {
    if (belief.size() == 0) throw std::runtime_error("estimate over empty belief");
    EstimateSummary e;
    e.mean = belief.mean();
    for (std::size_t i = 0; i < belief.size(); ++i) {
        const double w = belief.weights[i];
        const double dx = belief.states[i].x - e.mean.x;
        const double dy = belief.states[i].y - e.mean.y;
        e.cov_xx += w * dx * dx;
        e.cov_xy += w * dx * dy;
        e.cov_yy += w * dy * dy;
    }
    e.determinant = std::max(0.0, e.cov_xx * e.cov_yy - e.cov_xy * e.cov_xy);
    e.localized = e.determinant <= det_threshold;
    return e;
}

bool pf_baseline_update(BernoulliBelief& belief, std::span<const double> measurements,
                        const LikelihoodFn& likelihood,
                        const std::function<Vec3(Rng&)>& reinit_sampler, Rng& rng) {
    if (measurements.empty()) return false;  // missed scan: no update
    const std::size_t n = belief.size();
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        // at most one measurement in the scan is the tag's
        double like = 0.0;
        for (double z : measurements) like += likelihood(z, belief.states[i]);
        belief.weights[i] *= like;
        total += belief.weights[i];
    }
    if (!(total > 1e-280)) {
        // weight collapse: the scan was inconsistent with the whole cloud
        for (std::size_t i = 0; i < n; ++i) {
            belief.states[i] = reinit_sampler(rng);
            belief.weights[i] = 1.0 / static_cast<double>(n);
        }
        return true;
    }
    belief.normalize();
    maybe_resample(belief, rng);
    return false;
}

void write_belief_csv(std::ostream& out, const BernoulliBelief& belief) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "existence,%.17g\n", belief.existence);
    out << buf << "x,y,z,weight\n";
    for (std::size_t i = 0; i < belief.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g\n", belief.states[i].x,
                      belief.states[i].y, belief.states[i].z, belief.weights[i]);
        out << buf;
    }
}

BernoulliBelief read_belief_csv(std::istream& in) {
    BernoulliBelief b;
    std::string line;
    if (!std::getline(in, line) || line.rfind("existence,", 0) != 0)
        throw std::runtime_error("belief CSV: missing existence header");
    b.existence = std::strtod(line.c_str() + 10, nullptr);
    std::getline(in, line);  // column header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        Vec3 x;
        double w = 0.0;
        if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf", &x.x, &x.y, &x.z, &w) != 4)
            throw std::runtime_error("belief CSV: malformed particle row");
        b.states.push_back(x);
        b.weights.push_back(w);
    }
    if (b.states.empty()) throw std::runtime_error("belief CSV: no particles");
    return b;
}

}  // namespace vhft
