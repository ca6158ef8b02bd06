#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "vhftrack/geom.hpp"
#include "vhftrack/rng.hpp"

namespace vhft {

/// Bernoulli (joint target detection and tracking) belief over one tag:
/// existence probability plus a weighted particle approximation of the
/// spatial density. Weights are kept normalized.
struct BernoulliBelief {
    double existence = 0.5;
    std::vector<Vec3> states;
    std::vector<double> weights;

    std::size_t size() const { return states.size(); }

    /// Rescales weights to sum to one; invariant under positive scaling of
    /// the input weights. Throws if the total is not positive.
    void normalize();

    /// Weighted mean of the particle cloud.
    Vec3 mean() const;
};

/// Random-walk object dynamics: identity transition with diagonal process
/// noise, plus the Bernoulli birth/survival pair.
struct DynamicsModel {
    Vec3 process_var{2.5, 2.5, 0.0025};  // m^2 per 1 s step
    double survival_prob = 0.999;
    double birth_prob = 1e-5;
    std::function<Vec3(Rng&)> birth_sampler;  // spatial birth density
};

/// Poisson false-measurement model with a uniform spatial density over the
/// measurement range (density = 1 / range width).
struct ClutterModel {
    double rate = 0.05;     // expected false measurements per scan
    double density = 0.0;   // uniform pdf value c(z)
};

/// Likelihood of a scalar measurement given a particle state.
using LikelihoodFn = std::function<double(double z, const Vec3& x)>;
/// Detection probability at a particle state.
using DetectionFn = std::function<double(const Vec3& x)>;

struct UpdateDiag {
    double delta = 0.0;      // measurement-evidence term of the existence update
    bool clamped = false;    // existence forced back into [0,1]
    bool degenerate = false; // certain-detection/no-measurement corner: r -> 0, prior kept
};

/// Prediction step: existence via birth/survival mixing, surviving particles
/// perturbed by the process noise, birth particles drawn in proportion to the
/// birth mass (the particle count is restored by an internal resample when
/// birth particles are injected).
void predict(BernoulliBelief& belief, const DynamicsModel& dyn, Rng& rng);

/// Measurement update with clutter and missed detections. Supports an empty
/// measurement set. Weights are renormalized; a floor of 1e-300 on the
/// per-particle factor guards against total collapse.
UpdateDiag update(BernoulliBelief& belief, std::span<const double> measurements,
                  const LikelihoodFn& likelihood, const DetectionFn& detection_prob,
                  const ClutterModel& clutter);

/// Gaussian RSSI likelihood N(z; predicted, sigma^2).
double rssi_precise_likelihood(double z, double predicted_dbm, double sigma_db);

/// Interval-bias ("imprecise") RSSI likelihood:
/// C(z; predicted + mu_min, sigma^2) - C(z; predicted + mu_max, sigma^2).
/// Always in [0, 1]; degenerates to 0 when the interval collapses.
double rssi_imprecise_likelihood(double z, double predicted_dbm, double sigma_db, double mu_min,
                                 double mu_max);

/// Bearing likelihood: Gaussian in the wrapped angular residual.
double aoa_likelihood(double z_rad, double predicted_rad, double sigma_rad);

double effective_sample_size(const BernoulliBelief& belief);

/// Systematic resampling to an equal-weight cloud of the same size. Throws on
/// all-zero weights (upstream likelihood underflow).
void resample(BernoulliBelief& belief, Rng& rng);

/// Resample only when the effective sample size drops below half the cloud.
bool maybe_resample(BernoulliBelief& belief, Rng& rng);

struct EstimateSummary {
    Vec3 mean;
    double cov_xx = 0.0;
    double cov_xy = 0.0;
    double cov_yy = 0.0;
    double determinant = 0.0;  // of the x-y covariance, m^4
    bool localized = false;
};

/// Weighted mean and x-y covariance; localized when the covariance
/// determinant is at or below det_threshold.
EstimateSummary estimate(const BernoulliBelief& belief, double det_threshold = 2e4);

/// Plain sequential-importance-resampling update (comparison baseline): no
/// existence probability, no detection or clutter terms; a scan holds at most
/// one tag-originated measurement. An empty measurement set is a no-op.
/// Returns true when weight collapse forced a reinitialization from the
/// supplied sampler.
bool pf_baseline_update(BernoulliBelief& belief, std::span<const double> measurements,
                        const LikelihoodFn& likelihood,
                        const std::function<Vec3(Rng&)>& reinit_sampler, Rng& rng);

/// Snapshot for external visualization: a header row carrying the existence
/// probability, then one x,y,z,weight row per particle.
void write_belief_csv(std::ostream& out, const BernoulliBelief& belief);
BernoulliBelief read_belief_csv(std::istream& in);

}  // namespace vhft
