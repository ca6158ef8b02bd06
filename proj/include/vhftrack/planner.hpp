#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "vhftrack/bernoulli.hpp"
#include "vhftrack/geom.hpp"

namespace vhft {

struct Rect {
    double min_x = 0.0;
    double min_y = 0.0;
    double max_x = 0.0;
    double max_y = 0.0;
    bool contains(double x, double y) const {
        return x >= min_x && x <= max_x && y >= min_y && y <= max_y;
    }
};

enum class ActionKind { rssi, aoa };

/// One planning-horizon maneuver. RSSI actions travel the whole horizon; AoA
/// actions travel then rotate in place. travel_s + rotate_s always equals the
/// planning horizon so rewards are comparable across kinds.
struct PlannedAction {
    ActionKind kind = ActionKind::rssi;
    int heading_index = 0;
    double heading_rad = 0.0;
    double travel_s = 0.0;
    double rotate_s = 0.0;
    double travel_speed = 0.0;  // 0 for the hover fallback
    int action_index = 0;       // enumeration order; deterministic tie-break
};

struct VoidSpec {
    double radius_m = 50.0;   // cylindrical protected region around the UAV
    double min_prob = 0.95;   // required void probability
};

enum class RewardKind { renyi, shannon, cauchy_schwarz };

struct PlannerConfig {
    int n_headings = 8;
    double horizon_s = 30.0;          // T_P; also the AoA action total
    double rotate_s = 20.0;           // rotation share of an AoA action
    double rotation_rate = kPi / 3.0; // rad/s while turning
    double v_max = 10.0;
    RewardKind reward = RewardKind::renyi;
    double alpha = 0.1;
    VoidSpec void_spec;
    Rect area;
    double entropy_cell_m = 20.0;     // histogram cell for Shannon/CS rewards
    bool rssi_actions = true;         // action sub-spaces available to the method
    bool aoa_actions = true;
};

/// Belief tracked for one tag, as seen by the planner.
struct TrackedBelief {
    int id = 0;
    BernoulliBelief belief;
    bool localized = false;
};

/// Measurement models the filter runs with; the planner simulates these
/// during rollouts. Channels mirror the measurements the active method
/// actually uses.
struct FilterModels {
    std::function<double(const Vec3&, const UavState&)> predicted_rssi;
    std::function<double(double z, const Vec3&, const UavState&)> rssi_likelihood;
    std::function<double(const Vec3&, const UavState&)> detection_prob;
    ClutterModel rssi_clutter;
    double sigma_aoa = 0.095;
    ClutterModel aoa_clutter;
    double survival_prob = 0.999;
    double birth_prob = 1e-5;
    bool rssi_channel = true;
    bool aoa_channel = true;
};

/// Pose along an action, elapsed seconds from its start. Travel first (heading
/// fixed at the action heading), then an in-place turn at rotation_rate until
/// a full revolution completes, hovering for any remaining time.
UavState action_pose(const UavState& start, const PlannedAction& action, double elapsed_s,
                     double rotation_rate);

/// Candidate actions at a state: up to n_headings of each enabled kind, minus
/// those whose travel leg would exit the search area. Falls back to a single
/// hover-rotate action when everything is pruned (cornered observer).
std::vector<PlannedAction> enumerate_actions(const UavState& uav, const PlannerConfig& cfg);

/// Probability the object is outside the cylinder of the given radius around
/// the observer: (1 - r) + r (1 - sum of weights inside).
double void_probability(const BernoulliBelief& belief, const UavState& uav, double radius_m);

/// True when every belief keeps void probability above the threshold at every
/// trajectory sample.
bool check_void_constraint(std::span<const TrackedBelief> beliefs,
                           std::span<const UavState> trajectory, const VoidSpec& spec);

/// Unlocalized belief whose mean is nearest the observer (3-D distance, ties
/// to the lower id). nullopt when everything is localized.
std::optional<std::size_t> closest_unlocalized(std::span<const TrackedBelief> beliefs,
                                               const UavState& uav);

struct RolloutResult {
    BernoulliBelief predicted;  // measurement-free prediction at the horizon
    BernoulliBelief posterior;  // pseudo-posterior under ideal measurements
    bool aborted = false;       // observer stopped the rollout early
};

/// Called once per simulated second with the rollout belief; return false to
/// abort (used for void screening).
using RolloutObserver = std::function<bool(int second, const UavState&, const BernoulliBelief&)>;

/// Predicted-ideal-measurement rollout: simulate the action second by second,
/// generate the noise-free measurement of the belief mean at each step (one
/// AoA at rotation end for AoA actions), and filter a copy. Prediction inside
/// rollouts is noise-free, so prior and posterior share particle support; the
/// live belief is never touched.
RolloutResult pims_rollout(const BernoulliBelief& belief, const UavState& uav,
                           const PlannedAction& action, const FilterModels& models,
                           const PlannerConfig& cfg, const RolloutObserver& observer = {});

/// Renyi divergence between Bernoulli beliefs sharing particle support
/// (posterior = reweighted prior). Zero for identical beliefs; non-negative
/// for alpha in (0, 1).
double renyi_reward(const BernoulliBelief& prior, const BernoulliBelief& posterior, double alpha);

/// Entropy reduction: Bernoulli entropy is the binary entropy of r plus
/// r times the spatial differential entropy on a fixed histogram grid.
double shannon_reward(const BernoulliBelief& prior, const BernoulliBelief& posterior,
                      const Rect& area, double cell_m);

/// Cauchy-Schwarz divergence on the shared histogram grid, normalized with
/// square roots so identical beliefs score zero; symmetric in its arguments.
double cs_reward(const BernoulliBelief& prior, const BernoulliBelief& posterior, const Rect& area,
                 double cell_m);

double reward_value(RewardKind kind, double alpha, const BernoulliBelief& prior,
                    const BernoulliBelief& posterior, const Rect& area, double cell_m);

struct ActionScore {
    PlannedAction action;
    double reward = 0.0;
    bool void_ok = true;
    double min_void_margin = 0.0;  // min over seconds/beliefs of (void prob - threshold)
};

struct PlanDecision {
    PlannedAction chosen;
    std::size_t target = 0;  // index of the belief planned for
    bool fallback = false;   // all actions void-pruned; max-margin action taken
    std::vector<ActionScore> scores;
};

/// Myopic action selection: plan for the closest unlocalized belief, score
/// each action by its PIMS rollout reward with per-second void screening
/// against all unlocalized beliefs, and return the argmax (void violations
/// score zero; ties go to the lower action index). Deterministic.
PlanDecision plan(std::span<const TrackedBelief> beliefs, const UavState& uav,
                  const FilterModels& models, const PlannerConfig& cfg);

}  // namespace vhft
