#include "vhftrack/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "vhftrack/stats.hpp"

namespace vhft {

namespace {

constexpr double kCsRewardCap = 1e3;

int total_seconds(const PlannedAction& a) {
    return static_cast<int>(std::llround(a.travel_s + a.rotate_s));
}

struct Histogram {
    std::vector<double> mass;
    std::size_t nx = 0, ny = 0;
    double cell = 0.0;
};

Histogram spatial_histogram(const BernoulliBelief& b, const Rect& area, double cell_m) {
    Histogram h;
    h.cell = cell_m;
    h.nx = std::max<std::size_t>(1, static_cast<std::size_t>(
                                        std::ceil((area.max_x - area.min_x) / cell_m)));
    h.ny = std::max<std::size_t>(1, static_cast<std::size_t>(
                                        std::ceil((area.max_y - area.min_y) / cell_m)));
    h.mass.assign(h.nx * h.ny, 0.0);
    for (std::size_t i = 0; i < b.size(); ++i) {
        const double fx = (b.states[i].x - area.min_x) / cell_m;
        const double fy = (b.states[i].y - area.min_y) / cell_m;
        const auto cx = static_cast<std::size_t>(
            std::clamp(fx, 0.0, static_cast<double>(h.nx - 1)));
        const auto cy = static_cast<std::size_t>(
            std::clamp(fy, 0.0, static_cast<double>(h.ny - 1)));
        h.mass[cy * h.nx + cx] += b.weights[i];
    }
    return h;
}

}  // namespace

UavState action_pose(const UavState& start, const PlannedAction& action, double elapsed_s,
                     double rotation_rate) {
    UavState u = start;
    const double travel_t = std::clamp(elapsed_s, 0.0, action.travel_s);
    if (travel_t > 0.0 && action.travel_speed > 0.0) {
        const Vec3 dir = heading_direction(action.heading_rad);
        u.pos += dir * (action.travel_speed * travel_t);
    }
    u.heading = action.travel_speed > 0.0 ? action.heading_rad : start.heading;
    const double rot_t = elapsed_s - action.travel_s;
    if (rot_t > 0.0 && action.rotate_s > 0.0 && rotation_rate > 0.0) {
        // keep turning for the whole collection window; one pulse per second
        // needs the repeated revolutions for usable bearing geometry
        u.heading = wrap_two_pi(u.heading + rot_t * rotation_rate);
    }
    return u;
}

std::vector<PlannedAction> enumerate_actions(const UavState& uav, const PlannerConfig& cfg) {
    if (cfg.n_headings < 2) throw std::invalid_argument("need at least 2 headings");
    const double travel_aoa = cfg.horizon_s - cfg.rotate_s;
    if (travel_aoa < 0.0) throw std::invalid_argument("rotation longer than the horizon");

    std::vector<PlannedAction> out;
    int index = 0;
    auto try_add = [&](ActionKind kind, int k, double travel_s, double rotate_s) {
        const double heading = kTwoPi * static_cast<double>(k) / cfg.n_headings;
        const Vec3 end = uav.pos + heading_direction(heading) * (cfg.v_max * travel_s);
        const int idx = index++;
        if (!cfg.area.contains(end.x, end.y)) return;  // travel leg exits the search area
        out.push_back({kind, k, heading, travel_s, rotate_s, cfg.v_max, idx});
    };
    if (cfg.rssi_actions)
        for (int k = 0; k < cfg.n_headings; ++k) try_add(ActionKind::rssi, k, cfg.horizon_s, 0.0);
    if (cfg.aoa_actions)
        for (int k = 0; k < cfg.n_headings; ++k) try_add(ActionKind::aoa, k, travel_aoa, cfg.rotate_s);

    if (out.empty()) {
        // cornered: hover in place and rotate for a bearing
        PlannedAction hover;
        hover.kind = ActionKind::aoa;
        hover.heading_index = -1;
        hover.heading_rad = uav.heading;
        hover.rotate_s = cfg.rotate_s > 0.0 ? cfg.rotate_s : cfg.horizon_s;
        hover.travel_s = cfg.horizon_s - hover.rotate_s;
        hover.travel_speed = 0.0;
        hover.action_index = index;
        out.push_back(hover);
    }
    return out;
}

double void_probability(const BernoulliBelief& belief, const UavState& uav, double radius_m) {
    const double r2 = radius_m * radius_m;
    double inside = 0.0;
    for (std::size_t i = 0; i < belief.size(); ++i) {
        const double dx = belief.states[i].x - uav.pos.x;
        const double dy = belief.states[i].y - uav.pos.y;
        if (dx * dx + dy * dy < r2) inside += belief.weights[i];
    }
    return 1.0 - belief.existence * inside;
}

bool check_void_constraint(std::span<const TrackedBelief> beliefs,
                           std::span<const UavState> trajectory, const VoidSpec& spec) {
    for (const UavState& u : trajectory)
        for (const TrackedBelief& t : beliefs)
            if (void_probability(t.belief, u, spec.radius_m) <= spec.min_prob) return false;
    return true;
}

std::optional<std::size_t> closest_unlocalized(std::span<const TrackedBelief> beliefs,
                                               const UavState& uav) {
    std::optional<std::size_t> best;
    double best_dist = 0.0;
    int best_id = 0;
    for (std::size_t i = 0; i < beliefs.size(); ++i) {
        if (beliefs[i].localized) continue;
        const double d = distance(beliefs[i].belief.mean(), uav.pos);
        if (!best || d < best_dist || (d == best_dist && beliefs[i].id < best_id)) {
            best = i;
            best_dist = d;
            best_id = beliefs[i].id;
        }
    }
    return best;
}

RolloutResult pims_rollout(const BernoulliBelief& belief, const UavState& uav,
                           const PlannedAction& action, const FilterModels& models,
                           const PlannerConfig& cfg, const RolloutObserver& observer) {
    RolloutResult res;
    const int horizon = total_seconds(action);

    // Single particle set with two weight tracks. Rollout prediction is
    // noise-free (no perturbation, no birth mixing), which keeps prior and
    // posterior on shared support for the reward estimators.
    BernoulliBelief post = belief;
    double r_prior = belief.existence;

    auto predict_r = [&](double r) {
        return std::clamp(models.birth_prob * (1.0 - r) + models.survival_prob * r, 0.0, 1.0);
    };

    for (int second = 1; second <= horizon; ++second) {
        r_prior = predict_r(r_prior);
        post.existence = predict_r(post.existence);
        const UavState u_t = action_pose(uav, action, second, cfg.rotation_rate);

        // RSSI updates run while traveling; rotation-phase pulses feed the
        // bearing detector instead of the filter
        if (models.rssi_channel && second <= action.travel_s) {
            const Vec3 expected = post.mean();
            const double z = models.predicted_rssi(expected, u_t);
            update(
                post, std::span<const double>(&z, 1),
                [&](double zz, const Vec3& x) { return models.rssi_likelihood(zz, x, u_t); },
                [&](const Vec3& x) { return models.detection_prob(x, u_t); },
                models.rssi_clutter);
        }
        if (action.kind == ActionKind::aoa && models.aoa_channel && second == horizon) {
            const Vec3 expected = post.mean();
            const double z = compass_bearing(u_t.pos, expected);
            update(
                post, std::span<const double>(&z, 1),
                [&](double zz, const Vec3& x) {
                    return aoa_likelihood(zz, compass_bearing(u_t.pos, x), models.sigma_aoa);
                },
                [](const Vec3&) { return 1.0; }, models.aoa_clutter);
        }
        if (observer && !observer(second, u_t, post)) {
            res.aborted = true;
            break;
        }
    }

    res.posterior = std::move(post);
    res.predicted.existence = r_prior;
    res.predicted.states = res.posterior.states;  // shared support
    res.predicted.weights = belief.weights;
    return res;
}

double renyi_reward(const BernoulliBelief& prior, const BernoulliBelief& posterior, double alpha) {
    if (alpha == 1.0) throw std::invalid_argument("renyi alpha must not be 1");
    if (prior.size() != posterior.size())
        throw std::invalid_argument("renyi reward needs shared particle support");
    double spatial = 0.0;
    for (std::size_t i = 0; i < prior.size(); ++i) {
        const double w = prior.weights[i];
        if (w <= 0.0) continue;
        spatial += w * std::pow(posterior.weights[i] / w, 1.0 - alpha);
    }
    const double rp = prior.existence;
    const double rq = posterior.existence;
    const double bracket = std::pow(1.0 - rp, alpha) * std::pow(1.0 - rq, 1.0 - alpha) +
                           std::pow(rp, alpha) * std::pow(rq, 1.0 - alpha) * spatial;
    return std::log(std::max(bracket, 1e-300)) / (alpha - 1.0);
}

double shannon_reward(const BernoulliBelief& prior, const BernoulliBelief& posterior,
                      const Rect& area, double cell_m) {
    const double cell_area = cell_m * cell_m;
    auto entropy = [&](const BernoulliBelief& b) {
        const Histogram h = spatial_histogram(b, area, cell_m);
        double hs = 0.0;
        for (double p : h.mass)
            if (p > 0.0) hs -= p * std::log(p / cell_area);
        return binary_entropy(b.existence) + b.existence * hs;
    };
    return entropy(prior) - entropy(posterior);
}

double cs_reward(const BernoulliBelief& prior, const BernoulliBelief& posterior, const Rect& area,
                 double cell_m) {
    const Histogram hp = spatial_histogram(prior, area, cell_m);
    const Histogram hq = spatial_histogram(posterior, area, cell_m);
    double pq = 0.0, pp = 0.0, qq = 0.0;
    for (std::size_t i = 0; i < hp.mass.size(); ++i) {
        pq += hp.mass[i] * hq.mass[i];
        pp += hp.mass[i] * hp.mass[i];
        qq += hq.mass[i] * hq.mass[i];
    }
    const double rp = prior.existence;
    const double rq = posterior.existence;
    const double ip_pq = (1.0 - rp) * (1.0 - rq) + rp * rq * pq;
    const double ip_pp = (1.0 - rp) * (1.0 - rp) + rp * rp * pp;
    const double ip_qq = (1.0 - rq) * (1.0 - rq) + rq * rq * qq;
    if (!(ip_pp > 0.0) || !(ip_qq > 0.0)) throw std::domain_error("cs reward: zero norm");
    if (!(ip_pq > 0.0)) return kCsRewardCap;  // disjoint supports
    return std::min(kCsRewardCap, -std::log(ip_pq / std::sqrt(ip_pp * ip_qq)));
}

double reward_value(RewardKind kind, double alpha, const BernoulliBelief& prior,
                    const BernoulliBelief& posterior, const Rect& area, double cell_m) {
    switch (kind) {
        case RewardKind::renyi: return renyi_reward(prior, posterior, alpha);
        case RewardKind::shannon: return shannon_reward(prior, posterior, area, cell_m);
        case RewardKind::cauchy_schwarz: return cs_reward(prior, posterior, area, cell_m);
    }
    return 0.0;
}

PlanDecision plan(std::span<const TrackedBelief> beliefs, const UavState& uav,
                  const FilterModels& models, const PlannerConfig& cfg) {
    const auto target = closest_unlocalized(beliefs, uav);
    if (!target) throw std::logic_error("plan called with every belief localized");

    std::vector<std::size_t> others;
    for (std::size_t i = 0; i < beliefs.size(); ++i)
        if (!beliefs[i].localized && i != *target) others.push_back(i);

    PlanDecision decision;
    decision.target = *target;
    const auto actions = enumerate_actions(uav, cfg);
    decision.scores.reserve(actions.size());

    auto predict_r = [&](double r) {
        return std::clamp(models.birth_prob * (1.0 - r) + models.survival_prob * r, 0.0, 1.0);
    };

    for (const PlannedAction& action : actions) {
        ActionScore score;
        score.action = action;
        score.min_void_margin = std::numeric_limits<double>::infinity();

        std::vector<double> other_r(others.size());
        for (std::size_t k = 0; k < others.size(); ++k)
            other_r[k] = beliefs[others[k]].belief.existence;

        auto observe = [&](int /*second*/, const UavState& u_t, const BernoulliBelief& rolled) {
            double margin = void_probability(rolled, u_t, cfg.void_spec.radius_m) -
                            cfg.void_spec.min_prob;
            for (std::size_t k = 0; k < others.size(); ++k) {
                // other beliefs roll forward noise-free: static cloud, predicted existence
                other_r[k] = predict_r(other_r[k]);
                const TrackedBelief& ob = beliefs[others[k]];
                double inside = 0.0;
                const double r2 = cfg.void_spec.radius_m * cfg.void_spec.radius_m;
                for (std::size_t i = 0; i < ob.belief.size(); ++i) {
                    const double dx = ob.belief.states[i].x - u_t.pos.x;
                    const double dy = ob.belief.states[i].y - u_t.pos.y;
                    if (dx * dx + dy * dy < r2) inside += ob.belief.weights[i];
                }
                margin = std::min(margin, 1.0 - other_r[k] * inside - cfg.void_spec.min_prob);
            }
            score.min_void_margin = std::min(score.min_void_margin, margin);
            if (margin <= 0.0) score.void_ok = false;
            return true;  // keep rolling to the horizon so the margin is complete
        };

        const RolloutResult roll =
            pims_rollout(beliefs[*target].belief, uav, action, models, cfg, observe);
        score.reward = score.void_ok
                           ? reward_value(cfg.reward, cfg.alpha, roll.predicted, roll.posterior,
                                          cfg.area, cfg.entropy_cell_m)
                           : 0.0;
        decision.scores.push_back(std::move(score));
    }

    const ActionScore* best = nullptr;
    for (const ActionScore& s : decision.scores)
        if (s.void_ok && s.reward > 0.0 && (!best || s.reward > best->reward)) best = &s;

    if (!best) {
        // every action was void-pruned (or scored zero): take the one that
        // stays farthest from the constraint boundary
        decision.fallback = true;
        for (const ActionScore& s : decision.scores)
            if (!best || s.min_void_margin > best->min_void_margin) best = &s;
    }
    decision.chosen = best->action;
    return decision;
}

}  // namespace vhft
