#include "vhftrack/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <ostream>
#include <thread>
#include <unordered_map>

#include "vhftrack/radio.hpp"
#include "vhftrack/stats.hpp"

namespace vhft {

namespace {

struct MethodTraits {
    bool rssi_actions = true;
    bool aoa_actions = true;
    bool rssi_updates = true;
    bool aoa_updates = true;
    bool particle_filter = false;
};

MethodTraits traits_for(MethodKind m) {
    switch (m) {
        case MethodKind::metap: return {true, true, true, true, false};
        case MethodKind::imp_rssi: return {true, false, true, false, false};
        case MethodKind::caoa20: return {false, true, false, true, false};
        case MethodKind::aoa_rssi20: return {false, true, true, true, false};
        case MethodKind::aoa_rssi45: return {false, true, true, true, false};
        case MethodKind::pf_baseline: return {true, true, true, true, true};
    }
    return {};
}

// Filter-side RSSI model: the plain log-distance form, with guards so that a
// particle drifting onto the observer's vertical axis cannot throw mid-update.
double filter_rssi_model(const Vec3& x, const UavState& u, const RadioParams& p,
                         const GainPattern& g) {
    double d = distance(x, u.pos);
    if (d < 0.1) d = 0.1;
    const double dx = x.x - u.pos.x;
    const double dy = x.y - u.pos.y;
    const double zeta =
        (dx == 0.0 && dy == 0.0) ? 0.0 : wrap_two_pi(std::atan2(dx, dy) - u.heading);
    return p.source_dbm - 10.0 * p.path_loss_exponent * std::log10(d / p.ref_distance_m) +
           g.gain_db(zeta);
}

double elevation_angle_deg(const Vec3& tag, const Vec3& obs) {
    const double horiz = distance_xy(tag, obs);
    const double dz = std::abs(obs.z - tag.z);
    return std::max(0.1, std::atan2(dz, horiz) * 180.0 / kPi);
}

// Memoized diffraction loss on a quantized endpoint lattice. The per-particle
// detection probability map would otherwise cost a full line-of-sight profile
// per particle per update.
class DiffractionCache {
public:
    DiffractionCache(const TerrainGrid& terrain, double uav_z, double tag_height, double f_ghz,
                     double cell_m = 25.0)
        : terrain_(terrain), uav_z_(uav_z), tag_height_(tag_height), f_ghz_(f_ghz),
          cell_(cell_m) {}

    double loss(const Vec3& x, const Vec3& u_pos) const {
        const std::uint64_t key = (index(x.x) << 48) | (index(x.y) << 32) |
                                  (index(u_pos.x) << 16) | index(u_pos.y);
        const auto it = map_.find(key);
        if (it != map_.end()) return it->second;

        Vec3 tx{snap(x.x, terrain_.min_x(), terrain_.max_x()),
                snap(x.y, terrain_.min_y(), terrain_.max_y()), 0.0};
        tx.z = terrain_.elevation_at(tx.x, tx.y) + tag_height_;
        const Vec3 rx{snap(u_pos.x, terrain_.min_x(), terrain_.max_x()),
                      snap(u_pos.y, terrain_.min_y(), terrain_.max_y()), uav_z_};
        double value = 0.0;
        if (distance(tx, rx) > 1.0)
            value = terrain_diffraction_loss(los_profile(terrain_, tx, rx, 64), f_ghz_);
        map_.emplace(key, value);
        return value;
    }

private:
    std::uint64_t index(double v) const {
        return static_cast<std::uint64_t>(
                   std::clamp(std::floor(v / cell_), 0.0, 65535.0)) &
               0xffffULL;
    }
    double snap(double v, double lo, double hi) const {
        return std::clamp((std::floor(v / cell_) + 0.5) * cell_, lo, hi);
    }

    const TerrainGrid& terrain_;
    double uav_z_;
    double tag_height_;
    double f_ghz_;
    double cell_;
    mutable std::unordered_map<std::uint64_t, double> map_;
};

}  // namespace

void step_object(TagTruth& tag, const Vec3& process_var, const TerrainGrid& terrain,
                 double height_above_ground, Rng& rng) {
    if (!tag.wandering) return;
    const double sx = std::sqrt(process_var.x);
    const double sy = std::sqrt(process_var.y);
    tag.pos.x += sx * rng.normal();
    tag.pos.y += sy * rng.normal();
    // keep the tag on the mapped terrain
    tag.pos.x = std::clamp(tag.pos.x, terrain.min_x(), terrain.max_x());
    tag.pos.y = std::clamp(tag.pos.y, terrain.min_y(), terrain.max_y());
    tag.pos.z = terrain.elevation_at(tag.pos.x, tag.pos.y) + height_above_ground;
}

UavState step_uav(const UavState& anchor, const PlannedAction& action, double elapsed_s,
                  double rotation_rate, const Rect& area, bool* clipped) {
    UavState u = action_pose(anchor, action, elapsed_s, rotation_rate);
    const double cx = std::clamp(u.pos.x, area.min_x, area.max_x);
    const double cy = std::clamp(u.pos.y, area.min_y, area.max_y);
    if (clipped) *clipped = (cx != u.pos.x) || (cy != u.pos.y);
    u.pos.x = cx;
    u.pos.y = cy;
    return u;
}

TerrainGrid build_terrain(const ScenarioConfig& cfg) {
    if (cfg.terrain.source == "file") return load_dem_file(cfg.terrain.file);
    const double relief =
        cfg.terrain.relief_m >= 0.0 ? cfg.terrain.relief_m : default_relief(cfg.terrain.kind);
    return generate_synthetic_terrain(cfg.terrain.kind, cfg.terrain.extent_m, relief,
                                      cfg.terrain.seed);
}

GainPattern build_gain(const ScenarioConfig& cfg) {
    if (cfg.propagation.gain_source == "file")
        return GainPattern::load_file(cfg.propagation.gain_file);
    return GainPattern::synthetic_two_lobe(cfg.propagation.gain_peak_db,
                                           cfg.propagation.gain_f2b_db);
}

Rect search_area(const TerrainGrid& t) {
    return Rect{t.min_x(), t.min_y(), t.max_x(), t.max_y()};
}

MissionResult run_mission(const ScenarioConfig& cfg, const TerrainGrid& terrain,
                          const GainPattern& gain, std::uint64_t seed, std::ostream* trace) {
    const MethodTraits traits = traits_for(cfg.method);
    const Rect area = search_area(terrain);
    Rng rng(seed);

    MissionResult result;
    result.seed = seed;

    const double tag_height = cfg.tags.height_above_ground_m;
    const VegetationSpec veg{cfg.propagation.vegetation_depth_m,
                             cfg.propagation.vegetation_depth_m > 0.0};

    // --- truth + belief initialization -------------------------------------
    struct TagSim {
        TagTruth truth;
        TrackedBelief tracked;
        RotationLog log;
        TagOutcome outcome;
    };
    std::vector<TagSim> tags(static_cast<std::size_t>(cfg.tags.count));
    auto ground = [&](double x, double y) { return terrain.elevation_at(x, y); };
    for (std::size_t i = 0; i < tags.size(); ++i) {
        TagSim& t = tags[i];
        t.truth.id = static_cast<int>(i);
        t.truth.wandering = cfg.tags.wandering;
        t.truth.pos.x = rng.uniform(area.min_x, area.max_x);
        t.truth.pos.y = rng.uniform(area.min_y, area.max_y);
        t.truth.pos.z = ground(t.truth.pos.x, t.truth.pos.y) + tag_height;
        t.tracked.id = t.truth.id;
        t.tracked.belief.existence = traits.particle_filter ? 1.0 : cfg.filter.initial_existence;
        t.tracked.belief.states.resize(static_cast<std::size_t>(cfg.filter.particles));
        t.tracked.belief.weights.assign(static_cast<std::size_t>(cfg.filter.particles),
                                        1.0 / cfg.filter.particles);
        for (Vec3& x : t.tracked.belief.states) {
            x.x = rng.uniform(area.min_x, area.max_x);
            x.y = rng.uniform(area.min_y, area.max_y);
            x.z = ground(x.x, x.y) + tag_height;
        }
        t.outcome.tag_id = t.truth.id;
    }

    UavState uav;
    uav.pos = {cfg.uav.x, cfg.uav.y, cfg.uav.altitude_agl_m + ground(cfg.uav.x, cfg.uav.y)};
    uav.heading = wrap_two_pi(cfg.uav.heading_rad);

    // --- models -------------------------------------------------------------
    auto birth_sampler = [&terrain, area, tag_height](Rng& r) {
        Vec3 x;
        x.x = r.uniform(area.min_x, area.max_x);
        x.y = r.uniform(area.min_y, area.max_y);
        x.z = terrain.elevation_at(x.x, x.y) + tag_height;
        return x;
    };
    DynamicsModel dyn;
    dyn.survival_prob = cfg.filter.survival_prob;
    dyn.birth_prob = cfg.filter.birth_prob;
    dyn.birth_sampler = birth_sampler;
    DynamicsModel pf_dyn = dyn;  // same noise, no existence churn
    pf_dyn.survival_prob = 1.0;
    pf_dyn.birth_prob = 0.0;
    const DynamicsModel& active_dyn = traits.particle_filter ? pf_dyn : dyn;

    const RadioParams& radio = cfg.radio;
    // the particle-filter baseline mirrors the earlier RSSI systems it stands
    // in for: plain Gaussian path-loss likelihood, no interval bias
    const bool imprecise =
        cfg.filter.rssi_likelihood == "imprecise" && !traits.particle_filter;
    const double mu_min = cfg.filter.mu_min_db;
    const double mu_max = cfg.filter.mu_max_db;

    FilterModels models;
    models.predicted_rssi = [&](const Vec3& x, const UavState& u) {
        return filter_rssi_model(x, u, radio, gain);
    };
    models.rssi_likelihood = [&, imprecise, mu_min, mu_max](double z, const Vec3& x,
                                                            const UavState& u) {
        const double h = filter_rssi_model(x, u, radio, gain);
        return imprecise ? rssi_imprecise_likelihood(z, h, radio.noise_db, mu_min, mu_max)
                         : rssi_precise_likelihood(z, h, radio.noise_db);
    };
    const bool complex_pd = cfg.filter.pd_model == "complex";
    const double forced_pd = cfg.filter.forced_pd;
    const double uav_alt = cfg.uav.altitude_agl_m + ground(cfg.uav.x, cfg.uav.y);
    DiffractionCache pd_cache(terrain, uav_alt, tag_height, radio.freq_mhz / 1000.0);
    models.detection_prob = [&, complex_pd, forced_pd](const Vec3& x, const UavState& u) {
        if (forced_pd > 0.0) return forced_pd;
        double level = filter_rssi_model(x, u, radio, gain);
        if (complex_pd) {
            if (veg.enabled)
                level -= vegetation_loss(radio.freq_mhz, veg.depth_m,
                                         elevation_angle_deg(x, u.pos));
            if (cfg.propagation.terrain_loss) level -= pd_cache.loss(x, u.pos);
        }
        return detection_probability(level, radio);
    };
    models.rssi_clutter = {cfg.filter.clutter_rate,
                           1.0 / (cfg.filter.rssi_clutter_max_dbm - cfg.filter.rssi_clutter_min_dbm)};
    models.aoa_clutter = {cfg.filter.clutter_rate, 1.0 / kTwoPi};
    models.sigma_aoa = cfg.filter.sigma_aoa_rad;
    models.survival_prob = traits.particle_filter ? 1.0 : cfg.filter.survival_prob;
    models.birth_prob = traits.particle_filter ? 0.0 : cfg.filter.birth_prob;
    models.rssi_channel = traits.rssi_updates;
    models.aoa_channel = traits.aoa_updates;

    PlannerConfig pcfg;
    pcfg.n_headings = cfg.planner.headings;
    pcfg.horizon_s = cfg.effective_horizon_s();
    pcfg.rotate_s = cfg.effective_rotate_s();
    pcfg.rotation_rate = cfg.uav.rotation_rate_rad_s;
    pcfg.v_max = cfg.uav.v_max;
    pcfg.reward = cfg.reward_kind();
    pcfg.alpha = cfg.planner.alpha;
    pcfg.void_spec = {cfg.planner.void_radius_m, cfg.planner.void_min_prob};
    pcfg.area = area;
    pcfg.entropy_cell_m = cfg.planner.entropy_cell_m;
    pcfg.rssi_actions = traits.rssi_actions;
    pcfg.aoa_actions = traits.aoa_actions;

    AoaDetectorConfig aoa_cfg;
    aoa_cfg.grid_step_deg = cfg.aoa.grid_step_deg;
    aoa_cfg.min_detections = static_cast<std::size_t>(cfg.aoa.min_detections);
    aoa_cfg.decision_threshold_rad = cfg.aoa.decision_threshold_rad;

    // truth-side noiseless level, honoring the configured loss terms
    auto truth_level = [&](Vec3 tag_pos) {
        if (tag_pos.x == uav.pos.x && tag_pos.y == uav.pos.y) tag_pos.x += 1e-6;
        if (cfg.propagation.terrain_loss)
            return complex_rssi(tag_pos, uav, radio, gain, terrain, veg);
        double lvl = ideal_rssi(tag_pos, uav, radio, gain);
        if (veg.enabled) {
            const double horiz = distance_xy(tag_pos, uav.pos);
            const double dz = std::abs(uav.pos.z - tag_pos.z);
            const double phi = std::max(0.1, std::atan2(dz, horiz) * 180.0 / kPi);
            lvl -= vegetation_loss(radio.freq_mhz, veg.depth_m, phi);
        }
        return lvl;
    };

    auto all_localized = [&] {
        return std::all_of(tags.begin(), tags.end(),
                           [](const TagSim& t) { return t.tracked.localized; });
    };
    auto beliefs_view = [&] {
        std::vector<TrackedBelief> v;  // planner snapshot
        v.reserve(tags.size());
        for (TagSim& t : tags) v.push_back(t.tracked);
        return v;
    };

    if (trace) *trace << "t,uav_x,uav_y,uav_z,uav_heading,tag_id,existence,det_m4,mean_x,mean_y\n";

    const double clutter_p = std::min(1.0, cfg.filter.clutter_rate);
    const double cap = cfg.mission.time_cap_s;

    PlannedAction action;
    UavState anchor = uav;
    double anchor_t = 0.0;
    double action_end = 0.0;

    result.total_time_s = 0.0;
    for (double t = 1.0; t <= cap; t += 1.0) {
        if (all_localized()) break;

        if (t - 1.0 >= action_end) {
            // epoch boundary: plan for the current beliefs
            const auto snapshot = beliefs_view();
            const PlanDecision decision = plan(snapshot, uav, models, pcfg);
            action = decision.chosen;
            anchor = uav;
            anchor_t = t - 1.0;
            action_end = anchor_t + action.travel_s + action.rotate_s;
            const auto& sc = decision.scores;
            const auto it = std::find_if(sc.begin(), sc.end(), [&](const ActionScore& s) {
                return s.action.action_index == action.action_index;
            });
            EpochRecord rec;
            rec.time_s = anchor_t;
            rec.action_index = action.action_index;
            rec.kind = action.kind;
            rec.heading_rad = action.heading_rad;
            rec.fallback = decision.fallback;
            if (it != sc.end()) {
                rec.reward = it->reward;
                rec.void_ok = it->void_ok;
                rec.min_margin = it->min_void_margin;
            }
            result.epochs.push_back(rec);
        }

        bool clipped = false;
        uav = step_uav(anchor, action, t - anchor_t, pcfg.rotation_rate, area, &clipped);
        if (clipped) ++result.boundary_clips;
        const bool rotating = action.kind == ActionKind::aoa && (t - anchor_t) > action.travel_s;

        for (TagSim& tag : tags) {
            if (tag.tracked.localized) continue;
            step_object(tag.truth, active_dyn.process_var, terrain, tag_height, rng);

            // one receiver scan for this tag
            const double level = truth_level(tag.truth.pos);
            std::vector<double> scan;
            std::optional<double> real;
            ++result.rssi_scans;
            if (forced_pd > 0.0) {
                // controlled detection probability with the censoring physics
                // intact: the threshold rides at the level's quantile. The
                // one-peak-per-period detector turns a share of the missed
                // pulses into spurious peaks instead of silence.
                const double thr =
                    level + radio.noise_db * std_normal_quantile(1.0 - forced_pd);
                const double value = level + radio.noise_db * rng.normal();
                if (value >= thr) {
                    real = value;
                    scan.push_back(*real);
                } else if (rng.uniform() < cfg.filter.forced_pd_false_rate) {
                    scan.push_back(rng.uniform(cfg.filter.rssi_clutter_min_dbm,
                                               cfg.filter.rssi_clutter_max_dbm));
                    ++result.rssi_clutter_injected;
                }
            } else {
                real = draw_rssi_measurement(level, radio, rng);
                if (real) scan.push_back(*real);
                if (rng.uniform() < clutter_p) {
                    scan.push_back(rng.uniform(cfg.filter.rssi_clutter_min_dbm,
                                               cfg.filter.rssi_clutter_max_dbm));
                    ++result.rssi_clutter_injected;
                }
            }

            BernoulliBelief& belief = tag.tracked.belief;
            predict(belief, active_dyn, rng);
            if (rotating) {
                // rotation-phase pulses feed the bearing detector, not the filter
                ++tag.log.expected_pulses;
                if (real) tag.log.samples.push_back({*real, uav.heading});
            } else if (traits.rssi_updates) {
                const UavState u_now = uav;
                auto like = [&](double z, const Vec3& x) {
                    return models.rssi_likelihood(z, x, u_now);
                };
                if (traits.particle_filter) {
                    if (!scan.empty() &&
                        pf_baseline_update(belief, scan, like, birth_sampler, rng))
                        ++result.pf_reinits;
                } else {
                    const UpdateDiag diag = update(
                        belief, scan, like,
                        [&](const Vec3& x) { return models.detection_prob(x, u_now); },
                        models.rssi_clutter);
                    if (diag.clamped) ++result.existence_clamps;
                }
            }
        }

        if (action.kind == ActionKind::aoa && t >= action_end) {
            // rotation complete: emit bearings
            for (TagSim& tag : tags) {
                if (tag.tracked.localized) {
                    tag.log = RotationLog{};
                    continue;
                }
                if (traits.aoa_updates) {
                    tag.log.tag_id = tag.truth.id;
                    tag.log.end_time_s = t;
                    tag.log.duration_s = action.rotate_s;
                    if (const auto m = measure_aoa(tag.log, gain, aoa_cfg)) {
                        ++result.aoa_measurements;
                        std::vector<double> z_set{m->bearing_rad};
                        if (rng.uniform() < clutter_p) z_set.push_back(rng.uniform(0.0, kTwoPi));
                        BernoulliBelief& belief = tag.tracked.belief;
                        const UavState u_now = uav;
                        auto like = [&](double z, const Vec3& x) {
                            const double dx = x.x - u_now.pos.x;
                            const double dy = x.y - u_now.pos.y;
                            const double h =
                                (dx == 0.0 && dy == 0.0) ? 0.0 : wrap_two_pi(std::atan2(dx, dy));
                            return aoa_likelihood(z, h, models.sigma_aoa);
                        };
                        if (traits.particle_filter) {
                            if (pf_baseline_update(belief, z_set, like, birth_sampler, rng))
                                ++result.pf_reinits;
                        } else {
                            const UpdateDiag diag =
                                update(belief, z_set, like, [](const Vec3&) { return 1.0; },
                                       models.aoa_clutter);
                            if (diag.clamped) ++result.existence_clamps;
                        }
                    }
                }
                tag.log = RotationLog{};
            }
        }

        for (TagSim& tag : tags) {
            if (tag.tracked.localized) continue;
            // judge localization on the weighted posterior, then let the
            // degeneracy-triggered resample run for the next step
            const EstimateSummary est = estimate(tag.tracked.belief, cfg.filter.det_threshold_m4);
            if (!traits.particle_filter) maybe_resample(tag.tracked.belief, rng);
            if (est.localized) {
                tag.tracked.localized = true;
                tag.outcome.localized = true;
                tag.outcome.time_s = t;
                tag.outcome.error_m = distance_xy(est.mean, tag.truth.pos);
                tag.outcome.det_m4 = est.determinant;
            }
            if (trace) {
                char line[256];
                std::snprintf(line, sizeof(line),
                              "%.0f,%.3f,%.3f,%.3f,%.5f,%d,%.6f,%.4f,%.3f,%.3f\n", t, uav.pos.x,
                              uav.pos.y, uav.pos.z, uav.heading, tag.truth.id,
                              tag.tracked.belief.existence, est.determinant, est.mean.x,
                              est.mean.y);
                *trace << line;
            }
        }

        result.total_time_s = t;
        if (all_localized()) break;
    }

    result.timed_out = !all_localized();
    if (tags.empty()) result.total_time_s = 0.0;
    if (result.timed_out) {
        result.total_time_s = cap;
        for (TagSim& tag : tags) {
            if (!tag.tracked.localized) {
                const EstimateSummary est =
                    estimate(tag.tracked.belief, cfg.filter.det_threshold_m4);
                tag.outcome.localized = false;
                tag.outcome.time_s = cap;
                tag.outcome.error_m = distance_xy(est.mean, tag.truth.pos);
                tag.outcome.det_m4 = est.determinant;
            }
        }
    }
    result.tags.reserve(tags.size());
    for (TagSim& tag : tags) result.tags.push_back(tag.outcome);
    return result;
}

std::vector<MissionResult> run_monte_carlo(const ScenarioConfig& cfg, const TerrainGrid& terrain,
                                           const GainPattern& gain, int jobs,
                                           const std::string& trace_dir) {
    const int n = cfg.trials.count;
    std::vector<MissionResult> out(static_cast<std::size_t>(n));
    std::atomic<int> next{0};
    auto work = [&] {
        for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
            const std::uint64_t seed = cfg.trials.base_seed + static_cast<std::uint64_t>(i);
            if (!trace_dir.empty()) {
                std::ofstream trace(trace_dir + "/trace_" + std::to_string(i) + ".csv");
                out[static_cast<std::size_t>(i)] =
                    run_mission(cfg, terrain, gain, seed, &trace);
                // audit log of every planning decision
                std::ofstream dec(trace_dir + "/decisions_" + std::to_string(i) + ".csv");
                dec << "time_s,action_index,kind,heading_rad,reward,void_ok,fallback,min_margin\n";
                char buf[160];
                for (const EpochRecord& e : out[static_cast<std::size_t>(i)].epochs) {
                    std::snprintf(buf, sizeof(buf), "%.0f,%d,%s,%.6f,%.8g,%d,%d,%.6g\n",
                                  e.time_s, e.action_index,
                                  e.kind == ActionKind::aoa ? "aoa" : "rssi", e.heading_rad,
                                  e.reward, e.void_ok ? 1 : 0, e.fallback ? 1 : 0, e.min_margin);
                    dec << buf;
                }
            } else {
                out[static_cast<std::size_t>(i)] = run_mission(cfg, terrain, gain, seed);
            }
        }
    };
    const int workers = std::max(1, std::min(jobs, n));
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }
    return out;
}

namespace {

double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

McStats summarize(std::span<const MissionResult> results) {
    McStats s;
    std::vector<double> times;
    std::vector<double> errors;
    for (const MissionResult& r : results) {
        ++s.missions;
        if (r.timed_out) ++s.timeouts;
        times.push_back(r.total_time_s);
        for (const TagOutcome& t : r.tags) {
            ++s.tags_total;
            if (t.localized) {
                ++s.tags_localized;
                errors.push_back(t.error_m);
            }
        }
    }
    if (!times.empty()) {
        s.mean_time = std::accumulate(times.begin(), times.end(), 0.0) / times.size();
        s.median_time = median_of(times);
        if (times.size() > 1) {
            double acc = 0.0;
            for (double t : times) acc += (t - s.mean_time) * (t - s.mean_time);
            s.std_time = std::sqrt(acc / (times.size() - 1.0));
        }
    }
    if (!errors.empty()) {
        s.mean_error = std::accumulate(errors.begin(), errors.end(), 0.0) / errors.size();
        s.median_error = median_of(errors);
    }
    return s;
}

}  // namespace vhft
