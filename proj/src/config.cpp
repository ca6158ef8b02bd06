#include "vhftrack/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace vhft {

using json = nlohmann::ordered_json;

std::string to_string(MethodKind m) {
    switch (m) {
        case MethodKind::metap: return "metap";
        case MethodKind::imp_rssi: return "imp_rssi";
        case MethodKind::caoa20: return "caoa20";
        case MethodKind::aoa_rssi20: return "aoa_rssi20";
        case MethodKind::aoa_rssi45: return "aoa_rssi45";
        case MethodKind::pf_baseline: return "pf_baseline";
    }
    return "metap";
}

MethodKind method_from_string(const std::string& s) {
    if (s == "metap") return MethodKind::metap;
    if (s == "imp_rssi") return MethodKind::imp_rssi;
    if (s == "caoa20") return MethodKind::caoa20;
    if (s == "aoa_rssi20") return MethodKind::aoa_rssi20;
    if (s == "aoa_rssi45") return MethodKind::aoa_rssi45;
    if (s == "pf_baseline") return MethodKind::pf_baseline;
    throw ConfigError("method", "unknown method '" + s + "'");
}

std::string to_string(RewardKind k) {
    switch (k) {
        case RewardKind::renyi: return "renyi";
        case RewardKind::shannon: return "shannon";
        case RewardKind::cauchy_schwarz: return "cs";
    }
    return "renyi";
}

std::string to_string(TerrainKind k) {
    switch (k) {
        case TerrainKind::flat: return "flat";
        case TerrainKind::hilly: return "hilly";
        case TerrainKind::mountain: return "mountain";
    }
    return "flat";
}

RewardKind ScenarioConfig::reward_kind() const {
    if (planner.reward == "renyi") return RewardKind::renyi;
    if (planner.reward == "shannon") return RewardKind::shannon;
    if (planner.reward == "cs") return RewardKind::cauchy_schwarz;
    throw ConfigError("planner.reward", "unknown reward '" + planner.reward + "'");
}

double ScenarioConfig::effective_rotate_s() const {
    return method == MethodKind::aoa_rssi45 ? 45.0 : planner.rotate_s;
}

double ScenarioConfig::effective_horizon_s() const {
    // equal-horizon constraint: travel share is fixed, so a longer rotation
    // stretches the whole planning interval
    if (method == MethodKind::aoa_rssi45)
        return planner.horizon_s - planner.rotate_s + 45.0;
    return planner.horizon_s;
}

namespace {

class Reader {
public:
    Reader(const json& node, std::string path) : node_(node), path_(std::move(path)) {}

    const json& raw() const { return node_; }

    void expect_object() const {
        if (!node_.is_object()) throw ConfigError(path_, "expected an object");
    }

    bool has(const std::string& key) const { return node_.contains(key); }

    Reader child(const std::string& key) const {
        return Reader(node_.at(key), path_.empty() ? key : path_ + "." + key);
    }

    void mark(const std::string& key) const { seen_.insert(key); }

    template <typename T>
    void get(const std::string& key, T& out) const {
        if (!node_.contains(key)) return;
        mark(key);
        const json& v = node_.at(key);
        try {
            out = v.get<T>();
        } catch (const json::exception&) {
            throw ConfigError(join(key), "wrong type");
        }
    }

    void get_range(const std::string& key, double& lo, double& hi) const {
        if (!node_.contains(key)) return;
        mark(key);
        const json& v = node_.at(key);
        if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
            throw ConfigError(join(key), "expected [lo, hi]");
        lo = v[0].get<double>();
        hi = v[1].get<double>();
    }

    /// number or null -> sentinel
    void get_optional(const std::string& key, double& out, double sentinel) const {
        if (!node_.contains(key)) return;
        mark(key);
        const json& v = node_.at(key);
        if (v.is_null()) {
            out = sentinel;
            return;
        }
        if (!v.is_number()) throw ConfigError(join(key), "expected a number or null");
        out = v.get<double>();
    }

    void finish() const {
        if (!node_.is_object()) return;
        for (const auto& item : node_.items()) {
            if (!seen_.count(item.key()))
                throw ConfigError(join(item.key()), "unknown key");
        }
    }

    std::string join(const std::string& key) const {
        return path_.empty() ? key : path_ + "." + key;
    }

private:
    const json& node_;
    std::string path_;
    mutable std::set<std::string> seen_;
};

void require(bool ok, const std::string& path, const std::string& what) {
    if (!ok) throw ConfigError(path, what);
}

void parse_section(const Reader& r, TerrainConfig& t) {
    r.expect_object();
    r.get("source", t.source);
    r.get("file", t.file);
    std::string kind = to_string(t.kind);
    r.get("kind", kind);
    if (kind == "flat")
        t.kind = TerrainKind::flat;
    else if (kind == "hilly")
        t.kind = TerrainKind::hilly;
    else if (kind == "mountain")
        t.kind = TerrainKind::mountain;
    else
        throw ConfigError(r.join("kind"), "unknown terrain kind '" + kind + "'");
    r.get("extent_m", t.extent_m);
    r.get("relief_m", t.relief_m);
    r.get("seed", t.seed);
    r.finish();
    require(t.source == "synthetic" || t.source == "file", r.join("source"),
            "must be 'synthetic' or 'file'");
    require(t.source != "file" || !t.file.empty(), r.join("file"), "missing DEM path");
    require(t.extent_m > 0.0, r.join("extent_m"), "must be positive");
}

void parse_section(const Reader& r, TagsConfig& t) {
    r.expect_object();
    r.get("count", t.count);
    std::string mobility = t.wandering ? "wandering" : "static";
    r.get("mobility", mobility);
    if (mobility == "wandering")
        t.wandering = true;
    else if (mobility == "static")
        t.wandering = false;
    else
        throw ConfigError(r.join("mobility"), "must be 'wandering' or 'static'");
    r.get("height_above_ground_m", t.height_above_ground_m);
    r.finish();
    require(t.count >= 0, r.join("count"), "must be non-negative");
    require(t.height_above_ground_m >= 0.0, r.join("height_above_ground_m"),
            "must be non-negative");
}

void parse_section(const Reader& r, RadioParams& p) {
    r.expect_object();
    r.get("source_dbm", p.source_dbm);
    r.get("ref_distance_m", p.ref_distance_m);
    r.get("path_loss_exponent", p.path_loss_exponent);
    r.get("noise_db", p.noise_db);
    r.get("sensitivity_dbm", p.sensitivity_dbm);
    r.get("freq_mhz", p.freq_mhz);
    r.finish();
    require(p.ref_distance_m > 0.0, r.join("ref_distance_m"), "must be positive");
    require(p.path_loss_exponent > 0.0, r.join("path_loss_exponent"), "must be positive");
    require(p.noise_db > 0.0, r.join("noise_db"), "must be positive");
    require(p.freq_mhz > 0.0, r.join("freq_mhz"), "must be positive");
}

void parse_section(const Reader& r, PropagationConfig& p) {
    r.expect_object();
    r.get("terrain_loss", p.terrain_loss);
    r.get("vegetation_depth_m", p.vegetation_depth_m);
    if (r.has("gain")) {
        r.mark("gain");
        Reader g = r.child("gain");
        g.expect_object();
        g.get("source", p.gain_source);
        g.get("file", p.gain_file);
        g.get("peak_db", p.gain_peak_db);
        g.get("front_to_back_db", p.gain_f2b_db);
        g.finish();
        require(p.gain_source == "synthetic" || p.gain_source == "file", g.join("source"),
                "must be 'synthetic' or 'file'");
        require(p.gain_source != "file" || !p.gain_file.empty(), g.join("file"),
                "missing gain table path");
    }
    r.finish();
    require(p.vegetation_depth_m >= 0.0, r.join("vegetation_depth_m"), "must be non-negative");
}

void parse_section(const Reader& r, FilterConfig& f) {
    r.expect_object();
    r.get("particles", f.particles);
    r.get("birth_prob", f.birth_prob);
    r.get("survival_prob", f.survival_prob);
    r.get("initial_existence", f.initial_existence);
    r.get("det_threshold_m4", f.det_threshold_m4);
    r.get("clutter_rate", f.clutter_rate);
    r.get_range("rssi_clutter_range_dbm", f.rssi_clutter_min_dbm, f.rssi_clutter_max_dbm);
    r.get_range("imprecision_db", f.mu_min_db, f.mu_max_db);
    r.get("sigma_aoa_rad", f.sigma_aoa_rad);
    r.get("rssi_likelihood", f.rssi_likelihood);
    r.get("pd_model", f.pd_model);
    r.get_optional("forced_pd", f.forced_pd, -1.0);
    r.get("forced_pd_false_rate", f.forced_pd_false_rate);
    r.finish();
    require(f.particles >= 2, r.join("particles"), "must be at least 2");
    require(f.birth_prob >= 0.0 && f.birth_prob <= 1.0, r.join("birth_prob"), "must be in [0,1]");
    require(f.survival_prob >= 0.0 && f.survival_prob <= 1.0, r.join("survival_prob"),
            "must be in [0,1]");
    require(f.initial_existence >= 0.0 && f.initial_existence <= 1.0,
            r.join("initial_existence"), "must be in [0,1]");
    require(f.det_threshold_m4 > 0.0, r.join("det_threshold_m4"), "must be positive");
    require(f.clutter_rate >= 0.0, r.join("clutter_rate"), "must be non-negative");
    require(f.rssi_clutter_max_dbm > f.rssi_clutter_min_dbm, r.join("rssi_clutter_range_dbm"),
            "range must be non-empty");
    require(f.mu_max_db >= f.mu_min_db, r.join("imprecision_db"), "interval inverted");
    require(f.sigma_aoa_rad > 0.0, r.join("sigma_aoa_rad"), "must be positive");
    require(f.rssi_likelihood == "imprecise" || f.rssi_likelihood == "precise",
            r.join("rssi_likelihood"), "must be 'imprecise' or 'precise'");
    require(f.pd_model == "ideal" || f.pd_model == "complex", r.join("pd_model"),
            "must be 'ideal' or 'complex'");
    require(f.forced_pd < 0.0 || (f.forced_pd > 0.0 && f.forced_pd <= 1.0), r.join("forced_pd"),
            "must be in (0,1] or null");
    require(f.forced_pd_false_rate >= 0.0 && f.forced_pd_false_rate <= 1.0,
            r.join("forced_pd_false_rate"), "must be in [0,1]");
}

void parse_section(const Reader& r, AoaConfig& a) {
    r.expect_object();
    r.get("grid_step_deg", a.grid_step_deg);
    r.get("min_detections", a.min_detections);
    r.get("decision_threshold_rad", a.decision_threshold_rad);
    r.finish();
    require(a.grid_step_deg > 0.0 && a.grid_step_deg <= 180.0, r.join("grid_step_deg"),
            "must be in (0,180]");
    require(a.min_detections >= 1, r.join("min_detections"), "must be at least 1");
    require(a.decision_threshold_rad > 0.0 && a.decision_threshold_rad <= kPi,
            r.join("decision_threshold_rad"), "must be in (0, pi]");
}

void parse_section(const Reader& r, PlannerSection& p) {
    r.expect_object();
    r.get("headings", p.headings);
    r.get("horizon_s", p.horizon_s);
    r.get("rotate_s", p.rotate_s);
    r.get("reward", p.reward);
    r.get("alpha", p.alpha);
    r.get("void_radius_m", p.void_radius_m);
    r.get("void_min_prob", p.void_min_prob);
    r.get("entropy_cell_m", p.entropy_cell_m);
    r.finish();
    require(p.headings >= 2, r.join("headings"), "must be at least 2");
    require(p.horizon_s > 0.0, r.join("horizon_s"), "must be positive");
    require(p.rotate_s >= 0.0 && p.rotate_s < p.horizon_s, r.join("rotate_s"),
            "must be in [0, horizon)");
    require(p.reward == "renyi" || p.reward == "shannon" || p.reward == "cs", r.join("reward"),
            "must be 'renyi', 'shannon' or 'cs'");
    require(p.alpha >= 0.0 && p.alpha != 1.0, r.join("alpha"), "must be >= 0 and != 1");
    require(p.void_radius_m > 0.0, r.join("void_radius_m"), "must be positive");
    require(p.void_min_prob >= 0.0 && p.void_min_prob <= 1.0, r.join("void_min_prob"),
            "must be in [0,1]");
    require(p.entropy_cell_m > 0.0, r.join("entropy_cell_m"), "must be positive");
}

void parse_section(const Reader& r, UavConfig& u) {
    r.expect_object();
    r.get("x", u.x);
    r.get("y", u.y);
    r.get("altitude_agl_m", u.altitude_agl_m);
    r.get("heading_rad", u.heading_rad);
    r.get("v_max", u.v_max);
    r.get("rotation_rate_rad_s", u.rotation_rate_rad_s);
    r.finish();
    require(u.altitude_agl_m > 0.0, r.join("altitude_agl_m"), "must be positive");
    require(u.v_max > 0.0, r.join("v_max"), "must be positive");
    require(u.rotation_rate_rad_s > 0.0, r.join("rotation_rate_rad_s"), "must be positive");
}

void parse_section(const Reader& r, MissionConfig& m) {
    r.expect_object();
    r.get("time_cap_s", m.time_cap_s);
    r.finish();
    require(m.time_cap_s > 0.0, r.join("time_cap_s"), "must be positive");
}

void parse_section(const Reader& r, TrialsConfig& t) {
    r.expect_object();
    r.get("count", t.count);
    r.get("base_seed", t.base_seed);
    r.finish();
    require(t.count >= 1, r.join("count"), "must be at least 1");
}

}  // namespace

ScenarioConfig parse_config(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError("<document>", e.what());
    }

    ScenarioConfig cfg;
    Reader root(doc, "");
    root.expect_object();

    if (root.has("method")) {
        root.mark("method");
        std::string m;
        try {
            m = doc.at("method").get<std::string>();
        } catch (const json::exception&) {
            throw ConfigError("method", "wrong type");
        }
        cfg.method = method_from_string(m);
    }
    auto section = [&](const char* key, auto& target) {
        if (!root.has(key)) return;
        root.mark(key);
        parse_section(root.child(key), target);
    };
    section("terrain", cfg.terrain);
    section("tags", cfg.tags);
    section("radio", cfg.radio);
    section("propagation", cfg.propagation);
    section("filter", cfg.filter);
    section("aoa", cfg.aoa);
    section("planner", cfg.planner);
    section("uav", cfg.uav);
    section("mission", cfg.mission);
    section("trials", cfg.trials);
    root.finish();

    if (cfg.terrain.relief_m < 0.0) cfg.terrain.relief_m = default_relief(cfg.terrain.kind);
    return cfg;
}

ScenarioConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string serialize_config(const ScenarioConfig& c) {
    json j;
    j["method"] = to_string(c.method);
    j["terrain"] = {{"source", c.terrain.source},
                    {"file", c.terrain.file},
                    {"kind", to_string(c.terrain.kind)},
                    {"extent_m", c.terrain.extent_m},
                    {"relief_m", c.terrain.relief_m},
                    {"seed", c.terrain.seed}};
    j["tags"] = {{"count", c.tags.count},
                 {"mobility", c.tags.wandering ? "wandering" : "static"},
                 {"height_above_ground_m", c.tags.height_above_ground_m}};
    j["radio"] = {{"source_dbm", c.radio.source_dbm},
                  {"ref_distance_m", c.radio.ref_distance_m},
                  {"path_loss_exponent", c.radio.path_loss_exponent},
                  {"noise_db", c.radio.noise_db},
                  {"sensitivity_dbm", c.radio.sensitivity_dbm},
                  {"freq_mhz", c.radio.freq_mhz}};
    j["propagation"] = {{"terrain_loss", c.propagation.terrain_loss},
                        {"vegetation_depth_m", c.propagation.vegetation_depth_m},
                        {"gain",
                         {{"source", c.propagation.gain_source},
                          {"file", c.propagation.gain_file},
                          {"peak_db", c.propagation.gain_peak_db},
                          {"front_to_back_db", c.propagation.gain_f2b_db}}}};
    j["filter"] = {{"particles", c.filter.particles},
                   {"birth_prob", c.filter.birth_prob},
                   {"survival_prob", c.filter.survival_prob},
                   {"initial_existence", c.filter.initial_existence},
                   {"det_threshold_m4", c.filter.det_threshold_m4},
                   {"clutter_rate", c.filter.clutter_rate},
                   {"rssi_clutter_range_dbm",
                    json::array({c.filter.rssi_clutter_min_dbm, c.filter.rssi_clutter_max_dbm})},
                   {"imprecision_db", json::array({c.filter.mu_min_db, c.filter.mu_max_db})},
                   {"sigma_aoa_rad", c.filter.sigma_aoa_rad},
                   {"rssi_likelihood", c.filter.rssi_likelihood},
                   {"pd_model", c.filter.pd_model},
                   {"forced_pd", c.filter.forced_pd < 0.0 ? json(nullptr) : json(c.filter.forced_pd)},
                   {"forced_pd_false_rate", c.filter.forced_pd_false_rate}};
    j["aoa"] = {{"grid_step_deg", c.aoa.grid_step_deg},
                {"min_detections", c.aoa.min_detections},
                {"decision_threshold_rad", c.aoa.decision_threshold_rad}};
    j["planner"] = {{"headings", c.planner.headings},
                    {"horizon_s", c.planner.horizon_s},
                    {"rotate_s", c.planner.rotate_s},
                    {"reward", c.planner.reward},
                    {"alpha", c.planner.alpha},
                    {"void_radius_m", c.planner.void_radius_m},
                    {"void_min_prob", c.planner.void_min_prob},
                    {"entropy_cell_m", c.planner.entropy_cell_m}};
    j["uav"] = {{"x", c.uav.x},
                {"y", c.uav.y},
                {"altitude_agl_m", c.uav.altitude_agl_m},
                {"heading_rad", c.uav.heading_rad},
                {"v_max", c.uav.v_max},
                {"rotation_rate_rad_s", c.uav.rotation_rate_rad_s}};
    j["mission"] = {{"time_cap_s", c.mission.time_cap_s}};
    j["trials"] = {{"count", c.trials.count}, {"base_seed", c.trials.base_seed}};
    return j.dump(2) + "\n";
}

std::string apply_overrides(const std::string& json_text,
                            const std::vector<std::string>& overrides) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError("<document>", e.what());
    }
    for (const std::string& ov : overrides) {
        const auto eq = ov.find('=');
        if (eq == std::string::npos || eq == 0)
            throw ConfigError(ov, "override must look like key.path=value");
        const std::string path = ov.substr(0, eq);
        const std::string value = ov.substr(eq + 1);

        json* node = &doc;
        std::size_t start = 0;
        while (true) {
            const auto dot = path.find('.', start);
            const std::string key = path.substr(start, dot - start);
            if (key.empty()) throw ConfigError(path, "empty key segment");
            if (dot == std::string::npos) {
                json parsed = json::parse(value, nullptr, false);
                (*node)[key] = parsed.is_discarded() ? json(value) : parsed;
                break;
            }
            node = &(*node)[key];
            if (!node->is_object()) *node = json::object();
            start = dot + 1;
        }
    }
    return doc.dump();
}

}  // namespace vhft
