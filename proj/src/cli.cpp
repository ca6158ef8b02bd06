#include "vhftrack/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "vhftrack/scenario.hpp"

namespace vhft {

namespace {

using ojson = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

ScenarioConfig prepare_config(const RunOptions& opts,
                              const std::vector<std::string>& extra_overrides = {}) {
    std::string text = read_file(opts.config_path);
    std::vector<std::string> all = opts.overrides;
    all.insert(all.end(), extra_overrides.begin(), extra_overrides.end());
    text = apply_overrides(text, all);
    ScenarioConfig cfg = parse_config(text);
    if (opts.trials > 0) cfg.trials.count = opts.trials;
    if (opts.seed >= 0) cfg.trials.base_seed = static_cast<std::uint64_t>(opts.seed);
    return cfg;
}

struct CellResult {
    std::vector<std::pair<std::string, std::string>> axes;  // key, value (printed form)
    ScenarioConfig cfg;
    std::vector<MissionResult> missions;
    McStats stats;
};

void write_results_csv(std::ostream& out, const std::vector<CellResult>& cells) {
    out << "trial,seed,method,terrain,reward";
    if (!cells.empty())
        for (const auto& ax : cells.front().axes) out << ',' << ax.first;
    out << ",tag_id,localized,loc_time_s,error_m,det_m4,mission_time_s,timed_out\n";
    for (const CellResult& cell : cells) {
        const std::string terrain_name = cell.cfg.terrain.source == "file"
                                             ? cell.cfg.terrain.file
                                             : to_string(cell.cfg.terrain.kind);
        for (std::size_t trial = 0; trial < cell.missions.size(); ++trial) {
            const MissionResult& m = cell.missions[trial];
            for (const TagOutcome& tag : m.tags) {
                out << trial << ',' << m.seed << ',' << to_string(cell.cfg.method) << ','
                    << terrain_name << ',' << cell.cfg.planner.reward;
                for (const auto& ax : cell.axes) out << ',' << ax.second;
                out << ',' << tag.tag_id << ',' << (tag.localized ? 1 : 0) << ','
                    << fmt(tag.time_s) << ',' << fmt(tag.error_m) << ',' << fmt(tag.det_m4) << ','
                    << fmt(m.total_time_s) << ',' << (m.timed_out ? 1 : 0) << '\n';
            }
        }
    }
}

ojson stats_json(const McStats& s) {
    return ojson{{"missions", s.missions},
                 {"timeouts", s.timeouts},
                 {"tags_total", s.tags_total},
                 {"tags_localized", s.tags_localized},
                 {"time_mean_s", s.mean_time},
                 {"time_median_s", s.median_time},
                 {"time_std_s", s.std_time},
                 {"error_mean_m", s.mean_error},
                 {"error_median_m", s.median_error}};
}

void print_summary_line(std::ostream& log, const CellResult& cell) {
    log << "method=" << to_string(cell.cfg.method)
        << " terrain=" << (cell.cfg.terrain.source == "file" ? cell.cfg.terrain.file
                                                             : to_string(cell.cfg.terrain.kind))
        << " reward=" << cell.cfg.planner.reward << " trials=" << cell.stats.missions;
    for (const auto& ax : cell.axes) log << ' ' << ax.first << '=' << ax.second;
    log << " mean_time_s=" << fmt(cell.stats.mean_time)
        << " mean_error_m=" << fmt(cell.stats.mean_error)
        << " localized=" << cell.stats.tags_localized << '/' << cell.stats.tags_total
        << " timeouts=" << cell.stats.timeouts << '\n';
}

int run_cells(std::vector<CellResult>& cells, const RunOptions& opts, std::ostream& log) {
    fs::create_directories(opts.out_dir);
    for (CellResult& cell : cells) {
        const TerrainGrid terrain = build_terrain(cell.cfg);
        const GainPattern gain = build_gain(cell.cfg);
        cell.missions = run_monte_carlo(cell.cfg, terrain, gain, opts.jobs,
                                        opts.write_traces ? opts.out_dir : "");
        cell.stats = summarize(cell.missions);
        print_summary_line(log, cell);
    }

    std::ofstream csv(opts.out_dir + "/results.csv", std::ios::binary);
    write_results_csv(csv, cells);

    ojson summary = ojson::array();
    for (const CellResult& cell : cells) {
        ojson entry{{"method", to_string(cell.cfg.method)},
                    {"terrain", cell.cfg.terrain.source == "file"
                                    ? cell.cfg.terrain.file
                                    : to_string(cell.cfg.terrain.kind)},
                    {"reward", cell.cfg.planner.reward},
                    {"base_seed", cell.cfg.trials.base_seed}};
        for (const auto& ax : cell.axes) entry[ax.first] = ax.second;
        entry["stats"] = stats_json(cell.stats);
        summary.push_back(entry);
    }
    std::ofstream js(opts.out_dir + "/summary.json", std::ios::binary);
    js << summary.dump(2) << '\n';
    return 0;
}

}  // namespace

int cmd_run(const RunOptions& opts, std::ostream& log, std::ostream& err) {
    try {
        std::vector<CellResult> cells(1);
        cells[0].cfg = prepare_config(opts);
        return run_cells(cells, opts, log);
    } catch (const std::exception& e) {
        err << "run: " << e.what() << '\n';
        return 1;
    }
}

int cmd_sweep(const SweepOptions& opts, std::ostream& log, std::ostream& err) {
    try {
        if (opts.axes.empty()) throw std::runtime_error("sweep needs at least one --axis");
        struct Axis {
            std::string key;
            std::vector<std::string> values;
        };
        std::vector<Axis> axes;
        for (const std::string& spec : opts.axes) {
            const auto eq = spec.find('=');
            if (eq == std::string::npos || eq == 0)
                throw std::runtime_error("axis must look like key.path=v1,v2,...");
            Axis ax;
            ax.key = spec.substr(0, eq);
            std::istringstream vs(spec.substr(eq + 1));
            std::string v;
            while (std::getline(vs, v, ',')) ax.values.push_back(v);
            if (ax.values.empty()) throw std::runtime_error("axis '" + ax.key + "' has no values");
            axes.push_back(std::move(ax));
        }

        std::vector<CellResult> cells;
        std::vector<std::size_t> pick(axes.size(), 0);
        while (true) {
            CellResult cell;
            std::vector<std::string> cell_overrides;
            for (std::size_t a = 0; a < axes.size(); ++a) {
                cell.axes.emplace_back(axes[a].key, axes[a].values[pick[a]]);
                cell_overrides.push_back(axes[a].key + "=" + axes[a].values[pick[a]]);
            }
            cell.cfg = prepare_config(opts.base, cell_overrides);
            cells.push_back(std::move(cell));

            // odometer, last axis fastest
            std::size_t a = axes.size();
            while (a > 0 && ++pick[a - 1] == axes[a - 1].values.size()) {
                pick[a - 1] = 0;
                --a;
            }
            if (a == 0) break;
        }
        return run_cells(cells, opts.base, log);
    } catch (const std::exception& e) {
        err << "sweep: " << e.what() << '\n';
        return 1;
    }
}

int cmd_validate(const std::string& config_path, const std::vector<std::string>& overrides,
                 std::ostream& out, std::ostream& err) {
    try {
        std::string text = read_file(config_path);
        text = apply_overrides(text, overrides);
        const ScenarioConfig cfg = parse_config(text);
        out << serialize_config(cfg);
        return 0;
    } catch (const std::exception& e) {
        err << "validate-config: " << e.what() << '\n';
        return 1;
    }
}

int cmd_detector_study(const DetectorStudyOptions& opts, std::ostream& log, std::ostream& err) {
    try {
        fs::create_directories(opts.out_dir);
        const GainPattern pattern = GainPattern::synthetic_two_lobe();

        if (!opts.log_csv.empty()) {
            std::ifstream in(opts.log_csv);
            if (!in) throw std::runtime_error("cannot open: " + opts.log_csv);
            const auto logs = load_rotation_logs_csv(in);
            std::ofstream csv(opts.out_dir + "/detector_study.csv", std::ios::binary);
            csv << "tag_id,detections,corr_deg,cross_deg,compensated_deg\n";
            for (const RotationLog& l : logs) {
                const auto corr = corr_coef_aoa(l, pattern);
                const auto cross = cross_corr_aoa(l, pattern);
                if (!corr || !cross) continue;
                const double comp = compensated_aoa(*corr, *cross, kPi / 2.0);
                csv << l.tag_id << ',' << l.samples.size() << ','
                    << fmt(wrap_two_pi(-*corr) * 180.0 / kPi) << ','
                    << fmt(wrap_two_pi(-*cross) * 180.0 / kPi) << ','
                    << fmt(wrap_two_pi(-comp) * 180.0 / kPi) << '\n';
            }
            log << "analyzed " << logs.size() << " rotation logs from " << opts.log_csv << '\n';
            return 0;
        }

        const auto records = detector_study(opts.rotations, opts.detection_rate, pattern,
                                            opts.sigma_db, opts.seed, opts.pulses);
        std::ofstream csv(opts.out_dir + "/detector_study.csv", std::ios::binary);
        csv << "rotation,truth_deg,corr_err_deg,cross_err_deg,comp_err_deg,detections,expected\n";
        std::vector<double> comp_abs;
        int corr_gross = 0, comp_gross = 0;
        for (std::size_t i = 0; i < records.size(); ++i) {
            const DetectorStudyRecord& r = records[i];
            csv << i << ',' << fmt(r.truth_rad * 180.0 / kPi) << ','
                << fmt(r.corr_error * 180.0 / kPi) << ',' << fmt(r.cross_error * 180.0 / kPi)
                << ',' << fmt(r.compensated_error * 180.0 / kPi) << ',' << r.detections << ','
                << r.expected << '\n';
            comp_abs.push_back(std::abs(r.compensated_error) * 180.0 / kPi);
            if (std::abs(r.corr_error) > kPi / 2.0) ++corr_gross;
            if (std::abs(r.compensated_error) > kPi / 2.0) ++comp_gross;
        }
        std::sort(comp_abs.begin(), comp_abs.end());
        const double median = comp_abs.empty() ? 0.0
                              : comp_abs.size() % 2
                                  ? comp_abs[comp_abs.size() / 2]
                                  : 0.5 * (comp_abs[comp_abs.size() / 2 - 1] +
                                           comp_abs[comp_abs.size() / 2]);
        log << "rotations=" << records.size() << " rate=" << fmt(opts.detection_rate)
            << " corr_gross_pct=" << fmt(100.0 * corr_gross / std::max<std::size_t>(1, records.size()))
            << " comp_gross_pct=" << fmt(100.0 * comp_gross / std::max<std::size_t>(1, records.size()))
            << " comp_median_deg=" << fmt(median) << '\n';
        return 0;
    } catch (const std::exception& e) {
        err << "detector-study: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace vhft
