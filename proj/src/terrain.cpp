#include "vhftrack/terrain.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "vhftrack/rng.hpp"

namespace vhft {

namespace {

std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

// Locale-independent double parse of a whole token.
bool parse_double(const std::string& tok, double& out) {
    const char* first = tok.data();
    const char* last = tok.data() + tok.size();
    auto res = std::from_chars(first, last, out);
    return res.ec == std::errc() && res.ptr == last;
}

}  // namespace

TerrainGrid::TerrainGrid(std::size_t n_cols, std::size_t n_rows, double cell_size, double x_origin,
                         double y_origin, std::vector<double> elevations, double nodata)
    : n_cols_(n_cols),
      n_rows_(n_rows),
      cell_size_(cell_size),
      x_origin_(x_origin),
      y_origin_(y_origin),
      nodata_(nodata),
      cells_(std::move(elevations)) {
    if (n_cols_ < 2 || n_rows_ < 2) throw std::invalid_argument("grid needs at least 2x2 cells");
    if (!(cell_size_ > 0.0)) throw std::invalid_argument("cell size must be positive");
    if (cells_.size() != n_cols_ * n_rows_) throw std::invalid_argument("cell count mismatch");
    for (double v : cells_) {
        if (v != nodata_ && !std::isfinite(v))
            throw std::invalid_argument("non-finite elevation value");
    }
}

bool TerrainGrid::is_nodata(std::size_t col, std::size_t row) const {
    return value(col, row) == nodata_;
}

bool TerrainGrid::contains(double x, double y) const {
    return x >= min_x() && x <= max_x() && y >= min_y() && y <= max_y();
}

double TerrainGrid::elevation_at(double x, double y) const {
    if (!contains(x, y)) throw std::domain_error("point outside terrain extent");
    // continuous cell-center coordinates
    const double gx = (x - x_origin_) / cell_size_ - 0.5;
    const double gy = (y - y_origin_) / cell_size_ - 0.5;
    const double max_col = static_cast<double>(n_cols_ - 1);
    const double max_row = static_cast<double>(n_rows_ - 1);
    const double cx = std::clamp(gx, 0.0, max_col);
    const double cy = std::clamp(gy, 0.0, max_row);
    const std::size_t c0 = static_cast<std::size_t>(std::min(cx, max_col - 1.0));
    const std::size_t r0 = static_cast<std::size_t>(std::min(cy, max_row - 1.0));
    const std::size_t c1 = c0 + 1;
    const std::size_t r1 = r0 + 1;
    const double tx = cx - static_cast<double>(c0);
    const double ty = cy - static_cast<double>(r0);

    const double v00 = value(c0, r0);
    const double v10 = value(c1, r0);
    const double v01 = value(c0, r1);
    const double v11 = value(c1, r1);
    if (v00 == nodata_ || v10 == nodata_ || v01 == nodata_ || v11 == nodata_)
        throw std::domain_error("nodata cell in interpolation neighborhood");

    const double a = v00 + (v10 - v00) * tx;
    const double b = v01 + (v11 - v01) * tx;
    return a + (b - a) * ty;
}

double TerrainGrid::min_elevation() const {
    double m = std::numeric_limits<double>::infinity();
    for (double v : cells_)
        if (v != nodata_) m = std::min(m, v);
    return m;
}

double TerrainGrid::max_elevation() const {
    double m = -std::numeric_limits<double>::infinity();
    for (double v : cells_)
        if (v != nodata_) m = std::max(m, v);
    return m;
}

TerrainGrid load_dem(std::istream& in) {
    std::size_t n_cols = 0, n_rows = 0;
    double cell = 0.0, xll = 0.0, yll = 0.0, nodata = -9999.0;
    bool have_cols = false, have_rows = false, have_cell = false, have_x = false, have_y = false;

    int line_no = 0;
    std::string line;
    // header: key/value pairs until the first line starting with a number
    std::streampos data_start = in.tellg();
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::string key;
        if (!(ls >> key)) {  // blank line
            data_start = in.tellg();
            continue;
        }
        if (!key.empty() && (std::isdigit(static_cast<unsigned char>(key[0])) || key[0] == '-' ||
                             key[0] == '+' || key[0] == '.')) {
            break;  // start of the data block; reparse this line below
        }
        std::string val_tok;
        if (!(ls >> val_tok)) throw DemParseError(line_no, "header key '" + key + "' has no value");
        double val = 0.0;
        if (!parse_double(val_tok, val))
            throw DemParseError(line_no, "non-numeric header value '" + val_tok + "'");
        const std::string k = lower(key);
        if (k == "ncols") {
            n_cols = static_cast<std::size_t>(val);
            have_cols = true;
        } else if (k == "nrows") {
            n_rows = static_cast<std::size_t>(val);
            have_rows = true;
        } else if (k == "xllcorner") {
            xll = val;
            have_x = true;
        } else if (k == "yllcorner") {
            yll = val;
            have_y = true;
        } else if (k == "cellsize") {
            cell = val;
            have_cell = true;
        } else if (k == "nodata_value") {
            nodata = val;
        } else {
            throw DemParseError(line_no, "unknown header key '" + key + "'");
        }
        data_start = in.tellg();
    }
    if (!have_cols || !have_rows || !have_cell || !have_x || !have_y)
        throw DemParseError(line_no, "incomplete header (need ncols, nrows, xllcorner, yllcorner, cellsize)");
    if (n_cols < 2 || n_rows < 2) throw DemParseError(line_no, "grid must be at least 2x2");
    if (!(cell > 0.0)) throw DemParseError(line_no, "cellsize must be positive");

    // rewind to the first data line and read nrows rows, north row first
    in.clear();
    in.seekg(data_start);
    line_no -= 1;
    std::vector<double> cells(n_cols * n_rows, nodata);
    for (std::size_t file_row = 0; file_row < n_rows; ++file_row) {
        if (!std::getline(in, line))
            throw DemParseError(line_no + 1, "unexpected end of data: expected " +
                                                 std::to_string(n_rows) + " rows, got " +
                                                 std::to_string(file_row));
        ++line_no;
        std::istringstream ls(line);
        const std::size_t grid_row = n_rows - 1 - file_row;  // store south row first
        std::string tok;
        std::size_t col = 0;
        while (ls >> tok) {
            if (col >= n_cols)
                throw DemParseError(line_no, "row has more than " + std::to_string(n_cols) + " values");
            double v = 0.0;
            if (!parse_double(tok, v))
                throw DemParseError(line_no, "non-numeric cell value '" + tok + "'");
            cells[grid_row * n_cols + col] = v;
            ++col;
        }
        if (col != n_cols)
            throw DemParseError(line_no, "row has " + std::to_string(col) + " values, expected " +
                                             std::to_string(n_cols));
    }

    try {
        return TerrainGrid(n_cols, n_rows, cell, xll, yll, std::move(cells), nodata);
    } catch (const std::invalid_argument& e) {
        throw DemParseError(line_no, e.what());
    }
}

TerrainGrid load_dem_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open DEM file: " + path);
    return load_dem(in);
}

void write_dem(const TerrainGrid& grid, std::ostream& out) {
    char buf[64];
    auto fmt = [&buf](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    out << "ncols " << grid.cols() << "\n";
    out << "nrows " << grid.rows() << "\n";
    out << "xllcorner " << fmt(grid.x_origin()) << "\n";
    out << "yllcorner " << fmt(grid.y_origin()) << "\n";
    out << "cellsize " << fmt(grid.cell_size()) << "\n";
    out << "NODATA_value " << fmt(grid.nodata()) << "\n";
    for (std::size_t file_row = 0; file_row < grid.rows(); ++file_row) {
        const std::size_t grid_row = grid.rows() - 1 - file_row;
        for (std::size_t c = 0; c < grid.cols(); ++c) {
            if (c) out << ' ';
            out << fmt(grid.value(c, grid_row));
        }
        out << "\n";
    }
}

double default_relief(TerrainKind kind) {
    switch (kind) {
        case TerrainKind::flat: return 6.0;
        case TerrainKind::hilly: return 37.0;
        case TerrainKind::mountain: return 109.0;
    }
    return 6.0;
}

TerrainGrid generate_synthetic_terrain(TerrainKind kind, double extent_m, double relief_m,
                                       std::uint64_t seed) {
    if (!(extent_m > 0.0)) throw std::invalid_argument("extent must be positive");
    if (relief_m < 0.0) throw std::invalid_argument("relief must be non-negative");

    const std::size_t n = 256;  // cells per side
    const double cell = extent_m / static_cast<double>(n);
    Rng rng(seed ^ (static_cast<std::uint64_t>(kind) + 1) * 0x51ed2701ULL);

    struct Ridge {
        double px, py;     // a point on the ridge line
        double nx, ny;     // unit normal
        double sigma;      // cross-section width
        double amp;
    };
    struct Bump {
        double cx, cy, sigma, amp;
    };

    std::vector<Ridge> ridges;
    std::vector<Bump> bumps;
    if (kind == TerrainKind::flat) {
        // a few broad, weak undulations
        for (int i = 0; i < 8; ++i) {
            bumps.push_back({rng.uniform(0.0, extent_m), rng.uniform(0.0, extent_m),
                             extent_m * rng.uniform(0.15, 0.35), rng.uniform(0.3, 1.0)});
        }
    } else {
        const int n_ridges = kind == TerrainKind::hilly ? 6 : 7;
        for (int i = 0; i < n_ridges; ++i) {
            const double ang = rng.uniform(0.0, kTwoPi);
            ridges.push_back({rng.uniform(0.0, extent_m), rng.uniform(0.0, extent_m),
                              std::cos(ang), std::sin(ang),
                              extent_m * rng.uniform(0.09, kind == TerrainKind::hilly ? 0.2 : 0.24),
                              rng.uniform(0.4, 1.0)});
        }
        for (int i = 0; i < 5; ++i) {
            bumps.push_back({rng.uniform(0.0, extent_m), rng.uniform(0.0, extent_m),
                             extent_m * rng.uniform(0.1, 0.22), rng.uniform(0.2, 0.6)});
        }
    }

    std::vector<double> cells(n * n, 0.0);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    // broad foothill under the launch corner: a fixed-altitude flight from
    // (0,0) then overlooks the field, and only the tallest ridges shadow it
    const double corner_amp = kind == TerrainKind::flat ? 0.0 : 1.2;
    const double corner_sigma = 0.9 * extent_m;
    for (std::size_t r = 0; r < n; ++r) {
        const double y = (static_cast<double>(r) + 0.5) * cell;
        for (std::size_t c = 0; c < n; ++c) {
            const double x = (static_cast<double>(c) + 0.5) * cell;
            double v = corner_amp * std::exp(-0.5 * (x * x + y * y) /
                                             (corner_sigma * corner_sigma));
            for (const Ridge& rd : ridges) {
                const double d = (x - rd.px) * rd.nx + (y - rd.py) * rd.ny;
                v += rd.amp * std::exp(-0.5 * d * d / (rd.sigma * rd.sigma));
            }
            for (const Bump& b : bumps) {
                const double dx = x - b.cx;
                const double dy = y - b.cy;
                v += b.amp * std::exp(-0.5 * (dx * dx + dy * dy) / (b.sigma * b.sigma));
            }
            cells[r * n + c] = v;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }

    // base elevations roughly matching the three reference sites
    double base = 233.0;
    if (kind == TerrainKind::hilly) base = 40.0;
    if (kind == TerrainKind::mountain) base = 595.0;

    const double span = hi - lo;
    for (double& v : cells) {
        v = span > 0.0 ? base + (v - lo) / span * relief_m : base;
    }
    return TerrainGrid(n, n, cell, 0.0, 0.0, std::move(cells));
}

LosProfile los_profile(const TerrainGrid& grid, const Vec3& tx, const Vec3& rx,
                       std::size_t n_samples) {
    if (n_samples < 3) throw std::invalid_argument("los_profile needs at least 3 samples");
    if (!grid.contains(tx.x, tx.y) || !grid.contains(rx.x, rx.y))
        throw std::domain_error("profile endpoint outside terrain extent");

    LosProfile p;
    p.total_distance_m = distance(tx, rx);
    p.samples.reserve(n_samples);
    for (std::size_t i = 0; i < n_samples; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(n_samples - 1);
        const Vec3 pos = tx + (rx - tx) * t;
        ProfileSample s;
        s.distance_m = t * p.total_distance_m;
        s.terrain_m = grid.elevation_at(pos.x, pos.y);
        s.path_m = pos.z;
        p.samples.push_back(s);
    }
    return p;
}

double fresnel_radius(double d1_km, double d2_km, double d_km, double f_ghz) {
    if (d1_km <= 0.0 || d2_km <= 0.0 || d_km <= 0.0 || f_ghz <= 0.0) return 0.0;
    return 17.3 * std::sqrt(d1_km * d2_km / (f_ghz * d_km));
}

double terrain_diffraction_loss(const LosProfile& profile, double f_ghz) {
    const std::size_t n = profile.samples.size();
    const double d_km = profile.total_distance_m / 1000.0;
    if (n < 3 || !(d_km > 0.0) || !(f_ghz > 0.0)) return 0.0;

    // Blockage candidates are interior samples where the ground reaches the
    // path. A merely thin clearance (common right next to a low transmitter)
    // is not an obstruction; without this gate every ground-level tag would
    // carry a spurious near-field penalty.
    const double mid = profile.total_distance_m / 2.0;
    bool found = false;
    double best_ratio = 0.0, best_penetration = 0.0, best_f1 = 0.0, best_mid_dist = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const ProfileSample& s = profile.samples[i];
        const double pen = s.terrain_m - s.path_m;  // >= 0 when the ground cuts the line
        if (pen < 0.0) continue;
        const double d1 = s.distance_m / 1000.0;
        const double d2 = d_km - d1;
        const double f1 = fresnel_radius(d1, d2, d_km, f_ghz);
        if (!(f1 > 0.0)) continue;
        const double ratio = pen / f1;
        const double mid_dist = std::abs(s.distance_m - mid);
        if (!found || ratio > best_ratio || (ratio == best_ratio && mid_dist < best_mid_dist)) {
            found = true;
            best_ratio = ratio;
            best_penetration = pen;
            best_f1 = f1;
            best_mid_dist = mid_dist;
        }
    }
    if (!found) return 0.0;
    return std::max(0.0, 20.0 * best_penetration / best_f1 + 10.0);
}

double vegetation_loss(double f_mhz, double depth_m, double elevation_deg) {
    if (depth_m <= 0.0) return 0.0;
    if (f_mhz <= 0.0 || elevation_deg < 0.0)
        throw std::invalid_argument("vegetation_loss: bad arguments");
    return 0.25 * std::pow(f_mhz, 0.39) * std::pow(depth_m, 0.25) * std::pow(elevation_deg, 0.05);
}

}  // namespace vhft
