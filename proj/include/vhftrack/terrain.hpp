#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "vhftrack/geom.hpp"

namespace vhft {

/// Parse failure for DEM input, carrying the 1-based line it occurred on.
class DemParseError : public std::runtime_error {
public:
    DemParseError(int line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
    int line() const { return line_; }

private:
    int line_ = 0;
};

/// Raster elevation field over a planar local frame.
///
/// Rows are stored south-to-north (row 0 is the southernmost), regardless of
/// the on-disk order. Cell (c, r) is centered at
/// (x_origin + (c + 0.5) * cell, y_origin + (r + 0.5) * cell).
/// Immutable after construction and safe to share across threads.
class TerrainGrid {
public:
    TerrainGrid(std::size_t n_cols, std::size_t n_rows, double cell_size, double x_origin,
                double y_origin, std::vector<double> elevations, double nodata = -9999.0);

    std::size_t cols() const { return n_cols_; }
    std::size_t rows() const { return n_rows_; }
    double cell_size() const { return cell_size_; }
    double x_origin() const { return x_origin_; }
    double y_origin() const { return y_origin_; }
    double nodata() const { return nodata_; }

    double value(std::size_t col, std::size_t row) const { return cells_[row * n_cols_ + col]; }
    bool is_nodata(std::size_t col, std::size_t row) const;
    const std::vector<double>& cells() const { return cells_; }

    double min_x() const { return x_origin_; }
    double min_y() const { return y_origin_; }
    double max_x() const { return x_origin_ + cell_size_ * static_cast<double>(n_cols_); }
    double max_y() const { return y_origin_ + cell_size_ * static_cast<double>(n_rows_); }
    bool contains(double x, double y) const;

    /// Bilinear interpolation of the four surrounding cell centers; exact at
    /// centers, clamped to edge cells near the boundary. Throws
    /// std::domain_error outside the extent or over nodata cells.
    double elevation_at(double x, double y) const;

    double min_elevation() const;
    double max_elevation() const;

private:
    std::size_t n_cols_;
    std::size_t n_rows_;
    double cell_size_;
    double x_origin_;
    double y_origin_;
    double nodata_;
    std::vector<double> cells_;
};

/// Read an ESRI ASCII grid (ncols/nrows/xllcorner/yllcorner/cellsize/NODATA_value
/// header, case-insensitive, followed by row-major values north row first).
/// Locale independent. Throws DemParseError on malformed input.
TerrainGrid load_dem(std::istream& in);
TerrainGrid load_dem_file(const std::string& path);

/// Inverse of load_dem; numeric values round-trip bit-identically.
void write_dem(const TerrainGrid& grid, std::ostream& out);

enum class TerrainKind { flat, hilly, mountain };

/// Deterministic synthetic terrain covering [0, extent] x [0, extent].
/// flat: low-amplitude smooth noise; hilly/mountain: sums of smooth seeded
/// ridges. The field is rescaled so max - min equals relief exactly.
TerrainGrid generate_synthetic_terrain(TerrainKind kind, double extent_m, double relief_m,
                                       std::uint64_t seed);

/// Default relief per terrain class, in meters.
double default_relief(TerrainKind kind);

struct VegetationSpec {
    double depth_m = 0.0;  // canopy depth the signal traverses
    bool enabled = false;
};

struct ProfileSample {
    double distance_m = 0.0;   // along-path distance from transmitter
    double terrain_m = 0.0;    // ground elevation below the path point
    double path_m = 0.0;       // elevation of the straight tx->rx line
};

/// Terrain profile under the straight 3-D transmitter->receiver segment.
struct LosProfile {
    std::vector<ProfileSample> samples;
    double total_distance_m = 0.0;
};

/// Sample the straight 3-D line from tx to rx uniformly (n_samples >= 3,
/// endpoints included).
LosProfile los_profile(const TerrainGrid& grid, const Vec3& tx, const Vec3& rx,
                       std::size_t n_samples = 256);

/// First Fresnel zone radius in meters; d1, d2, d in kilometers, f in GHz.
double fresnel_radius(double d1_km, double d2_km, double d_km, double f_ghz);

/// Single-obstruction diffraction loss in dB, never negative.
///
/// The dominant blockage is the interior sample with the ground at or above
/// the path that maximizes penetration normalized by the local Fresnel radius
/// (ties break toward the path midpoint). Loss is 20 * penetration / F1 + 10:
/// 10 dB at grazing, growing with penetration; paths the ground never touches
/// lose nothing.
double terrain_diffraction_loss(const LosProfile& profile, double f_ghz);

/// ITU woodland vegetation loss in dB: 0.25 * f^0.39 * depth^0.25 * phi^0.05
/// with f in MHz and phi the elevation angle in degrees. Zero when depth is 0.
double vegetation_loss(double f_mhz, double depth_m, double elevation_deg);

}  // namespace vhft
