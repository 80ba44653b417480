#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace msfem {

enum class PermSource { periodic, synthetic, file, custom };

std::string to_string(PermSource source);

/// Cell-wise permeability on an n x n fine grid, piecewise constant per cell.
/// Values are validated strictly positive and finite on construction.
class PermField {
public:
    PermField(int n, std::vector<double> values, PermSource source = PermSource::custom);

    static PermField constant(int n, double value);

    int n() const { return n_; }
    PermSource source() const { return source_; }
    const std::vector<double>& values() const { return values_; }
    double operator[](int cell) const { return values_[static_cast<std::size_t>(cell)]; }
    double inverse(int cell) const { return 1.0 / values_[static_cast<std::size_t>(cell)]; }

    double min() const;
    double max() const;

    /// Cell-wise product with a positive multiplier (mobility scaling).
    PermField scaled(std::span<const double> factor) const;
    PermField scaled(double factor) const;

private:
    int n_;
    std::vector<double> values_;
    PermSource source_;
};

/// Closed form of the periodic coefficient at a point.
double periodic_value(double x1, double x2, double epsilon);

/// Periodic coefficient sampled at fine-cell centres.
PermField periodic_field(int n, double epsilon = 0.1);

/// Seeded high-contrast field: background 1 with meandering channels and
/// small inclusions of value `contrast`. Deterministic across platforms for a
/// fixed seed (the generator is mt19937_64 with a fixed bits-to-double map).
PermField synthetic_field(int n, std::uint64_t seed, double contrast);

/// One horizontal layer of a layered permeability file.
struct LayerData {
    int nx = 0;
    int ny = 0;
    std::vector<double> values;  ///< row-major, x fastest

    double at(int i, int j) const { return values[static_cast<std::size_t>(j * nx + i)]; }
};

inline constexpr int spe10_nx = 220;
inline constexpr int spe10_ny = 60;

/// Reads layer `layer` (0-based) from a whitespace-separated text file whose
/// layers each hold nx*ny values, x fastest.
LayerData read_layer(const std::filesystem::path& path, int layer, int nx = spe10_nx,
                     int ny = spe10_ny);

/// Nearest-neighbour resampling in each axis.
LayerData resample(const LayerData& layer, int nx, int ny);

/// read_layer followed by resampling onto a target_n x target_n fine grid.
PermField load_layer(const std::filesystem::path& path, int layer, int target_n,
                     int nx = spe10_nx, int ny = spe10_ny);

} // namespace msfem
