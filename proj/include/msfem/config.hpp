#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "msfem/spectral.hpp"

namespace msfem {

/// Permeability choice: "synthetic", "periodic", "file" or "constant".
struct PermConfig {
    std::string kind = "synthetic";
    double contrast = 1e4;
    double epsilon = 0.1;
    double value = 1.0;
    std::string path;
    int layer = 0;
};

struct TransportConfig {
    double cfl = 0.5;
    /// Times at n = 200; scaled by (n/200)^2 when scale_times is set so that
    /// a coarser desk run injects the same pore-volume fraction.
    std::vector<double> output_times{1000.0, 3000.0, 5000.0};
    bool scale_times = true;
    int pressure_cadence = 1;
    long max_steps = 0;
    std::vector<int> dofs{1, 3, 5};
    /// Transport needs a fine-conservative velocity; without it a point
    /// source spreads over its whole coarse block.
    bool postprocess = true;
};

struct OversampleConfig {
    int layers = 0;  ///< 0: ratio/2
    int case2_modes = 3;
    std::vector<int> dofs{1, 2, 3};
};

struct RunConfig {
    int n = 40;
    int N = 4;
    std::uint64_t seed = 7;
    PermConfig perm;
    /// "corner": +1/-1 on the top-left/bottom-right fine cells;
    /// "corner_blocks": the same on the corner coarse blocks;
    /// "blocks": seeded constant per coarse block, zero mean
    std::string source = "corner";
    SpectralKind spectral = SpectralKind::spectral1;
    std::vector<int> dofs{1, 2, 3, 4};
    double multiplicity_tolerance = default_multiplicity_tolerance;
    bool postprocess = true;
    bool force_all = false;
    OversampleConfig oversample;
    TransportConfig transport;
    int threads = 0;  ///< 0: all available
    bool write_fields = true;

    /// Scaled transport output times for this grid.
    std::vector<double> output_times() const;
};

/// Parses and validates; every invalid field is listed in one ConfigError.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::filesystem::path& path);

/// Canonical JSON of a config (parse_config(to_json(c)) == c).
std::string to_json(const RunConfig& config);

/// 64-bit FNV-1a, printed as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);

} // namespace msfem
