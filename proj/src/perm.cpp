#include "msfem/perm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "msfem/error.hpp"

namespace msfem {

std::string to_string(PermSource source)
{
    switch (source) {
    case PermSource::periodic: return "periodic";
    case PermSource::synthetic: return "synthetic";
    case PermSource::file: return "file";
    case PermSource::custom: return "custom";
    }
    return "custom";
}

PermField::PermField(int n, std::vector<double> values, PermSource source)
    : n_(n), values_(std::move(values)), source_(source)
{
    if (n < 1 || values_.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(n))
        throw ConfigError("permeability needs n*n values for n=" + std::to_string(n) + ", got " +
                          std::to_string(values_.size()));
    for (std::size_t c = 0; c < values_.size(); ++c) {
        if (!(values_[c] > 0.0) || !std::isfinite(values_[c]))
            throw NumericError("permeability must be positive and finite; cell " +
                               std::to_string(c) + " holds " + std::to_string(values_[c]));
    }
}

PermField PermField::constant(int n, double value)
{
    return PermField(n, std::vector<double>(static_cast<std::size_t>(n) * n, value));
}

double PermField::min() const { return *std::min_element(values_.begin(), values_.end()); }
double PermField::max() const { return *std::max_element(values_.begin(), values_.end()); }

PermField PermField::scaled(std::span<const double> factor) const
{
    if (factor.size() != values_.size())
        throw ConfigError("mobility field size does not match the permeability");
    std::vector<double> out(values_.size());
    for (std::size_t c = 0; c < out.size(); ++c)
        out[c] = values_[c] * factor[c];
    return PermField(n_, std::move(out), source_);
}

PermField PermField::scaled(double factor) const
{
    std::vector<double> out(values_);
    for (double& v : out)
        v *= factor;
    return PermField(n_, std::move(out), source_);
}

double periodic_value(double x1, double x2, double epsilon)
{
    if (x1 < 0.1 || x1 > 0.9 || x2 < 0.1 || x2 > 0.9)
        return 1.0;
    constexpr double two_pi = 2.0 * std::numbers::pi;
    const double s1 = 2.0 + 1.8 * std::sin(two_pi * x1 / epsilon);
    const double s2 = 2.0 + 1.8 * std::sin(two_pi * x2 / epsilon);
    const double c2 = 2.0 + 1.8 * std::cos(two_pi * x2 / epsilon);
    const double gamma = s1 / s2 + s1 / c2;
    const double envelope = (0.4 - std::abs(x1 - 0.5)) * (0.4 - std::abs(x2 - 0.5));
    return 1.0 + gamma * envelope;
}

PermField periodic_field(int n, double epsilon)
{
    if (!(epsilon > 0.0))
        throw ConfigError("periodic permeability needs epsilon > 0");
    std::vector<double> values(static_cast<std::size_t>(n) * n);
    const double h = 1.0 / n;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            values[static_cast<std::size_t>(j * n + i)] =
                periodic_value((i + 0.5) * h, (j + 0.5) * h, epsilon);
    return PermField(n, std::move(values), PermSource::periodic);
}

namespace {

/// Uniform double in [0, 1) from the top 53 bits; std::uniform_real_distribution
/// is implementation-defined and would break cross-platform determinism.
class UnitStream {
public:
    explicit UnitStream(std::uint64_t seed) : engine_(seed) {}
    double next() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double next(double lo, double hi) { return lo + (hi - lo) * next(); }
    int next_int(int lo, int hi) { return lo + static_cast<int>(next() * (hi - lo + 1)); }

private:
    std::mt19937_64 engine_;
};

} // namespace

PermField synthetic_field(int n, std::uint64_t seed, double contrast)
{
    if (!(contrast >= 1.0) || !std::isfinite(contrast))
        throw ConfigError("synthetic permeability needs contrast >= 1");
    std::vector<double> values(static_cast<std::size_t>(n) * n, 1.0);
    if (contrast == 1.0)
        return PermField(n, std::move(values), PermSource::synthetic);

    UnitStream rng(seed);
    const double h = 1.0 / n;
    auto mark = [&](int i, int j) {
        if (i >= 0 && i < n && j >= 0 && j < n)
            values[static_cast<std::size_t>(j * n + i)] = contrast;
    };

    // Meandering channels, alternately along x and y.
    const int channels = rng.next_int(3, 5);
    for (int c = 0; c < channels; ++c) {
        const bool along_x = (c % 2 == 0);
        const double centre = rng.next(0.15, 0.85);
        const double amplitude = rng.next(0.02, 0.12);
        const double waves = rng.next(0.5, 2.5);
        const double phase = rng.next(0.0, 2.0 * std::numbers::pi);
        const double half_width = std::max(0.5 * h, rng.next(0.01, 0.025));
        for (int j = 0; j < n; ++j) {
            for (int i = 0; i < n; ++i) {
                const double x = (i + 0.5) * h;
                const double y = (j + 0.5) * h;
                const double s = along_x ? x : y;
                const double t = along_x ? y : x;
                const double path =
                    centre + amplitude * std::sin(2.0 * std::numbers::pi * waves * s + phase);
                if (std::abs(t - path) <= half_width)
                    mark(i, j);
            }
        }
    }

    // Small rectangular inclusions.
    const int inclusions = std::max(4, n * n / 120);
    const int max_size = std::max(1, n / 25);
    for (int k = 0; k < inclusions; ++k) {
        const int i0 = rng.next_int(0, n - 1);
        const int j0 = rng.next_int(0, n - 1);
        const int w = rng.next_int(1, max_size);
        const int ht = rng.next_int(1, max_size);
        for (int j = j0; j < j0 + ht; ++j)
            for (int i = i0; i < i0 + w; ++i)
                mark(i, j);
    }

    // Both extremes are part of the construction contract.
    if (std::none_of(values.begin(), values.end(), [&](double v) { return v == contrast; }))
        values[0] = contrast;
    if (std::none_of(values.begin(), values.end(), [](double v) { return v == 1.0; }))
        values.back() = 1.0;
    return PermField(n, std::move(values), PermSource::synthetic);
}

LayerData read_layer(const std::filesystem::path& path, int layer, int nx, int ny)
{
    if (layer < 0)
        throw ConfigError("layer index must be non-negative");
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open permeability file '" + path.string() + "'");

    const long long per_layer = static_cast<long long>(nx) * ny;
    const long long skip = per_layer * layer;
    LayerData out{nx, ny, {}};
    out.values.reserve(static_cast<std::size_t>(per_layer));

    long long offset = 0;
    std::string token;
    while (offset < skip + per_layer && in >> token) {
        if (offset >= skip) {
            double value = 0.0;
            std::istringstream parse(token);
            if (!(parse >> value) || !parse.eof())
                throw IoError("'" + path.string() + "': unreadable value '" + token +
                              "' at offset " + std::to_string(offset));
            if (!(value > 0.0) || !std::isfinite(value))
                throw IoError("'" + path.string() + "': non-positive permeability " + token +
                              " at offset " + std::to_string(offset));
            out.values.push_back(value);
        }
        ++offset;
    }
    if (offset < skip + per_layer)
        throw IoError("'" + path.string() + "': short read, expected " +
                      std::to_string(skip + per_layer) + " values, found " +
                      std::to_string(offset) + " (offset " + std::to_string(offset) + ")");
    return out;
}

LayerData resample(const LayerData& layer, int nx, int ny)
{
    LayerData out{nx, ny, std::vector<double>(static_cast<std::size_t>(nx) * ny)};
    for (int j = 0; j < ny; ++j) {
        const int sj = static_cast<int>((2LL * j + 1) * layer.ny / (2LL * ny));
        for (int i = 0; i < nx; ++i) {
            const int si = static_cast<int>((2LL * i + 1) * layer.nx / (2LL * nx));
            out.values[static_cast<std::size_t>(j * nx + i)] = layer.at(si, sj);
        }
    }
    return out;
}

PermField load_layer(const std::filesystem::path& path, int layer, int target_n, int nx, int ny)
{
    LayerData fine = resample(read_layer(path, layer, nx, ny), target_n, target_n);
    return PermField(target_n, std::move(fine.values), PermSource::file);
}

} // namespace msfem
