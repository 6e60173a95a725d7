#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rearr {

/// Every recoverable failure in the library is reported through this type.
/// The message is the stable, user-facing diagnostic.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Measure of the unit ball in R^n (n = 1, 2, 3).
inline double unit_ball_volume(int n)
{
    switch (n) {
    case 1: return 2.0;
    case 2: return std::numbers::pi;
    case 3: return 4.0 * std::numbers::pi / 3.0;
    default: throw Error("unsupported dimension");
    }
}

/// Surface measure of the unit sphere S^{n-1}.
inline double unit_sphere_area(int n) { return n * unit_ball_volume(n); }

/// Sum of a multiset of terms that depends only on the multiset: the terms
/// are sorted before accumulation, so any permutation of the same values
/// produces a bitwise identical result.
inline double canonical_sum(std::vector<double> terms)
{
    std::sort(terms.begin(), terms.end());
    double acc = 0.0;
    for (double t : terms) acc += t;
    return acc;
}

inline double max_abs(std::span<const double> xs)
{
    double m = 0.0;
    for (double x : xs) m = std::max(m, std::abs(x));
    return m;
}

/// Seeded generator with a platform-independent uniform draw. The standard
/// distributions are implementation-defined, which would break report
/// reproducibility across toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer on [0, n).
    std::size_t index(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)); }

    std::uint64_t next() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

} // namespace rearr
