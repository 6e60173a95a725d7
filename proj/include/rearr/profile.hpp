#pragma once

// One-dimensional profiles: nonincreasing step functions on a measure axis
// and sampled radial functions.

#include "rearr/grid.hpp"
#include "rearr/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace rearr {

/// Nonincreasing piecewise-constant function on [0, total]. Step k covers
/// [s_{k-1}, s_k) and carries v_k. Profiles built from grid data have a
/// uniform step width (the cell measure); integrals of such profiles are
/// computed as canonical sums so they match the grid-side sums bit for bit.
class StepProfile {
public:
    StepProfile() = default;

    StepProfile(std::vector<double> breakpoints, std::vector<double> values)
        : breaks_(std::move(breakpoints)), values_(std::move(values))
    {
        validate();
        build_prefix();
    }

    /// Steps of equal width; breakpoint k is k * width.
    static StepProfile uniform(std::vector<double> values, double width)
    {
        if (!(width > 0.0)) throw Error("step width must be positive");
        std::vector<double> b(values.size() + 1);
        for (std::size_t k = 0; k < b.size(); ++k) b[k] = static_cast<double>(k) * width;
        StepProfile p(std::move(b), std::move(values));
        p.width_ = width;
        return p;
    }

    std::size_t size() const { return values_.size(); }
    double total() const { return breaks_.back(); }
    const std::vector<double>& values() const { return values_; }
    const std::vector<double>& breakpoints() const { return breaks_; }
    std::optional<double> uniform_width() const { return width_; }
    double max() const { return values_.front(); }

    /// Index of the step containing s (right-continuous convention).
    std::size_t step_index(double s) const
    {
        if (s <= 0.0) return 0;
        auto it = std::upper_bound(breaks_.begin(), breaks_.end(), s);
        const auto k = static_cast<std::size_t>(it - breaks_.begin());
        return std::min(k == 0 ? 0 : k - 1, values_.size() - 1);
    }

    /// Profile value; the last value is kept at s = total, zero beyond it.
    double operator()(double s) const
    {
        if (s > total() * (1.0 + 1e-12)) return 0.0;
        return values_[step_index(s)];
    }

    /// Measure of {profile > t}.
    double distribution(double t) const
    {
        // values are nonincreasing: count the leading steps above t
        auto it = std::partition_point(values_.begin(), values_.end(), [t](double v) { return v > t; });
        return breaks_[static_cast<std::size_t>(it - values_.begin())];
    }

    /// Exact integral of the profile over [0, s].
    double concentration(double s) const
    {
        const double tot = total();
        if (s < -1e-12 * tot || s > tot * (1.0 + 1e-12)) throw Error("measure out of range");
        s = std::clamp(s, 0.0, tot);
        if (s == 0.0) return 0.0;
        if (s == tot) return prefix_.back();
        const std::size_t k = step_index(s);
        return prefix_[k] + values_[k] * (s - breaks_[k]);
    }

    /// Integral of profile^p over [0, total].
    double integral_of_power(double p) const
    {
        std::vector<double> terms(values_.size());
        for (std::size_t k = 0; k < values_.size(); ++k) {
            const double v = p == 1.0 ? values_[k] : p == 2.0 ? values_[k] * values_[k] : std::pow(values_[k], p);
            terms[k] = width_ ? v : v * (breaks_[k + 1] - breaks_[k]);
        }
        const double s = canonical_sum(std::move(terms));
        return width_ ? s * *width_ : s;
    }

    /// Symmetric difference quotient over [s - window, s + window] clipped to
    /// the profile's support.
    double slope(double s, double window) const
    {
        const double a = std::max(0.0, s - window);
        const double b = std::min(total(), s + window);
        if (!(b > a)) return 0.0;
        return ((*this)(b) - (*this)(a)) / (b - a);
    }

    /// Merges consecutive steps with equal values.
    StepProfile merged() const
    {
        std::vector<double> b{0.0}, v;
        for (std::size_t k = 0; k < values_.size(); ++k) {
            if (!v.empty() && v.back() == values_[k]) b.back() = breaks_[k + 1];
            else v.push_back(values_[k]), b.push_back(breaks_[k + 1]);
        }
        return StepProfile(std::move(b), std::move(v));
    }

    /// Applies g to every value. g must be nondecreasing and nonnegative on
    /// the value range so the result is again a valid profile.
    template <class G>
    StepProfile map(G&& g) const
    {
        std::vector<double> v(values_.size());
        for (std::size_t k = 0; k < v.size(); ++k) v[k] = g(values_[k]);
        StepProfile p(breaks_, std::move(v));
        p.width_ = width_;
        return p;
    }

private:
    void validate() const
    {
        if (values_.empty() || breaks_.size() != values_.size() + 1) throw Error("malformed step profile");
        if (breaks_.front() != 0.0) throw Error("step profile must start at 0");
        for (std::size_t k = 1; k < breaks_.size(); ++k)
            if (!(breaks_[k] > breaks_[k - 1])) throw Error("breakpoints must increase strictly");
        for (std::size_t k = 0; k < values_.size(); ++k) {
            if (!std::isfinite(values_[k]) || values_[k] < 0.0) throw Error("profile values must be nonnegative");
            if (k > 0 && values_[k] > values_[k - 1]) throw Error("profile values must be nonincreasing");
        }
    }
    void build_prefix()
    {
        prefix_.assign(values_.size() + 1, 0.0);
        for (std::size_t k = 0; k < values_.size(); ++k)
            prefix_[k + 1] = prefix_[k] + values_[k] * (breaks_[k + 1] - breaks_[k]);
    }

    std::vector<double> breaks_{0.0, 1.0};
    std::vector<double> values_{0.0};
    std::vector<double> prefix_{0.0, 0.0};
    std::optional<double> width_;
};

/// Values at equally spaced radii r_i = i R / (M - 1) on [0, R].
struct RadialProfile {
    int n = 2;
    double radius = 1.0;
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
    double step() const { return radius / static_cast<double>(values.size() - 1); }
    double r(std::size_t i) const { return static_cast<double>(i) * step(); }

    /// Linear interpolation, clamped to [0, R].
    double at(double rr) const
    {
        rr = std::clamp(rr, 0.0, radius);
        const double x = rr / step();
        const auto i = std::min(static_cast<std::size_t>(x), values.size() - 2);
        const double t = x - static_cast<double>(i);
        return (1.0 - t) * values[i] + t * values[i + 1];
    }
};

/// Radius of the n-ball with the given measure.
inline double ball_radius(double measure, int n) { return std::pow(measure / unit_ball_volume(n), 1.0 / n); }

/// Samples r -> p(omega_n r^n) on `nodes` equally spaced radii.
inline RadialProfile radial_profile(const StepProfile& p, int n, std::size_t nodes = 1024)
{
    if (nodes < 2) throw Error("radial profile needs at least two nodes");
    RadialProfile out{n, ball_radius(p.total(), n), std::vector<double>(nodes)};
    const double w = unit_ball_volume(n);
    for (std::size_t i = 0; i < nodes; ++i) {
        const double s = i + 1 == nodes ? p.total() : w * std::pow(out.r(i), n);
        out.values[i] = p(s);
    }
    return out;
}

// ---- CSV ------------------------------------------------------------------

/// Rows (s_k, v_k): right breakpoint of each step and its value.
inline void write_step_profile(std::ostream& os, const StepProfile& p)
{
    os << "s,value\n";
    for (std::size_t k = 0; k < p.size(); ++k)
        os << format_real(p.breakpoints()[k + 1]) << ',' << format_real(p.values()[k]) << '\n';
}

inline StepProfile read_step_profile(std::istream& is)
{
    std::string line;
    std::getline(is, line);
    std::vector<double> b{0.0}, v;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw Error("bad profile row");
        b.push_back(std::stod(line.substr(0, comma)));
        v.push_back(std::stod(line.substr(comma + 1)));
    }
    return StepProfile(std::move(b), std::move(v));
}

inline void write_radial_profile(std::ostream& os, const RadialProfile& p)
{
    os << "r,value\n";
    for (std::size_t i = 0; i < p.size(); ++i) os << format_real(p.r(i)) << ',' << format_real(p.values[i]) << '\n';
}

} // namespace rearr
