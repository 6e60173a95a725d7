#pragma once

// Comparison verdicts between solutions: Steiner concentration comparison,
// pointwise and gradient comparison of radial profiles, and the dual
// characterisation of concentration comparison through symmetric test
// functions.

#include "rearr/radial.hpp"
#include "rearr/rearrangement.hpp"
#include "rearr/report.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

namespace rearr {

namespace detail {

struct RowProfile {
    double y = 0.0;
    StepProfile profile;      // decreasing rearrangement of the row
    std::vector<double> raw;  // row values ordered by distance from x = 0
};

/// One entry per slice of the natural layout: rows keyed by 2y/h for a
/// Steiner split, a single key 0 otherwise.
inline std::map<long long, RowProfile> row_profiles(const GridFunction& f)
{
    const auto lay = natural_layout(f.grid_ptr());
    const auto profiles = slice_profiles(f, lay);
    std::map<long long, RowProfile> out;
    const double h = f.grid().h();
    for (std::size_t k = 0; k < lay.slices.size(); ++k) {
        const auto& s = lay.slices[k];
        RowProfile row;
        row.profile = profiles[k];
        if (lay.kind == Symmetrization::steiner && lay.slice_dim == 1) {
            row.y = f.grid().center(s.source.front()).y;
            auto ids = s.source;
            std::stable_sort(ids.begin(), ids.end(), [&](int a, int b) {
                return std::abs(f.grid().center(a).x) < std::abs(f.grid().center(b).x);
            });
            for (int id : ids) row.raw.push_back(f[id]);
            out[std::llround(2.0 * row.y / h)] = std::move(row);
        } else {
            out[0] = std::move(row);
        }
    }
    return out;
}

inline bool steiner_split(const MaskedGrid& g) { return g.split() && g.split()->m > 0; }

/// Concentration extended past the end of the profile by its total mass.
inline double concentration_ext(const StepProfile& p, double s)
{
    return p.concentration(std::min(s, p.total()));
}

/// Measure samples of a row: (2k - 1) h for rows of a Steiner split (balls
/// of radius (k - 1/2) h), every cell count for a Schwarz slice, and the
/// full measure.
inline std::vector<double> measure_samples(double cell, double total, bool rows)
{
    std::vector<double> s;
    if (rows) {
        for (int k = 1; (2 * k - 1) * cell < total * (1.0 - 1e-12); ++k) s.push_back((2 * k - 1) * cell);
    } else {
        for (int k = 1; k * cell < total * (1.0 - 1e-12); ++k) s.push_back(k * cell);
    }
    s.push_back(total);
    return s;
}

inline std::string fmt_param(const char* a, double x, const char* b, double y)
{
    return std::string(a) + "=" + format_real(x) + ";" + b + "=" + format_real(y);
}

} // namespace detail

/// Row-wise concentration comparison of u^# against v^#. Margins are per
/// unit row measure, so the tolerance is c2 h.
inline ComparisonReport steiner_concentration_compare(const GridFunction& u, const GridFunction& v, double c2 = 8.0)
{
    const auto& gu = u.grid();
    const auto& gv = v.grid();
    if (!detail::steiner_split(gu) || !detail::steiner_split(gv) || *gu.split() != *gv.split() ||
        gu.h() != gv.h())
        throw Error("incompatible symmetrization axes");
    const double h = gu.h();
    const auto ru = detail::row_profiles(u), rv = detail::row_profiles(v);
    ComparisonReport rep;
    rep.kind = ComparisonKind::steiner_concentration;
    double worst_plain = std::numeric_limits<double>::infinity();
    for (const auto& [key, row] : ru) {
        auto it = rv.find(key);
        const double meas = row.profile.total();
        const double total = std::max(meas, it == rv.end() ? 0.0 : it->second.profile.total());
        for (double s : detail::measure_samples(h, total, true)) {
            const double a = detail::concentration_ext(row.profile, s);
            const double b = it == rv.end() ? 0.0 : detail::concentration_ext(it->second.profile, s);
            const std::string param = detail::fmt_param("y", row.y, "r", 0.5 * s);
            rep.add(param, a / meas, b / meas);
            rep.samples.back().lhs = a, rep.samples.back().rhs = b;
            if (it != rv.end()) {
                // v itself over the centred run of the same cell count
                const auto& raw = it->second.raw;
                const auto cells = static_cast<std::size_t>(std::llround(s / h));
                double plain = 0.0;
                for (std::size_t k = 0; k < std::min(cells, raw.size()); ++k) plain += raw[k];
                worst_plain = std::min(worst_plain, (plain * h - a) / meas);
            }
        }
    }
    rep.finish(c2 * h);
    rep.note = "margins per unit row measure; v without rearrangement: worst margin " + format_real(worst_plain);
    return rep;
}

/// u* <= v + tol at every radius node of v.
inline ComparisonReport pointwise_compare(const RadialProfile& ustar, const RadialProfile& v, double tol)
{
    if (ustar.n != v.n || std::abs(ustar.radius - v.radius) > 1e-9 * v.radius) throw Error("incompatible profile");
    ComparisonReport rep;
    rep.kind = ComparisonKind::pointwise;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double r = v.r(i);
        rep.add("r=" + format_real(r), ustar.at(r), v.values[i]);
    }
    rep.finish(tol);
    return rep;
}

/// |u*'| <= |v'| + tol node-wise. u*' is a symmetric difference quotient
/// over [r - window, r + window]; |v'| is the exact flux slope. The
/// outermost node is exempt: there u* jumps to zero at the quantised
/// boundary.
inline ComparisonReport gradient_compare(const RadialProfile& ustar, const RadialSolution& v, double window,
                                         double tol)
{
    if (ustar.n != v.n || std::abs(ustar.radius - v.v.radius) > 1e-9 * v.v.radius)
        throw Error("incompatible profile");
    ComparisonReport rep;
    rep.kind = ComparisonKind::gradient;
    const double R = ustar.radius;
    for (std::size_t i = 0; i + 1 < v.slope.size(); ++i) {
        const double r = v.slope.r(i);
        const double a = std::max(0.0, r - window), b = std::min(R, r + window);
        const double du = std::abs(ustar.at(b) - ustar.at(a)) / (b - a);
        rep.add("r=" + format_real(r), du, v.slope.values[i]);
    }
    rep.finish(tol);
    rep.note = "outermost node exempt";
    return rep;
}

struct DualCheck {
    ComparisonReport tests;  // integral u^# h <= integral v^# h for seeded h = h^#
    ComparisonReport direct; // concentration comparison at every sample
    bool agree() const { return tests.pass == direct.pass; }
};

/// Test functions are positive combinations of one to three indicators of
/// centred balls in single slices; their integrals against u^# reduce to
/// slice concentrations. The leading indicator of test t is drawn from the
/// t-th of h_count equal strata of the sample list with weight 1; the others
/// are drawn anywhere with weights in (0, 1/2]. Test margins are divided by
/// sum c_j, so each is a weighted mean of direct margins (per unit length in
/// y for rows).
inline DualCheck dual_test_function_check(const GridFunction& u, const GridFunction& v, int h_count,
                                          std::uint64_t seed, double tol)
{
    const bool rows = detail::steiner_split(u.grid());
    if (rows != detail::steiner_split(v.grid()) || u.grid().h() != v.grid().h() ||
        u.grid().dim() != v.grid().dim())
        throw Error("incompatible symmetrization axes");
    const double h = u.grid().h();
    const double cell = rows ? h : u.grid().cell_volume();
    const auto ru = detail::row_profiles(u), rv = detail::row_profiles(v);

    struct Sample {
        std::string param;
        double a, b;
    };
    std::vector<Sample> samples;
    std::vector<long long> keys;
    for (const auto& kv : ru) keys.push_back(kv.first);
    for (const auto& kv : rv)
        if (!ru.count(kv.first)) keys.push_back(kv.first);
    std::sort(keys.begin(), keys.end());
    for (long long key : keys) {
        auto iu = ru.find(key), iv = rv.find(key);
        const double total = std::max(iu == ru.end() ? 0.0 : iu->second.profile.total(),
                                      iv == rv.end() ? 0.0 : iv->second.profile.total());
        for (double s : detail::measure_samples(cell, total, rows)) {
            const double a = iu == ru.end() ? 0.0 : detail::concentration_ext(iu->second.profile, s);
            const double b = iv == rv.end() ? 0.0 : detail::concentration_ext(iv->second.profile, s);
            samples.push_back({detail::fmt_param("row", 0.5 * static_cast<double>(key) * h, "s", s),
                               a, b});
        }
    }

    DualCheck out;
    out.direct.kind = out.tests.kind = ComparisonKind::dual;
    for (const auto& s : samples) out.direct.add(s.param, s.a, s.b);
    out.direct.finish(tol);

    Rng rng(seed);
    for (int t = 0; t < h_count && !samples.empty(); ++t) {
        const int terms = 1 + static_cast<int>(rng.index(3));
        const double n = static_cast<double>(samples.size());
        const auto lead = static_cast<std::size_t>(std::floor((t + rng.uniform()) / h_count * n));
        const auto& s0 = samples[std::min(lead, samples.size() - 1)];
        double a = s0.a, b = s0.b, mass = 1.0;
        for (int j = 1; j < terms; ++j) {
            const auto& s = samples[rng.index(samples.size())];
            const double c = 0.5 * (1.0 - rng.uniform()); // (0, 1/2]
            a += c * s.a, b += c * s.b, mass += c;
        }
        out.tests.add("test=" + std::to_string(t), a / mass, b / mass);
    }
    out.tests.finish(tol);
    out.tests.note = out.agree() ? "verdicts agree" : "verdicts disagree";
    return out;
}

} // namespace rearr
