#pragma once

// Deterministic test functions and the text specs that name shapes,
// functions and W profiles in suite configs and on the command line.

#include "rearr/grid.hpp"
#include "rearr/rearrangement.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

namespace rearr {

namespace detail {

inline std::vector<std::string> tokens(const std::string& s)
{
    std::istringstream is(s);
    std::vector<std::string> out;
    for (std::string t; is >> t;) out.push_back(t);
    return out;
}

inline double number(const std::string& t, const char* what)
{
    try {
        std::size_t used = 0;
        const double v = std::stod(t, &used);
        if (used != t.size() || !std::isfinite(v)) throw std::invalid_argument(t);
        return v;
    } catch (const std::exception&) {
        throw Error(std::string(what) + ": bad number '" + t + "'");
    }
}

inline std::vector<double> numbers(const std::vector<std::string>& t, std::size_t from, const char* what)
{
    std::vector<double> v;
    for (std::size_t k = from; k < t.size(); ++k) v.push_back(number(t[k], what));
    return v;
}

} // namespace detail

/// A shape together with the grid dimension it implies.
struct ShapeSpec {
    Shape shape;
    int dim = 2;
};

/// interval a b | square | rectangle x0 y0 x1 y1 | disk [cx cy] r |
/// annulus cx cy r0 r1 | lshape [x0 y0 x1 y1] |
/// tilted-rectangle cx cy hw hh degrees | polygon x1 y1 x2 y2 ...
inline ShapeSpec parse_shape(const std::string& text)
{
    const auto t = detail::tokens(text);
    if (t.empty()) throw Error("bad shape spec: empty");
    const auto v = detail::numbers(t, 1, "shape");
    const std::string& k = t[0];
    auto need = [&](std::size_t n) {
        if (v.size() != n) throw Error("bad shape spec: '" + text + "'");
    };
    if (k == "interval") {
        need(2);
        return {Rectangle{{v[0], 0.0}, {v[1], 0.0}}, 1};
    }
    if (k == "square") {
        need(0);
        return {Rectangle{{0.0, 0.0}, {1.0, 1.0}}, 2};
    }
    if (k == "rectangle") {
        need(4);
        return {Rectangle{{v[0], v[1]}, {v[2], v[3]}}, 2};
    }
    if (k == "disk") {
        if (v.size() == 1) return {Disk{{0.0, 0.0}, v[0]}, 2};
        need(3);
        return {Disk{{v[0], v[1]}, v[2]}, 2};
    }
    if (k == "annulus") {
        need(4);
        return {Annulus{{v[0], v[1]}, v[2], v[3]}, 2};
    }
    if (k == "lshape") {
        if (v.empty()) return {LShape{}, 2};
        need(4);
        return {LShape{{v[0], v[1]}, {v[2], v[3]}}, 2};
    }
    if (k == "tilted-rectangle") {
        need(5);
        return {tilted_rectangle({v[0], v[1]}, v[2], v[3], v[4] * std::numbers::pi / 180.0), 2};
    }
    if (k == "polygon") {
        if (v.size() < 6 || v.size() % 2) throw Error("bad shape spec: '" + text + "'");
        Polygon p;
        for (std::size_t i = 0; i < v.size(); i += 2) p.vertices.push_back({v[i], v[i + 1]});
        return {p, 2};
    }
    throw Error("bad shape spec: '" + text + "'");
}

/// "none", "1 1" or "2 0".
inline std::optional<Split> parse_split(const std::string& text)
{
    const auto t = detail::tokens(text);
    if (t.empty() || (t.size() == 1 && t[0] == "none")) return std::nullopt;
    if (t.size() != 2) throw Error("bad split spec: '" + text + "'");
    return Split{static_cast<int>(detail::number(t[0], "split")), static_cast<int>(detail::number(t[1], "split"))};
}

inline GridPtr grid_for(const ShapeSpec& s, double h, std::optional<Split> split = std::nullopt)
{
    return make_masked_grid(bounding_box(s.shape, s.dim, h), h, s.shape, split);
}

// ---- functions ------------------------------------------------------------

namespace detail {

inline Point grid_box_center(const MaskedGrid& g)
{
    const double cx = g.origin()[0] + 0.5 * g.extents()[0] * g.h();
    const double cy = g.dim() == 2 ? g.origin()[1] + 0.5 * g.extents()[1] * g.h() : 0.0;
    return {cx, cy};
}

inline double dist(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// Distance from each active centre to the nearest centre of an inactive
/// cell or of a cell just outside the extents.
inline std::vector<double> distance_to_outside(const MaskedGrid& g)
{
    std::vector<Point> outside;
    const auto ext = g.extents();
    const int jlo = g.dim() == 2 ? -1 : 0, jhi = g.dim() == 2 ? ext[1] : 0;
    for (int j = jlo; j <= jhi; ++j)
        for (int i = -1; i <= ext[0]; ++i)
            if (g.active_id(i, j) < 0) {
                // only cells touching the active set matter
                bool near = false;
                for (int dj = (g.dim() == 2 ? -1 : 0); dj <= (g.dim() == 2 ? 1 : 0) && !near; ++dj)
                    for (int di = -1; di <= 1 && !near; ++di) near = g.active_id(i + di, j + dj) >= 0;
                if (near) outside.push_back(g.cell_center(i, j));
            }
    std::vector<double> d(g.active_count(), std::numeric_limits<double>::infinity());
    for (std::size_t a = 0; a < d.size(); ++a) {
        const Point c = g.center(static_cast<int>(a));
        for (const auto& o : outside) d[a] = std::min(d[a], dist(c, o));
    }
    return d;
}

struct Tent {
    Point center;
    double radius;
    double slope;
};

/// k tents centred at random active cells; each radius is clipped so the
/// tent vanishes at the nearest cell outside the domain.
inline std::vector<Tent> random_tents(const MaskedGrid& g, Rng& rng, int k, double total_slope)
{
    const auto dout = distance_to_outside(g);
    const double diam = g.h() * std::max(g.extents()[0], g.extents()[1]);
    std::vector<Tent> tents;
    for (int i = 0; i < k; ++i) {
        const int a = static_cast<int>(rng.index(g.active_count()));
        const double r = std::min(rng.uniform(0.15, 0.5) * diam, dout[a]);
        const double slope = total_slope > 0.0 ? total_slope / k * rng.uniform(0.5, 1.0) : rng.uniform(0.5, 1.0) / r;
        tents.push_back({g.center(a), r, slope});
    }
    return tents;
}

inline GridFunction sum_of_tents(const GridPtr& g, const std::vector<Tent>& tents)
{
    return GridFunction::sample(g, [&](Point p) {
        double s = 0.0;
        for (const auto& t : tents) s += t.slope * std::max(0.0, t.radius - dist(p, t.center));
        return s;
    });
}

} // namespace detail

/// cone [cx cy] [R] | plane a b c | tent-sum k | bump [cx cy rho] |
/// indicator <shape> | constant c | random | random-lipschitz L [k]
inline GridFunction gen_fixture(const std::string& spec, const GridPtr& grid, std::uint64_t seed)
{
    const auto t = detail::tokens(spec);
    if (t.empty()) throw Error("bad function spec");
    const std::string& k = t[0];
    const auto& g = *grid;
    const Point mid = detail::grid_box_center(g);
    auto nums = [&](std::size_t from) {
        try {
            return detail::numbers(t, from, "function");
        } catch (const Error&) {
            throw Error("bad function spec");
        }
    };
    Rng rng(seed);

    if (k == "cone") {
        const auto v = nums(1);
        Point c = mid;
        double R = 1.0;
        if (v.size() == 1) R = v[0];
        else if (v.size() >= 2) c = {v[0], v[1]}, R = v.size() == 3 ? v[2] : 1.0;
        if (v.size() > 3 || !(R > 0.0)) throw Error("bad function spec");
        return GridFunction::sample(grid, [&](Point p) { return std::max(0.0, 1.0 - detail::dist(p, c) / R); });
    }
    if (k == "plane") {
        const auto v = nums(1);
        if (v.size() != 3) throw Error("bad function spec");
        return GridFunction::sample(grid, [&](Point p) { return std::max(0.0, v[0] * p.x + v[1] * p.y + v[2]); });
    }
    if (k == "tent-sum") {
        const auto v = nums(1);
        if (v.size() != 1 || v[0] < 1) throw Error("bad function spec");
        return detail::sum_of_tents(grid, detail::random_tents(g, rng, static_cast<int>(v[0]), 0.0));
    }
    if (k == "random-lipschitz") {
        const auto v = nums(1);
        if (v.empty() || v.size() > 2 || !(v[0] > 0.0)) throw Error("bad function spec");
        const int count = v.size() == 2 ? static_cast<int>(v[1]) : 4;
        if (count < 1) throw Error("bad function spec");
        return detail::sum_of_tents(grid, detail::random_tents(g, rng, count, v[0]));
    }
    if (k == "bump") {
        const auto v = nums(1);
        Point c = mid;
        double rho = 0.4 * g.h() * std::min(g.extents()[0], g.dim() == 2 ? g.extents()[1] : g.extents()[0]);
        if (v.size() == 3) c = {v[0], v[1]}, rho = v[2];
        else if (!v.empty()) throw Error("bad function spec");
        return GridFunction::sample(grid, [&](Point p) {
            const double q = detail::dist(p, c) / rho;
            return q < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - q * q)) : 0.0;
        });
    }
    if (k == "indicator") {
        const auto shape = parse_shape(spec.substr(spec.find("indicator") + 9));
        return GridFunction::sample(grid,
                                    [&](Point p) { return shape_contains(shape.shape, p, g.dim()) ? 1.0 : 0.0; });
    }
    if (k == "constant") {
        const auto v = nums(1);
        if (v.size() != 1 || v[0] < 0.0) throw Error("bad function spec");
        return GridFunction::sample(grid, [&](Point) { return v[0]; });
    }
    if (k == "random") {
        if (t.size() != 1) throw Error("bad function spec");
        std::vector<double> vals(g.active_count());
        for (double& x : vals) x = rng.uniform();
        return GridFunction(grid, std::move(vals));
    }
    throw Error("bad function spec");
}

/// Nondecreasing maps g with g(0) = 0; W = g(u*) then satisfies the
/// regularity condition against u*.
/// ustar | square | min c | scale a | power q
inline std::function<double(double)> parse_w_map(const std::string& spec)
{
    const auto t = detail::tokens(spec);
    if (t.empty()) throw Error("bad W spec");
    const auto v = detail::numbers(t, 1, "W");
    if (t[0] == "ustar" && v.empty()) return [](double x) { return x; };
    if (t[0] == "square" && v.empty()) return [](double x) { return x * x; };
    if (t[0] == "min" && v.size() == 1 && v[0] >= 0.0) return [c = v[0]](double x) { return std::min(x, c); };
    if (t[0] == "scale" && v.size() == 1 && v[0] >= 0.0) return [a = v[0]](double x) { return a * x; };
    if (t[0] == "power" && v.size() == 1 && v[0] > 0.0) return [q = v[0]](double x) { return std::pow(x, q); };
    throw Error("bad W spec");
}

inline StepProfile w_profile(const std::string& spec, const StepProfile& ustar)
{
    return ustar.map(parse_w_map(spec));
}

} // namespace rearr
