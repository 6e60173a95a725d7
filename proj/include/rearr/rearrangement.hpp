#pragma once

// Distribution functions, decreasing rearrangements, Schwarz and Steiner
// symmetrisation on grids, and extremal pairs for the Hardy-Littlewood
// inequality.
//
// Symmetrisation works slice by slice. A slice is the set of cells over
// which one rearrangement acts: all active cells for Schwarz, one row per y
// for Steiner with split (1, 1). Each source slice is matched with the same
// number of target cells on a grid centred at x = 0, listed by increasing
// distance from the centre (ties by lexicographic index). Sorted values are
// written to the target cells in that order, so every slice keeps its
// multiset of values exactly.

#include "rearr/grid.hpp"
#include "rearr/profile.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

namespace rearr {

/// mu_u(t) = measure of {u > t}.
inline double distribution_function(const GridFunction& u, double t)
{
    if (t < 0.0) throw Error("negative threshold");
    std::size_t count = 0;
    for (double v : u.values()) count += v > t ? 1 : 0;
    return static_cast<double>(count) * u.grid().cell_volume();
}

namespace detail {

inline std::vector<double> sorted_desc(std::vector<double> v)
{
    std::sort(v.begin(), v.end(), std::greater<>());
    return v;
}

/// Ids ordered by value descending, ties by id ascending.
inline std::vector<int> rank_order(const GridFunction& u, std::vector<int> ids)
{
    std::stable_sort(ids.begin(), ids.end(), [&](int a, int b) { return u[a] > u[b]; });
    return ids;
}

inline std::vector<int> iota_ids(std::size_t n)
{
    std::vector<int> ids(n);
    std::iota(ids.begin(), ids.end(), 0);
    return ids;
}

} // namespace detail

/// u*: active-cell values sorted into nonincreasing order, one step of width
/// h^dim per cell.
inline StepProfile decreasing_rearrangement(const GridFunction& u)
{
    u.require_nonnegative();
    return StepProfile::uniform(detail::sorted_desc(u.values()), u.grid().cell_volume());
}

inline double concentration(const StepProfile& p, double s) { return p.concentration(s); }

// ---- layouts --------------------------------------------------------------

enum class Symmetrization { schwarz, steiner };

/// Centre convention for a symmetric target grid: `even` puts cell centres
/// at half-integer multiples of h, `odd` puts one centre at the origin.
enum class Parity { even, odd };

struct Slice {
    std::vector<int> source; // active ids on the source grid, lexicographic
    std::vector<int> target; // active ids on the target grid, rank order
};

struct SymmetrizedLayout {
    Symmetrization kind = Symmetrization::schwarz;
    GridPtr source;
    GridPtr target;
    std::vector<Slice> slices;
    int slice_dim = 1;        // dimension of one slice (n)
    double slice_cell = 1.0;  // h^n, the measure one cell carries inside its slice
};

namespace detail {

struct Candidate {
    std::int64_t key;
    std::int64_t linear;
};

inline GridPtr target_grid_from(int dim, double h, std::array<double, 2> origin, std::array<int, 2> ext,
                                const std::vector<std::int64_t>& chosen, std::optional<Split> split)
{
    std::vector<std::uint8_t> mask(static_cast<std::size_t>(ext[0]) * ext[1], 0);
    for (auto c : chosen) mask[static_cast<std::size_t>(c)] = 1;
    return std::make_shared<const MaskedGrid>(dim, h, origin, ext, std::move(mask), split);
}

} // namespace detail

/// Layout for Schwarz symmetrisation: one slice holding every active cell,
/// mapped onto the cells of a centred ball-shaped mask of equal cell count.
inline SymmetrizedLayout schwarz_layout(const GridPtr& grid, Parity parity = Parity::even)
{
    const int d = grid->dim();
    const double h = grid->h();
    const std::size_t K = grid->active_count();
    const double R = ball_radius(static_cast<double>(K) * grid->cell_volume(), d);
    const int half = static_cast<int>(std::ceil(R / h)) + 2;
    const int N = parity == Parity::even ? 2 * half : 2 * half + 1;
    const double org = parity == Parity::even ? -half * h : -(half + 0.5) * h;
    const std::array<int, 2> ext{N, d == 2 ? N : 1};
    const std::array<double, 2> origin{org, d == 2 ? org : 0.0};

    // squared distance to the origin in units of (h/2)^2, exact in integers
    auto coord = [&](int k) -> std::int64_t {
        return parity == Parity::even ? 2 * k + 1 - N : 2 * (k - half);
    };
    std::vector<detail::Candidate> cand;
    cand.reserve(static_cast<std::size_t>(ext[0]) * ext[1]);
    for (int j = 0; j < ext[1]; ++j)
        for (int i = 0; i < ext[0]; ++i) {
            const std::int64_t cx = coord(i), cy = d == 2 ? coord(j) : 0;
            cand.push_back({cx * cx + cy * cy, static_cast<std::int64_t>(i) + static_cast<std::int64_t>(N) * j});
        }
    std::sort(cand.begin(), cand.end(),
              [](const auto& a, const auto& b) { return a.key != b.key ? a.key < b.key : a.linear < b.linear; });
    std::vector<std::int64_t> chosen(K);
    for (std::size_t r = 0; r < K; ++r) chosen[r] = cand[r].linear;

    std::optional<Split> split;
    if (grid->split() && grid->split()->m == 0) split = grid->split();
    auto target = detail::target_grid_from(d, h, origin, ext, chosen, split);

    SymmetrizedLayout lay;
    lay.kind = Symmetrization::schwarz;
    lay.source = grid;
    lay.target = target;
    lay.slice_dim = d;
    lay.slice_cell = grid->cell_volume();
    Slice s;
    s.source = detail::iota_ids(K);
    s.target.resize(K);
    for (std::size_t r = 0; r < K; ++r) {
        const int i = static_cast<int>(chosen[r] % N), j = static_cast<int>(chosen[r] / N);
        s.target[r] = target->active_id(i, j);
    }
    lay.slices.push_back(std::move(s));
    return lay;
}

/// Layout for Steiner symmetrisation in codimension n. With split (1, 1)
/// each row y is rearranged along x onto a centred run of cells; with m = 0
/// the symmetrisation is the Schwarz one.
inline SymmetrizedLayout steiner_layout(const GridPtr& grid)
{
    if (!grid->split()) throw Error("no codimension split");
    const Split sp = *grid->split();
    if (sp.m == 0) {
        auto lay = schwarz_layout(grid, Parity::even);
        lay.kind = Symmetrization::steiner;
        return lay;
    }
    const double h = grid->h();
    const auto ext = grid->extents();
    std::vector<std::vector<int>> rows(ext[1]);
    for (int a = 0; a < static_cast<int>(grid->active_count()); ++a) rows[grid->cell_of(a)[1]].push_back(a);
    std::size_t kmax = 0;
    for (const auto& r : rows) kmax = std::max(kmax, r.size());
    const int half = static_cast<int>((kmax + 1) / 2) + 1;
    const int N = 2 * half;
    const std::array<int, 2> text{N, ext[1]};
    const std::array<double, 2> origin{-half * h, grid->origin()[1]};

    std::vector<int> order(N);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return std::abs(2 * a + 1 - N) < std::abs(2 * b + 1 - N); });

    std::vector<std::int64_t> chosen;
    for (int j = 0; j < ext[1]; ++j)
        for (std::size_t r = 0; r < rows[j].size(); ++r)
            chosen.push_back(order[r] + static_cast<std::int64_t>(N) * j);
    auto target = detail::target_grid_from(2, h, origin, text, chosen, sp);

    SymmetrizedLayout lay;
    lay.kind = Symmetrization::steiner;
    lay.source = grid;
    lay.target = target;
    lay.slice_dim = 1;
    lay.slice_cell = h;
    for (int j = 0; j < ext[1]; ++j) {
        if (rows[j].empty()) continue;
        Slice s;
        s.source = rows[j];
        for (std::size_t r = 0; r < rows[j].size(); ++r) s.target.push_back(target->active_id(order[r], j));
        lay.slices.push_back(std::move(s));
    }
    return lay;
}

/// Steiner layout when the grid has a split with m > 0, Schwarz otherwise.
inline SymmetrizedLayout natural_layout(const GridPtr& grid)
{
    if (grid->split() && grid->split()->m > 0) return steiner_layout(grid);
    return schwarz_layout(grid, Parity::even);
}

/// Rearranges u slice by slice onto the layout's target grid.
inline GridFunction symmetrize(const GridFunction& u, const SymmetrizedLayout& lay)
{
    if (!u.grid().same_layout(*lay.source)) throw Error("incompatible grids");
    u.require_nonnegative();
    std::vector<double> out(lay.target->active_count(), 0.0);
    for (const auto& s : lay.slices) {
        std::vector<double> v(s.source.size());
        for (std::size_t k = 0; k < v.size(); ++k) v[k] = u[s.source[k]];
        v = detail::sorted_desc(std::move(v));
        for (std::size_t r = 0; r < v.size(); ++r) out[s.target[r]] = v[r];
    }
    return GridFunction(lay.target, std::move(out));
}

/// Per-slice decreasing rearrangements (step width h^n).
inline std::vector<StepProfile> slice_profiles(const GridFunction& u, const SymmetrizedLayout& lay,
                                               bool on_target = false)
{
    std::vector<StepProfile> out;
    for (const auto& s : lay.slices) {
        const auto& ids = on_target ? s.target : s.source;
        std::vector<double> v(ids.size());
        for (std::size_t k = 0; k < v.size(); ++k) v[k] = u[ids[k]];
        out.push_back(StepProfile::uniform(detail::sorted_desc(std::move(v)), lay.slice_cell));
    }
    return out;
}

struct SchwarzResult {
    RadialProfile profile;   // r -> u*(omega_n r^n)
    GridFunction star;       // u rearranged onto the centred ball mask
    SymmetrizedLayout layout;
};

inline SchwarzResult schwarz_rearrangement(const GridFunction& u, std::size_t radial_nodes = 1024,
                                           Parity parity = Parity::even)
{
    auto lay = schwarz_layout(u.grid_ptr(), parity);
    auto star = symmetrize(u, lay);
    auto prof = radial_profile(decreasing_rearrangement(u), u.grid().dim(), radial_nodes);
    return {std::move(prof), std::move(star), std::move(lay)};
}

inline GridFunction steiner_symmetrization(const GridFunction& u)
{
    return symmetrize(u, steiner_layout(u.grid_ptr()));
}

/// True when, slice by slice, the values listed in target rank order are
/// nonincreasing: the discrete form of W = W^#.
inline bool is_symmetric_decreasing(const GridFunction& w, const SymmetrizedLayout& lay)
{
    if (!w.grid().same_layout(*lay.target)) return false;
    for (const auto& s : lay.slices)
        for (std::size_t r = 1; r < s.target.size(); ++r)
            if (w[s.target[r]] > w[s.target[r - 1]]) return false;
    return true;
}

// ---- extremals ------------------------------------------------------------

/// w(x) = W(rank measure of x). Cells are ranked by u descending with ties
/// in lexicographic order; W is read at the midpoint of each cell's rank
/// interval. Then sum u w h^dim equals the sorted pairing sum exactly.
inline GridFunction extremal_for(const GridFunction& u, const StepProfile& W)
{
    u.require_nonnegative();
    const double meas = u.grid().measure();
    if (std::abs(W.total() - meas) > 1e-9 * meas) throw Error("incompatible profile");
    const double cell = u.grid().cell_volume();
    const auto order = detail::rank_order(u, detail::iota_ids(u.size()));
    std::vector<double> w(u.size());
    for (std::size_t r = 0; r < order.size(); ++r) w[order[r]] = W((static_cast<double>(r) + 0.5) * cell);
    return GridFunction(u.grid_ptr(), std::move(w));
}

/// Slice-wise extremal: given W = W^# on the layout's target grid, returns
/// the w on u's grid with w^# = W that pairs with u monotonically in every
/// slice.
inline GridFunction extremal_for(const GridFunction& u, const GridFunction& W_sharp, const SymmetrizedLayout& lay)
{
    u.require_nonnegative();
    if (!u.grid().same_layout(*lay.source)) throw Error("incompatible grids");
    if (!is_symmetric_decreasing(W_sharp, lay)) throw Error("W is not Steiner-symmetric");
    std::vector<double> w(u.size(), 0.0);
    for (const auto& s : lay.slices) {
        const auto order = detail::rank_order(u, s.source);
        for (std::size_t r = 0; r < order.size(); ++r) w[order[r]] = W_sharp[s.target[r]];
    }
    return GridFunction(u.grid_ptr(), std::move(w));
}

// ---- regularity conditions ------------------------------------------------

struct KeyCondition {
    bool holds = true;
    double C = 0.0;
};

/// Discrete form of -W'(s) <= C (-u*)'(s): every drop of W must sit on a
/// drop of u*, and C is the largest ratio of drops. Both profiles are
/// refined to their common breakpoints and extended by zero past the end.
inline KeyCondition check_key_condition(const StepProfile& W, const StepProfile& ustar)
{
    const double tot = ustar.total();
    if (std::abs(W.total() - tot) > 1e-9 * tot) throw Error("incompatible profile");
    std::vector<double> br;
    br.reserve(W.size() + ustar.size() + 2);
    std::merge(W.breakpoints().begin(), W.breakpoints().end(), ustar.breakpoints().begin(),
               ustar.breakpoints().end(), std::back_inserter(br));
    std::vector<double> cuts;
    for (double b : br)
        if (cuts.empty() || b - cuts.back() > 1e-12 * tot) cuts.push_back(b);
    if (cuts.back() < tot * (1.0 - 1e-12)) cuts.push_back(tot);

    std::vector<double> wv, uv;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        const double mid = 0.5 * (cuts[k] + cuts[k + 1]);
        wv.push_back(W(mid));
        uv.push_back(ustar(mid));
    }
    wv.push_back(0.0);
    uv.push_back(0.0);

    KeyCondition kc;
    const double eps = 1e-14 * std::max(W.max(), 1e-300);
    for (std::size_t k = 0; k + 1 < wv.size(); ++k) {
        const double dw = wv[k] - wv[k + 1];
        if (dw <= eps) continue;
        const double du = uv[k] - uv[k + 1];
        if (du <= 0.0) {
            kc.holds = false;
            continue;
        }
        kc.C = std::max(kc.C, dw / du);
    }
    return kc;
}

/// Cells with 0 < u < max u whose finite-difference gradient vanishes: the
/// discrete flat zones.
inline std::vector<char> flat_zone_cells(const GridFunction& u)
{
    const auto g = gradient_fd(u);
    const double top = u.max();
    std::vector<char> flat(u.size(), 0);
    for (std::size_t a = 0; a < u.size(); ++a) {
        if (!(u[a] > 0.0 && u[a] < top)) continue;
        bool zero = true;
        for (const auto& c : g.components) zero = zero && c[a] == 0.0;
        flat[a] = zero ? 1 : 0;
    }
    return flat;
}

/// |{grad u = 0, 0 < u < sup u}| = 0 on the grid. The plateau at the maximum
/// is exempt.
inline bool check_no_flat_zones(const GridFunction& u)
{
    for (char f : flat_zone_cells(u))
        if (f) return false;
    return true;
}

/// Derivative window on the measure axis: max(4 h^dim, total / 1000).
inline double measure_window(double cell, double total) { return std::max(4.0 * cell, 1e-3 * total); }

/// Wider window for quotients that must average out lattice tie classes
/// (a centred cone has level classes of dozens of cells). Shrinks like
/// h^(dim/2), so plateaus of fixed measure are still resolved.
inline double quotient_window(double cell, double total)
{
    return std::max(measure_window(cell, total), 4.0 * std::sqrt(cell * total));
}

/// Profile-level condition: no level class with 0 < u* < max u* is longer
/// than `window` on the measure axis.
inline bool check_no_flat_profile(const StepProfile& ustar, double window)
{
    const auto m = ustar.merged();
    const double top = m.max();
    for (std::size_t k = 0; k < m.size(); ++k) {
        const double v = m.values()[k];
        if (v > 0.0 && v < top && m.breakpoints()[k + 1] - m.breakpoints()[k] > window) return false;
    }
    return true;
}

struct MuPrime {
    double value = 0.0;       // difference quotient of mu_u at t
    double ustar_slope = 0.0; // (u*)'(mu_u(t)) over the quotient window
    double reciprocal = 0.0;  // value * ustar_slope, 1 in the continuum
};

/// Estimates mu_u'(t) by a symmetric quotient in t whose half-width is the
/// image of the quotient window under (u*)'.
inline MuPrime mu_prime(const GridFunction& u, double t)
{
    u.require_nonnegative();
    const double top = u.max();
    if (!(t > 0.0 && t < top)) throw Error("threshold out of range");
    const auto ustar = decreasing_rearrangement(u);
    const double cell = u.grid().cell_volume();
    const double full = quotient_window(cell, ustar.total());

    std::size_t ties = 0;
    for (double v : u.values()) ties += v == t ? 1 : 0;
    if (static_cast<double>(ties) * cell > full) throw Error("derivative undefined on plateau");
    // kept symmetric about s0 near either end of the measure axis
    const double s0 = distribution_function(u, t);
    const double window = std::max(cell, std::min({full, s0, ustar.total() - s0}));
    const double a = std::max(0.0, s0 - window), b = std::min(ustar.total(), s0 + window);
    const double drop = ustar(a) - ustar(b);
    if (drop == 0.0) throw Error("derivative undefined on plateau");

    MuPrime out;
    out.ustar_slope = -drop / (b - a);
    const double tau = std::min({-out.ustar_slope * window, t, top - t});
    out.value = (distribution_function(u, t + tau) - distribution_function(u, t - tau)) / (2.0 * tau);
    out.reciprocal = out.value * out.ustar_slope;
    return out;
}

/// grad w = W'(mu_u(u)) mu_u'(u) grad u for w = extremal_for(u, W). The
/// scalar factor is the ratio of W and u* drops over the measure window at
/// s = mu_u(u(x)); it vanishes on flat zones of u.
inline VectorField chain_rule_gradient(const GridFunction& u, const StepProfile& W)
{
    const auto ustar = decreasing_rearrangement(u);
    if (!check_key_condition(W, ustar).holds) throw Error("extremal not Sobolev-regular");
    const double cell = u.grid().cell_volume();
    const double delta = measure_window(cell, ustar.total());
    auto grad = gradient_fd(u);
    const auto flat = flat_zone_cells(u);

    // mu_u(u(x)) = (number of cells with larger value) * cell
    const auto order = detail::rank_order(u, detail::iota_ids(u.size()));
    std::vector<double> s_of(u.size());
    std::size_t start = 0;
    for (std::size_t r = 0; r < order.size(); ++r) {
        if (r > 0 && u[order[r]] != u[order[r - 1]]) start = r;
        s_of[order[r]] = static_cast<double>(start) * cell;
    }
    for (std::size_t a = 0; a < u.size(); ++a) {
        double factor = 0.0;
        if (!flat[a]) {
            const double s = s_of[a];
            const double lo = std::max(0.0, s - delta), hi = std::min(ustar.total(), s + delta);
            const double du = ustar(lo) - ustar(hi);
            if (du > 0.0) factor = (W(lo) - W(hi)) / du;
        }
        for (auto& c : grad.components) c[a] *= factor;
    }
    return grad;
}

} // namespace rearr
