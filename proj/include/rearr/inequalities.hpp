#pragma once

// Both sides of the rearrangement inequalities on grid data: Hardy-Littlewood,
// Riesz, the two-function Polya-Szego couple inequality and its weak,
// nonlinear and weighted variants, and the mollified difference-quotient
// form that converges to the gradient pairing.

#include "rearr/grid.hpp"
#include "rearr/mollifier.hpp"
#include "rearr/rearrangement.hpp"
#include "rearr/report.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace rearr {

struct CheckOptions {
    double c1 = 8.0;          // gradient-inequality tolerance factor
    double equality_rel = 1e-8; // HL equality hypothesis, relative to the HL right side
    double hl_rel = 1e-12;    // HL exactness tolerance, relative
};

namespace detail {

inline void require_same_grid(const GridFunction& a, const GridFunction& b)
{
    if (!same_grid(a, b)) throw Error("incompatible grids");
}

/// Sum over cells of sum_{axis in axes} a_axis * b_axis, times the cell volume.
inline double gradient_pairing(const VectorField& a, const VectorField& b, const std::vector<int>& axes, double cell)
{
    const std::size_t n = a.grid->active_count();
    std::vector<double> terms(n, 0.0);
    for (std::size_t c = 0; c < n; ++c)
        for (int ax : axes) terms[c] += a.components[ax][c] * b.components[ax][c];
    return canonical_sum(std::move(terms)) * cell;
}

inline std::vector<int> x_axes(const MaskedGrid& g)
{
    const int n = g.split() ? g.split()->n : g.dim();
    std::vector<int> ax(n);
    for (int k = 0; k < n; ++k) ax[k] = k;
    return ax;
}

inline std::vector<int> y_axes(const MaskedGrid& g)
{
    std::vector<int> ax;
    for (int k = static_cast<int>(x_axes(g).size()); k < g.dim(); ++k) ax.push_back(k);
    return ax;
}

inline std::vector<int> all_axes(const MaskedGrid& g) { return g.dim() == 1 ? std::vector<int>{0} : std::vector<int>{0, 1}; }

inline std::vector<double> slice_values(const GridFunction& f, const std::vector<int>& ids)
{
    std::vector<double> v(ids.size());
    for (std::size_t k = 0; k < ids.size(); ++k) v[k] = f[ids[k]];
    return v;
}

} // namespace detail

// ---- Hardy-Littlewood -----------------------------------------------------

/// lhs = sum u w h^dim; rhs = the sorted pairing, slice by slice for a grid
/// with a Steiner split (m > 0) and over the whole grid otherwise. Both are
/// canonical sums, so equal multisets of products give equal results.
inline VerificationReport hardy_littlewood_check(const GridFunction& u, const GridFunction& w,
                                                 const CheckOptions& opt = {})
{
    detail::require_same_grid(u, w);
    u.require_nonnegative();
    w.require_nonnegative();
    const double cell = u.grid().cell_volume();
    std::vector<double> direct(u.size());
    for (std::size_t a = 0; a < u.size(); ++a) direct[a] = u[a] * w[a];

    const auto lay = natural_layout(u.grid_ptr());
    std::vector<double> sorted;
    sorted.reserve(u.size());
    for (const auto& s : lay.slices) {
        auto us = detail::sorted_desc(detail::slice_values(u, s.source));
        auto ws = detail::sorted_desc(detail::slice_values(w, s.source));
        for (std::size_t k = 0; k < us.size(); ++k) sorted.push_back(us[k] * ws[k]);
    }
    const double lhs = canonical_sum(std::move(direct)) * cell;
    const double rhs = canonical_sum(std::move(sorted)) * cell;
    auto r = make_report("hardy-littlewood", lhs, rhs, Claim::le, opt.hl_rel * std::abs(rhs));
    r.h = u.grid().h();
    return r;
}

/// rhs - lhs of the HL check; zero certifies the equality hypothesis.
inline double hl_equality_residual(const GridFunction& u, const GridFunction& w)
{
    const auto r = hardy_littlewood_check(u, w);
    return r.rhs - r.lhs;
}

/// (u(x) - u(x'))(w(x) - w(x')) >= 0 over all cell pairs when they fit in
/// the budget, else over `pair_budget` seeded random pairs.
inline bool nested_levels_check(const GridFunction& u, const GridFunction& w, std::size_t pair_budget,
                                std::uint64_t seed = 0)
{
    detail::require_same_grid(u, w);
    const std::size_t n = u.size();
    auto ok = [&](std::size_t a, std::size_t b) { return (u[a] - u[b]) * (w[a] - w[b]) >= 0.0; };
    if (n * n <= pair_budget) {
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = a + 1; b < n; ++b)
                if (!ok(a, b)) return false;
        return true;
    }
    Rng rng(seed);
    for (std::size_t k = 0; k < pair_budget; ++k)
        if (!ok(rng.index(n), rng.index(n))) return false;
    return true;
}

// ---- Riesz ----------------------------------------------------------------

namespace detail {

/// sum_x sum_z u(x) w(z) k(x - z) h^(2 dim), with k looked up on its own
/// lattice. Cell centres of u and w must differ by lattice vectors of k.
inline double riesz_sum(const GridFunction& u, const GridFunction& w, const GridFunction& k)
{
    const auto& gk = k.grid();
    const double h = gk.h();
    const int d = gk.dim();
    auto index_of = [&](double disp, int axis) {
        const double x = (disp - gk.origin()[axis]) / h - 0.5;
        const double r = std::round(x);
        if (std::abs(x - r) > 1e-6) throw Error("incompatible grids");
        return static_cast<int>(r);
    };
    std::vector<double> outer(u.size(), 0.0);
    for (std::size_t a = 0; a < u.size(); ++a) {
        if (u[a] == 0.0) continue;
        const Point px = u.grid().center(static_cast<int>(a));
        double acc = 0.0;
        for (std::size_t b = 0; b < w.size(); ++b) {
            if (w[b] == 0.0) continue;
            const Point pz = w.grid().center(static_cast<int>(b));
            const int i = index_of(px.x - pz.x, 0);
            const int j = d == 2 ? index_of(px.y - pz.y, 1) : 0;
            acc += w[b] * k.at(i, j);
        }
        outer[a] = u[a] * acc;
    }
    double s = 0.0;
    for (double t : outer) s += t;
    const double cell = gk.cell_volume();
    return s * cell * cell;
}

} // namespace detail

/// Riesz rearrangement inequality by direct double sums. u and w are
/// rearranged onto centred grids with half-integer cell centres and k onto
/// one with a centre at the origin, so displacements stay on k's lattice.
inline VerificationReport riesz_check(const GridFunction& u, const GridFunction& w, const GridFunction& k,
                                      std::size_t cap = 4096)
{
    if (u.size() + w.size() + k.size() > cap) throw Error("instance too large for direct Riesz");
    const double h = u.grid().h();
    if (w.grid().h() != h || k.grid().h() != h || w.grid().dim() != u.grid().dim() ||
        k.grid().dim() != u.grid().dim())
        throw Error("incompatible grids");
    u.require_nonnegative();
    w.require_nonnegative();
    k.require_nonnegative();

    const double lhs = detail::riesz_sum(u, w, k);
    const auto us = symmetrize(u, schwarz_layout(u.grid_ptr(), Parity::even));
    const auto ws = symmetrize(w, schwarz_layout(w.grid_ptr(), Parity::even));
    const auto ks = symmetrize(k, schwarz_layout(k.grid_ptr(), Parity::odd));
    const double rhs = detail::riesz_sum(us, ws, ks);

    const double mu = integrate(u), mw = integrate(w), mk = integrate(k);
    const double tol = 4.0 * h *
                       (lipschitz_estimate(u) * mw * mk + lipschitz_estimate(w) * mu * mk +
                        lipschitz_estimate(k) * mu * mw);
    auto r = make_report("riesz", lhs, rhs, Claim::le, tol);
    r.h = h;
    return r;
}

// ---- mollified difference-quotient form ------------------------------------

/// F(eps) = sum_z integral_B1 [u(z + eps e) - u(z)][w(z + eps e) - w(z)] / eps^2
/// phi(e) de h^dim. Shifts act on the x-axes of the grid's split (all axes
/// without a split) and are evaluated by linear interpolation of the
/// zero-extended cell data; z runs over a lattice padded past the mask.
/// As eps -> 0, F tends to (C / n) sum grad_x u . grad_x w h^dim.
inline double mollified_gradient_form(const GridFunction& u, const GridFunction& w, const MollifierKernel& kernel,
                                      double eps)
{
    detail::require_same_grid(u, w);
    if (!(eps > 0.0 && eps <= 1.0)) throw Error("eps must lie in (0, 1]");
    const auto& g = u.grid();
    const int n = static_cast<int>(detail::x_axes(g).size());
    if (kernel.dim() != n) throw Error("kernel dimension does not match the shifted axes");
    const double h = g.h();
    const int pad = static_cast<int>(std::ceil(eps / h)) + 1;
    const int nx = g.extents()[0] + 2 * pad;
    const int ny = g.dim() == 2 ? g.extents()[1] + 2 * (n == 2 ? pad : 0) : 1;
    const int oy = g.dim() == 2 && n == 2 ? pad : 0;

    std::vector<double> U(static_cast<std::size_t>(nx) * ny, 0.0), Wd(U.size(), 0.0);
    for (int a = 0; a < static_cast<int>(g.active_count()); ++a) {
        auto [i, j] = g.cell_of(a);
        const std::size_t c = static_cast<std::size_t>(i + pad) + static_cast<std::size_t>(nx) * (j + oy);
        U[c] = u[a];
        Wd[c] = w[a];
    }
    auto val = [&](const std::vector<double>& A, int i, int j) {
        if (i < 0 || j < 0 || i >= nx || j >= ny) return 0.0;
        return A[static_cast<std::size_t>(i) + static_cast<std::size_t>(nx) * j];
    };

    double total = 0.0;
    for (const auto& nd : kernel.nodes()) {
        const double sx = eps * nd.offset[0] / h;
        const double sy = n == 2 ? eps * nd.offset[1] / h : 0.0;
        const int fx = static_cast<int>(std::floor(sx)), fy = static_cast<int>(std::floor(sy));
        const double tx = sx - fx, ty = sy - fy;
        double acc = 0.0;
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                auto shifted = [&](const std::vector<double>& A) {
                    const int i0 = i + fx, j0 = j + fy;
                    const double lo = (1.0 - tx) * val(A, i0, j0) + tx * val(A, i0 + 1, j0);
                    if (ty == 0.0) return lo;
                    const double hi = (1.0 - tx) * val(A, i0, j0 + 1) + tx * val(A, i0 + 1, j0 + 1);
                    return (1.0 - ty) * lo + ty * hi;
                };
                const double du = shifted(U) - val(U, i, j);
                if (du == 0.0) continue;
                acc += du * (shifted(Wd) - val(Wd, i, j));
            }
        total += nd.weight * acc;
    }
    return total / (eps * eps) * g.cell_volume();
}

/// (C / n) sum grad_x u . grad_x w h^dim: the eps -> 0 limit of the form.
inline double mollified_limit(const GridFunction& u, const GridFunction& w, const MollifierKernel& kernel)
{
    detail::require_same_grid(u, w);
    const auto& g = u.grid();
    const auto axes = detail::x_axes(g);
    const double pairing = detail::gradient_pairing(gradient_fd(u), gradient_fd(w), axes, g.cell_volume());
    return kernel.second_moment() / static_cast<double>(axes.size()) * pairing;
}

// ---- Polya-Szego couple inequality ----------------------------------------

namespace detail {

/// x-part, y-part and total of sum grad u . grad w >= sum grad U . grad W,
/// where (U, W) live on the symmetrised grid.
inline VerificationReport couple_reports(const std::string& name, const GridFunction& u, const GridFunction& w,
                                         const GridFunction& us, const GridFunction& ws, double tol)
{
    const auto& g = u.grid();
    const double cell = g.cell_volume();
    const auto gu = gradient_fd(u), gw = gradient_fd(w), gus = gradient_fd(us), gws = gradient_fd(ws);
    const auto xa = x_axes(g), ya = y_axes(g);

    const double lx = gradient_pairing(gu, gw, xa, cell), rx = gradient_pairing(gus, gws, xa, cell);
    const double lt = gradient_pairing(gu, gw, all_axes(g), cell);
    const double rt = gradient_pairing(gus, gws, all_axes(g), cell);
    auto total = make_report(name, lt, rt, Claim::ge, tol);
    total.h = g.h();
    if (!ya.empty()) {
        auto px = make_report(name + "-x", lx, rx, Claim::ge, tol);
        const double ly = gradient_pairing(gu, gw, ya, cell), ry = gradient_pairing(gus, gws, ya, cell);
        auto py = make_report(name + "-y", ly, ry, Claim::ge, tol);
        px.h = py.h = g.h();
        total.pass = total.pass && px.pass && py.pass;
        total.parts = {px, py};
    }
    return total;
}

inline void flag_hypothesis(VerificationReport& r, bool ok, const char* message)
{
    r.hypothesis_ok = ok;
    if (!ok) r.note = message;
    for (auto& p : r.parts) p.hypothesis_ok = ok, p.note = r.note;
}

} // namespace detail

/// Couple inequality for u, w with equal HL pairing: x-part, y-part (when
/// the split has m > 0) and total. Tolerance c1 h Lip(u) Lip(w) |Omega|.
/// When the HL equality fails the report is still produced, flagged.
inline VerificationReport ps_couple_check(const GridFunction& u, const GridFunction& w, const CheckOptions& opt = {})
{
    detail::require_same_grid(u, w);
    const auto hl = hardy_littlewood_check(u, w, opt);
    const bool hyp = hl.rhs - hl.lhs <= opt.equality_rel * std::max(std::abs(hl.rhs), 1e-300);

    const auto lay = natural_layout(u.grid_ptr());
    const auto us = symmetrize(u, lay), ws = symmetrize(w, lay);
    const auto& g = u.grid();
    const double tol = opt.c1 * g.h() * lipschitz_estimate(u) * lipschitz_estimate(w) * g.measure();
    auto r = detail::couple_reports("ps-couple", u, w, us, ws, tol);
    detail::flag_hypothesis(r, hyp, "HL equality hypothesis fails");
    return r;
}

/// Weak form: sum grad u . grad w >= sum grad u^# . grad W with w the
/// slice-wise extremal of u for W = W^#. Summation by parts stands in for
/// -integral w Laplace(u).
inline VerificationReport weak_form_check(const GridFunction& u, const GridFunction& W_sharp,
                                          const CheckOptions& opt = {})
{
    const auto lay = natural_layout(u.grid_ptr());
    if (!W_sharp.grid().same_layout(*lay.target)) throw Error("incompatible grids");
    const auto w = extremal_for(u, W_sharp, lay);
    const auto us = symmetrize(u, lay);
    const GridFunction Wt(lay.target, W_sharp.values());
    const auto& g = u.grid();
    const double tol = opt.c1 * g.h() * lipschitz_estimate(u) * lipschitz_estimate(Wt) * g.measure();
    return detail::couple_reports("weak-form", u, w, us, Wt, tol);
}

// ---- nonlinear and weighted variants --------------------------------------

namespace detail {

/// integral |v'|^(p-2) v' w' over the ball for v = u*(omega_n r^n),
/// w = W(omega_n r^n). Drops of the profiles between cell midpoints `stride`
/// cells apart give the radial slopes; each bin contributes
/// (du/dr)^(p-1) (dW/dr) times its measure.
inline double radial_pairing(const StepProfile& ustar, const StepProfile& W, int n, double p)
{
    const double cell = *ustar.uniform_width();
    const std::size_t K = ustar.size();
    // bins must span whole lattice tie classes, or the slope noise is squared
    const double window = quotient_window(cell, ustar.total());
    const std::size_t stride = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(window / cell - 1e-9)));
    std::vector<std::size_t> idx;
    for (std::size_t k = 0; k < K; k += stride) idx.push_back(k);
    if (idx.back() != K - 1) idx.push_back(K - 1);

    std::vector<double> terms;
    for (std::size_t b = 0; b + 1 < idx.size(); ++b) {
        const double sa = (static_cast<double>(idx[b]) + 0.5) * cell;
        const double sb = (static_cast<double>(idx[b + 1]) + 0.5) * cell;
        const double du = ustar.values()[idx[b]] - ustar.values()[idx[b + 1]];
        const double dw = W(sa) - W(sb);
        const double dr = ball_radius(sb, n) - ball_radius(sa, n);
        if (du == 0.0 || dw == 0.0) continue;
        const double su = du / dr, sw = dw / dr;
        terms.push_back((p == 2.0 ? su : std::pow(su, p - 1.0)) * sw * (sb - sa));
    }
    return canonical_sum(std::move(terms));
}

} // namespace detail

/// sum |grad u|^(p-2) grad u . grad w >= integral |grad u*|^(p-2) grad u* . grad w*
/// for w = extremal_for(u, W); grad w via the chain rule. Tolerance
/// c1 h Lip(u)^(p-1) Lip(w) |Omega|.
inline VerificationReport nonlinear_ps_check(const GridFunction& u, const StepProfile& W, double p,
                                             const CheckOptions& opt = {})
{
    if (!(p > 1.0)) throw Error("exponent out of range");
    const auto ustar = decreasing_rearrangement(u);
    if (std::abs(W.total() - ustar.total()) > 1e-9 * ustar.total()) throw Error("incompatible profile");
    if (!check_key_condition(W, ustar).holds) throw Error("Lemma hypothesis violated");
    const auto gu = gradient_fd(u);
    const auto gw = chain_rule_gradient(u, W);
    const auto& g = u.grid();
    std::vector<double> terms(u.size());
    for (std::size_t c = 0; c < u.size(); ++c) {
        double dot = 0.0;
        for (int ax = 0; ax < g.dim(); ++ax) dot += gu.components[ax][c] * gw.components[ax][c];
        const double norm = gu.norm_at(c);
        terms[c] = (p == 2.0 ? 1.0 : (norm == 0.0 ? 0.0 : std::pow(norm, p - 2.0))) * dot;
    }
    const double lhs = canonical_sum(std::move(terms)) * g.cell_volume();
    const double rhs = detail::radial_pairing(ustar, W, g.dim(), p);
    const double lip_u = gu.max_norm();
    const double tol = opt.c1 * g.h() * std::pow(lip_u, p - 1.0) * gw.max_norm() * g.measure();
    auto r = make_report("nonlinear-ps", lhs, rhs, Claim::ge, tol);
    r.h = g.h();
    return r;
}

/// sum A(u) |grad u|^p >= sum A(u*) |grad u*|^p, both on grids (u* on the
/// centred Schwarz grid). Tolerance c1 h sup A Lip(u)^p |Omega|.
inline VerificationReport weighted_ps_check(const GridFunction& u, const std::function<double(double)>& A, double p,
                                            const CheckOptions& opt = {})
{
    if (!(p > 1.0)) throw Error("exponent out of range");
    const auto lay = schwarz_layout(u.grid_ptr(), Parity::even);
    const auto us = symmetrize(u, lay);
    double supA = 0.0;
    auto side = [&](const GridFunction& f) {
        const auto gf = gradient_fd(f);
        std::vector<double> terms(f.size());
        for (std::size_t c = 0; c < f.size(); ++c) {
            double sq = 0.0;
            for (const auto& comp : gf.components) sq += comp[c] * comp[c];
            const double a = A(f[c]);
            if (!(a >= 0.0) || !std::isfinite(a)) throw Error("weight must be bounded and nonnegative");
            supA = std::max(supA, a);
            terms[c] = a * (p == 2.0 ? sq : std::pow(std::sqrt(sq), p));
        }
        return canonical_sum(std::move(terms)) * f.grid().cell_volume();
    };
    const double lhs = side(u), rhs = side(us);
    const auto& g = u.grid();
    const double tol = opt.c1 * g.h() * supA * std::pow(lipschitz_estimate(u), p) * g.measure();
    auto r = make_report("weighted-ps", lhs, rhs, Claim::ge, tol);
    r.h = g.h();
    return r;
}

} // namespace rearr
