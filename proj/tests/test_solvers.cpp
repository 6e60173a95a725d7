#include "rearr/fixtures.hpp"
#include "rearr/poisson.hpp"
#include "rearr/radial.hpp"
#include "rearr/rearrangement.hpp"

#include <gtest/gtest.h>

#include <map>
#include <numbers>

using namespace rearr;

namespace {

const double pi = std::numbers::pi;

GridPtr unit_disk(double h) { return make_masked_grid(Disk{{0, 0}, 1.0}, h); }

/// -Laplace(u) = 1 on the unit square with zero boundary values, by the
/// single sine series in x with hyperbolic profiles in y.
double square_oracle(double x, double y)
{
    double u = 0.5 * x * (1.0 - x);
    for (int m = 1; m < 400; m += 2) {
        const double a = m * pi;
        u -= 4.0 / (a * a * a) * std::sin(a * x) * std::cosh(a * (y - 0.5)) / std::cosh(0.5 * a);
    }
    return u;
}

double max_disk_error(double h)
{
    const auto g = unit_disk(h);
    const auto u = solve_poisson(GridFunction::sample(g, [](Point) { return 1.0; })).u;
    double e = 0.0;
    for (int a = 0; a < static_cast<int>(g->active_count()); ++a) {
        const Point c = g->center(a);
        e = std::max(e, std::abs(u[a] - 0.25 * (1.0 - c.x * c.x - c.y * c.y)));
    }
    return e;
}

/// Value of f at the cell of f's grid whose centre is `p`, or NaN.
double value_at(const GridFunction& f, Point p)
{
    const auto& g = f.grid();
    const int i = static_cast<int>(std::floor((p.x - g.origin()[0]) / g.h()));
    const int j = g.dim() == 2 ? static_cast<int>(std::floor((p.y - g.origin()[1]) / g.h())) : 0;
    if (i < 0 || j < 0 || i >= g.extents()[0] || j >= g.extents()[1]) return std::nan("");
    const int id = g.active_id(i, j);
    return id < 0 ? std::nan("") : f[id];
}

template <class F>
void expect_error(F&& f, const char* message)
{
    try {
        f();
        ADD_FAILURE() << "expected '" << message << "'";
    } catch (const Error& e) {
        EXPECT_STREQ(e.what(), message);
    }
}

} // namespace

// ---- masked Poisson ------------------------------------------------------------

TEST(MaskedPoisson, DiskWithUnitDatum)
{
    const double h = 1.0 / 64;
    const auto g = unit_disk(h);
    const auto u = solve_poisson_masked(g, GridFunction::sample(g, [](Point) { return 1.0; }));
    // the four cells around the centre sit at radius h / sqrt(2)
    const int c = g->extents()[0] / 2;
    const double centre = 0.25 * (u.at(c - 1, c - 1) + u.at(c, c - 1) + u.at(c - 1, c) + u.at(c, c));
    EXPECT_NEAR(centre, 0.25, 1e-2);
    EXPECT_LT(max_disk_error(h), 1e-3);
}

TEST(MaskedPoisson, SquareAgainstSeriesOracle)
{
    EXPECT_NEAR(square_oracle(0.5, 0.5), 0.0736713532, 1e-9);
    const double h = 1.0 / 64;
    const auto g = make_masked_grid(Rectangle{{0, 0}, {1, 1}}, h);
    const auto u = solve_poisson(GridFunction::sample(g, [](Point) { return 1.0; }));
    EXPECT_LE(u.relative_residual, 1e-10);
    const double centre = 0.25 * (u.u.at(31, 31) + u.u.at(32, 31) + u.u.at(31, 32) + u.u.at(32, 32));
    EXPECT_NEAR(centre, 0.0736713532, 1e-3);
    double worst = 0.0;
    for (int a = 0; a < static_cast<int>(g->active_count()); ++a) {
        const Point p = g->center(a);
        worst = std::max(worst, std::abs(u.u[a] - square_oracle(p.x, p.y)));
    }
    EXPECT_LT(worst, 1e-3);
}

TEST(MaskedPoisson, ZeroDatumGivesZero)
{
    const auto g = make_masked_grid(LShape{}, 1.0 / 32);
    const auto s = solve_poisson(GridFunction::zeros(g));
    for (double v : s.u.values()) EXPECT_EQ(v, 0.0);
    EXPECT_EQ(s.iterations, 0);
}

TEST(MaskedPoisson, ErrorsAndPreconditions)
{
    // two blocks with no shared face
    ExplicitMask m{4, 1, {1, 0, 0, 1}};
    const auto g = make_masked_grid(Box{2, {0, 0}, {1, 0.25}}, 0.25, m);
    expect_error([&] { solve_poisson(GridFunction::sample(g, [](Point) { return 1.0; })); }, "disconnected domain");

    // an indefinite matrix breaks CG down at the first step
    SparseMatrix A;
    A.n = 2;
    A.row_start = {0, 1, 2};
    A.col = {0, 1};
    A.val = {1.0, -1.0};
    A.diag = {1.0, 1.0};
    expect_error([&] { conjugate_gradient(A, {1.0, 1.0}); }, "solver stalled");

    const auto d = unit_disk(1.0 / 16);

    const auto f = GridFunction::sample(d, [](Point p) { return p.x; });
    EXPECT_THROW(solve_poisson(f), Error);
}

TEST(MaskedPoisson, MatrixIsSymmetricAndDiagonallyDominant)
{
    const auto g = make_masked_grid(Annulus{{0, 0}, 0.3, 1.0}, 1.0 / 16);
    const auto A = assemble_laplacian(*g);
    std::map<std::pair<int, int>, double> entries;
    for (std::size_t r = 0; r < A.n; ++r) {
        double off = 0.0;
        for (std::size_t k = A.row_start[r]; k < A.row_start[r + 1]; ++k) {
            entries[{static_cast<int>(r), A.col[k]}] = A.val[k];
            if (A.col[k] != static_cast<int>(r)) off += std::abs(A.val[k]);
        }
        EXPECT_GE(A.diag[r], off);
    }
    for (const auto& [rc, v] : entries) EXPECT_EQ(entries.at({rc.second, rc.first}), v);
}

// ---- properties ---------------------------------------------------------------------

TEST(MaskedPoisson, MaximumPrinciple)
{
    const auto g = make_masked_grid(LShape{}, 1.0 / 32);
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto u = solve_poisson(gen_fixture("random", g, seed)).u;
        for (double v : u.values()) EXPECT_GE(v, 0.0);
    }
}

TEST(MaskedPoisson, SymmetricDataGiveSymmetricSolutions)
{
    const double h = 1.0 / 32;
    const auto g = unit_disk(h);
    const auto f = GridFunction::sample(g, [](Point p) { return 1.0 + p.x * p.x * p.y * p.y; });
    const auto u = solve_poisson(f).u;
    const double scale = u.max();
    for (int a = 0; a < static_cast<int>(g->active_count()); ++a) {
        const Point p = g->center(a);
        EXPECT_NEAR(value_at(u, {-p.x, p.y}), u[a], 1e-8 * scale);
        EXPECT_NEAR(value_at(u, {p.y, p.x}), u[a], 1e-8 * scale);
    }
}

TEST(MaskedPoisson, ConvergesOnDisk)
{
    const double e1 = max_disk_error(1.0 / 16), e2 = max_disk_error(1.0 / 32), e3 = max_disk_error(1.0 / 64);
    EXPECT_GE(e1 / e2, 3.0);
    EXPECT_GE(e2 / e3, 3.0);
}

// ---- Steiner problem ---------------------------------------------------------------------

TEST(SteinerProblem, SymmetricDomainAndDatumReproduceMaskedSolve)
{
    const double h = 1.0 / 32;
    const auto g = make_masked_grid(Rectangle{{-1, 0}, {1, 1}}, h, 2, Split{1, 1});
    const auto f = GridFunction::sample(g, [](Point p) { return (1.0 - std::abs(p.x)) * (1.0 + p.y); });
    const auto lay = steiner_layout(g);
    const auto fs = symmetrize(f, lay);
    const auto v = solve_steiner_problem(lay.target, fs);
    const auto u = solve_poisson_masked(g, f);
    ASSERT_EQ(v.size(), u.size());
    for (int a = 0; a < static_cast<int>(g->active_count()); ++a)
        EXPECT_NEAR(value_at(v, g->center(a)), u[a], 1e-9 * u.max());
}

/// Largest |v(i) - v(k - 1 - i)| over the cells of each row, relative to max v.
double row_reversal_residual(const GridFunction& v)
{
    std::map<int, std::vector<double>> rows;
    for (int a = 0; a < static_cast<int>(v.size()); ++a) rows[v.grid().cell_of(a)[1]].push_back(v[a]);
    double worst = 0.0;
    for (const auto& [j, r] : rows)
        for (std::size_t k = 0; k < r.size(); ++k) worst = std::max(worst, std::abs(r[k] - r[r.size() - 1 - k]));
    return worst / v.max();
}

TEST(SteinerProblem, TiltedRectangleRowsAreSymmetricToFirstOrder)
{
    // rows with an odd cell count cannot be centred on the shared lattice,
    // so the reflection residual is O(h) rather than solver-level
    std::vector<double> res;
    for (double h : {1.0 / 32, 1.0 / 64, 1.0 / 128}) {
        const auto g = make_masked_grid(tilted_rectangle({0, 0}, 0.5, 0.25, pi / 6), h, 2, Split{1, 1});
        const auto one = GridFunction::sample(g, [](Point) { return 1.0; });
        const auto lay = steiner_layout(g);
        const auto v = solve_steiner_problem(lay.target, symmetrize(one, lay));
        res.push_back(row_reversal_residual(v));
        EXPECT_LT(res.back(), 4 * h);
        if (h == 1.0 / 32) {
            const auto zero = solve_steiner_problem(lay.target, GridFunction::zeros(lay.target));
            for (double x : zero.values()) EXPECT_EQ(x, 0.0);
        }
    }
    EXPECT_LT(res[2], res[1]);
    EXPECT_LT(res[1], res[0]);
}

TEST(SteinerProblem, EvenRowsGiveSolverLevelSymmetry)
{
    const double h = 1.0 / 32;
    // every row of the sheared parallelogram holds exactly 32 cells
    const auto g = make_masked_grid(Polygon{{{0, 0}, {1, 0}, {1.5, 1}, {0.5, 1}}}, h, 2, Split{1, 1});
    const auto one = GridFunction::sample(g, [](Point) { return 1.0; });
    const auto lay = steiner_layout(g);
    const auto v = solve_steiner_problem(lay.target, symmetrize(one, lay));
    EXPECT_LT(row_reversal_residual(v), 1e-8);
}

// ---- radial solvers ------------------------------------------------------------------------

TEST(RadialPoisson, UnitDiskWithUnitDatum)
{
    const StepProfile one({0.0, pi}, {1.0});
    const auto s = solve_radial_poisson(one, 2, 1.0);
    ASSERT_EQ(s.v.size(), 1024u);
    for (std::size_t i = 0; i < s.v.size(); ++i) {
        const double r = s.v.r(i);
        EXPECT_NEAR(s.v.values[i], 0.25 * (1.0 - r * r), 1e-6);
    }
    EXPECT_EQ(s.v.values.back(), 0.0);
}

TEST(RadialPoisson, OneDimensionalHalfInterval)
{
    const double R = 0.5;
    const StepProfile one({0.0, 2 * R}, {1.0});
    const auto s = solve_radial_poisson(one, 1, R);
    // independent oracle: integrate -v' = r from r to R by Simpson's rule
    for (std::size_t i = 0; i < s.v.size(); i += 37) {
        const double r = s.v.r(i);
        const double mid = 0.5 * (r + R);
        const double simpson = (R - r) / 6.0 * (r + 4 * mid + R);
        EXPECT_NEAR(s.v.values[i], simpson, 1e-6);
        EXPECT_NEAR(s.v.values[i], 0.5 * (R * R - r * r), 1e-6);
    }
}

TEST(RadialPoisson, ZeroDatum)
{
    const auto s = solve_radial_poisson(StepProfile({0.0, pi}, {0.0}), 2, 1.0);
    for (double v : s.v.values) EXPECT_EQ(v, 0.0);
}

TEST(RadialPLaplacian, P2MatchesPoisson)
{
    const auto f = decreasing_rearrangement(gen_fixture("tent-sum 3", unit_disk(1.0 / 32), 1));
    const double R = ball_radius(f.total(), 2);
    const auto a = solve_radial_plaplacian(f, 2, 2.0, R), b = solve_radial_poisson(f, 2, R);
    for (std::size_t i = 0; i < a.v.size(); ++i) EXPECT_NEAR(a.v.values[i], b.v.values[i], 1e-12);
}

TEST(RadialPLaplacian, P3ClosedForm)
{
    const StepProfile one({0.0, pi}, {1.0});
    const auto s = solve_radial_plaplacian(one, 2, 3.0, 1.0);
    const double p = 3.0, n = 2.0;
    auto exact = [&](double r) { return (p - 1) / p * std::pow(n, -1 / (p - 1)) * (1 - std::pow(r, p / (p - 1))); };
    EXPECT_NEAR(exact(0.0), 2.0 / 3.0 / std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(s.v.values[0], 0.4714, 1e-4);
    for (std::size_t i = 0; i < s.v.size(); i += 31) EXPECT_NEAR(s.v.values[i], exact(s.v.r(i)), 1e-4);
}

TEST(RadialPLaplacian, ZeroDatumAndBadExponent)
{
    const StepProfile zero({0.0, pi}, {0.0});
    for (double v : solve_radial_plaplacian(zero, 2, 3.0, 1.0).v.values) EXPECT_EQ(v, 0.0);
    expect_error([&] { solve_radial_plaplacian(zero, 2, 1.0, 1.0); }, "exponent out of range");
    expect_error([&] { solve_radial_plaplacian(zero, 2, 2.0, 0.5); }, "incompatible profile");
}

TEST(RadialPLaplacian, FluxIdentityAtNodes)
{
    const auto f = decreasing_rearrangement(gen_fixture("random", unit_disk(1.0 / 16), 3));
    const double R = ball_radius(f.total(), 2);
    for (double p : {1.5, 2.0, 4.0}) {
        const auto s = solve_radial_plaplacian(f, 2, p, R, 257);
        for (std::size_t i = 1; i < s.v.size(); ++i) {
            const double r = s.v.r(i);
            const double flux = 2 * pi * r * std::pow(s.slope.values[i], p - 1);
            const double mass = f.concentration(std::min(f.total(), pi * r * r));
            EXPECT_NEAR(flux, mass, 1e-12 * std::max(mass, 1.0));
        }
        // nonincreasing for a nonnegative datum
        for (std::size_t i = 1; i < s.v.size(); ++i) EXPECT_LE(s.v.values[i], s.v.values[i - 1]);
    }
}

TEST(RadialPLaplacian, FunctionDatumMatchesProfileDatum)
{
    // f(r) = 1 - r on the unit disk as a function and as a fine step profile
    const std::size_t K = 1 << 14;
    std::vector<double> b(K + 1), v(K);
    for (std::size_t k = 0; k <= K; ++k) b[k] = pi * static_cast<double>(k) / K;
    for (std::size_t k = 0; k < K; ++k) v[k] = 1.0 - std::sqrt((b[k] + b[k + 1]) / (2 * pi));
    const auto a = solve_radial_plaplacian(StepProfile(b, v), 2, 3.0, 1.0);
    const auto c = solve_radial_plaplacian([](double r) { return 1.0 - r; }, 2, 3.0, 1.0);
    for (std::size_t i = 0; i < a.v.size(); i += 17) EXPECT_NEAR(a.v.values[i], c.v.values[i], 1e-4);
}
