#include "rearr/grid.hpp"
#include "rearr/fixtures.hpp"

#include <gtest/gtest.h>

#include <numbers>
#include <sstream>

using namespace rearr;

namespace {

GridPtr unit_square(double h) { return make_masked_grid(Rectangle{{0, 0}, {1, 1}}, h, 2); }
GridPtr unit_interval(double h) { return make_masked_grid(Rectangle{{0, 0}, {1, 0}}, h, 1); }

} // namespace

TEST(MaskedGrid, DiskMeasureApproximatesPi)
{
    const double h = 1.0 / 32;
    const auto g = make_masked_grid(Disk{{0, 0}, 1.0}, h);
    EXPECT_NEAR(g->measure(), std::numbers::pi, 2 * std::numbers::pi * h);
}

TEST(MaskedGrid, UnitSquareTilesExactly)
{
    const auto g = unit_square(0.1);
    EXPECT_EQ(g->active_count(), 100u);
    EXPECT_DOUBLE_EQ(g->measure(), 1.0);
}

TEST(MaskedGrid, ZeroAreaPolygonIsDegenerate)
{
    Polygon flat{{{0, 0}, {1, 0}, {2, 0}}};
    try {
        make_masked_grid(flat, 0.1);
        FAIL() << "expected an error";
    } catch (const Error& e) {
        EXPECT_STREQ(e.what(), "degenerate domain");
    }
}

TEST(MaskedGrid, SpacingLargerThanBoxIsTooCoarse)
{
    try {
        make_masked_grid(Rectangle{{0, 0}, {1, 1}}, 2.0);
        FAIL() << "expected an error";
    } catch (const Error& e) {
        EXPECT_STREQ(e.what(), "resolution too coarse");
    }
}

TEST(MaskedGrid, SplitIsRecordedAndValidated)
{
    const auto g = make_masked_grid(Rectangle{{0, 0}, {1, 1}}, 0.25, 2, Split{1, 1});
    ASSERT_TRUE(g->split());
    EXPECT_EQ(*g->split(), (Split{1, 1}));
    EXPECT_THROW(make_masked_grid(Rectangle{{0, 0}, {1, 1}}, 0.25, 2, Split{2, 1}), Error);
}

TEST(MaskedGrid, LShapeAndAnnulusMasks)
{
    const auto l = make_masked_grid(LShape{}, 0.125);
    EXPECT_EQ(l->active_count(), 48u); // 64 cells minus the 4x4 quadrant
    const auto a = make_masked_grid(Annulus{{0, 0}, 0.5, 1.0}, 1.0 / 64);
    const double exact = std::numbers::pi * (1.0 - 0.25);
    EXPECT_NEAR(a->measure(), exact, 4 * std::numbers::pi * a->h());
    EXPECT_FALSE(make_masked_grid(Annulus{{0, 0}, 0.5, 1.0}, 1.0 / 64)->active_id(64, 64) >= 0);
}

TEST(MaskedGrid, MeasureInvariantUnderAxisPermutation)
{
    const auto a = make_masked_grid(Polygon{{{0, 0}, {2, 0}, {2, 0.4}, {0.6, 1}, {0, 1}}}, 0.1);
    const auto b = make_masked_grid(Polygon{{{0, 0}, {0, 2}, {0.4, 2}, {1, 0.6}, {1, 0}}}, 0.1);
    EXPECT_EQ(a->active_count(), b->active_count());
}

TEST(MaskedGrid, BoundaryFractionsOnDisk)
{
    const auto g = make_masked_grid(Disk{{0, 0}, 1.0}, 1.0 / 16);
    for (int a = 0; a < static_cast<int>(g->active_count()); ++a)
        for (int d = 0; d < 4; ++d) {
            const double t = g->boundary_theta(a, static_cast<Dir>(d));
            EXPECT_GT(t, 0.0);
            EXPECT_LE(t, 1.0);
        }
}

TEST(Integrate, ConstantAndZero)
{
    const auto g = unit_square(0.1);
    EXPECT_DOUBLE_EQ(integrate(GridFunction::sample(g, [](Point) { return 1.0; })), 1.0);
    EXPECT_EQ(integrate(GridFunction::zeros(g)), 0.0);
}

TEST(Integrate, MidpointRuleExactForLinear)
{
    const auto g = unit_interval(0.01);
    EXPECT_NEAR(integrate(GridFunction::sample(g, [](Point p) { return p.x; })), 0.5, 1e-15);
}

TEST(Integrate, IsLinear)
{
    const auto g = make_masked_grid(Disk{{0, 0}, 1.0}, 1.0 / 32);
    const auto f = gen_fixture("tent-sum 3", g, 1);
    const auto k = gen_fixture("random", g, 2);
    std::vector<double> comb(f.size());
    for (std::size_t i = 0; i < comb.size(); ++i) comb[i] = 2.5 * f[i] + 0.75 * k[i];
    const double lhs = integrate(GridFunction(g, comb));
    const double rhs = 2.5 * integrate(f) + 0.75 * integrate(k);
    EXPECT_NEAR(lhs, rhs, 1e-13 * std::abs(rhs));
}

TEST(GradientFd, ConstantHasZeroInteriorGradient)
{
    const auto g = unit_square(0.1);
    const auto f = GridFunction::sample(g, [](Point) { return 3.0; });
    const auto gr = gradient_fd(f);
    for (int a = 0; a < static_cast<int>(g->active_count()); ++a) {
        const bool interior = g->neighbor(a, Dir::xm) >= 0 && g->neighbor(a, Dir::xp) >= 0 &&
                              g->neighbor(a, Dir::ym) >= 0 && g->neighbor(a, Dir::yp) >= 0;
        if (!interior) continue;
        EXPECT_EQ(gr.norm_at(a), 0.0);
    }
}

TEST(GradientFd, ExactForLinearInside)
{
    const auto g = unit_interval(0.01);
    const auto gr = gradient_fd(GridFunction::sample(g, [](Point p) { return p.x; }));
    for (int a = 1; a + 1 < static_cast<int>(g->active_count()); ++a) EXPECT_NEAR(gr.components[0][a], 1.0, 1e-12);

    const auto sq = unit_square(1.0 / 20);
    const auto gl = gradient_fd(GridFunction::sample(sq, [](Point p) { return 2.0 * p.x + 3.0 * p.y + 5.0; }));
    for (int a = 0; a < static_cast<int>(sq->active_count()); ++a) {
        auto [i, j] = sq->cell_of(a);
        if (i == 0 || j == 0 || i + 1 == 20 || j + 1 == 20) continue;
        EXPECT_NEAR(gl.components[0][a], 2.0, 1e-12);
        EXPECT_NEAR(gl.components[1][a], 3.0, 1e-12);
    }
}

TEST(GradientFd, OneSidedAtBoundarySeesZero)
{
    const auto g = unit_interval(0.25);
    const auto gr = gradient_fd(GridFunction::sample(g, [](Point) { return 1.0; }));
    EXPECT_DOUBLE_EQ(gr.components[0][0], 4.0);  // (1 - 0) / h
    EXPECT_DOUBLE_EQ(gr.components[0][3], -4.0); // (0 - 1) / h
}

TEST(GradientFd, ConeHasUnitSlopeAwayFromApexAndBoundary)
{
    // The cone is linear along rays, so the central difference differs from
    // the analytic gradient only by curvature terms of size h / r.
    const double h = 1.0 / 64;
    const auto g = make_masked_grid(Disk{{0, 0}, 1.0}, h);
    const auto f = gen_fixture("cone", g, 0);
    const auto gr = gradient_fd(f);
    double worst = 0.0;
    for (int a = 0; a < static_cast<int>(g->active_count()); ++a) {
        const Point c = g->center(a);
        const double r = std::hypot(c.x, c.y);
        if (r < 0.5 || r > 1.0 - 2 * h) continue;
        const double ex = -c.x / r, ey = -c.y / r;
        worst = std::max(worst, std::hypot(gr.components[0][a] - ex, gr.components[1][a] - ey));
    }
    // second-order error h^2 / (6 r^2) per component at r >= 1/2
    EXPECT_LT(worst, h * h);
}

TEST(Serialization, RoundTripIsBitwise)
{
    const auto g = make_masked_grid(Disk{{0.1, -0.2}, 0.7}, 1.0 / 16);
    const auto f = gen_fixture("tent-sum 2", g, 5);
    std::stringstream ss;
    write_grid_function(ss, f);
    const auto back = read_grid_function(ss);
    EXPECT_TRUE(back.grid().same_layout(*g));
    EXPECT_EQ(back.values(), f.values());
}

TEST(Serialization, OriginIsOptional)
{
    std::stringstream ss("1 0.5 2\n0 1 0.25\n1 0 0\n");
    const auto f = read_grid_function(ss);
    EXPECT_EQ(f.size(), 1u);
    EXPECT_EQ(f[0], 0.25);
    EXPECT_EQ(f.grid().origin()[0], 0.0);
}
