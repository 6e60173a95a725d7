#pragma once

// Radial mollifier kernels and their quadrature on the unit ball.

#include "rearr/numeric.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

namespace rearr {

struct KernelNode {
    std::array<double, 2> offset; // point of the unit ball
    double weight;                // includes phi(|offset|)
};

/// phi is radial, nonincreasing, and vanishes for r >= 1. `second_moment`
/// is C = integral over B_1 of phi(h) |h|^2 dh in dimension `dim`.
class MollifierKernel {
public:
    MollifierKernel(std::function<double(double)> profile, int dim) : profile_(std::move(profile)), dim_(dim)
    {
        if (dim_ != 1 && dim_ != 2) throw Error("unsupported dimension");
        build_nodes();
        double c = 0.0;
        for (const auto& nd : nodes_) c += nd.weight * (nd.offset[0] * nd.offset[0] + nd.offset[1] * nd.offset[1]);
        second_moment_ = c;
    }

    /// (1 - r^2)^4 on [0, 1].
    static MollifierKernel standard(int dim)
    {
        return MollifierKernel([](double r) { return r >= 1.0 ? 0.0 : std::pow(1.0 - r * r, 4); }, dim);
    }

    int dim() const { return dim_; }
    double profile(double r) const { return profile_(r); }
    double second_moment() const { return second_moment_; }
    const std::vector<KernelNode>& nodes() const { return nodes_; }

private:
    static constexpr int radial_points = 8;
    static constexpr int angles = 32;

    void build_nodes()
    {
        using boost::math::quadrature::gauss;
        if (dim_ == 1) {
            // 16-point Gauss-Legendre on [-1, 1]
            const auto& x = gauss<double, 16>::abscissa();
            const auto& w = gauss<double, 16>::weights();
            for (std::size_t k = 0; k < x.size(); ++k)
                for (double sgn : {-1.0, 1.0})
                    nodes_.push_back({{sgn * x[k], 0.0}, w[k] * profile_(x[k])});
            return;
        }
        // Gauss-Legendre in r on [0, 1] times equally spaced angles; exact
        // for polynomial integrands of moderate degree.
        const auto& x = gauss<double, radial_points>::abscissa();
        const auto& w = gauss<double, radial_points>::weights();
        for (std::size_t k = 0; k < x.size(); ++k)
            for (double sgn : {-1.0, 1.0}) {
                const double r = 0.5 * (1.0 + sgn * x[k]);
                const double wr = 0.5 * w[k] * r * profile_(r) * (2.0 * std::numbers::pi / angles);
                for (int a = 0; a < angles; ++a) {
                    const double th = 2.0 * std::numbers::pi * (a + 0.5) / angles;
                    nodes_.push_back({{r * std::cos(th), r * std::sin(th)}, wr});
                }
            }
    }

    std::function<double(double)> profile_;
    int dim_;
    std::vector<KernelNode> nodes_;
    double second_moment_ = 0.0;
};

} // namespace rearr
