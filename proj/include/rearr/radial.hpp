#pragma once

// Radial Dirichlet problems on balls: -div(|v'|^(p-2) v') = f(|x|) with
// v(R) = 0, solved through the flux identity
//   r^(n-1) |v'|^(p-2) (-v') = integral_0^r f(t) t^(n-1) dt.

#include "rearr/profile.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <cmath>
#include <functional>

namespace rearr {

struct RadialSolution {
    RadialProfile v;
    RadialProfile slope; // |v'|
    int n = 2;
    double p = 2.0;
};

namespace detail {

/// v from the flux G(r) = mass(B_r) / (n omega_n r^(n-1)) by trapezoid
/// quadrature inwards from v(R) = 0.
inline RadialSolution radial_from_mass(const std::function<double(double)>& ball_mass, int n, double p, double R,
                                       std::size_t nodes)
{
    if (!(p > 1.0)) throw Error("exponent out of range");
    if (nodes < 2) throw Error("radial profile needs at least two nodes");
    if (!(R > 0.0)) throw Error("radius must be positive");
    RadialSolution s;
    s.n = n;
    s.p = p;
    s.v = {n, R, std::vector<double>(nodes, 0.0)};
    s.slope = {n, R, std::vector<double>(nodes, 0.0)};
    const double sphere = unit_sphere_area(n);
    for (std::size_t i = 1; i < nodes; ++i) {
        const double r = s.v.r(i);
        const double G = std::max(0.0, ball_mass(r)) / (sphere * std::pow(r, n - 1));
        s.slope.values[i] = p == 2.0 ? G : std::pow(G, 1.0 / (p - 1.0));
    }
    const double dr = s.v.step();
    for (std::size_t i = nodes - 1; i-- > 0;)
        s.v.values[i] = s.v.values[i + 1] + 0.5 * dr * (s.slope.values[i] + s.slope.values[i + 1]);
    return s;
}

} // namespace detail

/// Datum given as a decreasing profile f*(s); the flux integral is the exact
/// concentration of the step profile.
inline RadialSolution solve_radial_plaplacian(const StepProfile& fstar, int n, double p, double R,
                                              std::size_t nodes = 1024)
{
    if (!(p > 1.0)) throw Error("exponent out of range");
    const double vol = unit_ball_volume(n) * std::pow(R, n);
    if (std::abs(fstar.total() - vol) > 1e-9 * vol) throw Error("incompatible profile");
    const double w = unit_ball_volume(n);
    return detail::radial_from_mass(
        [&](double r) { return fstar.concentration(std::min(fstar.total(), w * std::pow(r, n))); }, n, p, R, nodes);
}

inline RadialSolution solve_radial_poisson(const StepProfile& fstar, int n, double R, std::size_t nodes = 1024)
{
    return solve_radial_plaplacian(fstar, n, 2.0, R, nodes);
}

/// Datum given as a radial function f(r) on [0, R]; ball masses by
/// composite Gauss-Legendre quadrature.
inline RadialSolution solve_radial_plaplacian(const std::function<double(double)>& f_of_r, int n, double p, double R,
                                              std::size_t nodes = 1024)
{
    if (!(p > 1.0)) throw Error("exponent out of range");
    const double sphere = unit_sphere_area(n);
    const double dr = R / static_cast<double>(nodes - 1);
    // cumulative masses at the radial nodes
    std::vector<double> cum(nodes, 0.0);
    for (std::size_t i = 1; i < nodes; ++i) {
        const double a = (i - 1) * dr, b = i * dr;
        cum[i] = cum[i - 1] + boost::math::quadrature::gauss<double, 10>::integrate(
                                  [&](double t) { return f_of_r(t) * sphere * std::pow(t, n - 1); }, a, b);
    }
    return detail::radial_from_mass(
        [&](double r) {
            const auto i = static_cast<std::size_t>(std::llround(r / dr));
            return cum[std::min(i, nodes - 1)];
        },
        n, p, R, nodes);
}

} // namespace rearr
