#pragma once

// Dirichlet Poisson problems on masked grids: five-point stencil with a
// symmetric cut-link boundary treatment, solved by Jacobi-preconditioned
// conjugate gradients.

#include "rearr/grid.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace rearr {

/// Symmetric sparse matrix in compressed rows.
struct SparseMatrix {
    std::size_t n = 0;
    std::vector<std::size_t> row_start;
    std::vector<int> col;
    std::vector<double> val;
    std::vector<double> diag;

    void multiply(const std::vector<double>& x, std::vector<double>& y) const
    {
        for (std::size_t r = 0; r < n; ++r) {
            double s = 0.0;
            for (std::size_t k = row_start[r]; k < row_start[r + 1]; ++k) s += val[k] * x[col[k]];
            y[r] = s;
        }
    }
};

struct LinearSystem {
    SparseMatrix matrix;
    std::vector<double> rhs;
};

/// h^2 times the discrete -Laplacian. A link to an inactive neighbour whose
/// boundary crossing lies at fraction theta contributes 1/theta to the
/// diagonal (zero Dirichlet value at the crossing point); theta = 1/2 puts
/// the boundary on the cell face.
inline SparseMatrix assemble_laplacian(const MaskedGrid& g)
{
    SparseMatrix A;
    A.n = g.active_count();
    A.row_start.push_back(0);
    A.diag.resize(A.n);
    for (int a = 0; a < static_cast<int>(A.n); ++a) {
        double d = 0.0;
        std::vector<std::pair<int, double>> row;
        for (int k = 0; k < 2 * g.dim(); ++k) {
            const auto dir = static_cast<Dir>(k);
            const int b = g.neighbor(a, dir);
            if (b >= 0) {
                d += 1.0;
                row.push_back({b, -1.0});
            } else {
                d += 1.0 / g.boundary_theta(a, dir);
            }
        }
        row.push_back({a, d});
        std::sort(row.begin(), row.end());
        for (auto [c, v] : row) A.col.push_back(c), A.val.push_back(v);
        A.row_start.push_back(A.col.size());
        A.diag[a] = d;
    }
    return A;
}

struct CgResult {
    std::vector<double> x;
    int iterations = 0;
    double relative_residual = 0.0;
};

/// Jacobi-preconditioned CG to relative residual `tol`; the iteration cap is
/// 50 sqrt(n) ln(1/tol).
inline CgResult conjugate_gradient(const SparseMatrix& A, const std::vector<double>& b, double tol = 1e-10)
{
    const std::size_t n = A.n;
    CgResult out;
    out.x.assign(n, 0.0);
    double bnorm = 0.0;
    for (double v : b) bnorm += v * v;
    bnorm = std::sqrt(bnorm);
    if (bnorm == 0.0) return out;

    const int cap = static_cast<int>(50.0 * std::sqrt(static_cast<double>(n)) * std::log(1.0 / tol)) + 10;
    std::vector<double> r = b, z(n), p(n), q(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / A.diag[i];
    p = z;
    double rz = 0.0;
    for (std::size_t i = 0; i < n; ++i) rz += r[i] * z[i];

    for (int it = 1; it <= cap; ++it) {
        A.multiply(p, q);
        double pq = 0.0;
        for (std::size_t i = 0; i < n; ++i) pq += p[i] * q[i];
        if (!(pq > 0.0)) throw Error("solver stalled"); // breakdown: A is not positive definite
        const double alpha = rz / pq;
        double rr = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            out.x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
            rr += r[i] * r[i];
        }
        out.iterations = it;
        out.relative_residual = std::sqrt(rr) / bnorm;
        if (out.relative_residual <= tol) return out;
        double rz_new = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            z[i] = r[i] / A.diag[i];
            rz_new += r[i] * z[i];
        }
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    throw Error("solver stalled");
}

inline LinearSystem poisson_system(const MaskedGrid& g, const GridFunction& f)
{
    LinearSystem s{assemble_laplacian(g), f.values()};
    const double h2 = g.h() * g.h();
    for (double& v : s.rhs) v *= h2;
    return s;
}

struct PoissonSolution {
    GridFunction u;
    int iterations = 0;
    double relative_residual = 0.0;
};

/// -Laplace(u) = f in the masked domain, u = 0 on its boundary.
inline PoissonSolution solve_poisson(const GridFunction& f, double tol = 1e-10)
{
    const auto& g = f.grid();
    f.require_nonnegative();
    if (!g.connected()) throw Error("disconnected domain");
    const auto sys = poisson_system(g, f);
    auto cg = conjugate_gradient(sys.matrix, sys.rhs, tol);
    return {GridFunction(f.grid_ptr(), std::move(cg.x)), cg.iterations, cg.relative_residual};
}

inline GridFunction solve_poisson_masked(const GridPtr& grid, const GridFunction& f)
{
    if (!f.grid().same_layout(*grid)) throw Error("incompatible grids");
    return solve_poisson(GridFunction(grid, f.values())).u;
}

/// Same discretisation on the symmetrised domain Omega^#.
inline GridFunction solve_steiner_problem(const GridPtr& omega_sharp, const GridFunction& f_sharp)
{
    return solve_poisson_masked(omega_sharp, f_sharp);
}

} // namespace rearr
