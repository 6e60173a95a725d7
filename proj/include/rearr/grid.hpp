#pragma once

// Masked Cartesian grids, cell-centred grid functions, midpoint quadrature
// and finite-difference gradients.

#include "rearr/numeric.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <memory>
#include <optional>
#include <ostream>
#include <queue>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

namespace rearr {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

/// Axis-aligned box; `dim` selects whether the y entries are meaningful.
struct Box {
    int dim = 2;
    std::array<double, 2> lo{0.0, 0.0};
    std::array<double, 2> hi{0.0, 0.0};
};

/// Partition z = (x, y) with x in R^n, y in R^m. Axis 0 is always an
/// x-axis; for (1, 1) axis 1 is the y-axis.
struct Split {
    int n = 1;
    int m = 0;
    friend bool operator==(const Split&, const Split&) = default;
};

// ---- shapes ---------------------------------------------------------------

struct Rectangle {
    Point lo, hi;
};
struct Disk {
    Point center;
    double radius = 1.0;
};
struct Annulus {
    Point center;
    double inner = 0.5;
    double outer = 1.0;
};
/// Box minus its upper-right quadrant.
struct LShape {
    Point lo{0.0, 0.0}, hi{1.0, 1.0};
};
struct Polygon {
    std::vector<Point> vertices;
};
/// Row-major occupancy with `nx * ny` entries, laid out from the box corner.
struct ExplicitMask {
    int nx = 0;
    int ny = 1;
    std::vector<std::uint8_t> cells;
};

using Shape = std::variant<Rectangle, Disk, Annulus, LShape, Polygon, ExplicitMask>;

/// Rectangle of half-widths (hw, hh) rotated by `angle` radians about `center`.
inline Polygon tilted_rectangle(Point center, double hw, double hh, double angle)
{
    const double c = std::cos(angle), s = std::sin(angle);
    Polygon poly;
    for (auto [a, b] : {std::pair{-hw, -hh}, {hw, -hh}, {hw, hh}, {-hw, hh}})
        poly.vertices.push_back({center.x + c * a - s * b, center.y + s * a + c * b});
    return poly;
}

namespace detail {

inline bool polygon_contains(const Polygon& poly, Point p)
{
    bool inside = false;
    const auto& v = poly.vertices;
    for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
        if ((v[i].y > p.y) != (v[j].y > p.y)) {
            const double xc = v[j].x + (p.y - v[j].y) * (v[i].x - v[j].x) / (v[i].y - v[j].y);
            if (p.x < xc) inside = !inside;
        }
    }
    return inside;
}

} // namespace detail

/// Point-in-shape predicate. In one dimension only the x coordinate is used
/// and discs/annuli become intervals.
inline bool shape_contains(const Shape& shape, Point p, int dim)
{
    struct Visitor {
        Point p;
        int dim;
        bool operator()(const Rectangle& r) const
        {
            const bool in_x = p.x >= r.lo.x && p.x <= r.hi.x;
            return dim == 1 ? in_x : in_x && p.y >= r.lo.y && p.y <= r.hi.y;
        }
        bool operator()(const Disk& d) const
        {
            const double dx = p.x - d.center.x, dy = dim == 1 ? 0.0 : p.y - d.center.y;
            return dx * dx + dy * dy <= d.radius * d.radius;
        }
        bool operator()(const Annulus& a) const
        {
            const double dx = p.x - a.center.x, dy = dim == 1 ? 0.0 : p.y - a.center.y;
            const double r2 = dx * dx + dy * dy;
            return r2 >= a.inner * a.inner && r2 <= a.outer * a.outer;
        }
        bool operator()(const LShape& l) const
        {
            if (dim != 2) throw Error("L-shape requires two dimensions");
            if (p.x < l.lo.x || p.x > l.hi.x || p.y < l.lo.y || p.y > l.hi.y) return false;
            const double mx = 0.5 * (l.lo.x + l.hi.x), my = 0.5 * (l.lo.y + l.hi.y);
            return !(p.x > mx && p.y > my);
        }
        bool operator()(const Polygon& poly) const
        {
            if (dim != 2) throw Error("polygon requires two dimensions");
            if (poly.vertices.size() < 3) return false;
            return detail::polygon_contains(poly, p);
        }
        bool operator()(const ExplicitMask&) const
        {
            throw Error("explicit masks have no point predicate");
        }
    };
    return std::visit(Visitor{p, dim}, shape);
}

/// Tight bounding box of a shape (explicit masks need the grid spacing).
inline Box bounding_box(const Shape& shape, int dim, double h = 0.0)
{
    Box b;
    b.dim = dim;
    auto set = [&](double x0, double y0, double x1, double y1) {
        b.lo = {x0, dim == 1 ? 0.0 : y0};
        b.hi = {x1, dim == 1 ? 0.0 : y1};
    };
    if (auto* r = std::get_if<Rectangle>(&shape)) set(r->lo.x, r->lo.y, r->hi.x, r->hi.y);
    else if (auto* d = std::get_if<Disk>(&shape))
        set(d->center.x - d->radius, d->center.y - d->radius, d->center.x + d->radius, d->center.y + d->radius);
    else if (auto* a = std::get_if<Annulus>(&shape))
        set(a->center.x - a->outer, a->center.y - a->outer, a->center.x + a->outer, a->center.y + a->outer);
    else if (auto* l = std::get_if<LShape>(&shape)) set(l->lo.x, l->lo.y, l->hi.x, l->hi.y);
    else if (auto* p = std::get_if<Polygon>(&shape)) {
        if (p->vertices.empty()) throw Error("degenerate domain");
        double x0 = p->vertices[0].x, x1 = x0, y0 = p->vertices[0].y, y1 = y0;
        for (auto v : p->vertices) {
            x0 = std::min(x0, v.x), x1 = std::max(x1, v.x);
            y0 = std::min(y0, v.y), y1 = std::max(y1, v.y);
        }
        set(x0, y0, x1, y1);
    } else {
        const auto& m = std::get<ExplicitMask>(shape);
        set(0.0, 0.0, m.nx * h, m.ny * h);
    }
    return b;
}

// ---- grid -----------------------------------------------------------------

/// Neighbour directions: -x, +x, -y, +y.
enum class Dir : int { xm = 0, xp = 1, ym = 2, yp = 3 };

/// Uniform cell-centred grid with an occupancy mask. Cell (i, j) has centre
/// origin + (i + 1/2, j + 1/2) h. Immutable after construction.
///
/// For every link from an active cell to an inactive neighbour the grid
/// stores the fraction theta in (0, 1] of the centre-to-centre distance at
/// which the domain boundary is crossed; the Poisson discretisation uses it.
class MaskedGrid {
public:
    MaskedGrid(int dim, double h, std::array<double, 2> origin, std::array<int, 2> extents,
               std::vector<std::uint8_t> mask, std::optional<Split> split = std::nullopt,
               std::vector<std::array<double, 4>> boundary_theta = {})
        : dim_(dim), h_(h), origin_(origin), extents_(extents), mask_(std::move(mask)), split_(split)
    {
        if (dim_ != 1 && dim_ != 2) throw Error("unsupported dimension");
        if (!(h_ > 0.0) || !std::isfinite(h_)) throw Error("spacing must be positive");
        if (dim_ == 1) extents_[1] = 1, origin_[1] = 0.0;
        if (extents_[0] < 1 || extents_[1] < 1) throw Error("degenerate domain");
        if (mask_.size() != static_cast<std::size_t>(extents_[0]) * extents_[1])
            throw Error("mask size does not match extents");
        if (split_) {
            if (split_->n < 1 || split_->m < 0 || split_->n + split_->m != dim_ || split_->n > 2)
                throw Error("invalid codimension split");
        }
        id_of_.assign(mask_.size(), -1);
        for (std::size_t c = 0; c < mask_.size(); ++c) {
            if (mask_[c]) {
                id_of_[c] = static_cast<int>(active_.size());
                active_.push_back(static_cast<int>(c));
            }
        }
        if (active_.empty()) throw Error("degenerate domain");
        if (boundary_theta.empty()) {
            theta_.assign(active_.size(), {1.0, 1.0, 1.0, 1.0});
            for (std::size_t a = 0; a < active_.size(); ++a)
                for (int d = 0; d < 2 * dim_; ++d)
                    if (neighbor(static_cast<int>(a), static_cast<Dir>(d)) < 0) theta_[a][d] = 0.5;
        } else {
            if (boundary_theta.size() != active_.size()) throw Error("boundary data size mismatch");
            theta_ = std::move(boundary_theta);
        }
    }

    int dim() const { return dim_; }
    double h() const { return h_; }
    std::array<double, 2> origin() const { return origin_; }
    std::array<int, 2> extents() const { return extents_; }
    const std::vector<std::uint8_t>& mask() const { return mask_; }
    const std::optional<Split>& split() const { return split_; }

    std::size_t cell_count() const { return mask_.size(); }
    std::size_t active_count() const { return active_.size(); }
    double cell_volume() const { return dim_ == 1 ? h_ : h_ * h_; }
    double measure() const { return static_cast<double>(active_.size()) * cell_volume(); }

    /// Active id of cell (i, j); -1 when outside the extents or inactive.
    int active_id(int i, int j = 0) const
    {
        if (i < 0 || j < 0 || i >= extents_[0] || j >= extents_[1]) return -1;
        return id_of_[static_cast<std::size_t>(i) + static_cast<std::size_t>(extents_[0]) * j];
    }
    std::array<int, 2> cell_of(int id) const
    {
        const int c = active_[id];
        return {c % extents_[0], c / extents_[0]};
    }
    int linear_index(int id) const { return active_[id]; }

    Point cell_center(int i, int j) const
    {
        return {origin_[0] + (i + 0.5) * h_, dim_ == 1 ? 0.0 : origin_[1] + (j + 0.5) * h_};
    }
    Point center(int id) const
    {
        auto [i, j] = cell_of(id);
        return cell_center(i, j);
    }

    int neighbor(int id, Dir d) const
    {
        auto [i, j] = cell_of(id);
        switch (d) {
        case Dir::xm: return active_id(i - 1, j);
        case Dir::xp: return active_id(i + 1, j);
        case Dir::ym: return dim_ == 2 ? active_id(i, j - 1) : -1;
        case Dir::yp: return dim_ == 2 ? active_id(i, j + 1) : -1;
        }
        return -1;
    }
    double boundary_theta(int id, Dir d) const { return theta_[id][static_cast<int>(d)]; }

    /// Same geometry and mask (boundary fractions and split ignored).
    bool same_layout(const MaskedGrid& o) const
    {
        return dim_ == o.dim_ && h_ == o.h_ && origin_ == o.origin_ && extents_ == o.extents_ &&
               mask_ == o.mask_;
    }

    /// Copy with a different codimension split.
    MaskedGrid with_split(std::optional<Split> s) const
    {
        return MaskedGrid(dim_, h_, origin_, extents_, mask_, s, theta_);
    }

    /// True when the active cells form one 4-connected component.
    bool connected() const
    {
        std::vector<char> seen(active_.size(), 0);
        std::queue<int> q;
        q.push(0);
        seen[0] = 1;
        std::size_t count = 1;
        while (!q.empty()) {
            const int a = q.front();
            q.pop();
            for (int d = 0; d < 2 * dim_; ++d) {
                const int b = neighbor(a, static_cast<Dir>(d));
                if (b >= 0 && !seen[b]) seen[b] = 1, ++count, q.push(b);
            }
        }
        return count == active_.size();
    }

private:
    int dim_;
    double h_;
    std::array<double, 2> origin_;
    std::array<int, 2> extents_;
    std::vector<std::uint8_t> mask_;
    std::optional<Split> split_;
    std::vector<int> active_;
    std::vector<int> id_of_;
    std::vector<std::array<double, 4>> theta_;
};

using GridPtr = std::shared_ptr<const MaskedGrid>;

/// Builds the grid whose active cells are those with centre inside `shape`.
/// Extents are ceil((hi - lo) / h) per axis starting at bbox.lo.
inline GridPtr make_masked_grid(const Box& bbox, double h, const Shape& shape,
                                std::optional<Split> split = std::nullopt)
{
    const int dim = bbox.dim;
    if (dim != 1 && dim != 2) throw Error("unsupported dimension");
    if (!(h > 0.0)) throw Error("spacing must be positive");
    std::array<int, 2> ext{1, 1};
    for (int a = 0; a < dim; ++a) {
        const double len = bbox.hi[a] - bbox.lo[a];
        if (!(len > 0.0)) throw Error("degenerate domain");
        if (h > len) throw Error("resolution too coarse");
        ext[a] = std::max(1, static_cast<int>(std::ceil(len / h - 1e-9)));
    }
    const std::array<double, 2> origin{bbox.lo[0], dim == 1 ? 0.0 : bbox.lo[1]};

    if (auto* em = std::get_if<ExplicitMask>(&shape)) {
        if (em->nx != ext[0] || (dim == 2 && em->ny != ext[1]) ||
            em->cells.size() != static_cast<std::size_t>(em->nx) * em->ny)
            throw Error("explicit mask does not match the box");
        bool any = false;
        for (auto c : em->cells) any = any || c;
        if (!any) throw Error("degenerate domain");
        return std::make_shared<const MaskedGrid>(dim, h, origin, ext, em->cells, split);
    }

    std::vector<std::uint8_t> mask(static_cast<std::size_t>(ext[0]) * ext[1], 0);
    auto center = [&](int i, int j) {
        return Point{origin[0] + (i + 0.5) * h, dim == 1 ? 0.0 : origin[1] + (j + 0.5) * h};
    };
    bool any = false;
    for (int j = 0; j < ext[1]; ++j)
        for (int i = 0; i < ext[0]; ++i)
            if (shape_contains(shape, center(i, j), dim)) {
                mask[static_cast<std::size_t>(i) + static_cast<std::size_t>(ext[0]) * j] = 1;
                any = true;
            }
    if (!any) throw Error("degenerate domain");

    // Boundary crossing fractions along links to inactive neighbours.
    auto is_active = [&](int i, int j) {
        return i >= 0 && j >= 0 && i < ext[0] && j < ext[1] &&
               mask[static_cast<std::size_t>(i) + static_cast<std::size_t>(ext[0]) * j];
    };
    std::vector<std::array<double, 4>> theta;
    constexpr std::array<std::array<int, 2>, 4> step{{{-1, 0}, {1, 0}, {0, -1}, {0, 1}}};
    for (int j = 0; j < ext[1]; ++j)
        for (int i = 0; i < ext[0]; ++i) {
            if (!is_active(i, j)) continue;
            std::array<double, 4> t{1.0, 1.0, 1.0, 1.0};
            for (int d = 0; d < 2 * dim; ++d) {
                const int ni = i + step[d][0], nj = j + step[d][1];
                if (is_active(ni, nj)) continue;
                const Point a = center(i, j), b = center(ni, nj);
                double lo = 0.0, hi = 1.0;
                for (int it = 0; it < 50; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    const Point p{a.x + mid * (b.x - a.x), a.y + mid * (b.y - a.y)};
                    (shape_contains(shape, p, dim) ? lo : hi) = mid;
                }
                t[d] = std::clamp(0.5 * (lo + hi), 1e-3, 1.0);
            }
            theta.push_back(t);
        }
    return std::make_shared<const MaskedGrid>(dim, h, origin, ext, std::move(mask), split, std::move(theta));
}

/// Convenience overload using the shape's own bounding box.
inline GridPtr make_masked_grid(const Shape& shape, double h, int dim = 2,
                                std::optional<Split> split = std::nullopt)
{
    return make_masked_grid(bounding_box(shape, dim, h), h, shape, split);
}

// ---- grid functions -------------------------------------------------------

/// Real values on the active cells of a grid, zero outside the mask.
class GridFunction {
public:
    GridFunction() = default;
    GridFunction(GridPtr grid, std::vector<double> values) : grid_(std::move(grid)), values_(std::move(values))
    {
        if (!grid_) throw Error("grid function without grid");
        if (values_.size() != grid_->active_count()) throw Error("value count does not match active cells");
        for (double v : values_)
            if (!std::isfinite(v)) throw Error("non-finite value");
    }

    static GridFunction zeros(GridPtr grid)
    {
        const auto n = grid->active_count();
        return GridFunction(std::move(grid), std::vector<double>(n, 0.0));
    }

    template <class F>
    static GridFunction sample(GridPtr grid, F&& f)
    {
        std::vector<double> v(grid->active_count());
        for (std::size_t a = 0; a < v.size(); ++a) v[a] = f(grid->center(static_cast<int>(a)));
        return GridFunction(std::move(grid), std::move(v));
    }

    const MaskedGrid& grid() const { return *grid_; }
    const GridPtr& grid_ptr() const { return grid_; }
    const std::vector<double>& values() const { return values_; }
    std::size_t size() const { return values_.size(); }
    double operator[](std::size_t id) const { return values_[id]; }

    /// Zero-extended lookup by cell index.
    double at(int i, int j = 0) const
    {
        const int id = grid_->active_id(i, j);
        return id < 0 ? 0.0 : values_[id];
    }

    double max() const
    {
        double m = 0.0;
        for (double v : values_) m = std::max(m, v);
        return m;
    }
    bool nonnegative() const
    {
        for (double v : values_)
            if (v < 0.0) return false;
        return true;
    }
    void require_nonnegative() const
    {
        if (!nonnegative()) throw Error("function must be nonnegative");
    }

    GridFunction scaled(double s) const
    {
        auto v = values_;
        for (double& x : v) x *= s;
        return GridFunction(grid_, std::move(v));
    }

private:
    GridPtr grid_;
    std::vector<double> values_;
};

inline bool same_grid(const GridFunction& a, const GridFunction& b)
{
    return a.grid_ptr() == b.grid_ptr() || a.grid().same_layout(b.grid());
}

/// One array per axis, over the active cells.
struct VectorField {
    GridPtr grid;
    std::vector<std::vector<double>> components;

    double norm_at(std::size_t id) const
    {
        double s = 0.0;
        for (const auto& c : components) s += c[id] * c[id];
        return std::sqrt(s);
    }
    double max_norm() const
    {
        double m = 0.0;
        for (std::size_t a = 0; a < grid->active_count(); ++a) m = std::max(m, norm_at(a));
        return m;
    }
};

/// Midpoint rule: sum of values times h^dim.
inline double integrate(const GridFunction& f)
{
    double s = 0.0;
    for (double v : f.values()) s += v;
    return s * f.grid().cell_volume();
}

/// Central differences where both axis neighbours are active; where a
/// neighbour is inactive the one-sided difference towards it uses the zero
/// extension. A cell with both neighbours inactive gets a zero component.
inline VectorField gradient_fd(const GridFunction& f)
{
    const auto& g = f.grid();
    const double h = g.h();
    VectorField out{f.grid_ptr(), std::vector<std::vector<double>>(g.dim(), std::vector<double>(g.active_count()))};
    for (int a = 0; a < static_cast<int>(g.active_count()); ++a) {
        for (int axis = 0; axis < g.dim(); ++axis) {
            const int lo = g.neighbor(a, axis == 0 ? Dir::xm : Dir::ym);
            const int hi = g.neighbor(a, axis == 0 ? Dir::xp : Dir::yp);
            const double c = f[a];
            double d;
            if (lo >= 0 && hi >= 0) d = (f[hi] - f[lo]) / (2.0 * h);
            else if (lo >= 0) d = (0.0 - c) / h;
            else if (hi >= 0) d = (c - 0.0) / h;
            else d = 0.0;
            out.components[axis][a] = d;
        }
    }
    return out;
}

/// Largest finite-difference gradient norm; the Lipschitz estimate used by
/// the tolerance models.
inline double lipschitz_estimate(const GridFunction& f) { return gradient_fd(f).max_norm(); }

// ---- text serialisation ---------------------------------------------------

inline std::string format_real(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

/// Header `dim h extents... origin...`, then one `index mask value` row per
/// cell in linear order (inactive cells carry value 0).
inline void write_grid_function(std::ostream& os, const GridFunction& f)
{
    const auto& g = f.grid();
    os << g.dim() << ' ' << format_real(g.h());
    for (int a = 0; a < g.dim(); ++a) os << ' ' << g.extents()[a];
    for (int a = 0; a < g.dim(); ++a) os << ' ' << format_real(g.origin()[a]);
    os << '\n';
    std::size_t next = 0;
    for (std::size_t c = 0; c < g.cell_count(); ++c) {
        const bool act = g.mask()[c] != 0;
        os << c << ' ' << (act ? 1 : 0) << ' ' << format_real(act ? f[next] : 0.0) << '\n';
        if (act) ++next;
    }
}

/// Inverse of write_grid_function; origin fields are optional (default 0).
inline GridFunction read_grid_function(std::istream& is, std::optional<Split> split = std::nullopt)
{
    std::string header;
    if (!std::getline(is, header)) throw Error("empty grid file");
    std::istringstream hs(header);
    int dim = 0;
    double h = 0.0;
    if (!(hs >> dim >> h) || (dim != 1 && dim != 2)) throw Error("bad grid header");
    std::array<int, 2> ext{1, 1};
    for (int a = 0; a < dim; ++a)
        if (!(hs >> ext[a])) throw Error("bad grid header");
    std::array<double, 2> origin{0.0, 0.0};
    for (int a = 0; a < dim; ++a)
        if (!(hs >> origin[a])) origin[a] = 0.0;
    const std::size_t n = static_cast<std::size_t>(ext[0]) * ext[1];
    std::vector<std::uint8_t> mask(n, 0);
    std::vector<double> all(n, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
        std::size_t idx;
        int m;
        double v;
        if (!(is >> idx >> m >> v) || idx >= n) throw Error("bad grid row");
        mask[idx] = m ? 1 : 0;
        all[idx] = v;
    }
    auto grid = std::make_shared<const MaskedGrid>(dim, h, origin, ext, mask, split);
    std::vector<double> vals;
    for (std::size_t c = 0; c < n; ++c)
        if (mask[c]) vals.push_back(all[c]);
    return GridFunction(grid, std::move(vals));
}

} // namespace rearr
