#pragma once

// The restricted X-ray transform along the moment-curve line complex
//
//   X f(x)  = int_I f(gamma(x, s)) ds
//   X* g(y) = int_R g(gamma_star(y, t)) dt     (R truncated to a window)
//
// and the bilinear form T(E, F) = <X chi_E, chi_F>. On box unions every
// line fiber {s : gamma(x, s) in E} is computed exactly; only outer
// integrals over F (or E) are quadratures.

#include "momentray/geometry.hpp"
#include "momentray/lorentz.hpp"
#include "momentray/sets.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace momentray {

struct QuadSpec {
    enum class Method { Midpoint, MonteCarlo };

    Method method = Method::Midpoint;
    /// Target cell width per axis for midpoint quadrature (and for the 1-D
    /// s/t rule used on grid functions).
    double step = 1.0 / 64.0;
    /// Lower bound on cells per axis per box, so thin boxes are resolved.
    int min_cells = 16;
    /// Monte Carlo samples per unit of (relative) volume; see bilinear_form.
    std::int64_t samples = 200000;
    std::uint64_t seed = 1;
    /// Midpoint cells are split (up to adapt_depth times) while the cell
    /// value and its sub-cell average differ by more than adapt_tol times
    /// the coarse total per unit volume. 0 disables the splitting.
    double adapt_tol = 1e-4;
    int adapt_depth = 4;
    /// Integration window for the dual transform. Unset: use the first-axis
    /// projection of the integrand's support.
    std::optional<Interval> window;

    /// Midpoint for d <= 4, seeded Monte Carlo for d >= 5.
    static QuadSpec defaults(Dim dim);
    /// Halved step, doubled minimum cell count, quartered adapt_tol.
    QuadSpec refined() const;
};

/// Sampled function on a uniform grid, multilinear between nodes and zero
/// outside the grid box.
class GridFunction {
   public:
    GridFunction(Point origin, Eigen::VectorXd spacing, std::vector<int> nodes,
                 std::vector<double> values);

    /// Samples `fn` at the grid nodes.
    template <typename Fn>
    static GridFunction sample(const Box& box, std::vector<int> nodes, Fn&& fn);

    int dim() const { return static_cast<int>(origin_.size()); }
    double operator()(const Point& x) const;
    Box support() const;

   private:
    Point origin_;
    Eigen::VectorXd spacing_;
    std::vector<int> nodes_;
    std::vector<double> values_;  // row-major, last axis fastest
};

/// Exact {s in range : gamma(x, s) in E}, or with dual = true
/// {t in range : gamma_star(x, t) in E}.
FiberSet line_fiber(const BoxUnionSet& E, const Point& x, Interval range, bool dual);

/// |line_fiber(E, x, range, dual)|, summed box by box without materializing.
double fiber_length(const BoxUnionSet& E, const Point& x, Interval range, bool dual);

/// X chi_E (x) with s over I; exact.
inline double xray_indicator(const BoxUnionSet& E, const Interval& I, const Point& x) {
    return fiber_length(E, x, I, false);
}

/// X* chi_F (y) with t over the window; exact.
inline double xray_star_indicator(const BoxUnionSet& F, const Interval& window, const Point& y) {
    return fiber_length(F, y, window, true);
}

double apply_x(const SimpleFunction& f, const Interval& I, const Point& x);
double apply_x(const GridFunction& f, const Interval& I, const Point& x, const QuadSpec& quad);

/// Throws DomainError when quad.window does not contain the first-axis
/// projection of g's support.
double apply_x_star(const SimpleFunction& g, const Point& y, const QuadSpec& quad);
double apply_x_star(const GridFunction& g, const Point& y, const QuadSpec& quad);

/// Window for the dual transform of a set: quad.window when set (validated
/// to cover F's first-axis projection), else that projection.
Interval dual_window(const BoxUnionSet& F, const QuadSpec& quad);

/// T(E, F) = int_F X chi_E. Midpoint: per F box, tensor midpoint over the
/// first d - 1 axes and exact integration along the last one.
double bilinear_form(const BoxUnionSet& E, const BoxUnionSet& F, const Interval& I,
                     const QuadSpec& quad);

/// The same pairing through the dual: int_{E, y1 in I} X* chi_F (y) dy.
double bilinear_form_dual(const BoxUnionSet& E, const BoxUnionSet& F, const Interval& I,
                          const QuadSpec& quad);

struct SuperlevelSet {
    Box grid_box;
    int cells_per_axis = 0;
    double theta = 0.0;
    double inner_measure = 0.0;  // cells with center and every corner >= theta
    double outer_measure = 0.0;  // cells with some sample >= theta
    BoxUnionSet inner;           // inner cells clipped to the region
    double min_inner_value = 0.0;  // smallest sample value over inner cells
    double max_cell_min = 0.0;     // largest per-cell sample minimum
};

/// {x in region : X chi_E (x) >= theta} on a grid over region's bounding
/// box; with dual = true, {y in region : X* chi_E (y) >= theta} with t over
/// `range`. `range` is I for the primal transform.
SuperlevelSet superlevel_set(const BoxUnionSet& E, const BoxUnionSet& region, const Interval& range,
                             double theta, int cells_per_axis, bool dual = false);

struct SuperlevelReport {
    double T = 0.0;            // grid T(E, F) from cell-center values
    double epsilon = 0.0;      // T / (|E|^{1/p} |F|^{1/q'})
    double c0 = 0.0;           // largest c0 with T(E, F \ G) <= T / 2
    double theta = 0.0;        // c0 eps |E|^{1/p} |F|^{1/q' - 1}
    double outside_T = 0.0;    // T(E, F \ G) at the chosen c0
    double g_inner = 0.0, g_outer = 0.0;
    double constant_inner = 0.0;  // |G|_inner / (eps^{q'} |F|)
    double constant_outer = 0.0;
};

/// Superlevel construction for one pair: bisects c0 until
/// T(E, F \ G) <= T(E, F) / 2, then measures |G| against eps^{q'} |F|.
SuperlevelReport superlevel_construction(const BoxUnionSet& E, const BoxUnionSet& F, const Interval& I,
                         int cells_per_axis);

template <typename Fn>
GridFunction GridFunction::sample(const Box& box, std::vector<int> nodes, Fn&& fn) {
    const int d = box.dim();
    Eigen::VectorXd spacing(d);
    std::size_t total = 1;
    for (int i = 0; i < d; ++i) {
        if (nodes[i] < 2) throw DomainError("GridFunction: need >= 2 nodes per axis");
        spacing(i) = (box.hi(i) - box.lo(i)) / (nodes[i] - 1);
        total *= static_cast<std::size_t>(nodes[i]);
    }
    std::vector<double> values(total);
    std::vector<int> idx(d, 0);
    Point x(d);
    for (std::size_t n = 0; n < total; ++n) {
        std::size_t rem = n;
        for (int i = d - 1; i >= 0; --i) {
            idx[i] = static_cast<int>(rem % nodes[i]);
            rem /= nodes[i];
            x(i) = box.lo(i) + idx[i] * spacing(i);
        }
        values[n] = fn(x);
    }
    return GridFunction(box.lo, spacing, std::move(nodes), std::move(values));
}

}  // namespace momentray
