#include "momentray/xray.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace momentray {

namespace {

/// Up to a handful of disjoint sorted intervals; no allocation.
class SmallFiber {
   public:
    static constexpr int kCapacity = 32;

    SmallFiber() = default;
    explicit SmallFiber(double lo, double hi) {
        if (lo <= hi) push(lo, hi);
    }

    int size() const { return n_; }
    bool empty() const { return n_ == 0; }
    double lo(int i) const { return lo_[i]; }
    double hi(int i) const { return hi_[i]; }

    double measure() const {
        double m = 0.0;
        for (int i = 0; i < n_; ++i) m += hi_[i] - lo_[i];
        return m;
    }

    void intersect(const SmallFiber& o) {
        SmallFiber out;
        int i = 0, j = 0;
        while (i < n_ && j < o.n_) {
            const double lo = std::max(lo_[i], o.lo_[j]);
            const double hi = std::min(hi_[i], o.hi_[j]);
            if (lo <= hi) out.push(lo, hi);
            if (hi_[i] < o.hi_[j])
                ++i;
            else
                ++j;
        }
        *this = out;
    }

    void push(double lo, double hi) {
        if (n_ == kCapacity) throw NumericalError("SmallFiber: capacity exceeded");
        lo_[n_] = lo;
        hi_[n_] = hi;
        ++n_;
    }

   private:
    std::array<double, kCapacity> lo_{}, hi_{};
    int n_ = 0;
};

double signed_root(double v, int m) {
    if (m == 1) return v;
    if (m == 3) return std::cbrt(v);
    if (m == 2) return std::sqrt(v);
    return std::copysign(std::pow(std::abs(v), 1.0 / m), v);
}

/// {u : L <= u^m <= U}.
SmallFiber monomial_preimage(double L, double U, int m) {
    if (L > U) return {};
    if (m == 1) return SmallFiber(L, U);
    if (m % 2 == 1) return SmallFiber(signed_root(L, m), signed_root(U, m));
    if (U < 0.0) return {};
    const double r1 = signed_root(std::max(L, 0.0), m);
    const double r2 = signed_root(U, m);
    SmallFiber f;
    if (r1 == 0.0) {
        f.push(-r2, r2);
    } else {
        f.push(-r2, -r1);
        f.push(r1, r2);
    }
    return f;
}

/// Primal fiber of one box restricted to the first `axes` coordinates.
SmallFiber primal_box_fiber(const Point& x, const Box& box, const Interval& range, int axes) {
    double lo = std::max(range.lo, box.lo(0));
    double hi = std::min(range.hi, box.hi(0));
    if (lo > hi) return {};
    double c = x(0);
    for (int j = 1; j < axes; ++j, c *= x(0)) {
        if (c == 0.0) {
            if (x(j) < box.lo(j) || x(j) > box.hi(j)) return {};
            continue;
        }
        double l = (box.lo(j) - x(j)) / c;
        double h = (box.hi(j) - x(j)) / c;
        if (c < 0.0) std::swap(l, h);
        lo = std::max(lo, l);
        hi = std::min(hi, h);
        if (lo > hi) return {};
    }
    return SmallFiber(lo, hi);
}

/// Dual fiber of one box restricted to the first `axes` coordinates.
SmallFiber dual_box_fiber(const Point& y, const Box& box, const Interval& range, int axes) {
    SmallFiber f(std::max(range.lo, box.lo(0)), std::min(range.hi, box.hi(0)));
    const double y1 = y(0);
    for (int j = 1; j < axes && !f.empty(); ++j) {
        if (y1 == 0.0) {
            if (y(j) < box.lo(j) || y(j) > box.hi(j)) return {};
            continue;
        }
        double L = (y(j) - box.hi(j)) / y1;
        double U = (y(j) - box.lo(j)) / y1;
        if (y1 < 0.0) std::swap(L, U);
        f.intersect(monomial_preimage(L, U, j));
    }
    return f;
}

/// int_{u in J} |[z0, z1] cap [a + w(u), b + w(u)]| du with w(u) = coef u^m.
double exact_last_axis(const SmallFiber& J, double coef, int m, double a, double b, double z0,
                       double z1) {
    if (J.empty() || z1 <= z0) return 0.0;
    std::array<double, 16> breaks{};
    int nb = 0;
    if (coef != 0.0) {
        for (double w : {z1 - b, z0 - b, z0 - a, z1 - a}) {
            const double v = w / coef;
            if (m % 2 == 1) {
                breaks[nb++] = signed_root(v, m);
            } else if (v >= 0.0) {
                const double r = signed_root(v, m);
                breaks[nb++] = r;
                breaks[nb++] = -r;
            }
        }
        std::sort(breaks.begin(), breaks.begin() + nb);
    }
    double total = 0.0;
    for (int p = 0; p < J.size(); ++p) {
        double ua = J.lo(p);
        const double end = J.hi(p);
        int bi = 0;
        while (bi < nb && breaks[bi] <= ua) ++bi;
        while (ua < end) {
            const double ub = (bi < nb && breaks[bi] < end) ? breaks[bi++] : end;
            if (ub > ua) {
                const double um = 0.5 * (ua + ub);
                const double wm = coef * std::pow(um, m);
                double alpha = 0.0, beta = 0.0;
                if (b + wm < z1) {
                    alpha += b;
                    beta += 1.0;
                } else {
                    alpha += z1;
                }
                if (a + wm > z0) {
                    alpha -= a;
                    beta -= 1.0;
                } else {
                    alpha -= z0;
                }
                if (alpha + beta * wm > 0.0) {
                    total += alpha * (ub - ua);
                    if (beta != 0.0)
                        total += beta * coef *
                                 (std::pow(ub, m + 1) - std::pow(ua, m + 1)) / (m + 1);
                }
            }
            ua = ub;
        }
    }
    return total;
}

/// Row integral along the last axis z in [z0, z1] of the transform of
/// `target`, with the other coordinates of the point fixed in `x`.
double row_integral(const BoxUnionSet& target, Point& x, const Interval& range, bool dual,
                    double z0, double z1) {
    const int d = static_cast<int>(x.size());
    double sum = 0.0;
    for (const Box& box : target.boxes()) {
        if (!dual) {
            const SmallFiber J = primal_box_fiber(x, box, range, d - 1);
            if (J.empty()) continue;
            const double c = std::pow(x(0), d - 1);
            sum += exact_last_axis(J, -c, 1, box.lo(d - 1), box.hi(d - 1), z0, z1);
        } else {
            const SmallFiber J = dual_box_fiber(x, box, range, d - 1);
            if (J.empty()) continue;
            sum += exact_last_axis(J, x(0), d - 1, box.lo(d - 1), box.hi(d - 1), z0, z1);
        }
    }
    return sum;
}

/// Interval enclosure of [a, b]^k.
std::pair<double, double> interval_pow(double a, double b, int k) {
    const double pa = std::pow(a, k), pb = std::pow(b, k);
    if (k % 2 == 1) return {pa, pb};
    if (a <= 0.0 && b >= 0.0) return {0.0, std::max(pa, pb)};
    return {std::min(pa, pb), std::max(pa, pb)};
}

std::pair<double, double> interval_mul(double a, double b, double c, double e) {
    const double p[] = {a * c, a * e, b * c, b * e};
    return {*std::min_element(p, p + 4), *std::max_element(p, p + 4)};
}

/// Interval of v with v * [c, e] inside [lo, hi], for 0 outside [c, e];
/// an unbounded interval otherwise.
std::pair<double, double> interval_solve(double lo, double hi, double c, double e) {
    if (c <= 0.0 && e >= 0.0) return {-HUGE_VAL, HUGE_VAL};
    const double p[] = {lo / c, lo / e, hi / c, hi / e};
    return {*std::min_element(p, p + 4), *std::max_element(p, p + 4)};
}

/// False only when no point of the outer cell [lo, lo + h] x [z0, z1] has
/// a nonempty fiber in `target`. The parameter range is narrowed by each
/// coordinate in turn so the test tightens as cells shrink.
bool cell_may_hit(const BoxUnionSet& target, const Eigen::VectorXd& lo, const Eigen::VectorXd& h,
                  double z0, double z1, const Interval& range, bool dual) {
    const int d = target.dim();
    const double x1a = lo(0), x1b = lo(0) + h(0);
    for (const Box& box : target.boxes()) {
        double pa = std::max(box.lo(0), range.lo), pb = std::min(box.hi(0), range.hi);
        bool hit = pa <= pb;
        for (int pass = 0; pass < 2 && hit; ++pass) {
            for (int i = 1; i < d && hit; ++i) {
                const double ca = i < d - 1 ? lo(i) : z0, cb = i < d - 1 ? lo(i) + h(i) : z1;
                const double slack = 1e-12 * (1.0 + std::abs(ca) + std::abs(cb) + std::abs(box.lo(i)) +
                                              std::abs(box.hi(i)));
                // primal: s x_1^i in box_i - x_i; dual: y_1 t^i in x_i - box_i
                const double ta = dual ? ca - box.hi(i) : box.lo(i) - cb;
                const double tb = dual ? cb - box.lo(i) : box.hi(i) - ca;
                if (!dual) {
                    const auto xp = interval_pow(x1a, x1b, i);
                    const auto m = interval_mul(pa, pb, xp.first, xp.second);
                    hit = m.first <= tb + slack && m.second >= ta - slack;
                    if (!hit) break;
                    const auto sv = interval_solve(ta - slack, tb + slack, xp.first, xp.second);
                    pa = std::max(pa, sv.first);
                    pb = std::min(pb, sv.second);
                } else {
                    const auto tp = interval_pow(pa, pb, i);
                    const auto m = interval_mul(x1a, x1b, tp.first, tp.second);
                    hit = m.first <= tb + slack && m.second >= ta - slack;
                    if (!hit || i != 1) continue;
                    const auto sv = interval_solve(ta - slack, tb + slack, x1a, x1b);
                    pa = std::max(pa, sv.first);
                    pb = std::min(pb, sv.second);
                }
                hit = hit && pa <= pb;
            }
        }
        if (hit) return true;
    }
    return false;
}

int cells_for(double side, const QuadSpec& quad) {
    if (side <= 0.0) return 0;
    return std::max(quad.min_cells, static_cast<int>(std::ceil(side / quad.step - 1e-9)));
}

/// Integral over `domain` of the transform of `target`: midpoint (or Monte
/// Carlo) over the first d - 1 axes, exact along the last.
double outer_integral(const BoxUnionSet& target, const std::vector<Box>& domain,
                      const Interval& range, bool dual, const QuadSpec& quad) {
    if (target.empty() || domain.empty()) return 0.0;
    const int d = target.dim();
    NeumaierSum total;
    Point x(d);

    if (quad.method == QuadSpec::Method::MonteCarlo) {
        double vol = 0.0;
        for (const Box& b : domain) vol += b.volume();
        if (vol <= 0.0) return 0.0;
        Rng rng(quad.seed);
        for (const Box& b : domain) {
            const double v = b.volume();
            if (v <= 0.0) continue;
            const auto n = std::max<std::int64_t>(
                1, std::llround(static_cast<double>(quad.samples) * v / vol));
            NeumaierSum s;
            for (std::int64_t i = 0; i < n; ++i) {
                for (int a = 0; a < d - 1; ++a) x(a) = rng.uniform(b.lo(a), b.hi(a));
                s.add(row_integral(target, x, range, dual, b.lo(d - 1), b.hi(d - 1)));
            }
            double partial = 1.0;
            for (int a = 0; a < d - 1; ++a) partial *= b.hi(a) - b.lo(a);
            total.add(partial * s.value() / static_cast<double>(n));
        }
        return total.value();
    }

    // Coarse pass fixes the error budget; the adaptive pass then compares
    // each cell's midpoint value with its sub-cell midpoints and recurses
    // where they disagree.
    const int outer = d - 1;
    const int subcells = 1 << outer;
    std::vector<int> n(outer), idx(outer);
    std::vector<double> h(outer);
    struct Cell {
        Eigen::VectorXd lo, h;
        double value;  // row integral at the center
        int box;
    };
    std::vector<Cell> cells;
    double vol = 0.0;
    NeumaierSum coarse;
    for (std::size_t bi = 0; bi < domain.size(); ++bi) {
        const Box& b = domain[bi];
        if (b.volume() <= 0.0) continue;
        double cell = 1.0;
        std::size_t count = 1;
        for (int a = 0; a < outer; ++a) {
            n[a] = cells_for(b.hi(a) - b.lo(a), quad);
            h[a] = (b.hi(a) - b.lo(a)) / n[a];
            cell *= h[a];
            count *= static_cast<std::size_t>(n[a]);
        }
        double partial = 1.0;
        for (int a = 0; a < outer; ++a) partial *= b.hi(a) - b.lo(a);
        vol += partial;
        std::fill(idx.begin(), idx.end(), 0);
        for (std::size_t c = 0; c < count; ++c) {
            Eigen::VectorXd lo(outer), hh(outer);
            for (int a = 0; a < outer; ++a) {
                lo(a) = b.lo(a) + idx[a] * h[a];
                hh(a) = h[a];
                x(a) = lo(a) + 0.5 * h[a];
            }
            const double v = row_integral(target, x, range, dual, b.lo(d - 1), b.hi(d - 1));
            coarse.add(cell * v);
            cells.push_back({lo, hh, v, static_cast<int>(bi)});
            for (int a = outer - 1; a >= 0; --a) {
                if (++idx[a] < n[a]) break;
                idx[a] = 0;
            }
        }
    }
    if (quad.adapt_tol <= 0.0 || quad.adapt_depth <= 0 || vol <= 0.0) return coarse.value();

    constexpr int kZeroSearchDepth = 4;
    const double density_tol = quad.adapt_tol * std::max(std::abs(coarse.value()), 1e-300) / vol;
    // Integral over one cell given its center value. Cells are split while
    // sub-cell samples disagree with the center, or while some sample is
    // zero in a cell the interval test cannot rule out (thin supports).
    auto refine = [&](auto&& self, const Eigen::VectorXd& lo, const Eigen::VectorXd& hh, double value,
                      const Box& b, int depth) -> double {
        const double z0 = b.lo(d - 1), z1 = b.hi(d - 1);
        if (!cell_may_hit(target, lo, hh, z0, z1, range, dual)) return 0.0;
        double cv = 1.0;
        for (int a = 0; a < outer; ++a) cv *= hh(a);
        const Eigen::VectorXd half = 0.5 * hh;
        std::vector<double> vals(subcells);
        double fine = 0.0;
        bool any_zero = value == 0.0;
        for (int k = 0; k < subcells; ++k) {
            for (int a = 0; a < outer; ++a) x(a) = lo(a) + (((k >> a) & 1) + 0.5) * half(a);
            vals[k] = row_integral(target, x, range, dual, z0, z1);
            any_zero = any_zero || vals[k] == 0.0;
            fine += vals[k];
        }
        fine *= cv / subcells;
        const bool all_zero = any_zero && fine == 0.0 && value == 0.0;
        if (depth >= quad.adapt_depth || std::abs(fine - cv * value) <= density_tol * cv) {
            if (!all_zero || depth >= kZeroSearchDepth) return fine;
        }
        double s = 0.0;
        for (int k = 0; k < subcells; ++k) {
            Eigen::VectorXd slo = lo;
            for (int a = 0; a < outer; ++a) slo(a) += ((k >> a) & 1) * half(a);
            s += self(self, slo, half, vals[k], b, depth + 1);
        }
        return s;
    };
    for (const Cell& c : cells) total.add(refine(refine, c.lo, c.h, c.value, domain[c.box], 1));
    return total.value();
}

}  // namespace

QuadSpec QuadSpec::defaults(Dim dim) {
    QuadSpec q;
    if (dim.value() >= 5) q.method = Method::MonteCarlo;
    return q;
}

QuadSpec QuadSpec::refined() const {
    QuadSpec q = *this;
    q.step *= 0.5;
    q.min_cells *= 2;
    q.samples *= 4;
    q.adapt_tol *= 0.25;
    return q;
}

GridFunction::GridFunction(Point origin, Eigen::VectorXd spacing, std::vector<int> nodes,
                           std::vector<double> values)
    : origin_(std::move(origin)),
      spacing_(std::move(spacing)),
      nodes_(std::move(nodes)),
      values_(std::move(values)) {
    const int d = dim();
    if (spacing_.size() != d || static_cast<int>(nodes_.size()) != d)
        throw DomainError("GridFunction: inconsistent dimensions");
    std::size_t total = 1;
    for (int i = 0; i < d; ++i) {
        if (nodes_[i] < 2 || !(spacing_(i) > 0.0))
            throw DomainError("GridFunction: need >= 2 nodes and positive spacing per axis");
        total *= static_cast<std::size_t>(nodes_[i]);
    }
    if (values_.size() != total) throw DomainError("GridFunction: value count mismatch");
    for (double v : values_)
        if (!std::isfinite(v)) throw DomainError("GridFunction: values must be finite");
}

Box GridFunction::support() const {
    Eigen::VectorXd hi = origin_;
    for (int i = 0; i < dim(); ++i) hi(i) += spacing_(i) * (nodes_[i] - 1);
    return Box(origin_, hi);
}

double GridFunction::operator()(const Point& x) const {
    const int d = dim();
    std::array<int, 16> base{};
    std::array<double, 16> frac{};
    for (int i = 0; i < d; ++i) {
        const double u = (x(i) - origin_(i)) / spacing_(i);
        if (u < 0.0 || u > nodes_[i] - 1) return 0.0;
        const int i0 = std::min(static_cast<int>(u), nodes_[i] - 2);
        base[i] = i0;
        frac[i] = u - i0;
    }
    double v = 0.0;
    for (int corner = 0; corner < (1 << d); ++corner) {
        double w = 1.0;
        std::size_t flat = 0;
        for (int i = 0; i < d; ++i) {
            const int bit = (corner >> i) & 1;
            w *= bit ? frac[i] : 1.0 - frac[i];
            flat = flat * static_cast<std::size_t>(nodes_[i]) + static_cast<std::size_t>(base[i] + bit);
        }
        if (w != 0.0) v += w * values_[flat];
    }
    return v;
}

FiberSet line_fiber(const BoxUnionSet& E, const Point& x, Interval range, bool dual) {
    if (x.size() != E.dim()) throw DomainError("line_fiber: dimension mismatch");
    std::vector<Interval> pieces;
    const int d = E.dim();
    for (const Box& box : E.boxes()) {
        const SmallFiber f = dual ? dual_box_fiber(x, box, range, d) : primal_box_fiber(x, box, range, d);
        for (int i = 0; i < f.size(); ++i) pieces.emplace_back(f.lo(i), f.hi(i));
    }
    return FiberSet::from_pieces(std::move(pieces));
}

double fiber_length(const BoxUnionSet& E, const Point& x, Interval range, bool dual) {
    const int d = E.dim();
    double m = 0.0;
    for (const Box& box : E.boxes())
        m += (dual ? dual_box_fiber(x, box, range, d) : primal_box_fiber(x, box, range, d)).measure();
    return m;
}

double apply_x(const SimpleFunction& f, const Interval& I, const Point& x) {
    double v = 0.0;
    for (const SimpleTerm& t : f.terms()) v += t.weight * fiber_length(t.support, x, I, false);
    return v;
}

double apply_x(const GridFunction& f, const Interval& I, const Point& x, const QuadSpec& quad) {
    if (!(quad.step > 0.0)) throw DomainError("apply_x: quadrature step must be positive");
    const int n = std::max(1, static_cast<int>(std::ceil(I.length() / quad.step)));
    const double h = I.length() / n;
    NeumaierSum s;
    for (int i = 0; i < n; ++i) s.add(f(gamma<double>(x, I.lo + (i + 0.5) * h)));
    return h * s.value();
}

namespace {

Interval validated_window(const Interval& support_proj, const QuadSpec& quad) {
    if (!quad.window) return support_proj;
    if (!quad.window->contains(support_proj))
        throw DomainError("dual window does not contain the support's first-coordinate projection");
    return *quad.window;
}

}  // namespace

Interval dual_window(const BoxUnionSet& F, const QuadSpec& quad) {
    if (F.empty()) return quad.window.value_or(Interval(0.0, 0.0));
    return validated_window(F.projection(0), quad);
}

double apply_x_star(const SimpleFunction& g, const Point& y, const QuadSpec& quad) {
    if (g.terms().empty()) return 0.0;
    Interval proj = g.terms().front().support.projection(0);
    for (const SimpleTerm& t : g.terms()) {
        if (t.support.empty()) continue;
        const Interval p = t.support.projection(0);
        proj = Interval(std::min(proj.lo, p.lo), std::max(proj.hi, p.hi));
    }
    const Interval window = validated_window(proj, quad);
    double v = 0.0;
    for (const SimpleTerm& t : g.terms()) v += t.weight * fiber_length(t.support, y, window, true);
    return v;
}

double apply_x_star(const GridFunction& g, const Point& y, const QuadSpec& quad) {
    if (!(quad.step > 0.0)) throw DomainError("apply_x_star: quadrature step must be positive");
    const Interval window = validated_window(g.support().side(0), quad);
    const int n = std::max(1, static_cast<int>(std::ceil(window.length() / quad.step)));
    const double h = window.length() / n;
    NeumaierSum s;
    for (int i = 0; i < n; ++i) s.add(g(gamma_star<double>(y, window.lo + (i + 0.5) * h)));
    return h * s.value();
}

double bilinear_form(const BoxUnionSet& E, const BoxUnionSet& F, const Interval& I,
                     const QuadSpec& quad) {
    if (E.dim() != F.dim()) throw DomainError("bilinear_form: dimension mismatch");
    return outer_integral(E, F.boxes(), I, false, quad);
}

double bilinear_form_dual(const BoxUnionSet& E, const BoxUnionSet& F, const Interval& I,
                          const QuadSpec& quad) {
    if (E.dim() != F.dim()) throw DomainError("bilinear_form_dual: dimension mismatch");
    if (F.empty()) return 0.0;
    const Interval window = dual_window(F, quad);
    std::vector<Box> clipped;
    for (const Box& b : E.boxes()) {
        Box c = b;
        c.lo(0) = std::max(b.lo(0), I.lo);
        c.hi(0) = std::min(b.hi(0), I.hi);
        if (c.lo(0) < c.hi(0)) clipped.push_back(c);
    }
    return outer_integral(F, clipped, window, true, quad);
}

namespace {

struct CellGrid {
    Box box;
    int n;
    int d;
    Eigen::VectorXd h;

    std::size_t cells() const { return static_cast<std::size_t>(std::pow(n, d) + 0.5); }
    std::size_t corners() const { return static_cast<std::size_t>(std::pow(n + 1, d) + 0.5); }

    void unflatten(std::size_t flat, int base, std::vector<int>& idx) const {
        for (int i = d - 1; i >= 0; --i) {
            idx[i] = static_cast<int>(flat % base);
            flat /= base;
        }
    }
    Box cell(const std::vector<int>& idx) const {
        Eigen::VectorXd lo(d), hi(d);
        for (int i = 0; i < d; ++i) {
            lo(i) = box.lo(i) + idx[i] * h(i);
            hi(i) = (idx[i] + 1 == n) ? box.hi(i) : box.lo(i) + (idx[i] + 1) * h(i);
        }
        return Box(lo, hi);
    }
};

CellGrid make_grid(const BoxUnionSet& region, int n) {
    if (n < 1) throw DomainError("grid needs at least one cell per axis");
    CellGrid g{region.bounding_box(), n, region.dim(), {}};
    g.h = (g.box.hi - g.box.lo) / n;
    return g;
}

/// Merges boxes that abut along the last axis and agree on all others.
std::vector<Box> merge_runs(std::vector<Box> boxes) {
    if (boxes.empty()) return boxes;
    const int d = boxes.front().dim();
    auto key_less = [d](const Box& a, const Box& b) {
        for (int i = 0; i < d - 1; ++i) {
            if (a.lo(i) != b.lo(i)) return a.lo(i) < b.lo(i);
            if (a.hi(i) != b.hi(i)) return a.hi(i) < b.hi(i);
        }
        return a.lo(d - 1) < b.lo(d - 1);
    };
    std::sort(boxes.begin(), boxes.end(), key_less);
    std::vector<Box> out;
    for (Box& b : boxes) {
        if (!out.empty()) {
            Box& last = out.back();
            bool same = last.hi(d - 1) == b.lo(d - 1);
            for (int i = 0; i < d - 1 && same; ++i)
                same = last.lo(i) == b.lo(i) && last.hi(i) == b.hi(i);
            if (same) {
                last.hi(d - 1) = b.hi(d - 1);
                continue;
            }
        }
        out.push_back(std::move(b));
    }
    return out;
}

}  // namespace

SuperlevelSet superlevel_set(const BoxUnionSet& E, const BoxUnionSet& region, const Interval& range,
                             double theta, int cells_per_axis, bool dual) {
    if (!(theta >= 0.0)) throw DomainError("superlevel_set: theta must be >= 0");
    SuperlevelSet out;
    out.theta = theta;
    out.cells_per_axis = cells_per_axis;
    out.inner = BoxUnionSet(region.dim());
    if (region.empty()) return out;

    const CellGrid g = make_grid(region, cells_per_axis);
    out.grid_box = g.box;
    const int d = g.d, n = g.n;
    auto value = [&](const Point& p) { return fiber_length(E, p, range, dual); };

    std::vector<double> corner_val(g.corners());
    std::vector<int> idx(d);
    Point p(d);
    for (std::size_t c = 0; c < corner_val.size(); ++c) {
        g.unflatten(c, n + 1, idx);
        for (int i = 0; i < d; ++i) p(i) = (idx[i] == n) ? g.box.hi(i) : g.box.lo(i) + idx[i] * g.h(i);
        corner_val[c] = value(p);
    }

    std::vector<Box> inner_boxes;
    double min_inner = kInfinity;
    for (std::size_t c = 0; c < g.cells(); ++c) {
        g.unflatten(c, n, idx);
        const Box cell = g.cell(idx);
        const double clip = region.intersection_measure(cell);
        if (clip <= 0.0) continue;
        const double center = value(cell.center());
        double cmin = center, cmax = center;
        for (int corner = 0; corner < (1 << d); ++corner) {
            std::size_t flat = 0;
            for (int i = 0; i < d; ++i)
                flat = flat * static_cast<std::size_t>(n + 1) +
                       static_cast<std::size_t>(idx[i] + ((corner >> i) & 1));
            cmin = std::min(cmin, corner_val[flat]);
            cmax = std::max(cmax, corner_val[flat]);
        }
        out.max_cell_min = std::max(out.max_cell_min, cmin);
        if (cmax >= theta) out.outer_measure += clip;
        if (cmin >= theta) {
            out.inner_measure += clip;
            min_inner = std::min(min_inner, cmin);
            for (const Box& rb : region.boxes()) {
                if (rb.overlap(cell) <= 0.0) continue;
                inner_boxes.emplace_back(rb.lo.cwiseMax(cell.lo), rb.hi.cwiseMin(cell.hi));
            }
        }
    }
    out.inner = BoxUnionSet::from_disjoint(d, merge_runs(std::move(inner_boxes)));
    out.min_inner_value = std::isinf(min_inner) ? 0.0 : min_inner;
    return out;
}

SuperlevelReport superlevel_construction(const BoxUnionSet& E, const BoxUnionSet& F, const Interval& I,
                         int cells_per_axis) {
    const int d = F.dim();
    const double p = static_cast<double>(d * (d + 1)) / (d * d - d + 2);
    const double q_dual = (d + 1) / 2.0;  // q' for q = (d+1)/(d-1)

    const CellGrid g = make_grid(F, cells_per_axis);
    std::vector<int> idx(d);
    std::vector<double> vals, meas;
    for (std::size_t c = 0; c < g.cells(); ++c) {
        g.unflatten(c, g.n, idx);
        const Box cell = g.cell(idx);
        const double clip = F.intersection_measure(cell);
        if (clip <= 0.0) continue;
        vals.push_back(xray_indicator(E, I, cell.center()));
        meas.push_back(clip);
    }
    SuperlevelReport r;
    NeumaierSum T;
    for (std::size_t i = 0; i < vals.size(); ++i) T.add(vals[i] * meas[i]);
    r.T = T.value();
    if (!(r.T > 0.0)) throw DomainError("superlevel_construction: T(E, F) = 0 at this resolution");

    const double mE = E.measure(), mF = F.measure();
    r.epsilon = r.T / (std::pow(mE, 1.0 / p) * std::pow(mF, 1.0 / q_dual));
    const double scale = r.epsilon * std::pow(mE, 1.0 / p) * std::pow(mF, 1.0 / q_dual - 1.0);

    auto outside = [&](double theta) {
        NeumaierSum s;
        for (std::size_t i = 0; i < vals.size(); ++i)
            if (vals[i] < theta) s.add(vals[i] * meas[i]);
        return s.value();
    };
    double lo = 0.0;
    double hi = *std::max_element(vals.begin(), vals.end()) / scale + 1.0;
    for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (outside(mid * scale) <= 0.5 * r.T)
            lo = mid;
        else
            hi = mid;
    }
    r.c0 = lo;
    r.theta = lo * scale;
    r.outside_T = outside(r.theta);

    const SuperlevelSet G = superlevel_set(E, F, I, r.theta, cells_per_axis);
    r.g_inner = G.inner_measure;
    r.g_outer = G.outer_measure;
    const double denom = std::pow(r.epsilon, q_dual) * mF;
    r.constant_inner = r.g_inner / denom;
    r.constant_outer = r.g_outer / denom;
    return r;
}

}  // namespace momentray
