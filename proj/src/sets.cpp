#include "momentray/sets.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace momentray {

Box::Box(Eigen::VectorXd lo_, Eigen::VectorXd hi_) : lo(std::move(lo_)), hi(std::move(hi_)) {
    if (lo.size() != hi.size()) throw DomainError("box corners differ in dimension");
    for (Eigen::Index i = 0; i < lo.size(); ++i)
        if (!(lo(i) <= hi(i))) throw DomainError("box requires lo <= hi on every axis");
}

Box Box::centered(const Eigen::VectorXd& center, const Eigen::VectorXd& half_width) {
    return Box(center - half_width, center + half_width);
}

double Box::volume() const { return (hi - lo).prod(); }

bool Box::contains(const Point& x) const {
    for (Eigen::Index i = 0; i < lo.size(); ++i)
        if (x(i) < lo(i) || x(i) > hi(i)) return false;
    return true;
}

double Box::overlap(const Box& o) const {
    double v = 1.0;
    for (Eigen::Index i = 0; i < lo.size(); ++i) {
        const double w = std::min(hi(i), o.hi(i)) - std::max(lo(i), o.lo(i));
        if (w <= 0.0) return 0.0;
        v *= w;
    }
    return v;
}

BoxUnionSet::BoxUnionSet(int dim) : dim_(dim) {
    if (dim < 1) throw DomainError("BoxUnionSet: dimension must be positive");
}

BoxUnionSet BoxUnionSet::from_disjoint(int dim, std::vector<Box> boxes) {
    BoxUnionSet s(dim);
    for (const Box& b : boxes)
        if (b.dim() != dim) throw DomainError("BoxUnionSet: box dimension mismatch");
    s.boxes_ = std::move(boxes);
    return s;
}

BoxUnionSet BoxUnionSet::make(int dim, std::vector<Box> boxes) {
    BoxUnionSet s = from_disjoint(dim, std::move(boxes));
    const auto& bx = s.boxes_;
    const std::size_t n = bx.size();
    if (n < 2) return s;

    // Sweep along the axis on which the sorted boxes overlap least.
    std::vector<std::size_t> order(n);
    int best_axis = 0;
    std::size_t best_count = std::numeric_limits<std::size_t>::max();
    for (int a = 0; a < dim; ++a) {
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(),
                  [&](std::size_t i, std::size_t j) { return bx[i].lo(a) < bx[j].lo(a); });
        std::size_t count = 0;
        for (std::size_t i = 1; i < n; ++i)
            if (bx[order[i]].lo(a) < bx[order[i - 1]].hi(a)) ++count;
        if (count < best_count) {
            best_count = count;
            best_axis = a;
        }
    }
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
        return bx[i].lo(best_axis) < bx[j].lo(best_axis);
    });
    for (std::size_t i = 0; i < n; ++i) {
        const Box& a = bx[order[i]];
        for (std::size_t j = i + 1; j < n; ++j) {
            const Box& b = bx[order[j]];
            if (b.lo(best_axis) >= a.hi(best_axis)) break;
            if (a.overlap(b) > 0.0) throw DomainError("BoxUnionSet: boxes overlap");
        }
    }
    return s;
}

double BoxUnionSet::measure() const {
    double m = 0.0;
    for (const Box& b : boxes_) m += b.volume();
    return m;
}

bool BoxUnionSet::contains(const Point& x) const {
    return std::any_of(boxes_.begin(), boxes_.end(), [&](const Box& b) { return b.contains(x); });
}

Box BoxUnionSet::bounding_box() const {
    if (boxes_.empty()) throw DomainError("bounding_box of an empty set");
    Eigen::VectorXd lo = boxes_.front().lo, hi = boxes_.front().hi;
    for (const Box& b : boxes_) {
        lo = lo.cwiseMin(b.lo);
        hi = hi.cwiseMax(b.hi);
    }
    return Box(lo, hi);
}

Interval BoxUnionSet::projection(int axis) const { return bounding_box().side(axis); }

double BoxUnionSet::intersection_measure(const Box& b) const {
    double m = 0.0;
    for (const Box& a : boxes_) m += a.overlap(b);
    return m;
}

double BoxUnionSet::intersection_measure(const BoxUnionSet& o) const {
    double m = 0.0;
    for (const Box& b : o.boxes_) m += intersection_measure(b);
    return m;
}

bool BoxUnionSet::covers(const BoxUnionSet& o, double rel_tol) const {
    for (const Box& b : o.boxes_) {
        const double v = b.volume();
        if (intersection_measure(b) < v * (1.0 - rel_tol)) return false;
    }
    return true;
}

BoxUnionSet BoxUnionSet::scaled(const Eigen::VectorXd& factors) const {
    std::vector<Box> out;
    out.reserve(boxes_.size());
    for (const Box& b : boxes_) {
        Eigen::VectorXd lo = b.lo.cwiseProduct(factors), hi = b.hi.cwiseProduct(factors);
        out.emplace_back(lo.cwiseMin(hi), lo.cwiseMax(hi));
    }
    return from_disjoint(dim_, std::move(out));
}

BoxUnionSet BoxUnionSet::translated(const Eigen::VectorXd& shift) const {
    std::vector<Box> out;
    out.reserve(boxes_.size());
    for (const Box& b : boxes_) out.emplace_back(b.lo + shift, b.hi + shift);
    return from_disjoint(dim_, std::move(out));
}

FiberSet::FiberSet(Interval iv) { pieces_.push_back(iv); }

FiberSet FiberSet::from_pieces(std::vector<Interval> pieces) {
    std::sort(pieces.begin(), pieces.end(),
              [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    FiberSet f;
    for (const Interval& p : pieces) {
        if (!f.pieces_.empty() && p.lo <= f.pieces_.back().hi) {
            f.pieces_.back().hi = std::max(f.pieces_.back().hi, p.hi);
        } else {
            f.pieces_.push_back(p);
        }
    }
    return f;
}

double FiberSet::measure() const {
    double m = 0.0;
    for (const Interval& p : pieces_) m += p.length();
    return m;
}

bool FiberSet::contains(double v) const {
    return std::any_of(pieces_.begin(), pieces_.end(),
                       [&](const Interval& p) { return p.contains(v); });
}

bool FiberSet::contains_with_margin(double v, double margin) const {
    return std::any_of(pieces_.begin(), pieces_.end(), [&](const Interval& p) {
        return p.lo + margin <= v && v <= p.hi - margin;
    });
}

FiberSet FiberSet::intersect(const FiberSet& o) const {
    FiberSet out;
    std::size_t i = 0, j = 0;
    while (i < pieces_.size() && j < o.pieces_.size()) {
        const double lo = std::max(pieces_[i].lo, o.pieces_[j].lo);
        const double hi = std::min(pieces_[i].hi, o.pieces_[j].hi);
        if (lo <= hi) out.pieces_.push_back(Interval(lo, hi));
        if (pieces_[i].hi < o.pieces_[j].hi)
            ++i;
        else
            ++j;
    }
    return out;
}

FiberSet FiberSet::intersect(Interval iv) const { return intersect(FiberSet(iv)); }

FiberSet FiberSet::unite(const FiberSet& o) const {
    std::vector<Interval> all = pieces_;
    all.insert(all.end(), o.pieces_.begin(), o.pieces_.end());
    return from_pieces(std::move(all));
}

}  // namespace momentray
