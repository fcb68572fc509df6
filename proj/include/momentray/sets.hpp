#pragma once

#include "momentray/types.hpp"

#include <vector>

namespace momentray {

/// Axis-aligned closed box [lo_1, hi_1] x ... x [lo_d, hi_d].
struct Box {
    Eigen::VectorXd lo;
    Eigen::VectorXd hi;

    Box() = default;
    Box(Eigen::VectorXd lo_, Eigen::VectorXd hi_);

    /// Box with the given center and half-widths.
    static Box centered(const Eigen::VectorXd& center, const Eigen::VectorXd& half_width);

    int dim() const { return static_cast<int>(lo.size()); }
    double volume() const;
    Eigen::VectorXd center() const { return 0.5 * (lo + hi); }
    bool contains(const Point& x) const;
    /// Volume of the intersection with another box (0 when disjoint).
    double overlap(const Box& o) const;
    Interval side(int axis) const { return {lo(axis), hi(axis)}; }
};

/// Finite union of boxes with pairwise zero-volume overlaps.
class BoxUnionSet {
   public:
    explicit BoxUnionSet(int dim = 2);

    /// Validates pairwise disjointness (throws DomainError on overlap).
    static BoxUnionSet make(int dim, std::vector<Box> boxes);
    /// Skips the disjointness check; for boxes disjoint by construction.
    static BoxUnionSet from_disjoint(int dim, std::vector<Box> boxes);
    static BoxUnionSet single(const Box& b) { return from_disjoint(b.dim(), {b}); }

    int dim() const { return dim_; }
    const std::vector<Box>& boxes() const { return boxes_; }
    bool empty() const { return boxes_.empty(); }
    double measure() const;
    bool contains(const Point& x) const;
    Box bounding_box() const;
    /// Projection of the union's bounding box onto one axis.
    Interval projection(int axis) const;
    double intersection_measure(const Box& b) const;
    /// Measure of the intersection with another union.
    double intersection_measure(const BoxUnionSet& o) const;
    /// Whether every box of `o` lies inside the union (up to measure zero).
    bool covers(const BoxUnionSet& o, double rel_tol = 1e-12) const;

    /// Image under the nonisotropic dilation y -> (a1 y1, ..., ad yd).
    BoxUnionSet scaled(const Eigen::VectorXd& factors) const;
    BoxUnionSet translated(const Eigen::VectorXd& shift) const;

   private:
    int dim_;
    std::vector<Box> boxes_;
};

/// Sorted union of disjoint closed intervals in one parameter.
class FiberSet {
   public:
    FiberSet() = default;
    explicit FiberSet(Interval iv);
    /// Normalizes: drops empty pieces, sorts and merges overlapping ones.
    static FiberSet from_pieces(std::vector<Interval> pieces);
    static FiberSet everything(Interval window) { return FiberSet(window); }

    const std::vector<Interval>& pieces() const { return pieces_; }
    bool empty() const { return pieces_.empty(); }
    double measure() const;
    bool contains(double v) const;
    /// Whether [v - margin, v + margin] lies inside a single piece.
    bool contains_with_margin(double v, double margin) const;

    FiberSet intersect(const FiberSet& o) const;
    FiberSet intersect(Interval iv) const;
    FiberSet unite(const FiberSet& o) const;

   private:
    std::vector<Interval> pieces_;
};

}  // namespace momentray
