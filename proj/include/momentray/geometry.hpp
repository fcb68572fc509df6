#pragma once

// Incidence geometry of the moment-curve line complex.
//
//   gamma(x, s)      = (s, x2 + s x1, x3 + s x1^2, ..., xd + s x1^(d-1))
//   gamma_star(x, t) = (t, x2 - x1 t, x3 - x1 t^2, ..., xd - x1 t^(d-1))
//
// Phi_j alternates gamma_star, gamma, gamma_star, ... starting from a base
// point x0; Psi_j alternates gamma, gamma_star, ... starting from y0.
// Everything is templated on the scalar so the maps can be evaluated in
// complex arithmetic for complex-step differentiation.

#include "momentray/types.hpp"

#include <complex>
#include <cstdint>
#include <string>

namespace momentray {

enum class MapKind { Phi, Psi };

inline const char* to_string(MapKind k) { return k == MapKind::Phi ? "phi" : "psi"; }

template <typename Scalar>
VectorX<Scalar> gamma(const VectorX<Scalar>& x, const Scalar& s) {
    const Eigen::Index d = x.size();
    VectorX<Scalar> y(d);
    y(0) = s;
    Scalar power = x(0);  // x1^(j-1) for coordinate j
    for (Eigen::Index j = 1; j < d; ++j) {
        y(j) = x(j) + s * power;
        power *= x(0);
    }
    return y;
}

template <typename Scalar>
VectorX<Scalar> gamma_star(const VectorX<Scalar>& x, const Scalar& t) {
    const Eigen::Index d = x.size();
    VectorX<Scalar> y(d);
    y(0) = t;
    Scalar power = t;  // t^(j-1) for coordinate j
    for (Eigen::Index j = 1; j < d; ++j) {
        y(j) = x(j) - x(0) * power;
        power *= t;
    }
    return y;
}

/// Phi_j(t1, s1, t2, ...) for j = params.size() in [1, d].
template <typename Scalar>
VectorX<Scalar> phi_map(const Point& x0, const VectorX<Scalar>& params) {
    if (params.size() < 1 || params.size() > x0.size())
        throw DomainError("phi_map: parameter count must be in [1, d]");
    VectorX<Scalar> y = x0.template cast<Scalar>();
    for (Eigen::Index i = 0; i < params.size(); ++i)
        y = (i % 2 == 0) ? gamma_star<Scalar>(y, params(i)) : gamma<Scalar>(y, params(i));
    return y;
}

/// Psi_j(s1, t2, s2, ...) for j = params.size() in [1, d].
template <typename Scalar>
VectorX<Scalar> psi_map(const Point& y0, const VectorX<Scalar>& params) {
    if (params.size() < 1 || params.size() > y0.size())
        throw DomainError("psi_map: parameter count must be in [1, d]");
    VectorX<Scalar> y = y0.template cast<Scalar>();
    for (Eigen::Index i = 0; i < params.size(); ++i)
        y = (i % 2 == 0) ? gamma<Scalar>(y, params(i)) : gamma_star<Scalar>(y, params(i));
    return y;
}

template <typename Scalar>
VectorX<Scalar> incidence_map(MapKind kind, const Point& base, const VectorX<Scalar>& params) {
    return kind == MapKind::Phi ? phi_map<Scalar>(base, params) : psi_map<Scalar>(base, params);
}

/// Non-recursive form of Psi_d. With t1 = y0(0):
///   even d: (t_{k+1}, x_i + sum_j (t_j^(i-1) - t_{j+1}^(i-1)) s_j)
///   odd d:  (s_{k+1}, same sum + s_{k+1} t_{k+1}^(i-1))
/// Must agree with psi_map to rounding.
Point psi_closed_form(const Point& y0, const ParamVector& params);

namespace detail {

template <typename Scalar>
Scalar ipow(const Scalar& base, int e) {
    Scalar r(1);
    for (int i = 0; i < e; ++i) r *= base;
    return r;
}

}  // namespace detail

/// The Jacobian determinant product without the constant c_d.
/// `first_coord` is s0 = x1 for Phi, t1 = y1 for Psi.
template <typename Scalar>
Scalar jacobian_closed_form(MapKind kind, Dim dim, const Scalar& first_coord,
                            const VectorX<Scalar>& params) {
    const int d = dim.value();
    const int k = dim.k();
    if (params.size() != d) throw DomainError("jacobian_closed_form: need d parameters");
    using detail::ipow;
    Scalar v(1);
    if (kind == MapKind::Phi) {
        // t_j = params[2(j-1)], s_j = params[2j-1], s_0 = first_coord
        auto t = [&](int j) { return params(2 * (j - 1)); };
        auto s = [&](int j) { return j == 0 ? first_coord : params(2 * j - 1); };
        for (int j = 1; j <= k; ++j) v *= s(j) - s(j - 1);
        for (int j = 1; j <= k; ++j)
            for (int l = j + 1; l <= k; ++l) v *= ipow(Scalar(t(j) - t(l)), 4);
        if (dim.odd())
            for (int j = 1; j <= k; ++j) v *= ipow(Scalar(t(j) - t(k + 1)), 2);
        return v;
    }
    // s_j = params[2(j-1)], t_j = params[2j-3] for j >= 2, t_1 = first_coord
    auto s = [&](int j) { return params(2 * (j - 1)); };
    auto t = [&](int j) { return j == 1 ? first_coord : params(2 * j - 3); };
    if (dim.even()) {
        v *= t(k + 1) - t(1);
        for (int j = 1; j <= k - 1; ++j) v *= s(j + 1) - s(j);
        for (int j = 2; j <= k; ++j)
            for (int l = j + 1; l <= k; ++l) v *= ipow(Scalar(t(j) - t(l)), 4);
        for (int j = 2; j <= k; ++j) v *= ipow(Scalar(t(j) - t(k + 1)), 2);
        for (int j = 2; j <= k; ++j) v *= ipow(Scalar(t(j) - t(1)), 2);
    } else {
        for (int j = 1; j <= k; ++j) v *= s(j + 1) - s(j);
        for (int j = 2; j <= k + 1; ++j)
            for (int l = j + 1; l <= k + 1; ++l) v *= ipow(Scalar(t(j) - t(l)), 4);
        for (int j = 2; j <= k + 1; ++j) v *= ipow(Scalar(t(j) - t(1)), 2);
    }
    return v;
}

enum class DiffMethod {
    ComplexStep,  // Im F(p + i h e_j) / h, no subtractive cancellation
    Central,      // central differences at h and h/2, Richardson-combined
};

/// d x d matrix dF/dparams of Phi_d or Psi_d.
Eigen::MatrixXd jacobian_matrix(MapKind kind, const Point& base, const ParamVector& params,
                                DiffMethod method = DiffMethod::ComplexStep);

/// Determinant of jacobian_matrix. The Central route evaluates the
/// determinant at steps h = 1e-4 (1 + |p_j|) and h/2 and throws
/// NumericalError when they disagree by more than 1e-5 of the Hadamard
/// bound; it returns the determinant of the Richardson-extrapolated matrix.
double jacobian_numeric(MapKind kind, const Point& base, const ParamVector& params,
                        DiffMethod method = DiffMethod::ComplexStep);

struct CdEstimate {
    double mean = 0.0;
    double dispersion = 0.0;     // sample std / |mean|
    double max_rel_dev = 0.0;    // max |ratio - mean| / |mean|
    int samples = 0;
    int rejected = 0;            // draws discarded for near-degeneracy
    Eigen::VectorXd ratios;
};

/// Parameters and base point for a random non-degenerate Jacobian sample:
/// base and params uniform in [-1, 1]; t values pairwise and consecutive s
/// values (with s0 = x1 or t1 = y1 as appropriate) at least `min_gap` apart.
struct JacobianSample {
    Point base;
    ParamVector params;
};

JacobianSample draw_nondegenerate(MapKind kind, Dim dim, Rng& rng, double min_gap = 1e-3,
                                  int* rejected = nullptr);

CdEstimate estimate_c_d(MapKind kind, Dim dim, int samples, std::uint64_t seed,
                        DiffMethod method = DiffMethod::ComplexStep);

}  // namespace momentray
