#include "momentray/geometry.hpp"

#include <doctest.h>

#include <cmath>

using namespace momentray;

namespace {

Point pt(std::initializer_list<double> v) {
    Point p(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) p(i++) = x;
    return p;
}

// Literal composition, written out coordinate by coordinate.
Point brute_phi(const Point& x0, const ParamVector& params) {
    std::vector<double> y(x0.data(), x0.data() + x0.size());
    const std::size_t d = y.size();
    for (Eigen::Index i = 0; i < params.size(); ++i) {
        const double v = params(i);
        std::vector<double> z(d);
        z[0] = v;
        for (std::size_t j = 1; j < d; ++j) {
            if (i % 2 == 0)
                z[j] = y[j] - y[0] * std::pow(v, static_cast<double>(j));
            else
                z[j] = y[j] + v * std::pow(y[0], static_cast<double>(j));
        }
        y = z;
    }
    return Eigen::Map<Point>(y.data(), static_cast<Eigen::Index>(d));
}

}  // namespace

TEST_CASE("gamma by hand") {
    CHECK(gamma<double>(pt({1, 2}), 3.0).isApprox(pt({3, 5})));
    CHECK(gamma<double>(pt({2, 1, 1}), 1.0).isApprox(pt({1, 3, 5})));
}

TEST_CASE("gamma_star by hand") {
    CHECK(gamma_star<double>(pt({2, 1, 1}), 1.0).isApprox(pt({1, -1, -1})));
    CHECK(gamma_star<double>(pt({1, 5}), 2.0).isApprox(pt({2, 3})));
}

TEST_CASE("phi two steps by hand") {
    ParamVector p1(1), p2(2);
    p1 << 2;
    p2 << 2, 3;
    CHECK(phi_map<double>(pt({1, 0}), p1).isApprox(pt({2, -2})));
    CHECK(phi_map<double>(pt({1, 0}), p2).isApprox(pt({3, 4})));
}

TEST_CASE("psi d=2 by hand and closed form") {
    ParamVector p(2);
    p << 2, 3;
    CHECK(psi_map<double>(pt({1, 0}), p).isApprox(pt({3, -4})));
    CHECK(psi_closed_form(pt({1, 0}), p).isApprox(pt({3, -4})));
}

TEST_CASE("phi matches literal composition") {
    Rng rng(11);
    for (int d : {2, 3, 4, 5}) {
        for (int trial = 0; trial < 20; ++trial) {
            Point x0(d);
            ParamVector p(d);
            for (int i = 0; i < d; ++i) {
                x0(i) = rng.uniform(-1, 1);
                p(i) = rng.uniform(-1, 1);
            }
            for (int j = 1; j <= d; ++j) {
                const ParamVector pj = p.head(j);
                CHECK((phi_map<double>(x0, pj) - brute_phi(x0, pj)).norm() < 1e-12);
            }
        }
    }
}

TEST_CASE("psi closed form matches recursion") {
    Rng rng(5);
    for (int d = 2; d <= 7; ++d) {
        Point y0(d);
        ParamVector p(d);
        for (int i = 0; i < d; ++i) {
            y0(i) = rng.uniform(-1, 1);
            p(i) = rng.uniform(-1, 1);
        }
        CHECK((psi_map<double>(y0, p) - psi_closed_form(y0, p)).norm() < 1e-12);
    }
}

TEST_CASE("partial parameter count is validated") {
    ParamVector none(0), many(3);
    many << 1, 2, 3;
    CHECK_THROWS_AS(phi_map<double>(pt({1, 0}), none), DomainError);
    CHECK_THROWS_AS(psi_map<double>(pt({1, 0}), many), DomainError);
}

TEST_CASE("jacobians by hand at d=2") {
    ParamVector p(2);
    p << 2, 3;
    CHECK(jacobian_numeric(MapKind::Phi, pt({1, 0}), p) == doctest::Approx(-2.0).epsilon(1e-12));
    CHECK(jacobian_closed_form<double>(MapKind::Phi, Dim(2), 1.0, p) == doctest::Approx(2.0));
    ParamVector q(2);
    q << 5, 4;
    CHECK(jacobian_numeric(MapKind::Psi, pt({1, 0}), q) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(jacobian_closed_form<double>(MapKind::Psi, Dim(2), 1.0, q) == doctest::Approx(3.0));
}

TEST_CASE("phi closed form at d=4 is the three-factor product") {
    ParamVector p(4);
    p << 0.3, -0.2, 0.9, 0.5;  // t1 s1 t2 s2
    const double s0 = 0.1;
    const double expected = (-0.2 - s0) * (0.5 - -0.2) * std::pow(0.3 - 0.9, 4);
    CHECK(jacobian_closed_form<double>(MapKind::Phi, Dim(4), s0, p) == doctest::Approx(expected));
}

TEST_CASE("closed forms are homogeneous of degree d(d-1)/2") {
    Rng rng(3);
    for (MapKind kind : {MapKind::Phi, MapKind::Psi}) {
        for (int d = 2; d <= 7; ++d) {
            ParamVector p(d);
            for (int i = 0; i < d; ++i) p(i) = rng.uniform(-1, 1);
            const double a = rng.uniform(-1, 1), lam = 1.7;
            const double v0 = jacobian_closed_form<double>(kind, Dim(d), a, p);
            const ParamVector ps = lam * p;
            const double v1 = jacobian_closed_form<double>(kind, Dim(d), lam * a, ps);
            CHECK(v1 == doctest::Approx(v0 * std::pow(lam, Dim(d).jacobian_degree())).epsilon(1e-10));
        }
    }
}

TEST_CASE("complex step and central differences agree") {
    Rng rng(9);
    for (MapKind kind : {MapKind::Phi, MapKind::Psi}) {
        for (int d = 2; d <= 5; ++d) {
            const JacobianSample s = draw_nondegenerate(kind, Dim(d), rng);
            const double a = jacobian_numeric(kind, s.base, s.params, DiffMethod::ComplexStep);
            const double b = jacobian_numeric(kind, s.base, s.params, DiffMethod::Central);
            CHECK(b == doctest::Approx(a).epsilon(1e-5));
        }
    }
}

TEST_CASE("c_d at d=2") {
    const CdEstimate phi = estimate_c_d(MapKind::Phi, Dim(2), 100, 1);
    const CdEstimate psi = estimate_c_d(MapKind::Psi, Dim(2), 100, 1);
    CHECK(phi.mean == doctest::Approx(-1.0).epsilon(1e-9));
    CHECK(psi.mean == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(phi.dispersion < 1e-6);
    CHECK(psi.dispersion < 1e-6);
}

TEST_CASE("c_d constant and nonzero for d=3..7") {
    for (MapKind kind : {MapKind::Phi, MapKind::Psi})
        for (int d = 3; d <= 7; ++d) {
            const CdEstimate e = estimate_c_d(kind, Dim(d), 100, 17);
            CHECK(e.dispersion < 1e-6);
            CHECK(std::abs(e.mean) > 0.5);
        }
}

TEST_CASE("dimension below 2 is rejected") { CHECK_THROWS_AS(Dim(1), DomainError); }
