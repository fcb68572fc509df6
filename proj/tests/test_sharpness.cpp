#include "momentray/sharpness.hpp"

#include <doctest.h>

#include <cmath>

using namespace momentray;

namespace {

BoxUnionSet unit(int d) {
    return BoxUnionSet::single(Box(Eigen::VectorXd::Zero(d), Eigen::VectorXd::Ones(d)));
}

}  // namespace

TEST_CASE("critical exponents") {
    const auto e2 = critical_exponents(Dim(2));
    CHECK(e2.p == Rational(3, 2));
    CHECK(e2.q == Rational(3));
    const auto e3 = critical_exponents(Dim(3));
    CHECK(e3.p == Rational(3, 2));
    CHECK(e3.q == Rational(2));
    CHECK(e3.q_dual() == Rational(2));
    const auto e4 = critical_exponents(Dim(4));
    CHECK(e4.p == Rational(10, 7));
    CHECK(e4.q == Rational(5, 3));
    CHECK(Rational(6, -4).str() == "-3/2");
}

TEST_CASE("exponent identity holds exactly") {
    for (int d = 2; d <= 10; ++d) {
        const auto [lhs, rhs] = exponent_identity(Dim(d));
        CHECK(lhs == rhs);
    }
}

TEST_CASE("region membership for d = 3") {
    const Dim d(3);
    CHECK(region_contains(d, {0.7, 0.51}) == Membership::Outside);
    CHECK(region_contains(d, {0.5, 0.45}) == Membership::Inside);
    CHECK(region_contains(d, {0.75, 0.625}) == Membership::Boundary);
    CHECK(region_contains(d, {0.5, 0.375}) == Membership::Boundary);
    CHECK(region_contains(d, {0.5, 0.5}) == Membership::Boundary);
    CHECK(region_contains(d, {0.5, 0.6}) == Membership::Outside);
}

TEST_CASE("membership ignores vertex order") {
    auto v = region_vertices(Dim(4));
    const ExponentPair pts[] = {{0.5, 0.45}, {0.7, 0.6}, {0.9, 0.2}, {0.0, 0.0}};
    for (const auto& pt : pts) {
        const Membership ref = triangle_contains(v, pt);
        std::array<RationalPoint, 3> w = {v[2], v[0], v[1]};
        CHECK(triangle_contains(w, pt) == ref);
        w = {v[1], v[0], v[2]};
        CHECK(triangle_contains(w, pt) == ref);
    }
}

TEST_CASE("nonisotropic dilation") {
    const Point y = nonisotropic_dilate(Eigen::Vector2d(1, 1), 2.0);
    CHECK(y(0) == 2.0);
    CHECK(y(1) == 4.0);
    const BoxUnionSet s = unit(3).scaled(dilation_factors(Dim(3), 0.5));
    CHECK(s.measure() == doctest::Approx(std::pow(0.5, 6)));
}

TEST_CASE("counterexample pieces") {
    for (int d : {2, 3}) {
        const Dim dim(d);
        for (std::int64_t k : {2, 5, 9}) {
            const double expected = std::pow(2.0, d) * std::pow(double(k), -dim.homogeneous_dim());
            CHECK(counterexample_box(dim, k).volume() == doctest::Approx(expected));
        }
    }
}

TEST_CASE("streamed norms equal the materialized ones") {
    CounterexampleSpec spec;
    spec.dim = Dim(3);
    spec.N = 4;
    spec.K_max = 60;
    spec.tail_tol = 1.0;
    const auto e = critical_exponents(spec.dim);
    const auto norms = counterexample_norms(spec, 2.0);
    CHECK(norms.K == 60);
    CHECK(norms.norm_f == doctest::Approx(lp_norm(build_counterexample_f(spec), e.p.to_double())));
    CHECK(norms.norm_xf ==
          doctest::Approx(lorentz_norm(build_xf_lower_bound(spec), e.q.to_double(), 2.0)));
}

TEST_CASE("explicit truncation must meet the tail tolerance") {
    CounterexampleSpec spec;
    spec.N = 4;
    spec.K_max = 5;
    CHECK_THROWS_AS(resolve_truncation(spec), DomainError);
}

TEST_CASE("minorant: X f >= 1/k on B_k") {
    for (int d : {2, 3}) {
        CounterexampleSpec spec;
        spec.dim = Dim(d);
        spec.N = 3;
        spec.K_max = 12;
        spec.tail_tol = 1.0;
        const SimpleFunction f = build_counterexample_f(spec);
        for (std::int64_t k = 3; k <= 12; ++k) {
            const Box b = minorant_box(spec.dim, k);
            const double m = min_on_samples(BoxUnionSet::single(b), 3,
                                            [&](const Point& x) { return apply_x(f, Interval(0, 1), x); });
            CHECK(m >= 1.0 / k - 1e-12);
        }
    }
}

TEST_CASE("restricted weak-type ratios on the unit square") {
    const QuadSpec q = QuadSpec::defaults(Dim(2));
    const RwtReport r = check_rwt(unit(2), unit(2), Interval(0, 1), q);
    CHECK(r.T == doctest::Approx(0.75).epsilon(1e-6));
    CHECK(r.ratio_E == doctest::Approx(64.0 / 27.0).epsilon(1e-5));
}

TEST_CASE("weak-type ratios are dilation invariant") {
    const QuadSpec q = QuadSpec::defaults(Dim(3));
    const BoxUnionSet E = BoxUnionSet::single(Box(Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(1, 1, 1)));
    const BoxUnionSet F = BoxUnionSet::single(Box(Eigen::Vector3d(0.2, 0.2, 0.2), Eigen::Vector3d(0.7, 0.7, 0.7)));
    const RwtReport a = check_rwt(E, F, Interval(0, 1), q);
    const Eigen::VectorXd s = dilation_factors(Dim(3), 0.5);
    const RwtReport b = check_rwt(E.scaled(s), F.scaled(s), Interval(0, 0.5), q);
    CHECK(b.ratio_E == doctest::Approx(a.ratio_E).epsilon(1e-3));
    CHECK(b.ratio_F == doctest::Approx(a.ratio_F).epsilon(1e-3));
}

TEST_CASE("disjoint pair has no weak-type ratio") {
    const BoxUnionSet F = BoxUnionSet::single(Box(Eigen::Vector2d(5, 5), Eigen::Vector2d(6, 6)));
    CHECK_THROWS_AS(check_rwt(unit(2), F, Interval(0, 1), QuadSpec{}), DomainError);
}

TEST_CASE("necessity verdicts for d = 2 on the pieces route") {
    // slope of the pieces norm is -2 + 1/r against -4/3 for ||f||
    const std::vector<int> N{16, 32, 64, 128};
    CHECK(necessity_check(Dim(2), 1.0, NormRoute::Pieces, N).verdict == NecessityVerdict::Unbounded);
    CHECK(necessity_check(Dim(2), 3.0, NormRoute::Pieces, N).verdict == NecessityVerdict::Bounded);
}

TEST_CASE("refinement hypothesis is enforced") {
    const QuadSpec q = QuadSpec::defaults(Dim(2));
    const BoxUnionSet G = BoxUnionSet::single(Box(Eigen::Vector2d(0.2, 0.2), Eigen::Vector2d(0.4, 0.4)));
    CHECK_THROWS_AS(check_lemma2_e(unit(2), unit(2), G, 1.5, Interval(0, 1), q), HypothesisError);
    const Lemma2Report r = check_lemma2_e(unit(2), unit(2), G, 0.1, Interval(0, 1), q);
    CHECK(r.lhs == doctest::Approx(1.0));
    CHECK(r.ratio > 0.0);
}
