#include "momentray/xray.hpp"

#include <doctest.h>

#include <cmath>

using namespace momentray;

namespace {

Box cube(int d, double lo, double hi) {
    return Box(Eigen::VectorXd::Constant(d, lo), Eigen::VectorXd::Constant(d, hi));
}

BoxUnionSet single(const Box& b) { return BoxUnionSet::single(b); }

Box random_box(int d, Rng& rng) {
    Eigen::VectorXd lo(d), hi(d);
    for (int i = 0; i < d; ++i) {
        lo(i) = rng.uniform(-1.0, 0.5);
        hi(i) = lo(i) + rng.uniform(0.3, 0.9);
    }
    return Box(lo, hi);
}

}  // namespace

TEST_CASE("box union rejects overlaps") {
    CHECK_THROWS_AS(BoxUnionSet::make(2, {cube(2, 0, 1), cube(2, 0.5, 1.5)}), DomainError);
    const BoxUnionSet s = BoxUnionSet::make(2, {cube(2, 0, 1), cube(2, 1, 2)});
    CHECK(s.measure() == doctest::Approx(2.0));
    CHECK(s.projection(0).hi == 2.0);
}

TEST_CASE("fiber set normalizes pieces") {
    const FiberSet f = FiberSet::from_pieces({{0.5, 1.0}, {0.0, 0.2}, {0.9, 1.5}});
    REQUIRE(f.pieces().size() == 2);
    CHECK(f.measure() == doctest::Approx(1.2));
    CHECK(f.contains(1.2));
    CHECK_FALSE(f.contains(0.3));
}

TEST_CASE("line fiber: centered cube at the origin") {
    for (int d : {2, 3, 4}) {
        const FiberSet f = line_fiber(single(cube(d, -1, 1)), Point::Zero(d), Interval(0, 1), false);
        REQUIRE(f.pieces().size() == 1);
        CHECK(f.pieces()[0].lo == 0.0);
        CHECK(f.pieces()[0].hi == 1.0);
    }
}

TEST_CASE("line fiber: unit square by hand") {
    const FiberSet f = line_fiber(single(cube(2, 0, 1)), Eigen::Vector2d(1, 0.5), Interval(0, 1), false);
    REQUIRE(f.pieces().size() == 1);
    CHECK(f.pieces()[0].lo == doctest::Approx(0.0));
    CHECK(f.pieces()[0].hi == doctest::Approx(0.5));
}

TEST_CASE("dual fiber with even power has two pieces") {
    // gamma_star(y, t) = (t, y2 - y1 t, y3 - y1 t^2); y1 = -1 so the last
    // coordinate is y3 + t^2, inside [0.25, 1] for 0.5 <= |t| <= 1.
    const Box b(Eigen::Vector3d(-2, -10, 0.25), Eigen::Vector3d(2, 10, 1));
    const FiberSet f = line_fiber(single(b), Eigen::Vector3d(-1, 0, 0), Interval(-2, 2), true);
    REQUIRE(f.pieces().size() == 2);
    CHECK(f.measure() == doctest::Approx(1.0));
}

TEST_CASE("X of simple functions by hand") {
    for (int d : {2, 3}) {
        const SimpleFunction f = SimpleFunction::indicator(single(cube(d, -1, 1)));
        CHECK(apply_x(f, Interval(0, 1), Point::Zero(d)) == doctest::Approx(1.0));
    }
    const SimpleFunction g = SimpleFunction::indicator(single(cube(2, 0, 1)));
    CHECK(apply_x(g, Interval(0, 1), Eigen::Vector2d(1, 0)) == doctest::Approx(1.0));
}

TEST_CASE("X* by hand and window validation") {
    QuadSpec q;
    q.window = Interval(-1, 1);
    for (int d : {2, 3}) {
        const SimpleFunction g = SimpleFunction::indicator(single(cube(d, -1, 1)));
        CHECK(apply_x_star(g, Point::Zero(d), q) == doctest::Approx(2.0));
    }
    q.window = Interval(-0.5, 1);
    const SimpleFunction g = SimpleFunction::indicator(single(cube(2, -1, 1)));
    CHECK_THROWS_AS(apply_x_star(g, Point::Zero(2), q), DomainError);
}

TEST_CASE("grid function transform approaches the exact one") {
    const Box b = cube(2, 0, 1);
    const GridFunction g = GridFunction::sample(b, {65, 65}, [](const Point&) { return 1.0; });
    const SimpleFunction f = SimpleFunction::indicator(single(b));
    QuadSpec q;
    q.step = 1.0 / 512;
    const Point x = Eigen::Vector2d(0.4, 0.3);
    CHECK(apply_x(g, Interval(0, 1), x, q) == doctest::Approx(apply_x(f, Interval(0, 1), x)).epsilon(1e-2));
}

TEST_CASE("unit square pairing is 3/4") {
    const BoxUnionSet U = single(cube(2, 0, 1));
    const QuadSpec q = QuadSpec::defaults(Dim(2));
    CHECK(std::abs(bilinear_form(U, U, Interval(0, 1), q) - 0.75) <= 1e-6);
    CHECK(std::abs(bilinear_form(U, U, Interval(0, 1), q.refined()) - 0.75) <= 1e-6);
    CHECK(std::abs(bilinear_form_dual(U, U, Interval(0, 1), q) - 0.75) <= 1e-6);
}

TEST_CASE("half-height box pairing by hand") {
    // int_0^{1/2} int_0^1 min(1, (1 - x2)/x1) dx1 dx2 = 9/16 + ln(1/2)/8
    const BoxUnionSet E = single(cube(2, 0, 1));
    const BoxUnionSet F = single(Box(Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 0.5)));
    const double exact = 9.0 / 16.0 + std::log(0.5) / 8.0;
    const QuadSpec q = QuadSpec::defaults(Dim(2));
    CHECK(bilinear_form(E, F, Interval(0, 1), q) == doctest::Approx(exact).epsilon(1e-5));
    CHECK(bilinear_form_dual(E, F, Interval(0, 1), q) == doctest::Approx(exact).epsilon(1e-5));
}

TEST_CASE("primal and dual pairings agree on random boxes") {
    Rng rng(21);
    for (int d : {2, 3}) {
        const QuadSpec q = QuadSpec::defaults(Dim(d));
        int done = 0;
        while (done < 10) {
            const BoxUnionSet E = single(random_box(d, rng)), F = single(random_box(d, rng));
            const double a = bilinear_form(E, F, Interval(-0.5, 1), q);
            if (a < 1e-3 * E.measure() * F.measure()) continue;
            CHECK(bilinear_form_dual(E, F, Interval(-0.5, 1), q) == doctest::Approx(a).epsilon(1e-3));
            ++done;
        }
    }
}

TEST_CASE("adaptive midpoint agrees with a fine plain grid") {
    const BoxUnionSet E = single(Box(Eigen::Vector3d(-0.47, 0.46, 0.35), Eigen::Vector3d(0.15, 0.97, 1.1)));
    const BoxUnionSet F = single(Box(Eigen::Vector3d(0.35, -0.19, 0.43), Eigen::Vector3d(0.91, 0.37, 0.97)));
    QuadSpec fine;
    fine.adapt_tol = 0.0;
    fine.step /= 16;
    fine.min_cells *= 16;
    const double ref = bilinear_form(E, F, Interval(-0.5, 1), fine);
    CHECK(bilinear_form(E, F, Interval(-0.5, 1), QuadSpec{}) == doctest::Approx(ref).epsilon(1e-3));
}

TEST_CASE("monte carlo route is seeded") {
    const BoxUnionSet U = single(cube(5, 0, 1));
    QuadSpec q = QuadSpec::defaults(Dim(5));
    q.samples = 20000;
    REQUIRE(q.method == QuadSpec::Method::MonteCarlo);
    const double a = bilinear_form(U, U, Interval(0, 1), q);
    CHECK(a == bilinear_form(U, U, Interval(0, 1), q));
    CHECK(a > 0.0);
}

TEST_CASE("superlevel bracket contains a 10x finer sampling") {
    const BoxUnionSet U = single(cube(2, 0, 1));
    const SuperlevelSet s = superlevel_set(U, U, Interval(0, 1), 0.75, 32);
    int hits = 0;
    const int n = 320;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            hits += xray_indicator(U, Interval(0, 1), Eigen::Vector2d((i + 0.5) / n, (j + 0.5) / n)) >= 0.75;
    const double brute = static_cast<double>(hits) / (n * n);
    CHECK(s.inner_measure <= brute + 1e-12);
    CHECK(brute <= s.outer_measure + 1e-12);
    CHECK(s.inner.measure() == doctest::Approx(s.inner_measure));
}
