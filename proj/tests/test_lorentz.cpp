#include "momentray/lorentz.hpp"

#include <doctest.h>

#include <cmath>

using namespace momentray;

namespace {

// 2 chi_A + chi_B on the line y = 0 of R^2, |A| = 1, |B| = 3.
SimpleFunction two_level() {
    const Box a(Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 1));
    const Box b(Eigen::Vector2d(1, 0), Eigen::Vector2d(4, 1));
    return SimpleFunction::make(2, {{2.0, BoxUnionSet::single(a)}, {1.0, BoxUnionSet::single(b)}});
}

SimpleFunction indicator_of_measure(double m) {
    return SimpleFunction::indicator(BoxUnionSet::single(Box(Eigen::Vector2d(0, 0), Eigen::Vector2d(m, 1))));
}

}  // namespace

TEST_CASE("distribution function") {
    const SimpleFunction f = two_level();
    CHECK(distribution(f, 0.5) == doctest::Approx(4.0));
    CHECK(distribution(f, 1.5) == doctest::Approx(1.0));
    CHECK(distribution(f, 2.0) == 0.0);
}

TEST_CASE("decreasing rearrangement") {
    const StepProfile p = rearrangement(two_level());
    REQUIRE(p.steps() == 2);
    CHECK(p.values[0] == 2.0);
    CHECK(p.values[1] == 1.0);
    CHECK(p.breaks[1] == doctest::Approx(1.0));
    CHECK(p.breaks[2] == doctest::Approx(4.0));
    CHECK(p(0.5) == 2.0);
    CHECK(p(5.0) == 0.0);
}

TEST_CASE("overlapping supports are rejected") {
    const Box a(Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 1));
    const Box b(Eigen::Vector2d(0.5, 0), Eigen::Vector2d(2, 1));
    CHECK_THROWS_AS(SimpleFunction::make(2, {{1.0, BoxUnionSet::single(a)}, {1.0, BoxUnionSet::single(b)}}),
                    DomainError);
    CHECK_THROWS_AS(SimpleFunction::make(2, {{-1.0, BoxUnionSet::single(a)}}), DomainError);
}

TEST_CASE("indicator norms") {
    const SimpleFunction f = indicator_of_measure(4.0);
    // ||chi_A||_{s,r} = (s/r)^{1/r} |A|^{1/s}
    CHECK(lorentz_norm(f, 2.0, 1.0) == doctest::Approx(4.0));
    CHECK(lorentz_norm(f, 2.0, kInfinity) == doctest::Approx(2.0));
    CHECK(lorentz_norm(f, 3.0, 2.0) == doctest::Approx(std::sqrt(1.5) * std::cbrt(4.0)));
}

TEST_CASE("L^p norm and the diagonal Lorentz norm") {
    const SimpleFunction f = two_level();
    CHECK(lp_norm(f, 2.0) == doctest::Approx(std::sqrt(7.0)));
    for (double p : {1.0, 1.5, 2.0, 3.0})
        CHECK(std::abs(lorentz_norm(f, p, p) - lp_norm(f, p)) <= 1e-12 * lp_norm(f, p));
}

TEST_CASE("accumulator matches the profile") {
    StepProfile p;
    p.breaks.push_back(0.0);
    LorentzAccumulator acc(1.5, 2.5);
    double t = 0.0;
    for (int k = 1; k <= 50; ++k) {
        const double v = 1.0 / k, m = 1.0 / (k * k);
        acc.add(v, m);
        t += m;
        p.values.push_back(v);
        p.breaks.push_back(t);
    }
    CHECK(acc.total_measure() == doctest::Approx(t));
    CHECK(acc.norm() == doctest::Approx(lorentz_norm(p, 1.5, 2.5)).epsilon(1e-12));
}

TEST_CASE("accumulator rejects increasing values") {
    LorentzAccumulator acc(2.0, 1.0);
    acc.add(1.0, 1.0);
    CHECK_THROWS_AS(acc.add(2.0, 1.0), DomainError);
}
