#include "momentray/refinement.hpp"

#include <doctest.h>

#include <cmath>

using namespace momentray;

namespace {

BoxUnionSet unit(int d) {
    return BoxUnionSet::single(Box(Eigen::VectorXd::Zero(d), Eigen::VectorXd::Ones(d)));
}

TowerSets unit_sets(int d) {
    TowerSets s{unit(d), unit(d), unit(d), Interval(0, 1)};
    return s;
}

}  // namespace

TEST_CASE("refine step keeps the heavy fibers") {
    const RefineResult r = refine_step(std::vector<double>{0.0, 1.0, 2.0, 3.0, 0.0}, 0.5);
    CHECK(r.average == doctest::Approx(1.2));
    CHECK(r.kept == std::vector<std::size_t>{1, 2, 3});
    CHECK(r.retained >= 0.5 * r.total);
    CHECK(r.discarded < 0.5 * r.total);
}

TEST_CASE("retained mass is bounded by 1 - keep, not keep") {
    const RefineResult r = refine_step(std::vector<double>{1, 1, 1, 1, 10}, 0.9);
    CHECK(r.kept == std::vector<std::size_t>{4});
    CHECK(r.retained / r.total == doctest::Approx(10.0 / 14.0));
    CHECK(r.retained / r.total < 0.9);
    CHECK(r.retained >= (1 - 0.9) * r.total);
}

TEST_CASE("refine step on fiber sets") {
    const std::vector<int> v{0, 1, 2};
    const RefineResult r = refine_step(v, [](int i) { return FiberSet(Interval(0, i)); }, 0.5);
    CHECK(r.kept == std::vector<std::size_t>{1, 2});
    CHECK_THROWS_AS(refine_step(std::vector<double>{0, 0}, 0.5), DomainError);
}

TEST_CASE("tower kinds by parity") {
    CHECK(tower_kind(TowerGoal::SetE, Dim(2)) == MapKind::Phi);
    CHECK(tower_kind(TowerGoal::SetE, Dim(3)) == MapKind::Psi);
    CHECK(tower_kind(TowerGoal::SetF, Dim(2)) == MapKind::Psi);
    CHECK(tower_kind(TowerGoal::SetF, Dim(3)) == MapKind::Phi);
}

TEST_CASE("unit square towers") {
    const QuadSpec q = QuadSpec::defaults(Dim(2));
    for (MapKind kind : {MapKind::Phi, MapKind::Psi}) {
        TowerConfig cfg;
        cfg.kind = kind;
        cfg.cell_width = 1.0 / 32;
        const Tower t = build_tower(unit_sets(2), cfg, q);
        REQUIRE(t.levels.size() == 2);
        CHECK(t.T == doctest::Approx(0.75).epsilon(1e-6));
        CHECK(t.levels[0].nodes.size() > 0);
        CHECK(t.top().nodes.size() >= t.levels[0].nodes.size());
        const StructureReport s = verify_tower(t, unit_sets(2), 500, 3);
        CHECK(s.sampled > 0);
        CHECK(s.all_ok());
        const double closed = image_volume_lower_bound(t, true, 1.0);
        const double numeric = image_volume_lower_bound(t, false);
        CHECK(closed == doctest::Approx(numeric).epsilon(1e-9));
        CHECK(closed > 0.0);
    }
}

TEST_CASE("d = 3 tower") {
    TowerConfig cfg;
    cfg.kind = MapKind::Psi;
    cfg.cell_width = 1.0 / 16;
    const Tower t = build_tower(unit_sets(3), cfg, QuadSpec::defaults(Dim(3)));
    REQUIRE(t.levels.size() == 3);
    CHECK(t.top().nodes.size() > 0);
    CHECK(verify_tower(t, unit_sets(3), 300, 5).all_ok());
}

TEST_CASE("tower report") {
    TowerConfig cfg;
    cfg.kind = tower_kind(TowerGoal::SetE, Dim(2));
    cfg.cell_width = 1.0 / 32;
    const TowerReport r = tower_report(TowerGoal::SetE, unit_sets(2), cfg, QuadSpec::defaults(Dim(2)), 200, 1);
    CHECK(r.structure.all_ok());
    CHECK(r.integral > 0.0);
    CHECK(r.ratio > 0.0);
}

TEST_CASE("disjoint sets collapse") {
    TowerSets s = unit_sets(2);
    s.f_side = BoxUnionSet::single(Box(Eigen::Vector2d(5, 5), Eigen::Vector2d(6, 6)));
    TowerConfig cfg;
    CHECK_THROWS_WITH_AS(build_tower(s, cfg, QuadSpec::defaults(Dim(2))),
                         doctest::Contains("tower collapse at level"), DomainError);
}
