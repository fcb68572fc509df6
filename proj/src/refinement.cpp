#include "momentray/refinement.hpp"

#include "momentray/sharpness.hpp"

#include <algorithm>
#include <cmath>

namespace momentray {

RefineResult refine_step(const std::vector<double>& fiber_measures, double keep_fraction) {
    if (!(keep_fraction > 0.0 && keep_fraction <= 1.0))
        throw DomainError("refine_step: keep_fraction must lie in (0, 1]");
    RefineResult r;
    if (fiber_measures.empty()) throw DomainError("refine_step: empty input");
    NeumaierSum total;
    for (double m : fiber_measures) {
        if (!(m >= 0.0)) throw DomainError("refine_step: fiber measures must be >= 0");
        total.add(m);
    }
    r.total = total.value();
    r.average = r.total / static_cast<double>(fiber_measures.size());
    r.threshold = keep_fraction * r.average;
    NeumaierSum kept;
    for (std::size_t i = 0; i < fiber_measures.size(); ++i) {
        if (fiber_measures[i] >= r.threshold && fiber_measures[i] > 0.0) {
            r.kept.push_back(i);
            kept.add(fiber_measures[i]);
        }
    }
    if (r.kept.empty()) throw DomainError("refine_step: nothing survives (all fibers empty)");
    r.retained = kept.value();
    r.discarded = r.total - r.retained;
    return r;
}

MapKind tower_kind(TowerGoal goal, Dim dim) {
    const bool phi = (goal == TowerGoal::SetE) == dim.even();
    return phi ? MapKind::Phi : MapKind::Psi;
}

double TowerLevel::measure() const { return static_cast<double>(nodes.size()) * cell_volume; }

ParamVector Tower::params(int level, std::size_t index) const {
    ParamVector p(level);
    int i = static_cast<int>(index);
    for (int j = level; j >= 1; --j) {
        const TowerNode& n = levels[j - 1].nodes[i];
        p(j - 1) = n.param;
        i = n.parent;
    }
    return p;
}

namespace {

bool is_t_step(MapKind kind, int step) { return (kind == MapKind::Phi) == (step % 2 == 1); }

[[noreturn]] void collapse(MapKind kind, int step) {
    const int omega = kind == MapKind::Phi ? step : step + 1;
    throw DomainError("tower collapse at level " + std::to_string(omega));
}

const BoxUnionSet& step_target(const TowerSets& s, MapKind kind, int step, int d) {
    if (step == d) return s.top;
    return is_t_step(kind, step) ? s.f_side : s.e_side;
}

/// Parameter range that loses nothing: the target's first-axis projection
/// (intersected with I for s-steps). Empty optional when disjoint.
std::optional<Interval> step_range(const TowerSets& s, const BoxUnionSet& target, bool t_step) {
    if (target.empty()) return std::nullopt;
    Interval r = target.projection(0);
    if (t_step) return r;
    const double lo = std::max(r.lo, s.I.lo), hi = std::min(r.hi, s.I.hi);
    if (lo > hi) return std::nullopt;
    return Interval(lo, hi);
}

FiberSet step_fiber(const TowerSets& s, const BoxUnionSet& target, bool t_step, const Point& p) {
    const auto range = step_range(s, target, t_step);
    if (!range) return {};
    return line_fiber(target, p, *range, t_step);
}

Point step_map(bool t_step, const Point& p, double v) {
    return t_step ? gamma_star<double>(p, v) : gamma<double>(p, v);
}

}  // namespace

Tower build_tower(const TowerSets& sets, const TowerConfig& cfg, const QuadSpec& quad) {
    const int d = sets.e_side.dim();
    if (sets.f_side.dim() != d || sets.top.dim() != d) throw DomainError("build_tower: dimension mismatch");
    if (!(cfg.cell_width > 0.0)) throw DomainError("build_tower: cell_width must be positive");
    if (cfg.base_grid < 1) throw DomainError("build_tower: base_grid must be >= 1");

    Tower tw;
    tw.dim = Dim(d);
    tw.kind = cfg.kind;
    tw.cell_width = cfg.cell_width;
    tw.T = bilinear_form(sets.e_side, sets.f_side, sets.I, quad);
    const double w = cfg.cell_width;
    const double margin = 1e-9 * w;

    // Base point: best first-level fiber over a grid of candidates.
    const bool phi = cfg.kind == MapKind::Phi;
    const BoxUnionSet& base_set = phi ? sets.e_side : sets.f_side;
    const BoxUnionSet& first_target = step_target(sets, cfg.kind, 1, d);
    const bool first_t = is_t_step(cfg.kind, 1);
    double best = -1.0;
    Point cand(d);
    std::vector<int> idx(d);
    for (const Box& b0 : base_set.boxes()) {
        Box b = b0;
        if (phi) {
            b.lo(0) = std::max(b.lo(0), sets.I.lo);
            b.hi(0) = std::min(b.hi(0), sets.I.hi);
            if (b.lo(0) > b.hi(0)) continue;
        }
        std::fill(idx.begin(), idx.end(), 0);
        while (true) {
            for (int i = 0; i < d; ++i)
                cand(i) = b.lo(i) + (idx[i] + 0.5) * (b.hi(i) - b.lo(i)) / cfg.base_grid;
            const double f = step_fiber(sets, first_target, first_t, cand).measure();
            if (f > best) {
                best = f;
                tw.base = cand;
            }
            int a = d - 1;
            while (a >= 0 && ++idx[a] == cfg.base_grid) idx[a--] = 0;
            if (a < 0) break;
        }
    }
    if (!(best > 0.0)) collapse(cfg.kind, 1);
    tw.base_fiber = best;

    // Forward pass: refine parents by their exact next fiber, then expand.
    std::vector<std::vector<double>> next_fiber(d);  // per level-(j-1) node
    std::size_t total_nodes = 0;
    for (int step = 1; step <= d; ++step) {
        const bool t_step = is_t_step(cfg.kind, step);
        const BoxUnionSet& target = step_target(sets, cfg.kind, step, d);
        TowerLevel lvl;
        lvl.params = step;
        lvl.omega_index = phi ? step : step + 1;
        lvl.t_step = t_step;
        lvl.target = step == d ? (t_step ? "F'" : "E'") : (t_step ? "F" : "E");
        lvl.predicted = step == d ? sets.delta
                                  : tw.T / (t_step ? sets.e_side.measure() : sets.f_side.measure());
        lvl.cell_volume = std::pow(w, step);

        const std::size_t n_parents = step == 1 ? 1 : tw.levels.back().nodes.size();
        auto parent_image = [&](std::size_t i) -> const Point& {
            return step == 1 ? tw.base : tw.levels.back().nodes[i].image;
        };
        std::vector<FiberSet> fibers(n_parents);
        std::vector<double> meas(n_parents);
        for (std::size_t i = 0; i < n_parents; ++i) {
            fibers[i] = step_fiber(sets, target, t_step, parent_image(i));
            meas[i] = fibers[i].measure();
        }
        next_fiber[step - 1] = meas;
        RefineResult rr;
        try {
            rr = refine_step(meas, cfg.keep_fraction);
        } catch (const DomainError&) {
            collapse(cfg.kind, step);
        }
        lvl.threshold = rr.threshold;

        for (std::size_t pi : rr.kept) {
            for (const Interval& piece : fibers[pi].pieces()) {
                const auto c0 = static_cast<std::int64_t>(std::ceil((piece.lo + margin) / w - 0.5));
                const auto c1 = static_cast<std::int64_t>(std::floor((piece.hi - margin) / w - 0.5));
                for (std::int64_t c = c0; c <= c1; ++c) {
                    const double v = (static_cast<double>(c) + 0.5) * w;
                    if (!fibers[pi].contains_with_margin(v, margin)) continue;
                    Point img = step_map(t_step, parent_image(pi), v);
                    if (!target.contains(img)) continue;
                    lvl.nodes.push_back({step == 1 ? -1 : static_cast<int>(pi), v, std::move(img)});
                }
            }
        }
        if (lvl.nodes.empty()) collapse(cfg.kind, step);
        total_nodes += lvl.nodes.size();
        if (total_nodes > cfg.max_nodes)
            throw DomainError("build_tower: node budget exceeded; use a coarser cell_width");
        tw.levels.push_back(std::move(lvl));
    }

    // Backward pass: drop nodes without descendants, then reindex.
    std::vector<std::vector<int>> remap(d);
    for (int j = d - 1; j >= 0; --j) {
        std::vector<char> alive(tw.levels[j].nodes.size(), j == d - 1);
        if (j < d - 1)
            for (const TowerNode& c : tw.levels[j + 1].nodes) alive[c.parent] = 1;
        remap[j].assign(alive.size(), -1);
        std::vector<TowerNode> kept;
        for (std::size_t i = 0; i < alive.size(); ++i) {
            if (!alive[i]) continue;
            remap[j][i] = static_cast<int>(kept.size());
            kept.push_back(std::move(tw.levels[j].nodes[i]));
        }
        if (kept.empty()) collapse(cfg.kind, j + 1);
        // Children at j + 1 were already compacted; fix their parent links.
        if (j < d - 1)
            for (TowerNode& c : tw.levels[j + 1].nodes) c.parent = remap[j][c.parent];
        tw.levels[j].nodes = std::move(kept);
    }

    // Per-level richness over surviving parents.
    for (int step = 1; step <= d; ++step) {
        TowerLevel& lvl = tw.levels[step - 1];
        std::vector<std::size_t> children;
        std::vector<double> exact;
        if (step == 1) {
            children.assign(1, lvl.nodes.size());
            exact.assign(1, tw.base_fiber);
        } else {
            const auto& parents = tw.levels[step - 2].nodes;
            children.assign(parents.size(), 0);
            for (const TowerNode& c : lvl.nodes) ++children[c.parent];
            // Parents' old indices: invert remap of the parent level.
            exact.assign(parents.size(), 0.0);
            const auto& rm = remap[step - 2];
            for (std::size_t old = 0; old < rm.size(); ++old)
                if (rm[old] >= 0) exact[rm[old]] = next_fiber[step - 1][old];
        }
        lvl.min_fiber_exact = *std::min_element(exact.begin(), exact.end());
        lvl.min_fiber_lattice =
            static_cast<double>(*std::min_element(children.begin(), children.end())) * w;
    }
    return tw;
}

StructureReport verify_tower(const Tower& tower, const TowerSets& sets, std::size_t samples,
                             std::uint64_t seed) {
    StructureReport rep;
    const int d = tower.dim.value();
    const auto& top = tower.top().nodes;
    std::vector<std::size_t> picks;
    if (top.size() <= samples) {
        for (std::size_t i = 0; i < top.size(); ++i) picks.push_back(i);
    } else {
        Rng rng(seed);
        for (std::size_t i = 0; i < samples; ++i)
            picks.push_back(static_cast<std::size_t>(rng.next() % top.size()));
    }
    for (std::size_t pick : picks) {
        ++rep.sampled;
        const ParamVector params = tower.params(d, pick);
        bool nested = true, member = true;
        int node = static_cast<int>(pick);
        std::vector<int> chain(d);
        for (int j = d; j >= 1; --j) {
            if (node < 0 || node >= static_cast<int>(tower.levels[j - 1].nodes.size())) {
                nested = false;
                break;
            }
            chain[j - 1] = node;
            node = tower.levels[j - 1].nodes[node].parent;
        }
        if (nested && node != -1) nested = false;
        for (int j = 1; j <= d && nested; ++j) {
            const Point img = incidence_map<double>(tower.kind, tower.base, ParamVector(params.head(j)));
            const TowerNode& n = tower.levels[j - 1].nodes[chain[j - 1]];
            if (n.param != params(j - 1)) nested = false;
            const BoxUnionSet& target = step_target(sets, tower.kind, j, d);
            if (!target.contains(img)) member = false;
        }
        rep.nested_ok += nested;
        rep.membership_ok += nested && member;
    }
    return rep;
}

double image_volume_lower_bound(const Tower& tower, bool use_closed_form, double c_d) {
    const int d = tower.dim.value();
    const double cell = std::pow(tower.cell_width, d);
    NeumaierSum s;
    for (std::size_t i = 0; i < tower.top().nodes.size(); ++i) {
        const ParamVector p = tower.params(d, i);
        const double J = use_closed_form
                             ? std::abs(c_d) * jacobian_closed_form<double>(tower.kind, tower.dim,
                                                                           tower.base(0), p)
                             : jacobian_numeric(tower.kind, tower.base, p);
        s.add(std::abs(J) * cell);
    }
    return s.value();
}

TowerReport tower_report(TowerGoal goal, const TowerSets& sets, const TowerConfig& cfg,
                         const QuadSpec& quad, std::size_t structure_samples, std::uint64_t seed) {
    TowerConfig c = cfg;
    c.kind = tower_kind(goal, Dim(sets.e_side.dim()));
    TowerReport r;
    r.tower = build_tower(sets, c, quad);
    r.structure = verify_tower(r.tower, sets, structure_samples, seed);
    r.integral = image_volume_lower_bound(r.tower, true);
    const Dim dim = r.tower.dim;
    r.rhs = goal == TowerGoal::SetE
                ? lemma2_rhs_e(dim, sets.delta, r.tower.T, sets.f_side.measure(), sets.e_side.measure())
                : lemma2_rhs_f(dim, sets.delta, r.tower.T, sets.f_side.measure(), sets.e_side.measure());
    r.ratio = r.rhs > 0.0 ? r.integral / r.rhs : kInfinity;
    return r;
}

}  // namespace momentray
