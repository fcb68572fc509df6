// momentray command-line runner.

#include "momentray/acceptance.hpp"
#include "momentray/corpus.hpp"
#include "momentray/geometry.hpp"
#include "momentray/parallel.hpp"
#include "momentray/refinement.hpp"
#include "momentray/report.hpp"
#include "momentray/sharpness.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>

using namespace momentray;
using json = nlohmann::json;

namespace {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Outcome {
    Table table;
    bool pass = true;
    std::vector<std::string> lines;  // human-readable verdicts
    json extra;                      // merged into JSON output
};

const std::map<std::string, std::vector<std::string>>& required_fields() {
    static const std::map<std::string, std::vector<std::string>> m{
        {"exponents", {"d"}},
        {"region", {"d", "point"}},
        {"jacobian", {"d"}},
        {"duality", {"d"}},
        {"rwt", {}},
        {"superlevel", {"E", "F", "I"}},
        {"scaling", {"d", "r"}},
        {"necessity", {"d", "r"}},
        {"lemma2", {}},
        {"refine", {"E", "F", "I", "goal"}},
        {"acceptance", {}},
    };
    return m;
}

void check_required(const std::string& cmd, const json& cfg) {
    const auto it = required_fields().find(cmd);
    if (it == required_fields().end()) throw ConfigError("unknown command '" + cmd + "'");
    std::vector<std::string> missing;
    for (const auto& f : it->second)
        if (!cfg.contains(f)) missing.push_back(f);
    // E, F and I travel together when given for corpus-style commands.
    if (cmd == "rwt" || cmd == "lemma2" || cmd == "duality") {
        const bool any = cfg.contains("E") || cfg.contains("F") || cfg.contains("I");
        if (any)
            for (const char* f : {"E", "F", "I"})
                if (!cfg.contains(f)) missing.push_back(f);
    }
    if (missing.empty()) return;
    std::string msg = "missing required field(s) for '" + cmd + "':";
    for (const auto& f : missing) msg += " " + f;
    throw ConfigError(msg);
}

int get_d(const json& cfg) {
    const int d = cfg.at("d").get<int>();
    if (d < 2) throw ConfigError("d must be >= 2");
    return d;
}

std::uint64_t get_seed(const json& cfg) { return cfg.value("seed", std::uint64_t{1}); }

QuadSpec get_quad(const json& cfg, int d) {
    QuadSpec q = QuadSpec::defaults(Dim(d));
    if (!cfg.contains("quad")) return q;
    const json& j = cfg["quad"];
    if (j.contains("method")) {
        const auto m = j["method"].get<std::string>();
        if (m == "midpoint") q.method = QuadSpec::Method::Midpoint;
        else if (m == "montecarlo") q.method = QuadSpec::Method::MonteCarlo;
        else throw ConfigError("quad.method must be midpoint or montecarlo");
    }
    q.step = j.value("step", q.step);
    q.min_cells = j.value("min_cells", q.min_cells);
    q.samples = j.value("samples", q.samples);
    q.seed = j.value("seed", q.seed);
    q.adapt_tol = j.value("adapt_tol", q.adapt_tol);
    q.adapt_depth = j.value("adapt_depth", q.adapt_depth);
    if (j.contains("window")) q.window = interval_from_json(j["window"]);
    if (!(q.step > 0.0) || q.min_cells < 1 || q.samples < 1)
        throw ConfigError("quad: step, min_cells and samples must be positive");
    return q;
}

struct Pair {
    std::string id;
    int d;
    Interval I;
    BoxUnionSet E, F;
};

/// The inline (E, F, I) pair if given, else the corpus.
std::vector<Pair> get_pairs(const json& cfg) {
    std::vector<Pair> out;
    if (cfg.contains("E")) {
        const int d = get_d(cfg);
        out.push_back({"config", d, interval_from_json(cfg["I"]), box_union_from_json(cfg["E"], d),
                       box_union_from_json(cfg["F"], d)});
        return out;
    }
    const std::string path = cfg.value("corpus", default_corpus_path());
    for (auto& e : load_corpus(path)) out.push_back({e.id, e.d, e.I, std::move(e.E), std::move(e.F)});
    return out;
}

std::vector<double> get_r(const json& cfg) {
    const json& r = cfg.at("r");
    std::vector<double> rs = r.is_array() ? r.get<std::vector<double>>() : std::vector<double>{r.get<double>()};
    if (rs.empty()) throw ConfigError("r must be non-empty");
    for (double v : rs)
        if (!(v > 0.0)) throw ConfigError("r must be positive");
    return rs;
}

int workers(const json& cfg) { return cfg.value("workers", default_workers()); }

/// The config as it affects results: worker count excluded.
json result_config(const json& cfg) {
    json c = cfg;
    c.erase("workers");
    return c;
}

void header(Table& t, const std::string& cmd, const json& cfg) {
    t.prepend_comment("config " + result_config(cfg).dump());
    t.prepend_comment(std::string("momentray ") + MOMENTRAY_VERSION + " " + cmd);
}

// ---- commands ------------------------------------------------------------

Outcome cmd_exponents(const json& cfg) {
    const Dim dim(get_d(cfg));
    const CriticalExponents ce = critical_exponents(dim);
    Outcome o{Table({"name", "exact", "value"})};
    auto row = [&](const std::string& n, const Rational& v) { o.table.add_row({n, v.str(), fmt(v.to_double())}); };
    row("p", ce.p);
    row("q", ce.q);
    row("p_inv", ce.p_inv());
    row("q_inv", ce.q_inv());
    row("q_dual", ce.q_dual());
    const auto v = region_vertices(dim);
    for (int i = 0; i < 3; ++i) {
        row("vertex" + std::to_string(i) + "_p_inv", v[i][0]);
        row("vertex" + std::to_string(i) + "_q_inv", v[i][1]);
    }
    const auto [lhs, rhs] = exponent_identity(dim);
    row("identity_lhs", lhs);
    row("identity_rhs", rhs);
    o.pass = lhs == rhs;
    o.lines.push_back("d=" + std::to_string(dim.value()) + ": p=" + ce.p.str() + ", q=" + ce.q.str() +
                      ", vertices (0,0) (1,1) (" + ce.p_inv().str() + "," + ce.q_inv().str() + ")");
    return o;
}

Outcome cmd_region(const json& cfg) {
    const Dim dim(get_d(cfg));
    const auto pt = cfg.at("point").get<std::vector<double>>();
    if (pt.size() != 2) throw ConfigError("point must be [p_inv, q_inv]");
    const Membership m = region_contains(dim, {pt[0], pt[1]});
    Outcome o{Table({"d", "p_inv", "q_inv", "membership"})};
    o.table.add_row({std::to_string(dim.value()), fmt(pt[0]), fmt(pt[1]), to_string(m)});
    o.lines.push_back(std::string("(") + fmt(pt[0]) + ", " + fmt(pt[1]) + ") is " + to_string(m));
    return o;
}

Outcome cmd_jacobian(const json& cfg) {
    const Dim dim(get_d(cfg));
    const int samples = cfg.value("samples", 100);
    if (samples < 2) throw ConfigError("samples must be >= 2");
    const std::string kind = cfg.value("kind", "both");
    std::vector<MapKind> kinds;
    if (kind == "phi" || kind == "both") kinds.push_back(MapKind::Phi);
    if (kind == "psi" || kind == "both") kinds.push_back(MapKind::Psi);
    if (kinds.empty()) throw ConfigError("kind must be phi, psi or both");
    Outcome o{Table({"kind", "d", "sample", "ratio"})};
    for (MapKind k : kinds) {
        const CdEstimate e = estimate_c_d(k, dim, samples, get_seed(cfg));
        for (int i = 0; i < e.ratios.size(); ++i)
            o.table.add_row({to_string(k), std::to_string(dim.value()), std::to_string(i), fmt(e.ratios(i))});
        const bool ok = e.dispersion < tol::kCdDispersion && std::abs(e.mean) >= 1e-3;
        o.pass = o.pass && ok;
        o.table.comment(std::string(to_string(k)) + " c_d " + fmt(e.mean) + " dispersion " + fmt(e.dispersion));
        o.lines.push_back(std::string(to_string(k)) + " d=" + std::to_string(dim.value()) + " c_d=" + fmt(e.mean) +
                          " dispersion=" + fmt(e.dispersion) + " " + (ok ? "PASS" : "FAIL"));
    }
    return o;
}

Outcome cmd_duality(const json& cfg) {
    const int d = get_d(cfg);
    const QuadSpec q = get_quad(cfg, d);
    Outcome o{Table({"pair", "primal", "dual", "rel_diff"})};
    std::vector<std::tuple<BoxUnionSet, BoxUnionSet, Interval>> pairs;
    if (cfg.contains("E")) {
        pairs.emplace_back(box_union_from_json(cfg["E"], d), box_union_from_json(cfg["F"], d),
                           interval_from_json(cfg["I"]));
    } else {
        const int n = cfg.value("pairs", 50);
        Rng rng(get_seed(cfg));
        while (static_cast<int>(pairs.size()) < n) {
            auto box = [&] {
                Eigen::VectorXd lo(d), hi(d);
                for (int i = 0; i < d; ++i) {
                    lo(i) = rng.uniform(-1.0, 0.6);
                    hi(i) = lo(i) + rng.uniform(0.2, 0.8);
                }
                return BoxUnionSet::single(Box(lo, hi));
            };
            BoxUnionSet E = box(), F = box();
            if (bilinear_form(E, F, Interval(-0.5, 1.0), q) < 1e-3 * E.measure() * F.measure()) continue;
            pairs.emplace_back(std::move(E), std::move(F), Interval(-0.5, 1.0));
        }
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto& [E, F, I] = pairs[i];
        const double a = bilinear_form(E, F, I, q), b = bilinear_form_dual(E, F, I, q);
        const double rd = a == 0.0 && b == 0.0 ? 0.0 : std::abs(a - b) / std::max(std::abs(a), std::abs(b));
        worst = std::max(worst, rd);
        o.table.add_row({std::to_string(i), fmt(a), fmt(b), fmt(rd)});
    }
    o.pass = worst <= tol::kDuality;
    o.lines.push_back("max relative difference " + fmt(worst) + " " + (o.pass ? "PASS" : "FAIL"));
    return o;
}

Outcome cmd_rwt(const json& cfg) {
    const auto pairs = get_pairs(cfg);
    std::vector<RwtReport> reps(pairs.size());
    parallel_for(pairs.size(), workers(cfg), [&](std::size_t i) {
        reps[i] = check_rwt(pairs[i].E, pairs[i].F, pairs[i].I, get_quad(cfg, pairs[i].d));
    });
    Outcome o{Table({"id", "d", "T", "measure_E", "measure_F", "alpha", "beta", "ratio_E", "ratio_F",
                     "verdict", "rwt_constant"})};
    double floor = kInfinity;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const RwtReport& r = reps[i];
        floor = std::min(floor, r.verdict);
        o.table.add_row({pairs[i].id, std::to_string(pairs[i].d), fmt(r.T), fmt(r.measure_E), fmt(r.measure_F),
                         fmt(r.alpha), fmt(r.beta), fmt(r.ratio_E), fmt(r.ratio_F), fmt(r.verdict),
                         fmt(r.rwt_constant)});
    }
    o.pass = floor >= tol::kRwtFloor;
    o.lines.push_back("verdict floor " + fmt(floor) + " " + (o.pass ? "PASS" : "FAIL"));
    return o;
}

Outcome cmd_superlevel(const json& cfg) {
    const int d = get_d(cfg);
    const BoxUnionSet E = box_union_from_json(cfg["E"], d), F = box_union_from_json(cfg["F"], d);
    const Interval I = interval_from_json(cfg["I"]);
    const int cells = cfg.value("cells", 32);
    if (cells < 1) throw ConfigError("cells must be >= 1");
    if (cfg.contains("theta")) {
        const double theta = cfg["theta"].get<double>();
        const SuperlevelSet s = superlevel_set(E, F, I, theta, cells);
        Outcome o{Table({"theta", "cells", "inner_measure", "outer_measure", "inner_boxes", "min_inner_value",
                         "max_cell_min"})};
        o.table.add_row({fmt(theta), std::to_string(cells), fmt(s.inner_measure), fmt(s.outer_measure),
                         std::to_string(s.inner.boxes().size()), fmt(s.min_inner_value), fmt(s.max_cell_min)});
        return o;
    }
    const SuperlevelReport r = superlevel_construction(E, F, I, cells);
    Outcome o{Table({"T", "epsilon", "c0", "theta", "outside_T", "g_inner", "g_outer", "constant_inner",
                     "constant_outer"})};
    o.table.add_row({fmt(r.T), fmt(r.epsilon), fmt(r.c0), fmt(r.theta), fmt(r.outside_T), fmt(r.g_inner),
                     fmt(r.g_outer), fmt(r.constant_inner), fmt(r.constant_outer)});
    return o;
}

std::vector<int> get_N_list(const json& cfg) {
    auto n = cfg.contains("N_list") ? cfg["N_list"].get<std::vector<int>>() : default_N_list();
    if (n.size() < 2) throw ConfigError("N_list needs at least two values");
    for (int v : n)
        if (v < 1) throw ConfigError("N_list values must be >= 1");
    return n;
}

Outcome cmd_scaling(const json& cfg) {
    const Dim dim(get_d(cfg));
    const auto rs = get_r(cfg);
    const auto res = scaling_experiment(dim, rs, get_N_list(cfg), cfg.value("tail_tol", 1e-9), workers(cfg));
    Outcome o{Table({"r", "N", "K", "norm_f", "norm_xf", "norm_xf_pieces"})};
    for (const ScalingResult& s : res) {
        for (const ScalingRow& row : s.rows)
            o.table.add_row({fmt(s.r), std::to_string(row.N), std::to_string(row.norms.K), fmt(row.norms.norm_f),
                             fmt(row.norms.norm_xf), fmt(row.norms.norm_xf_pieces)});
        const std::string line = "r=" + fmt(s.r) + " slope_f=" + fmt(s.fit_f.slope) + " (predicted " +
                                 fmt(s.predicted_f) + ") slope_xf=" + fmt(s.fit_xf.slope) + " (predicted " +
                                 fmt(s.predicted_xf) + ") slope_xf_pieces=" + fmt(s.fit_xf_pieces.slope);
        o.table.comment(line);
        o.lines.push_back(line);
    }
    return o;
}

Outcome cmd_necessity(const json& cfg) {
    const Dim dim(get_d(cfg));
    const auto rs = get_r(cfg);
    const std::string route = cfg.value("route", "exact");
    if (route != "exact" && route != "pieces") throw ConfigError("route must be exact or pieces");
    const NormRoute nr = route == "exact" ? NormRoute::Exact : NormRoute::Pieces;
    const auto res = scaling_experiment(dim, rs, get_N_list(cfg), cfg.value("tail_tol", 1e-9), workers(cfg));
    Outcome o{Table({"r", "route", "slope_f", "slope_xf", "difference", "verdict"})};
    for (const ScalingResult& s : res) {
        const NecessityReport n = necessity_from(s, nr);
        o.table.add_row({fmt(n.r), route, fmt(n.slope_f), fmt(n.slope_xf), fmt(n.difference), to_string(n.verdict)});
        o.lines.push_back("r=" + fmt(n.r) + " " + to_string(n.verdict));
    }
    return o;
}

Outcome cmd_lemma2(const json& cfg) {
    const auto pairs = get_pairs(cfg);
    const std::vector<double> fractions =
        cfg.value("fractions", std::vector<double>{0.1, 0.3, 0.5, 0.7, 0.9});
    const bool printed = cfg.value("printed", false);
    QuadSpec base;
    base.step = 1.0 / 32.0;
    base.min_cells = 4;
    std::vector<Lemma2Sweep> sweeps(pairs.size());
    parallel_for(pairs.size(), workers(cfg), [&](std::size_t i) {
        const QuadSpec q = cfg.contains("quad") ? get_quad(cfg, pairs[i].d) : base;
        const int cells = cfg.value("cells", pairs[i].d == 2 ? 32 : 12);
        sweeps[i] = lemma2_sweep(pairs[i].E, pairs[i].F, pairs[i].I, q, cells, fractions, printed);
    });
    Outcome o{Table({"id", "family", "step", "theta_fraction", "measure_set", "delta", "T", "lhs", "rhs", "ratio"})};
    double floor = kInfinity;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        for (const auto* fam : {&sweeps[i].e_steps, &sweeps[i].f_steps}) {
            const std::string name = fam == &sweeps[i].e_steps ? "E'" : "F'";
            for (std::size_t j = 0; j < fam->size(); ++j) {
                const Lemma2SweepStep& s = (*fam)[j];
                floor = std::min(floor, s.report.ratio);
                o.table.add_row({pairs[i].id, name, std::to_string(j), fmt(s.theta_fraction), fmt(s.measure_set),
                                 fmt(s.report.delta), fmt(s.report.T), fmt(s.report.lhs), fmt(s.report.rhs),
                                 fmt(s.report.ratio)});
            }
        }
    }
    o.pass = floor > 0.0;
    o.lines.push_back("ratio floor " + fmt(floor) + " " + (o.pass ? "PASS" : "FAIL"));
    return o;
}

Outcome cmd_refine(const json& cfg) {
    const int d = get_d(cfg);
    const BoxUnionSet E = box_union_from_json(cfg["E"], d), F = box_union_from_json(cfg["F"], d);
    const Interval I = interval_from_json(cfg["I"]);
    const std::string g = cfg["goal"].get<std::string>();
    if (g != "E" && g != "F") throw ConfigError("goal must be E or F");
    const TowerGoal goal = g == "E" ? TowerGoal::SetE : TowerGoal::SetF;
    const QuadSpec q = get_quad(cfg, d);
    TowerConfig tc;
    tc.cell_width = cfg.value("cell_width", tc.cell_width);
    tc.keep_fraction = cfg.value("keep_fraction", tc.keep_fraction);
    tc.base_grid = cfg.value("base_grid", tc.base_grid);
    if (!(tc.cell_width > 0.0) || !(tc.keep_fraction > 0.0 && tc.keep_fraction <= 1.0) || tc.base_grid < 1)
        throw ConfigError("refine: cell_width > 0, keep_fraction in (0, 1], base_grid >= 1 required");
    TowerSets sets{E, F, goal == TowerGoal::SetE ? E : F, I, 0.0};
    if (cfg.contains("delta")) {
        sets.delta = cfg["delta"].get<double>();
    } else if (goal == TowerGoal::SetE) {
        sets.delta = min_on_samples(F, 3, [&](const Point& x) { return xray_indicator(E, I, x); });
    } else {
        const Interval window = dual_window(F, q);
        std::vector<Box> clipped;
        for (Box b : E.boxes()) {
            b.lo(0) = std::max(b.lo(0), I.lo);
            b.hi(0) = std::min(b.hi(0), I.hi);
            if (b.lo(0) < b.hi(0)) clipped.push_back(b);
        }
        sets.delta = min_on_samples(BoxUnionSet::from_disjoint(d, clipped), 3,
                                    [&](const Point& y) { return xray_star_indicator(F, window, y); });
    }
    const TowerReport r = tower_report(goal, sets, tc, q, cfg.value("samples", 1000), get_seed(cfg));
    Outcome o{Table({"level", "omega_index", "step", "target", "count", "measure", "predicted", "threshold",
                     "min_fiber_exact", "min_fiber_lattice"})};
    for (const TowerLevel& l : r.tower.levels)
        o.table.add_row({std::to_string(l.params), std::to_string(l.omega_index), l.t_step ? "t" : "s", l.target,
                         std::to_string(l.nodes.size()), fmt(l.measure()), fmt(l.predicted), fmt(l.threshold),
                         fmt(l.min_fiber_exact), fmt(l.min_fiber_lattice)});
    std::vector<double> base(r.tower.base.data(), r.tower.base.data() + d);
    o.extra = {{"kind", to_string(r.tower.kind)},
               {"base", base},
               {"base_fiber", r.tower.base_fiber},
               {"T", r.tower.T},
               {"delta", sets.delta},
               {"structure", {{"sampled", r.structure.sampled},
                              {"nested_ok", r.structure.nested_ok},
                              {"membership_ok", r.structure.membership_ok}}},
               {"integral", r.integral},
               {"rhs", r.rhs},
               {"ratio", r.ratio}};
    o.table.comment("kind " + std::string(to_string(r.tower.kind)) + " T " + fmt(r.tower.T) + " delta " +
                    fmt(sets.delta) + " integral " + fmt(r.integral) + " rhs " + fmt(r.rhs) + " ratio " +
                    fmt(r.ratio));
    o.pass = r.structure.all_ok();
    o.lines.push_back("structure " + std::to_string(r.structure.membership_ok) + "/" +
                      std::to_string(r.structure.sampled) + ", integral/rhs " + fmt(r.ratio) + " " +
                      (o.pass ? "PASS" : "FAIL"));
    return o;
}

Outcome cmd_acceptance(const json& cfg) {
    AcceptanceOptions opt;
    opt.seed = get_seed(cfg);
    opt.workers = workers(cfg);
    opt.corpus_path = cfg.value("corpus", std::string());
    opt.only = cfg.value("only", std::vector<int>{});
    Outcome o{Table({"criterion", "name", "verdict", "summary"})};
    const auto results = run_acceptance(opt, [](const CriterionResult& r) { std::cout << format_line(r) << std::endl; });
    for (const CriterionResult& r : results) {
        o.pass = o.pass && r.pass;
        o.table.add_row({std::to_string(r.id), r.name, r.pass ? "PASS" : "FAIL", r.summary});
    }
    o.extra = {{"criteria", json::parse(to_json(results).dump())}};
    return o;
}

Outcome dispatch(const std::string& cmd, const json& cfg) {
    if (cmd == "exponents") return cmd_exponents(cfg);
    if (cmd == "region") return cmd_region(cfg);
    if (cmd == "jacobian") return cmd_jacobian(cfg);
    if (cmd == "duality") return cmd_duality(cfg);
    if (cmd == "rwt") return cmd_rwt(cfg);
    if (cmd == "superlevel") return cmd_superlevel(cfg);
    if (cmd == "scaling") return cmd_scaling(cfg);
    if (cmd == "necessity") return cmd_necessity(cfg);
    if (cmd == "lemma2") return cmd_lemma2(cfg);
    if (cmd == "refine") return cmd_refine(cfg);
    if (cmd == "acceptance") return cmd_acceptance(cfg);
    throw ConfigError("unknown command '" + cmd + "'");
}

std::string render(const Outcome& o, const std::string& format) {
    if (format == "csv") return o.table.csv();
    nlohmann::ordered_json j = o.table.json();
    if (!o.extra.is_null()) j["result"] = nlohmann::ordered_json::parse(o.extra.dump());
    return j.dump(1) + "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Restricted X-ray transform along the moment curve: experiments and checks"};
    app.fallthrough();
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(MOMENTRAY_VERSION));

    std::string config_path, output, format = "csv", kind, route, goal, corpus;
    std::uint64_t seed = 1;
    int dim = 0, samples = 0, cells = 0, workers_flag = 0, pairs = 0;
    double theta = 0.0;
    std::vector<double> r, point;
    std::vector<int> only;
    app.add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
    app.add_option("--output", output, "Output path (default: stdout)");
    app.add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    std::map<std::string, CLI::Option*> flags;
    flags["seed"] = app.add_option("--seed", seed, "Seed");
    flags["d"] = app.add_option("--dim,-d", dim, "Dimension d >= 2");
    flags["samples"] = app.add_option("--samples", samples, "Sample count");
    flags["kind"] = app.add_option("--kind", kind, "phi, psi or both");
    flags["theta"] = app.add_option("--theta", theta, "Superlevel threshold");
    flags["cells"] = app.add_option("--cells", cells, "Grid cells per axis");
    flags["corpus"] = app.add_option("--corpus", corpus, "Corpus JSON path");
    flags["workers"] = app.add_option("--workers", workers_flag, "Worker threads (default MOMENTRAY_WORKERS)");
    flags["route"] = app.add_option("--route", route, "exact or pieces");
    flags["goal"] = app.add_option("--goal", goal, "E or F");
    flags["pairs"] = app.add_option("--pairs", pairs, "Random pairs for duality");
    flags["r"] = app.add_option("--r", r, "Lorentz exponent(s) r");
    flags["point"] = app.add_option("--point", point, "p_inv q_inv")->expected(2);
    flags["only"] = app.add_option("--only", only, "Criteria subset for acceptance");

    std::vector<std::string> names;
    for (const auto& [name, req] : required_fields()) names.push_back(name);
    names.push_back("run");
    for (const auto& n : names)
        app.add_subcommand(n, n == "run" ? "Run the command named in the config" : "Run '" + n + "'");

    CLI11_PARSE(app, argc, argv);
    const std::string sub = app.get_subcommands().front()->get_name();

    const auto t0 = std::chrono::steady_clock::now();
    std::string cmd;
    json cfg = json::object();
    Outcome out{Table({})};
    try {
        try {
            if (!config_path.empty()) {
                std::ifstream f(config_path);
                cfg = json::parse(f);
                if (!cfg.is_object()) throw ConfigError("config must be a JSON object");
            }
            auto set = [&](const char* key, auto value) {
                if (flags[key]->count() > 0) cfg[key] = value;
            };
            set("seed", seed);
            set("d", dim);
            set("samples", samples);
            set("kind", kind);
            set("theta", theta);
            set("cells", cells);
            set("corpus", corpus);
            set("workers", workers_flag);
            set("route", route);
            set("goal", goal);
            set("pairs", pairs);
            set("r", r);
            set("point", point);
            set("only", only);
            if (sub == "run") {
                if (!cfg.contains("command")) throw ConfigError("missing required field(s) for 'run': command");
                cmd = cfg["command"].get<std::string>();
            } else {
                cmd = sub;
            }
            check_required(cmd, cfg);
            if (cfg.contains("d")) get_d(cfg);
            if (cfg.contains("quad")) get_quad(cfg, cfg.value("d", 2));
        } catch (const json::exception& e) {
            throw ConfigError(std::string("invalid config: ") + e.what());
        }
        try {
            out = dispatch(cmd, cfg);
            header(out.table, cmd, cfg);
        } catch (const json::exception& e) {
            throw ConfigError(std::string("invalid config: ") + e.what());
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const DomainError& e) {
        std::cerr << "config error (" << cmd << "): " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error (" << cmd << "): " << e.what() << "\n";
        return 1;
    }

    const std::string text = render(out, format);
    auto& verdicts = output.empty() ? std::cerr : std::cout;
    if (cmd != "acceptance")
        for (const auto& l : out.lines) verdicts << l << "\n";
    try {
        if (output.empty()) {
            std::cout << text;
        } else {
            write_file(output, text);
            RunManifest m;
            m.tool_version = MOMENTRAY_VERSION;
            m.command = cmd;
            json hashed = result_config(cfg);
            hashed["command"] = cmd;
            m.config_hash = hex64(fnv1a(hashed.dump()));
            m.seed = get_seed(cfg);
            m.outputs.push_back({output, hex64(fnv1a(text))});
            m.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            write_file(output + ".manifest.json", m.json().dump(1) + "\n");
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return out.pass ? 0 : 1;
}
