#pragma once

// Method of refinements on a parameter lattice: towers Omega_1, ..., Omega_d
// whose points are pushed through the alternating maps Phi or Psi.

#include "momentray/geometry.hpp"
#include "momentray/xray.hpp"

#include <string>
#include <vector>

namespace momentray {

struct RefineResult {
    std::vector<std::size_t> kept;  // indices into the input, ascending
    double threshold = 0.0;         // keep_fraction * average
    double average = 0.0;
    double total = 0.0;
    double retained = 0.0;
    double discarded = 0.0;
};

/// Keeps entries whose fiber measure is >= keep_fraction * average. The
/// discarded mass is < keep_fraction * total (strictly, when anything is
/// dropped). Throws DomainError if nothing survives.
RefineResult refine_step(const std::vector<double>& fiber_measures, double keep_fraction);

/// Generic form: fiber_fn(tuple) returns a FiberSet.
template <typename Tuple, typename FiberFn>
RefineResult refine_step(const std::vector<Tuple>& current, FiberFn&& fiber_fn,
                         double keep_fraction) {
    std::vector<double> m;
    m.reserve(current.size());
    for (const Tuple& t : current) m.push_back(fiber_fn(t).measure());
    return refine_step(m, keep_fraction);
}

/// Which inequality a tower serves; fixes the start map by parity.
enum class TowerGoal { SetE, SetF };

/// SetE (E' bound): Phi for even d, Psi for odd d. SetF (F' bound): the reverse.
MapKind tower_kind(TowerGoal goal, Dim dim);

/// The sets a tower runs through. e_side lives in R^d_1 (reached by gamma,
/// s over I), f_side in R^d_2 (reached by gamma_star). The last step lands
/// in `top` instead, whose side is fixed by the map kind and parity.
struct TowerSets {
    BoxUnionSet e_side, f_side, top;
    Interval I;
    double delta = 0.0;  // richness expected at the last step
};

struct TowerConfig {
    MapKind kind = MapKind::Phi;
    double cell_width = 1.0 / 64.0;
    double keep_fraction = 0.5;
    int base_grid = 8;  // candidates per axis per base box
    std::size_t max_nodes = 4'000'000;
};

struct TowerNode {
    int parent = -1;  // index in the previous level (-1: the base point)
    double param = 0.0;
    Point image;  // incidence map of the parameter prefix
};

struct TowerLevel {
    int params = 0;       // j: tuples have j coordinates
    int omega_index = 0;  // j for Phi towers, j + 1 for Psi towers
    bool t_step = false;  // reached by gamma_star
    std::string target;   // "E", "F", "E'" or "F'"
    std::vector<TowerNode> nodes;
    double predicted = 0.0;         // T/|E|, T/|F| or delta
    double threshold = 0.0;         // refinement threshold applied to parents
    double min_fiber_exact = 0.0;   // over surviving parents, exact fiber
    double min_fiber_lattice = 0.0; // over surviving parents, children * w
    double measure() const;         // count * w^j (set on construction)
    double cell_volume = 0.0;
};

struct Tower {
    Dim dim{2};
    MapKind kind = MapKind::Phi;
    double cell_width = 0.0;
    Point base;
    double base_fiber = 0.0;
    double T = 0.0;
    std::vector<TowerLevel> levels;  // levels[j-1] holds Omega with j params
    const TowerLevel& top() const { return levels.back(); }
    /// Parameter tuple of node i at level j (1-based j).
    ParamVector params(int level, std::size_t index) const;
};

/// Builds a tower. T is T(e_side, f_side) under `quad`. Throws DomainError
/// ("tower collapse at level j", Omega index) when a level empties.
Tower build_tower(const TowerSets& sets, const TowerConfig& cfg, const QuadSpec& quad);

struct StructureReport {
    std::size_t sampled = 0;
    std::size_t nested_ok = 0;      // prefix of child equals the parent tuple
    std::size_t membership_ok = 0;  // every partial image in its set
    bool all_ok() const { return nested_ok == sampled && membership_ok == sampled; }
};

/// Recomputes every partial map image of sampled top tuples from scratch
/// (phi_map / psi_map) and checks it against the prescribed sets.
StructureReport verify_tower(const Tower& tower, const TowerSets& sets, std::size_t samples,
                             std::uint64_t seed);

/// sum over top cells of |J| w^d; closed form times |c_d| or numeric det.
double image_volume_lower_bound(const Tower& tower, bool use_closed_form, double c_d = 1.0);

struct TowerReport {
    Tower tower;
    StructureReport structure;
    double integral = 0.0;
    double rhs = 0.0;  // right-hand side of the corresponding inequality
    double ratio = 0.0;
};

/// Tower, structure check, image integral and the inequality ratio.
TowerReport tower_report(TowerGoal goal, const TowerSets& sets, const TowerConfig& cfg,
                         const QuadSpec& quad, std::size_t structure_samples = 1000,
                         std::uint64_t seed = 1);

}  // namespace momentray
