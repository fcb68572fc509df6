#pragma once

// Critical exponents and the region Delta_d, the counterexample family with
// its N-asymptotics, and empirical checkers for the restricted weak-type
// and refinement inequalities.

#include "momentray/fit.hpp"
#include "momentray/lorentz.hpp"
#include "momentray/xray.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace momentray {

/// Exact rational with 64-bit parts, always normalized (den > 0, gcd 1).
class Rational {
   public:
    Rational(std::int64_t num = 0, std::int64_t den = 1);

    std::int64_t num() const { return num_; }
    std::int64_t den() const { return den_; }
    double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }
    std::string str() const;

    friend Rational operator+(Rational a, Rational b);
    friend Rational operator-(Rational a, Rational b);
    friend Rational operator*(Rational a, Rational b);
    friend Rational operator/(Rational a, Rational b);
    friend bool operator==(const Rational&, const Rational&) = default;
    friend bool operator<(Rational a, Rational b);

   private:
    std::int64_t num_, den_;
};

struct CriticalExponents {
    Rational p, q;
    Rational p_inv() const { return Rational(1) / p; }
    Rational q_inv() const { return Rational(1) / q; }
    /// q' = q / (q - 1).
    Rational q_dual() const { return q / (q - Rational(1)); }
};

/// p_d = d(d+1)/(d^2-d+2), q_d = (d+1)/(d-1).
CriticalExponents critical_exponents(Dim dim);

/// Both sides of -(d^2-d+2)/2 + 1/p_d = (-1/2 + 1/(d(d+1)))(d^2-d+2).
std::pair<Rational, Rational> exponent_identity(Dim dim);

struct ExponentPair {
    double p_inv = 0.0;
    double q_inv = 0.0;
};

using RationalPoint = std::array<Rational, 2>;

enum class Membership { Outside, Boundary, Inside };
const char* to_string(Membership m);

/// Vertices (0,0), (1,1), (1/p_d, 1/q_d).
std::array<RationalPoint, 3> region_vertices(Dim dim);

/// Closed-triangle membership decided by exact orientation signs; the
/// vertices may come in any order.
Membership triangle_contains(const std::array<RationalPoint, 3>& tri, ExponentPair pt);

inline Membership region_contains(Dim dim, ExponentPair pt) {
    return triangle_contains(region_vertices(dim), pt);
}

/// (delta, delta^2, ..., delta^d).
Eigen::VectorXd dilation_factors(Dim dim, double delta);

/// delta o y = (delta y_1, delta^2 y_2, ..., delta^d y_d).
Point nonisotropic_dilate(const Point& y, double delta);

/// Translation data for an interval not containing 0: X_I f(x) equals
/// X_{I - s0} [f(. + s0 e_1)](S x) with the unit-determinant shear
/// (S x)_j = x_j + s0 x_1^{j-1}, so norms are unchanged.
struct NormalizedInterval {
    Interval centered;
    double shift = 0.0;
};
NormalizedInterval normalize_interval(const Interval& I);

struct CounterexampleSpec {
    Dim dim{2};
    int N = 16;
    /// Explicit truncation; unset means "smallest K meeting tail_tol".
    std::optional<std::int64_t> K_max;
    /// Relative tail bound on sum_{k > K} k^{-d(d+1)/2}.
    double tail_tol = 1e-9;
    /// Nonisotropic dilation applied to every box.
    double scale = 1.0;
    /// Shift of the first axis (see normalize_interval).
    double shift = 0.0;
};

/// Integral-test bound on sum_{k>K} k^{-m} / sum_{k>=N} k^{-m}.
double counterexample_tail_bound(int m, int N, std::int64_t K);

/// Truncation index in effect; throws DomainError if an explicit K_max
/// violates tail_tol or K_max < N.
std::int64_t resolve_truncation(const CounterexampleSpec& spec);

/// A_k: box with half-widths k^{-j} centered at (0, k^2, ..., k^d).
Box counterexample_box(Dim dim, std::int64_t k, double scale = 1.0, double shift = 0.0);
/// B_k: box with half-widths 1/(2k^j) centered at (0, k^2, ..., k^d).
Box minorant_box(Dim dim, std::int64_t k, double scale = 1.0);

/// Materialized sum of chi_{A_k}, N <= k <= K. Supports are validated
/// disjoint. Throws DomainError above max_terms (use the streamed norms).
SimpleFunction build_counterexample_f(const CounterexampleSpec& spec,
                                      std::int64_t max_terms = 200000);
/// Materialized sum of k^{-1} chi_{B_k}.
SimpleFunction build_xf_lower_bound(const CounterexampleSpec& spec,
                                    std::int64_t max_terms = 200000);

/// Streamed norms of the two families up to the resolved truncation.
struct CounterexampleNorms {
    double norm_f = 0.0;         // ||f||_{p_d}
    double norm_xf = 0.0;        // exact ||sum k^{-1} chi_{B_k}||_{q_d, r}
    double norm_xf_pieces = 0.0; // [sum_k (k^{-1} |B_k|^{1/q_d})^r]^{1/r}
    std::int64_t K = 0;
};
CounterexampleNorms counterexample_norms(const CounterexampleSpec& spec, double r);

/// Same, for several r in one pass over k.
std::vector<CounterexampleNorms> counterexample_norms(const CounterexampleSpec& spec,
                                                      const std::vector<double>& rs);

struct ScalingRow {
    int N = 0;
    CounterexampleNorms norms;
};

struct ScalingResult {
    double r = 0.0;
    std::vector<ScalingRow> rows;
    FitResult fit_f, fit_xf, fit_xf_pieces;
    double predicted_f = 0.0;   // (-1/2 + 1/(d(d+1)))(d^2-d+2)
    double predicted_xf = 0.0;  // -(d^2-d+2)/2 + 1/r
};

std::vector<int> default_N_list();

ScalingResult scaling_experiment(Dim dim, double r, const std::vector<int>& N_list,
                                 double tail_tol = 1e-9, int workers = 1);

/// Several r values sharing the k-loops.
std::vector<ScalingResult> scaling_experiment(Dim dim, const std::vector<double>& rs,
                                              const std::vector<int>& N_list,
                                              double tail_tol = 1e-9, int workers = 1);

enum class NormRoute { Exact, Pieces };
enum class NecessityVerdict { Unbounded, Critical, Bounded };
const char* to_string(NecessityVerdict v);

struct NecessityReport {
    double r = 0.0;
    double slope_f = 0.0, slope_xf = 0.0;
    double difference = 0.0;  // slope_xf - slope_f
    NecessityVerdict verdict = NecessityVerdict::Critical;
};

/// Unbounded iff the slope difference exceeds +tol, Bounded iff below -tol.
NecessityReport necessity_from(const ScalingResult& s, NormRoute route, double tol = 1e-2);
NecessityReport necessity_check(Dim dim, double r, NormRoute route,
                                const std::vector<int>& N_list = default_N_list(),
                                double tol = 1e-2);

struct RwtReport {
    double T = 0.0;
    double measure_E = 0.0, measure_F = 0.0;
    double alpha = 0.0, beta = 0.0;
    double ratio_E = 0.0, ratio_F = 0.0;
    double verdict = 0.0;        // max(ratio_E, ratio_F)
    double rwt_constant = 0.0;   // T / (|E|^{1/p_d} |F|^{1/q_d'})
};

/// Throws DomainError when T(E, F) = 0.
RwtReport check_rwt(const BoxUnionSet& E, const BoxUnionSet& F, const Interval& I,
                    const QuadSpec& quad);

/// Right-hand sides of the two refinement inequalities.
double lemma2_rhs_e(Dim dim, double delta1, double T, double measure_G, double measure_E);
/// second = |H| (as used at the end of the argument) or |F| (as printed).
double lemma2_rhs_f(Dim dim, double delta2, double T, double measure_F, double second);

/// Minimum of fn over a samples_per_axis^d grid (including faces) on
/// every box of S; +inf for an empty S.
template <typename Fn>
double min_on_samples(const BoxUnionSet& S, int samples_per_axis, Fn&& fn);

struct Lemma2Report {
    double delta = 0.0;
    double hypothesis_min = 0.0;  // sampled min of X chi_{E'} on G (or X* chi_{F'} on H)
    double T = 0.0;
    double lhs = 0.0;  // |E'| or |F'|
    double rhs = 0.0;
    double ratio = 0.0;
};

/// |E'| against delta1^2 (T(E,G)/|G|)^{d-2} (T(E,G)/|E|)^{d(d-1)/2}.
/// Throws HypothesisError if X chi_{E'} < delta1 somewhere on the sample grid.
Lemma2Report check_lemma2_e(const BoxUnionSet& E, const BoxUnionSet& E_prime,
                            const BoxUnionSet& G, double delta1, const Interval& I,
                            const QuadSpec& quad, int samples_per_axis = 3);

/// |F'| against delta2^d (T(H,F)/|F|)^{d-1} (T(H,F)/|H|)^{(d^2-d+2)/2-d};
/// printed_version replaces |H| by |F| in the second factor.
Lemma2Report check_lemma2_f(const BoxUnionSet& H, const BoxUnionSet& F,
                            const BoxUnionSet& F_prime, double delta2, const Interval& I,
                            const QuadSpec& quad, bool printed_version = false,
                            int samples_per_axis = 3);

struct Lemma2SweepStep {
    double theta_fraction = 0.0;
    double measure_set = 0.0;  // |G| or |H|
    Lemma2Report report;
};

struct Lemma2Sweep {
    std::vector<Lemma2SweepStep> e_steps;  // shrinking G, E' = E
    std::vector<Lemma2SweepStep> f_steps;  // shrinking H, F' = F
};

/// Nested superlevel families G (of X chi_E inside F) and H (of X* chi_F
/// inside E cap {y_1 in I}) at increasing thresholds.
Lemma2Sweep lemma2_sweep(const BoxUnionSet& E, const BoxUnionSet& F, const Interval& I,
                         const QuadSpec& quad, int cells_per_axis,
                         const std::vector<double>& theta_fractions = {0.1, 0.3, 0.5, 0.7, 0.9},
                         bool printed_version = false);

template <typename Fn>
double min_on_samples(const BoxUnionSet& S, int samples_per_axis, Fn&& fn) {
    if (samples_per_axis < 2) throw DomainError("min_on_samples: need >= 2 samples per axis");
    double m = kInfinity;
    const int d = S.dim();
    std::vector<int> idx(d);
    Point x(d);
    for (const Box& b : S.boxes()) {
        std::fill(idx.begin(), idx.end(), 0);
        while (true) {
            for (int i = 0; i < d; ++i)
                x(i) = b.lo(i) + (b.hi(i) - b.lo(i)) * idx[i] / (samples_per_axis - 1);
            m = std::min(m, fn(x));
            int a = d - 1;
            while (a >= 0 && ++idx[a] == samples_per_axis) idx[a--] = 0;
            if (a < 0) break;
        }
    }
    return m;
}

}  // namespace momentray
