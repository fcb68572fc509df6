#include "momentray/sharpness.hpp"

#include "momentray/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace momentray {

// ---------------------------------------------------------------- Rational

Rational::Rational(std::int64_t num, std::int64_t den) {
    if (den == 0) throw DomainError("Rational: zero denominator");
    if (den < 0) {
        num = -num;
        den = -den;
    }
    const std::int64_t g = std::gcd(num, den);
    num_ = g ? num / g : 0;
    den_ = g ? den / g : 1;
}

std::string Rational::str() const {
    return den_ == 1 ? std::to_string(num_) : std::to_string(num_) + "/" + std::to_string(den_);
}

Rational operator+(Rational a, Rational b) {
    return Rational(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
}
Rational operator-(Rational a, Rational b) {
    return Rational(a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_);
}
Rational operator*(Rational a, Rational b) { return Rational(a.num_ * b.num_, a.den_ * b.den_); }
Rational operator/(Rational a, Rational b) {
    if (b.num_ == 0) throw DomainError("Rational: division by zero");
    return Rational(a.num_ * b.den_, a.den_ * b.num_);
}
bool operator<(Rational a, Rational b) { return a.num_ * b.den_ < b.num_ * a.den_; }

CriticalExponents critical_exponents(Dim dim) {
    const std::int64_t d = dim.value();
    return {Rational(d * (d + 1), d * d - d + 2), Rational(d + 1, d - 1)};
}

std::pair<Rational, Rational> exponent_identity(Dim dim) {
    const std::int64_t d = dim.value();
    const Rational c(d * d - d + 2);
    const Rational lhs = Rational(-1) * c / Rational(2) + critical_exponents(dim).p_inv();
    const Rational rhs = (Rational(-1, 2) + Rational(1, d * (d + 1))) * c;
    return {lhs, rhs};
}

// ------------------------------------------------------------------ region

const char* to_string(Membership m) {
    switch (m) {
        case Membership::Inside: return "inside";
        case Membership::Boundary: return "boundary";
        default: return "outside";
    }
}

std::array<RationalPoint, 3> region_vertices(Dim dim) {
    const CriticalExponents e = critical_exponents(dim);
    return {RationalPoint{Rational(1), Rational(1)}, RationalPoint{Rational(0), Rational(0)},
            RationalPoint{e.p_inv(), e.q_inv()}};
}

namespace {

void two_sum(double a, double b, double& s, double& e) {
    s = a + b;
    const double bv = s - a;
    e = (a - (s - bv)) + (b - bv);
}

void two_product(double a, double b, double& p, double& e) {
    p = a * b;
    e = std::fma(a, b, -p);
}

/// Exact sign of a sum of doubles via a nonoverlapping expansion.
int exact_sign(const std::vector<double>& terms) {
    std::vector<double> h;
    for (double t : terms) {
        double q = t;
        std::vector<double> next;
        for (double hi : h) {
            double s, e;
            two_sum(q, hi, s, e);
            if (e != 0.0) next.push_back(e);
            q = s;
        }
        next.push_back(q);
        h = std::move(next);
    }
    for (auto it = h.rbegin(); it != h.rend(); ++it)
        if (*it != 0.0) return *it > 0.0 ? 1 : -1;
    return 0;
}

std::int64_t lcm3(std::int64_t a, std::int64_t b, std::int64_t c) {
    return std::lcm(std::lcm(a, b), c);
}

/// sign of orient(A, B, P) with integer-scaled vertices.
int orientation(const RationalPoint& A, const RationalPoint& B, ExponentPair P) {
    const std::int64_t L = lcm3(lcm3(A[0].den(), A[1].den(), B[0].den()), B[1].den(), 1);
    auto scaled = [L](const Rational& r) { return r.num() * (L / r.den()); };
    const std::int64_t ax = scaled(A[0]), ay = scaled(A[1]), bx = scaled(B[0]), by = scaled(B[1]);
    // L^2 orient = (bx-ax)(L Py - ay) - (by-ay)(L Px - ax)
    const double c1 = static_cast<double>((bx - ax) * L);
    const double c2 = static_cast<double>((by - ay) * L);
    const double c0 = static_cast<double>(-(bx - ax) * ay + (by - ay) * ax);
    double p1, e1, p2, e2;
    two_product(c1, P.q_inv, p1, e1);
    two_product(-c2, P.p_inv, p2, e2);
    return exact_sign({c0, e1, e2, p1, p2});
}

}  // namespace

Membership triangle_contains(const std::array<RationalPoint, 3>& tri, ExponentPair pt) {
    const int o[3] = {orientation(tri[0], tri[1], pt), orientation(tri[1], tri[2], pt),
                      orientation(tri[2], tri[0], pt)};
    bool pos = false, neg = false, zero = false;
    for (int s : o) {
        pos |= s > 0;
        neg |= s < 0;
        zero |= s == 0;
    }
    if (pos && neg) return Membership::Outside;
    return zero ? Membership::Boundary : Membership::Inside;
}

// ----------------------------------------------------------------- scaling

Eigen::VectorXd dilation_factors(Dim dim, double delta) {
    if (!(delta > 0.0)) throw DomainError("dilation factor must be positive");
    Eigen::VectorXd f(dim.value());
    double p = 1.0;
    for (int j = 0; j < dim.value(); ++j) f(j) = (p *= delta);
    return f;
}

Point nonisotropic_dilate(const Point& y, double delta) {
    return y.cwiseProduct(dilation_factors(Dim(static_cast<int>(y.size())), delta));
}

NormalizedInterval normalize_interval(const Interval& I) {
    if (I.contains(0.0)) return {I, 0.0};
    const double s0 = 0.5 * (I.lo + I.hi);
    return {Interval(I.lo - s0, I.hi - s0), s0};
}

// ---------------------------------------------------------- counterexample

double counterexample_tail_bound(int m, int N, std::int64_t K) {
    return std::pow(static_cast<double>(K) / N, 1.0 - m);
}

std::int64_t resolve_truncation(const CounterexampleSpec& spec) {
    if (spec.N < 1) throw DomainError("counterexample: N must be >= 1");
    const int m = spec.dim.homogeneous_dim();
    if (spec.K_max) {
        if (*spec.K_max < spec.N) throw DomainError("counterexample: K_max < N");
        const double tail = counterexample_tail_bound(m, spec.N, *spec.K_max);
        if (tail > spec.tail_tol)
            throw DomainError("counterexample: tail bound " + std::to_string(tail) +
                              " exceeds tolerance " + std::to_string(spec.tail_tol));
        return *spec.K_max;
    }
    if (!(spec.tail_tol > 0.0)) throw DomainError("counterexample: tail_tol must be positive");
    return static_cast<std::int64_t>(
        std::ceil(spec.N * std::pow(spec.tail_tol, -1.0 / (m - 1)) - 1e-9));
}

Box counterexample_box(Dim dim, std::int64_t k, double scale, double shift) {
    const int d = dim.value();
    Eigen::VectorXd c(d), h(d);
    const double kd = static_cast<double>(k);
    double kp = 1.0, sp = 1.0;
    for (int j = 0; j < d; ++j) {
        kp *= kd;
        sp *= scale;
        c(j) = j == 0 ? shift : sp * kp;
        h(j) = sp / kp;
    }
    return Box::centered(c, h);
}

Box minorant_box(Dim dim, std::int64_t k, double scale) {
    const int d = dim.value();
    Eigen::VectorXd c(d), h(d);
    const double kd = static_cast<double>(k);
    double kp = 1.0, sp = 1.0;
    for (int j = 0; j < d; ++j) {
        kp *= kd;
        sp *= scale;
        c(j) = j == 0 ? 0.0 : sp * kp;
        h(j) = 0.5 * sp / kp;
    }
    return Box::centered(c, h);
}

namespace {

std::int64_t materialized_K(const CounterexampleSpec& spec, std::int64_t max_terms) {
    const std::int64_t K = resolve_truncation(spec);
    if (K - spec.N + 1 > max_terms)
        throw DomainError("counterexample: " + std::to_string(K - spec.N + 1) +
                          " terms exceed the materialization limit; use the streamed norms");
    return K;
}

}  // namespace

SimpleFunction build_counterexample_f(const CounterexampleSpec& spec, std::int64_t max_terms) {
    const std::int64_t K = materialized_K(spec, max_terms);
    std::vector<SimpleTerm> terms;
    for (std::int64_t k = spec.N; k <= K; ++k)
        terms.push_back(
            {1.0, BoxUnionSet::single(counterexample_box(spec.dim, k, spec.scale, spec.shift))});
    return SimpleFunction::make(spec.dim.value(), std::move(terms));
}

SimpleFunction build_xf_lower_bound(const CounterexampleSpec& spec, std::int64_t max_terms) {
    const std::int64_t K = materialized_K(spec, max_terms);
    std::vector<SimpleTerm> terms;
    for (std::int64_t k = spec.N; k <= K; ++k)
        terms.push_back({spec.scale / static_cast<double>(k),
                         BoxUnionSet::single(minorant_box(spec.dim, k, spec.scale))});
    return SimpleFunction::make(spec.dim.value(), std::move(terms));
}

namespace {

/// k^{-e} for consecutive k. Far out, the step ratio (1 - x)^e with
/// x = 1/(k+1) comes from its binomial series; exact pow at small k and
/// every 4096 steps bounds the drift.
class PowerSeq {
   public:
    PowerSeq(double e, std::int64_t k0)
        : e_(e), k_(k0), val_(std::pow(static_cast<double>(k0), -e)) {
        for (int i = 0; i < 6; ++i) c_[i] = binom(i + 1);
    }

    double value() const { return val_; }

    void advance() { advance(1.0 / static_cast<double>(k_ + 1)); }

    /// Step to k + 1 given x = 1/(k + 1).
    void advance(double x) {
        ++k_;
        if (k_ < 2048 || ++since_sync_ >= 4096) {
            val_ = std::pow(static_cast<double>(k_), -e_);
            since_sync_ = 0;
            return;
        }
        const double rho =
            1.0 + x * (c_[0] + x * (c_[1] + x * (c_[2] + x * (c_[3] + x * (c_[4] + x * c_[5])))));
        val_ *= rho;
    }

   private:
    /// Coefficient of x^i in (1 - x)^e.
    double binom(int i) const {
        double c = 1.0;
        for (int j = 0; j < i; ++j) c *= -(e_ - j) / (j + 1);
        return c;
    }

    double e_;
    std::int64_t k_;
    double val_;
    double c_[6];
    int since_sync_ = 0;
};

}  // namespace

std::vector<CounterexampleNorms> counterexample_norms(const CounterexampleSpec& spec,
                                                      const std::vector<double>& rs) {
    const int d = spec.dim.value();
    const int m = spec.dim.homogeneous_dim();
    const CriticalExponents ex = critical_exponents(spec.dim);
    const double p = ex.p.to_double(), q = ex.q.to_double();
    const std::int64_t K = resolve_truncation(spec);
    const double smeas = std::pow(spec.scale, m);
    for (double r : rs)
        if (!(r > 0.0) || std::isinf(r))
            throw DomainError("counterexample_norms: r must be finite and positive");

    const std::size_t n = rs.size();
    NeumaierSum sum_f;
    std::vector<double> xf(n), xf_pieces(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double r = rs[i];
        const bool first = i == 0;
        PowerSeq km(m, spec.N), kr(r, spec.N), kp(r * (1.0 + m / q), spec.N);
        LorentzAccumulator acc(q, r);
        NeumaierSum pieces;
        std::int64_t k = spec.N;
        double x = 1.0 / static_cast<double>(k);
        acc.add_sequence(K - spec.N + 1, [&](double& v, double& vp, double& mb) {
            v = x;
            vp = kr.value();
            mb = km.value();
            pieces.add(kp.value());
            if (first) sum_f.add(mb);
            mb *= smeas;
            x = 1.0 / static_cast<double>(++k);
            kr.advance(x);
            km.advance(x);
            kp.advance(x);
        });
        xf[i] = acc.norm();
        xf_pieces[i] = std::pow(pieces.value(), 1.0 / r);
    }
    const double norm_f = std::pow(std::ldexp(sum_f.value() * smeas, d), 1.0 / p);
    std::vector<CounterexampleNorms> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i].norm_f = norm_f;
        out[i].norm_xf = xf[i] * spec.scale;
        out[i].norm_xf_pieces = xf_pieces[i] * std::pow(smeas, 1.0 / q) * spec.scale;
        out[i].K = K;
    }
    return out;
}

CounterexampleNorms counterexample_norms(const CounterexampleSpec& spec, double r) {
    return counterexample_norms(spec, std::vector<double>{r}).front();
}

std::vector<int> default_N_list() {
    std::vector<int> n;
    for (int v = 16; v <= 4096; v *= 2) n.push_back(v);
    return n;
}

std::vector<ScalingResult> scaling_experiment(Dim dim, const std::vector<double>& rs,
                                              const std::vector<int>& N_list, double tail_tol,
                                              int workers) {
    if (N_list.size() < 3) throw DomainError("scaling_experiment: need at least 3 values of N");
    for (std::size_t i = 1; i < N_list.size(); ++i)
        if (N_list[i] <= N_list[i - 1]) throw DomainError("scaling_experiment: N_list must increase");

    std::vector<std::vector<CounterexampleNorms>> per_n(N_list.size());
    parallel_for(N_list.size(), workers, [&](std::size_t i) {
        CounterexampleSpec spec;
        spec.dim = dim;
        spec.N = N_list[i];
        spec.tail_tol = tail_tol;
        per_n[i] = counterexample_norms(spec, rs);
    });

    const int d = dim.value();
    const double c = d * d - d + 2;
    std::vector<ScalingResult> out(rs.size());
    for (std::size_t j = 0; j < rs.size(); ++j) {
        ScalingResult& s = out[j];
        s.r = rs[j];
        std::vector<double> x, yf, yx, yp;
        for (std::size_t i = 0; i < N_list.size(); ++i) {
            s.rows.push_back({N_list[i], per_n[i][j]});
            x.push_back(N_list[i]);
            yf.push_back(per_n[i][j].norm_f);
            yx.push_back(per_n[i][j].norm_xf);
            yp.push_back(per_n[i][j].norm_xf_pieces);
        }
        s.fit_f = loglog_fit(x, yf);
        s.fit_xf = loglog_fit(x, yx);
        s.fit_xf_pieces = loglog_fit(x, yp);
        s.predicted_f = (-0.5 + 1.0 / (d * (d + 1))) * c;
        s.predicted_xf = -c / 2 + 1.0 / rs[j];
    }
    return out;
}

ScalingResult scaling_experiment(Dim dim, double r, const std::vector<int>& N_list,
                                 double tail_tol, int workers) {
    return scaling_experiment(dim, std::vector<double>{r}, N_list, tail_tol, workers).front();
}

const char* to_string(NecessityVerdict v) {
    switch (v) {
        case NecessityVerdict::Unbounded: return "unbounded";
        case NecessityVerdict::Bounded: return "bounded";
        default: return "critical";
    }
}

NecessityReport necessity_from(const ScalingResult& s, NormRoute route, double tol) {
    NecessityReport n;
    n.r = s.r;
    n.slope_f = s.fit_f.slope;
    n.slope_xf = route == NormRoute::Exact ? s.fit_xf.slope : s.fit_xf_pieces.slope;
    n.difference = n.slope_xf - n.slope_f;
    if (n.difference > tol)
        n.verdict = NecessityVerdict::Unbounded;
    else if (n.difference < -tol)
        n.verdict = NecessityVerdict::Bounded;
    else
        n.verdict = NecessityVerdict::Critical;
    return n;
}

NecessityReport necessity_check(Dim dim, double r, NormRoute route, const std::vector<int>& N_list,
                                double tol) {
    return necessity_from(scaling_experiment(dim, r, N_list), route, tol);
}

// ------------------------------------------------------------ inequalities

RwtReport check_rwt(const BoxUnionSet& E, const BoxUnionSet& F, const Interval& I,
                    const QuadSpec& quad) {
    const int d = E.dim();
    RwtReport r;
    r.T = bilinear_form(E, F, I, quad);
    if (!(r.T > 0.0)) throw DomainError("check_rwt: T(E, F) = 0, ratios undefined");
    r.measure_E = E.measure();
    r.measure_F = F.measure();
    r.alpha = r.T / r.measure_F;
    r.beta = r.T / r.measure_E;
    r.ratio_E = r.measure_E / (std::pow(r.alpha, d) * std::pow(r.beta, d * (d - 1) / 2.0));
    r.ratio_F = r.measure_F / (std::pow(r.alpha, d - 1) * std::pow(r.beta, (d * d - d + 2) / 2.0));
    r.verdict = std::max(r.ratio_E, r.ratio_F);
    const CriticalExponents ex = critical_exponents(Dim(d));
    r.rwt_constant = r.T / (std::pow(r.measure_E, ex.p_inv().to_double()) *
                            std::pow(r.measure_F, 1.0 / ex.q_dual().to_double()));
    return r;
}

double lemma2_rhs_e(Dim dim, double delta1, double T, double measure_G, double measure_E) {
    const int d = dim.value();
    return delta1 * delta1 * std::pow(T / measure_G, d - 2) *
           std::pow(T / measure_E, d * (d - 1) / 2.0);
}

double lemma2_rhs_f(Dim dim, double delta2, double T, double measure_F, double second) {
    const int d = dim.value();
    return std::pow(delta2, d) * std::pow(T / measure_F, d - 1) *
           std::pow(T / second, (d * d - d + 2) / 2.0 - d);
}

namespace {

void finish(Lemma2Report& r) { r.ratio = r.rhs > 0.0 ? r.lhs / r.rhs : kInfinity; }

void check_hypothesis(double delta, double measured, const char* what) {
    if (!(delta >= 0.0)) throw DomainError("delta must be >= 0");
    if (delta > measured * (1.0 + 1e-12))
        throw HypothesisError(std::string(what) + " falls below delta on the sample grid (min " +
                              std::to_string(measured) + " < " + std::to_string(delta) + ")");
}

}  // namespace

Lemma2Report check_lemma2_e(const BoxUnionSet& E, const BoxUnionSet& E_prime,
                            const BoxUnionSet& G, double delta1, const Interval& I,
                            const QuadSpec& quad, int samples_per_axis) {
    Lemma2Report r;
    r.delta = delta1;
    r.hypothesis_min = min_on_samples(G, samples_per_axis,
                                      [&](const Point& x) { return xray_indicator(E_prime, I, x); });
    check_hypothesis(delta1, r.hypothesis_min, "X chi_{E'}");
    r.T = bilinear_form(E, G, I, quad);
    r.lhs = E_prime.measure();
    r.rhs = lemma2_rhs_e(Dim(E.dim()), delta1, r.T, G.measure(), E.measure());
    finish(r);
    return r;
}

Lemma2Report check_lemma2_f(const BoxUnionSet& H, const BoxUnionSet& F,
                            const BoxUnionSet& F_prime, double delta2, const Interval& I,
                            const QuadSpec& quad, bool printed_version, int samples_per_axis) {
    Lemma2Report r;
    r.delta = delta2;
    const Interval window = dual_window(F_prime, quad);
    r.hypothesis_min = min_on_samples(
        H, samples_per_axis, [&](const Point& y) { return xray_star_indicator(F_prime, window, y); });
    check_hypothesis(delta2, r.hypothesis_min, "X* chi_{F'}");
    r.T = bilinear_form(H, F, I, quad);
    r.lhs = F_prime.measure();
    r.rhs = lemma2_rhs_f(Dim(F.dim()), delta2, r.T, F.measure(),
                        printed_version ? F.measure() : H.measure());
    finish(r);
    return r;
}

Lemma2Sweep lemma2_sweep(const BoxUnionSet& E, const BoxUnionSet& F, const Interval& I,
                         const QuadSpec& quad, int cells_per_axis,
                         const std::vector<double>& theta_fractions, bool printed_version) {
    for (std::size_t i = 0; i < theta_fractions.size(); ++i)
        if (!(theta_fractions[i] > 0.0 && theta_fractions[i] <= 1.0) ||
            (i > 0 && theta_fractions[i] <= theta_fractions[i - 1]))
            throw DomainError("lemma2_sweep: fractions must increase within (0, 1]");
    Lemma2Sweep out;
    constexpr int kSamples = 3;

    const double top_g = superlevel_set(E, F, I, 0.0, cells_per_axis).max_cell_min;
    for (double f : theta_fractions) {
        const SuperlevelSet G = superlevel_set(E, F, I, f * top_g, cells_per_axis);
        if (G.inner.empty()) throw DomainError("lemma2_sweep: empty superlevel set");
        const double delta = min_on_samples(G.inner, kSamples,
                                            [&](const Point& x) { return xray_indicator(E, I, x); });
        out.e_steps.push_back({f, G.inner.measure(),
                               check_lemma2_e(E, E, G.inner, delta, I, quad, kSamples)});
    }

    std::vector<Box> clipped;
    for (const Box& b : E.boxes()) {
        Box c = b;
        c.lo(0) = std::max(b.lo(0), I.lo);
        c.hi(0) = std::min(b.hi(0), I.hi);
        if (c.lo(0) < c.hi(0)) clipped.push_back(c);
    }
    const BoxUnionSet region = BoxUnionSet::from_disjoint(E.dim(), std::move(clipped));
    if (region.empty()) throw DomainError("lemma2_sweep: E has no part with y_1 in I");
    const Interval window = dual_window(F, quad);
    const double top_h = superlevel_set(F, region, window, 0.0, cells_per_axis, true).max_cell_min;
    for (double f : theta_fractions) {
        const SuperlevelSet H = superlevel_set(F, region, window, f * top_h, cells_per_axis, true);
        if (H.inner.empty()) throw DomainError("lemma2_sweep: empty dual superlevel set");
        const double delta = min_on_samples(
            H.inner, kSamples, [&](const Point& y) { return xray_star_indicator(F, window, y); });
        out.f_steps.push_back({f, H.inner.measure(),
                               check_lemma2_f(H.inner, F, F, delta, I, quad, printed_version, kSamples)});
    }
    return out;
}

}  // namespace momentray
