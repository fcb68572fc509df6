#pragma once

// Exact Lorentz and Lebesgue norms of nonnegative simple functions.
//
// Convention: ||f||_{s,r} = ( int_0^inf (t^{1/s} f*(t))^r dt/t )^{1/r},
// ||f||_{s,inf} = sup_t t^{1/s} f*(t). With this normalization
// ||f||_{p,p} = ||f||_p exactly.

#include "momentray/sets.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

namespace momentray {

struct SimpleTerm {
    double weight = 0.0;
    BoxUnionSet support;
};

/// f = sum_i a_i chi_{A_i} with a_i > 0 and pairwise disjoint A_i.
class SimpleFunction {
   public:
    explicit SimpleFunction(int dim = 2) : dim_(dim) {}

    /// Validates weights and cross-term disjointness.
    static SimpleFunction make(int dim, std::vector<SimpleTerm> terms);
    /// Trusts the caller on disjointness; still checks weights.
    static SimpleFunction from_disjoint(int dim, std::vector<SimpleTerm> terms);
    static SimpleFunction indicator(const BoxUnionSet& a);

    int dim() const { return dim_; }
    const std::vector<SimpleTerm>& terms() const { return terms_; }
    double operator()(const Point& x) const;
    double support_measure() const;
    /// f scaled by a positive constant.
    SimpleFunction scaled_weights(double lambda) const;
    /// Supports pushed forward by y -> factors .* y.
    SimpleFunction scaled_supports(const Eigen::VectorXd& factors) const;

   private:
    int dim_;
    std::vector<SimpleTerm> terms_;
};

/// Decreasing rearrangement: f* = values[i] on [breaks[i], breaks[i+1]),
/// breaks[0] = 0, values strictly decreasing and positive.
struct StepProfile {
    std::vector<double> values;
    std::vector<double> breaks;

    std::size_t steps() const { return values.size(); }
    double total_measure() const { return breaks.empty() ? 0.0 : breaks.back(); }
    /// f*(t) for t >= 0.
    double operator()(double t) const;
};

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// |{x : f(x) > lambda}|.
double distribution(const SimpleFunction& f, double lambda);

StepProfile rearrangement(const SimpleFunction& f);

double lorentz_norm(const StepProfile& profile, double s, double r);
double lorentz_norm(const SimpleFunction& f, double s, double r);

double lp_norm(const SimpleFunction& f, double p);

/// Compensated (Neumaier) summation.
class NeumaierSum {
   public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            c_ += (sum_ - t) + x;
        else
            c_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + c_; }

   private:
    double sum_ = 0.0, c_ = 0.0;
};

/// Streaming evaluation of ||.||_{s,r} over steps supplied in strictly
/// decreasing value order. Handles very long step sequences (1e8+) whose
/// measures become tiny relative to the running total: the increment
/// T_i^{r/s} - T_{i-1}^{r/s} is formed from log1p/expm1 or its series,
/// never as a difference of two nearly equal powers.
class LorentzAccumulator {
   public:
    LorentzAccumulator(double s, double r);

    void add(double value, double measure);
    /// Same as add(), with value^r supplied by the caller.
    void add_with_power(double value, double value_pow_r, double measure) {
        State st = state_;
        step(st, value, value_pow_r, measure);
        state_ = st;
    }
    /// Calls next(value, value_pow_r, measure) `count` times and adds each
    /// step; keeps the running state in locals for long sequences.
    template <typename Next>
    void add_sequence(std::int64_t count, Next&& next) {
        State st = state_;
        double v, vp, m;
        for (std::int64_t i = 0; i < count; ++i) {
            next(v, vp, m);
            step(st, v, vp, m);
        }
        state_ = st;
    }

    double norm() const;
    double total_measure() const { return state_.total.value(); }

   private:
    struct State {
        NeumaierSum total;
        double tpow = 0.0;  // total^a
        NeumaierSum sum;
        double sup = 0.0;
        long steps_since_sync = 0;
        double last_value = kInfinity;
    };

    void step(State& st, double value, double value_pow_r, double measure) const;
    [[noreturn]] static void reject();

    double s_, r_, a_;  // a = r / s
    State state_;
};

inline void LorentzAccumulator::step(State& st, double value, double value_pow_r,
                                     double measure) const {
    if (!(value < st.last_value) || !(value > 0.0)) reject();
    st.last_value = value;
    if (measure <= 0.0) return;

    const double prev = st.total.value();
    st.total.add(measure);
    const double now = st.total.value();

    if (std::isinf(r_)) {
        st.sup = std::max(st.sup, value * std::pow(now, 1.0 / s_));
        return;
    }

    double increment;
    if (prev == 0.0) {
        st.tpow = std::pow(now, a_);
        st.steps_since_sync = 0;
        increment = st.tpow;
    } else {
        const double u = measure / prev;
        double factor;  // (1 + u)^a - 1
        if (u < 1e-4) {
            const double a = a_;
            factor = a * u * (1.0 + (a - 1.0) * u / 2.0 * (1.0 + (a - 2.0) * u / 3.0 *
                                                            (1.0 + (a - 3.0) * u / 4.0)));
        } else {
            factor = std::expm1(a_ * std::log1p(u));
        }
        increment = st.tpow * factor;
        if (++st.steps_since_sync >= 4096) {
            st.tpow = std::pow(now, a_);
            st.steps_since_sync = 0;
        } else {
            st.tpow += increment;
        }
    }
    st.sum.add(value_pow_r * (s_ / r_) * increment);
}

}  // namespace momentray
