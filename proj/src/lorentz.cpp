#include "momentray/lorentz.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace momentray {

namespace {

void check_weights(const std::vector<SimpleTerm>& terms, int dim) {
    for (const SimpleTerm& t : terms) {
        if (!(t.weight > 0.0) || !std::isfinite(t.weight))
            throw DomainError("SimpleFunction: weights must be finite and positive");
        if (t.support.dim() != dim) throw DomainError("SimpleFunction: dimension mismatch");
    }
}

void check_exponent(double e, const char* name) {
    if (!(e > 0.0)) throw DomainError(std::string("exponent ") + name + " must be positive");
}

}  // namespace

SimpleFunction SimpleFunction::from_disjoint(int dim, std::vector<SimpleTerm> terms) {
    check_weights(terms, dim);
    SimpleFunction f(dim);
    f.terms_ = std::move(terms);
    return f;
}

SimpleFunction SimpleFunction::make(int dim, std::vector<SimpleTerm> terms) {
    std::vector<Box> all;
    for (const SimpleTerm& t : terms) all.insert(all.end(), t.support.boxes().begin(), t.support.boxes().end());
    BoxUnionSet::make(dim, std::move(all));  // throws on overlap
    return from_disjoint(dim, std::move(terms));
}

SimpleFunction SimpleFunction::indicator(const BoxUnionSet& a) {
    if (a.empty()) return SimpleFunction(a.dim());
    return from_disjoint(a.dim(), {SimpleTerm{1.0, a}});
}

double SimpleFunction::operator()(const Point& x) const {
    for (const SimpleTerm& t : terms_)
        if (t.support.contains(x)) return t.weight;
    return 0.0;
}

double SimpleFunction::support_measure() const {
    double m = 0.0;
    for (const SimpleTerm& t : terms_) m += t.support.measure();
    return m;
}

SimpleFunction SimpleFunction::scaled_weights(double lambda) const {
    if (!(lambda > 0.0)) throw DomainError("scaled_weights: factor must be positive");
    SimpleFunction g = *this;
    for (SimpleTerm& t : g.terms_) t.weight *= lambda;
    return g;
}

SimpleFunction SimpleFunction::scaled_supports(const Eigen::VectorXd& factors) const {
    SimpleFunction g = *this;
    for (SimpleTerm& t : g.terms_) t.support = t.support.scaled(factors);
    return g;
}

double StepProfile::operator()(double t) const {
    for (std::size_t i = 0; i < values.size(); ++i)
        if (t < breaks[i + 1]) return values[i];
    return 0.0;
}

double distribution(const SimpleFunction& f, double lambda) {
    if (!(lambda >= 0.0)) throw DomainError("distribution: lambda must be >= 0");
    double m = 0.0;
    for (const SimpleTerm& t : f.terms())
        if (t.weight > lambda) m += t.support.measure();
    return m;
}

StepProfile rearrangement(const SimpleFunction& f) {
    std::map<double, double, std::greater<>> by_weight;
    for (const SimpleTerm& t : f.terms()) {
        const double m = t.support.measure();
        if (m > 0.0) by_weight[t.weight] += m;
    }
    StepProfile p;
    p.breaks.push_back(0.0);
    for (const auto& [w, m] : by_weight) {
        p.values.push_back(w);
        p.breaks.push_back(p.breaks.back() + m);
    }
    return p;
}

double lorentz_norm(const StepProfile& profile, double s, double r) {
    check_exponent(s, "s");
    check_exponent(r, "r");
    if (std::isinf(r)) {
        double sup = 0.0;
        for (std::size_t i = 0; i < profile.steps(); ++i)
            sup = std::max(sup, profile.values[i] * std::pow(profile.breaks[i + 1], 1.0 / s));
        return sup;
    }
    const double a = r / s;
    NeumaierSum sum;
    for (std::size_t i = 0; i < profile.steps(); ++i) {
        const double t0 = profile.breaks[i], t1 = profile.breaks[i + 1];
        sum.add(std::pow(profile.values[i], r) * (s / r) * (std::pow(t1, a) - std::pow(t0, a)));
    }
    return std::pow(sum.value(), 1.0 / r);
}

double lorentz_norm(const SimpleFunction& f, double s, double r) {
    return lorentz_norm(rearrangement(f), s, r);
}

double lp_norm(const SimpleFunction& f, double p) {
    check_exponent(p, "p");
    NeumaierSum sum;
    for (const SimpleTerm& t : f.terms()) sum.add(std::pow(t.weight, p) * t.support.measure());
    return std::pow(sum.value(), 1.0 / p);
}

void LorentzAccumulator::reject() {
    throw DomainError("LorentzAccumulator: values must be positive and strictly decreasing");
}

LorentzAccumulator::LorentzAccumulator(double s, double r) : s_(s), r_(r), a_(r / s) {
    check_exponent(s, "s");
    check_exponent(r, "r");
}

void LorentzAccumulator::add(double value, double measure) {
    add_with_power(value, std::isinf(r_) ? 0.0 : std::pow(value, r_), measure);
}

double LorentzAccumulator::norm() const {
    if (std::isinf(r_)) return state_.sup;
    return std::pow(state_.sum.value(), 1.0 / r_);
}

}  // namespace momentray
