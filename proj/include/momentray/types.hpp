#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace momentray {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// A point of R^d. The dimension is carried by the vector length.
using Point = Eigen::VectorXd;

/// Interleaved map parameters: (t1, s1, t2, s2, ...) for Phi,
/// (s1, t2, s2, t3, ...) for Psi.
using ParamVector = Eigen::VectorXd;

class Error : public std::runtime_error {
   public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Precondition or argument-domain violation.
class DomainError : public Error {
   public:
    explicit DomainError(const std::string& msg) : Error(msg) {}
};

/// Numerical self-check failed (e.g. finite-difference estimates disagree).
class NumericalError : public Error {
   public:
    explicit NumericalError(const std::string& msg) : Error(msg) {}
};

/// A measured hypothesis of an inequality check does not hold.
class HypothesisError : public Error {
   public:
    explicit HypothesisError(const std::string& msg) : Error(msg) {}
};

/// Ambient dimension d >= 2 with the parity split d = 2k or d = 2k + 1.
class Dim {
   public:
    explicit Dim(int d) : d_(d) {
        if (d < 2) throw DomainError("dimension must be >= 2, got " + std::to_string(d));
    }

    int value() const { return d_; }
    int k() const { return d_ / 2; }
    bool even() const { return d_ % 2 == 0; }
    bool odd() const { return !even(); }

    /// d(d+1)/2, the homogeneous dimension of the nonisotropic dilations.
    int homogeneous_dim() const { return d_ * (d_ + 1) / 2; }

    /// d(d-1)/2, the degree of the Jacobian polynomials.
    int jacobian_degree() const { return d_ * (d_ - 1) / 2; }

    friend bool operator==(Dim a, Dim b) { return a.d_ == b.d_; }

   private:
    int d_;
};

/// Closed interval [lo, hi].
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    Interval() = default;
    Interval(double lo_, double hi_) : lo(lo_), hi(hi_) {
        if (!(lo_ <= hi_)) throw DomainError("interval requires lo <= hi");
    }

    double length() const { return hi - lo; }
    bool contains(double v) const { return lo <= v && v <= hi; }
    bool contains(const Interval& o) const { return lo <= o.lo && o.hi <= hi; }

    friend bool operator==(const Interval&, const Interval&) = default;
};

/// Deterministic uniform generator on top of mt19937_64 (whose output
/// sequence is fixed by the standard); the double conversion is our own so
/// seeded runs are bit-identical across standard libraries.
class Rng {
   public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1) from the top 53 bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    std::uint64_t next() { return engine_(); }

   private:
    std::mt19937_64 engine_;
};

}  // namespace momentray
