#include "momentray/geometry.hpp"

#include <cmath>
#include <vector>

namespace momentray {

Point psi_closed_form(const Point& y0, const ParamVector& params) {
    const Dim dim(static_cast<int>(y0.size()));
    const int d = dim.value();
    const int k = dim.k();
    if (params.size() != d) throw DomainError("psi_closed_form: need d parameters");

    auto s = [&](int j) { return params(2 * (j - 1)); };
    auto t = [&](int j) { return j == 1 ? y0(0) : params(2 * j - 3); };

    Point out(d);
    out(0) = dim.even() ? t(k + 1) : s(k + 1);
    for (int i = 1; i < d; ++i) {
        double v = y0(i);
        for (int j = 1; j <= k; ++j)
            v += (detail::ipow(t(j), i) - detail::ipow(t(j + 1), i)) * s(j);
        if (dim.odd()) v += s(k + 1) * detail::ipow(t(k + 1), i);
        out(i) = v;
    }
    return out;
}

namespace {

using cd = std::complex<double>;

Eigen::MatrixXd complex_step_matrix(MapKind kind, const Point& base, const ParamVector& params) {
    constexpr double h = 1e-30;
    const Eigen::Index d = params.size();
    Eigen::MatrixXd J(base.size(), d);
    VectorX<cd> p = params.cast<cd>();
    for (Eigen::Index j = 0; j < d; ++j) {
        p(j) += cd(0.0, h);
        J.col(j) = incidence_map<cd>(kind, base, p).imag() / h;
        p(j) = params(j);
    }
    return J;
}

Eigen::MatrixXd central_matrix(MapKind kind, const Point& base, const ParamVector& params,
                               double scale) {
    const Eigen::Index d = params.size();
    Eigen::MatrixXd J(base.size(), d);
    ParamVector p = params;
    for (Eigen::Index j = 0; j < d; ++j) {
        const double h = scale * 1e-4 * (1.0 + std::abs(params(j)));
        p(j) = params(j) + h;
        Eigen::VectorXd fp = incidence_map<double>(kind, base, p);
        p(j) = params(j) - h;
        Eigen::VectorXd fm = incidence_map<double>(kind, base, p);
        p(j) = params(j);
        J.col(j) = (fp - fm) / (2.0 * h);
    }
    return J;
}

double hadamard_bound(const Eigen::MatrixXd& J) {
    double b = 1.0;
    for (Eigen::Index j = 0; j < J.cols(); ++j) b *= J.col(j).norm();
    return b;
}

}  // namespace

Eigen::MatrixXd jacobian_matrix(MapKind kind, const Point& base, const ParamVector& params,
                                DiffMethod method) {
    if (params.size() != base.size())
        throw DomainError("jacobian: need exactly d parameters");
    if (method == DiffMethod::ComplexStep) return complex_step_matrix(kind, base, params);
    const Eigen::MatrixXd J1 = central_matrix(kind, base, params, 1.0);
    const Eigen::MatrixXd J2 = central_matrix(kind, base, params, 0.5);
    return (4.0 * J2 - J1) / 3.0;
}

double jacobian_numeric(MapKind kind, const Point& base, const ParamVector& params,
                        DiffMethod method) {
    if (params.size() != base.size())
        throw DomainError("jacobian: need exactly d parameters");
    if (method == DiffMethod::ComplexStep)
        return complex_step_matrix(kind, base, params).determinant();

    const Eigen::MatrixXd J1 = central_matrix(kind, base, params, 1.0);
    const Eigen::MatrixXd J2 = central_matrix(kind, base, params, 0.5);
    const double d1 = J1.determinant();
    const double d2 = J2.determinant();
    const double scale = std::max(hadamard_bound(J2), 1e-300);
    if (std::abs(d1 - d2) > 1e-5 * scale)
        throw NumericalError("jacobian_numeric: h and h/2 determinants disagree (" +
                             std::to_string(d1) + " vs " + std::to_string(d2) + ")");
    return ((4.0 * J2 - J1) / 3.0).determinant();
}

JacobianSample draw_nondegenerate(MapKind kind, Dim dim, Rng& rng, double min_gap,
                                  int* rejected) {
    const int d = dim.value();
    for (int attempt = 0; attempt < 100000; ++attempt) {
        JacobianSample out{Point(d), ParamVector(d)};
        for (int i = 0; i < d; ++i) out.base(i) = rng.uniform(-1.0, 1.0);
        for (int i = 0; i < d; ++i) out.params(i) = rng.uniform(-1.0, 1.0);

        std::vector<double> ts, ss;
        if (kind == MapKind::Phi) {
            ss.push_back(out.base(0));
            for (int i = 0; i < d; ++i) (i % 2 == 0 ? ts : ss).push_back(out.params(i));
        } else {
            ts.push_back(out.base(0));
            for (int i = 0; i < d; ++i) (i % 2 == 0 ? ss : ts).push_back(out.params(i));
        }
        bool ok = true;
        for (std::size_t a = 0; a < ts.size() && ok; ++a)
            for (std::size_t b = a + 1; b < ts.size() && ok; ++b)
                ok = std::abs(ts[a] - ts[b]) >= min_gap;
        for (std::size_t a = 1; a < ss.size() && ok; ++a) ok = std::abs(ss[a] - ss[a - 1]) >= min_gap;
        if (ok) return out;
        if (rejected) ++*rejected;
    }
    throw NumericalError("draw_nondegenerate: persistent degenerate draws");
}

CdEstimate estimate_c_d(MapKind kind, Dim dim, int samples, std::uint64_t seed,
                        DiffMethod method) {
    if (samples < 2) throw DomainError("estimate_c_d: need at least 2 samples");
    Rng rng(seed);
    CdEstimate est;
    est.samples = samples;
    est.ratios.resize(samples);
    for (int n = 0; n < samples;) {
        const JacobianSample js = draw_nondegenerate(kind, dim, rng, 1e-3, &est.rejected);
        const double closed = jacobian_closed_form<double>(kind, dim, js.base(0), js.params);
        if (closed == 0.0) {
            ++est.rejected;
            continue;
        }
        est.ratios(n++) = jacobian_numeric(kind, js.base, js.params, method) / closed;
    }
    est.mean = est.ratios.mean();
    const double var =
        (est.ratios.array() - est.mean).square().sum() / static_cast<double>(samples - 1);
    est.dispersion = std::sqrt(var) / std::abs(est.mean);
    est.max_rel_dev = (est.ratios.array() - est.mean).abs().maxCoeff() / std::abs(est.mean);
    return est;
}

}  // namespace momentray
