#include "momentray/fit.hpp"

#include "momentray/types.hpp"

#include <algorithm>
#include <cmath>

namespace momentray {

FitResult loglog_fit(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw DomainError("loglog_fit: need >= 2 paired points");
    const auto n = static_cast<Eigen::Index>(x.size());
    Eigen::MatrixXd A(n, 2);
    Eigen::VectorXd b(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw DomainError("loglog_fit: data must be positive");
        A(i, 0) = 1.0;
        A(i, 1) = std::log(x[i]);
        b(i) = std::log(y[i]);
    }
    const Eigen::Vector2d c = A.colPivHouseholderQr().solve(b);
    FitResult r;
    r.intercept = c(0);
    r.slope = c(1);
    r.residual = std::sqrt((A * c - b).squaredNorm() / static_cast<double>(n));
    r.x_min = *std::min_element(x.begin(), x.end());
    r.x_max = *std::max_element(x.begin(), x.end());
    r.n = static_cast<int>(n);
    return r;
}

}  // namespace momentray
