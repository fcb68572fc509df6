#pragma once

#include <vector>

namespace momentray {

struct FitResult {
    double slope = 0.0;
    double intercept = 0.0;
    double residual = 0.0;  // RMS of log-residuals
    double x_min = 0.0, x_max = 0.0;
    int n = 0;
};

/// Least-squares fit of log y = intercept + slope * log x.
/// Throws DomainError on fewer than 2 points or nonpositive data.
FitResult loglog_fit(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace momentray
