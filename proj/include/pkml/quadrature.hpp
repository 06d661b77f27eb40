#pragma once

#include <cstddef>
#include <functional>

namespace pkml {

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;  // sum of |Kronrod - Gauss| over the final partition
    std::size_t intervals = 0;
    bool converged = false;
};

// Globally adaptive 7/15-point Gauss–Kronrod quadrature: the interval with
// the largest error estimate is bisected until the total estimate is at most
// max(abs_tol, rel_tol |value|) or max_intervals is reached.
QuadratureResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                    double rel_tol, double abs_tol = 0.0,
                                    std::size_t max_intervals = 4000);

}  // namespace pkml
