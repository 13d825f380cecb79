#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

namespace rba {

struct QuadratureError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct QuadratureOptions {
    double abs_tol = 1e-8;
    // Minimum total Simpson panels across [a,b].  Integrands here carry
    // endpoint powers q^{n-k-1}(1-q)^{k-1}, so the base partition is graded
    // geometrically toward both endpoints before panels are spread.
    int min_panels = 4096;
    int max_doublings = 14;
};

// Adaptive composite Simpson over [a,b].  `breakpoints` marks interior kinks
// (e.g. piecewise-linear quantile knots) that become cell boundaries.
double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadratureOptions& opts = {},
                 const std::vector<double>& breakpoints = {});

// One pass of the same scheme that also reports the cumulative integral
// F(x) = int_a^x f at each requested point (points must be sorted in [a,b]).
std::vector<double> integrate_cumulative(const std::function<double(double)>& f,
                                         double a, double b,
                                         const std::vector<double>& points,
                                         const QuadratureOptions& opts = {},
                                         const std::vector<double>& breakpoints = {});

// Fixed 8-node Gauss-Legendre rule on [a,b]; exact for polynomials of degree 15.
double gauss8(const std::function<double(double)>& f, double a, double b);

}  // namespace rba
