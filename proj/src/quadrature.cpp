#include "rba/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace rba {

namespace {

// Composite Simpson with m panels (m even not required; each panel uses the
// three-point rule on its own subinterval).
double simpson(const std::function<double(double)>& f, double a, double b, int m) {
    double h = (b - a) / m;
    double sum = 0.0;
    for (int i = 0; i < m; ++i) {
        double x0 = a + i * h;
        double x1 = x0 + 0.5 * h;
        double x2 = (i + 1 == m) ? b : x0 + h;
        sum += (h / 6.0) * (f(x0) + 4.0 * f(x1) + f(x2));
    }
    return sum;
}

// Doubles the panel count until successive estimates agree; Richardson
// extrapolation on the last pair.  Cell endpoints usually sit on integrand
// kinks (they come from the breakpoint list), so endpoint evaluations are
// nudged inward to stay on the cell's side of the kink.
double integrate_cell(const std::function<double(double)>& f, double a, double b,
                      double tol, int base_panels, int max_doublings) {
    double nudge = (b - a) * 1e-12;
    auto g = [&](double x) { return f(std::clamp(x, a + nudge, b - nudge)); };
    int m = std::max(2, base_panels);
    double prev = simpson(g, a, b, m);
    for (int d = 0; d < max_doublings; ++d) {
        m *= 2;
        double cur = simpson(g, a, b, m);
        double err = std::abs(cur - prev) / 15.0;
        if (err <= tol || m >= (1 << 22)) return cur + (cur - prev) / 15.0;
        prev = cur;
    }
    throw QuadratureError("quadrature did not reach requested tolerance");
}

// Graded cell boundaries: geometric refinement toward both endpoints plus a
// uniform middle, merged with caller-supplied breakpoints.
std::vector<double> make_cells(double a, double b, const std::vector<double>& breakpoints) {
    std::vector<double> xs{a, b};
    double len = b - a;
    for (int j = 2; j <= 20; ++j) {
        double off = len * std::ldexp(1.0, -j);
        xs.push_back(a + off);
        xs.push_back(b - off);
    }
    for (int i = 1; i < 8; ++i) xs.push_back(a + len * i / 8.0);
    for (double t : breakpoints)
        if (t > a && t < b) xs.push_back(t);
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end(),
                         [](double u, double v) { return std::abs(u - v) < 1e-300; }),
             xs.end());
    return xs;
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadratureOptions& opts, const std::vector<double>& breakpoints) {
    if (!(b > a)) return 0.0;
    std::vector<double> xs = make_cells(a, b, breakpoints);
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        double w = (xs[i + 1] - xs[i]) / (b - a);
        int base = std::max(2, static_cast<int>(std::ceil(opts.min_panels * w)));
        total += integrate_cell(f, xs[i], xs[i + 1], opts.abs_tol * std::max(w, 1e-6),
                                base, opts.max_doublings);
    }
    return total;
}

std::vector<double> integrate_cumulative(const std::function<double(double)>& f,
                                         double a, double b,
                                         const std::vector<double>& points,
                                         const QuadratureOptions& opts,
                                         const std::vector<double>& breakpoints) {
    std::vector<double> marks = breakpoints;
    marks.insert(marks.end(), points.begin(), points.end());
    std::vector<double> xs = make_cells(a, b, marks);

    // Cumulative value at every cell boundary, then read off at the points.
    std::vector<double> cum(xs.size(), 0.0);
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        double w = (xs[i + 1] - xs[i]) / (b - a);
        int base = std::max(2, static_cast<int>(std::ceil(opts.min_panels * w)));
        cum[i + 1] = cum[i] + integrate_cell(f, xs[i], xs[i + 1],
                                             opts.abs_tol * std::max(w, 1e-6), base,
                                             opts.max_doublings);
    }
    std::vector<double> out;
    out.reserve(points.size());
    for (double p : points) {
        auto it = std::lower_bound(xs.begin(), xs.end(), p - 1e-300);
        std::size_t idx = static_cast<std::size_t>(it - xs.begin());
        if (idx >= xs.size()) idx = xs.size() - 1;
        out.push_back(cum[idx]);
    }
    return out;
}

double gauss8(const std::function<double(double)>& f, double a, double b) {
    static const std::array<double, 4> nodes = {
        0.1834346424956498, 0.5255324099163290, 0.7966664774136267, 0.9602898564975363};
    static const std::array<double, 4> weights = {
        0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};
    double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double sum = 0.0;
    for (int i = 0; i < 4; ++i)
        sum += weights[i] * (f(mid - half * nodes[i]) + f(mid + half * nodes[i]));
    return half * sum;
}

}  // namespace rba
