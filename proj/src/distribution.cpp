#include "rba/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "rba/envelope.hpp"

namespace rba {

namespace {

void require_unit(double q, const char* what) {
    if (!(q >= 0.0 && q <= 1.0)) {
        std::ostringstream os;
        os << what << " out of [0,1]: " << q;
        throw std::domain_error(os.str());
    }
}

}  // namespace

std::string to_string(DistFamily f) {
    switch (f) {
        case DistFamily::Uniform01: return "uniform01";
        case DistFamily::TruncatedExponential: return "truncated_exponential";
        case DistFamily::PiecewiseLinearQuantile: return "piecewise_linear";
        case DistFamily::BimodalIrregular: return "bimodal_irregular";
    }
    return "?";
}

ValueDistribution::ValueDistribution(DistFamily family, double rate, std::vector<Knot> knots)
    : family_(family), rate_(rate), knots_(std::move(knots)) {}

ValueDistribution ValueDistribution::uniform01() {
    return ValueDistribution(DistFamily::Uniform01, 0.0, {});
}

ValueDistribution ValueDistribution::truncated_exponential(double rate) {
    if (!(rate > 0.0)) throw std::invalid_argument("rate must be positive");
    return ValueDistribution(DistFamily::TruncatedExponential, rate, {});
}

ValueDistribution ValueDistribution::piecewise_linear(std::vector<Knot> knots) {
    if (knots.size() < 2) throw std::invalid_argument("need >= 2 knots");
    if (std::abs(knots.front().q) > 0.0 || std::abs(knots.back().q - 1.0) > 0.0)
        throw std::invalid_argument("knots must span q = 0 to q = 1");
    for (std::size_t i = 0; i < knots.size(); ++i) {
        if (!(knots[i].v >= 0.0 && knots[i].v <= 1.0))
            throw std::invalid_argument("values must lie in [0,1]");
        if (i > 0) {
            if (!(knots[i].q > knots[i - 1].q))
                throw std::invalid_argument("knot quantiles must be strictly increasing");
            if (knots[i].v < knots[i - 1].v - 1e-12)
                throw std::invalid_argument("quantile function must be nondecreasing");
        }
    }
    return ValueDistribution(DistFamily::PiecewiseLinearQuantile, 0.0, std::move(knots));
}

ValueDistribution ValueDistribution::bimodal_irregular(double v_lo, double v_hi,
                                                       double atom_mass, double atom_width) {
    if (!(v_lo > 0 && v_hi > v_lo && v_hi + atom_width / 2 <= 1.0))
        throw std::invalid_argument("bad bimodal parameters");
    if (!(atom_mass > 0 && atom_mass < 0.5))
        throw std::invalid_argument("atom mass must be in (0, 0.5)");
    // Main mode rising to v_lo over the bottom 60% of quantiles, a sparse
    // bridge up to the near-atom, then the near-atom carrying `atom_mass`.
    std::vector<Knot> knots{{0.0, 0.0},
                            {0.6, v_lo},
                            {1.0 - atom_mass, v_hi - atom_width / 2},
                            {1.0, v_hi + atom_width / 2}};
    ValueDistribution d = piecewise_linear(std::move(knots));
    d.family_ = DistFamily::BimodalIrregular;
    return d;
}

double ValueDistribution::value(double q) const {
    require_unit(q, "quantile");
    switch (family_) {
        case DistFamily::Uniform01:
            return q;
        case DistFamily::TruncatedExponential: {
            double c = 1.0 - std::exp(-rate_);
            return -std::log1p(-q * c) / rate_;
        }
        default: {
            auto it = std::upper_bound(knots_.begin(), knots_.end(), q,
                                       [](double x, const Knot& k) { return x < k.q; });
            if (it == knots_.begin()) return knots_.front().v;
            if (it == knots_.end()) return knots_.back().v;
            const Knot& b = *it;
            const Knot& a = *(it - 1);
            double t = (q - a.q) / (b.q - a.q);
            return a.v + t * (b.v - a.v);
        }
    }
}

double ValueDistribution::slope(double q) const {
    require_unit(q, "quantile");
    switch (family_) {
        case DistFamily::Uniform01:
            return 1.0;
        case DistFamily::TruncatedExponential: {
            double c = 1.0 - std::exp(-rate_);
            return c / (rate_ * (1.0 - q * c));
        }
        default: {
            auto it = std::upper_bound(knots_.begin(), knots_.end(), q,
                                       [](double x, const Knot& k) { return x < k.q; });
            if (it == knots_.begin()) ++it;
            if (it == knots_.end()) --it;
            const Knot& b = *it;
            const Knot& a = *(it - 1);
            return (b.v - a.v) / (b.q - a.q);
        }
    }
}

std::vector<double> ValueDistribution::kink_quantiles() const {
    std::vector<double> out;
    for (const Knot& k : knots_)
        if (k.q > 0.0 && k.q < 1.0) out.push_back(k.q);
    return out;
}

std::string ValueDistribution::describe() const {
    std::ostringstream os;
    os << to_string(family_);
    if (family_ == DistFamily::TruncatedExponential) os << "(rate=" << rate_ << ")";
    if (!knots_.empty()) {
        os << "[";
        for (std::size_t i = 0; i < knots_.size(); ++i) {
            if (i) os << ", ";
            os << "(" << knots_[i].q << "," << knots_[i].v << ")";
        }
        os << "]";
    }
    return os.str();
}

double RevenueCurve::revenue(double q) const {
    require_unit(q, "quantile");
    if (q == 0.0 || q == 1.0) return 0.0;
    return dist_.value(q) * (1.0 - q);
}

double RevenueCurve::slope(double q) const {
    // One-sided evaluation within h of the boundary keeps the finite
    // difference inside the domain for families without analytic slopes.
    return dist_.slope(q) * (1.0 - q) - dist_.value(q);
}

double RevenueCurve::virtual_value(double q) const { return -slope(q); }

IronedRevenueCurve::IronedRevenueCurve(const RevenueCurve& rc, int grid_size, bool exclude_top,
                                       int agents) {
    if (grid_size < 16) throw std::invalid_argument("grid size must be >= 16");
    if (exclude_top && agents < 2) throw std::invalid_argument("agents must be >= 2");
    exclude_top_ = exclude_top;
    grid_.resize(grid_size);
    std::vector<double> raw(grid_size);
    for (int i = 0; i < grid_size; ++i) {
        grid_[i] = static_cast<double>(i) / (grid_size - 1);
        raw[i] = rc.revenue(grid_[i]);
    }
    if (!exclude_top) {
        bar_ = upper_concave_majorant(grid_, raw).values;
        return;
    }
    double cutoff = 1.0 - 1.0 / agents;
    std::size_t m = 0;
    while (m + 1 < grid_.size() && grid_[m + 1] <= cutoff) ++m;
    std::vector<double> gx(grid_.begin(), grid_.begin() + m + 1);
    std::vector<double> gy(raw.begin(), raw.begin() + m + 1);
    bar_ = upper_concave_majorant(gx, gy).values;
    bar_.insert(bar_.end(), raw.begin() + m + 1, raw.end());
}

double IronedRevenueCurve::value(double q) const {
    require_unit(q, "quantile");
    double pos = q * (grid_.size() - 1);
    std::size_t i = static_cast<std::size_t>(pos);
    if (i + 1 >= grid_.size()) return bar_.back();
    double t = pos - i;
    return bar_[i] * (1.0 - t) + bar_[i + 1] * t;
}

double IronedRevenueCurve::left_slope(double q) const {
    require_unit(q, "quantile");
    double pos = q * (grid_.size() - 1);
    std::size_t i = static_cast<std::size_t>(pos);
    if (i + 1 >= grid_.size()) i = grid_.size() - 2;
    // segment [i, i+1]; at a grid point use the segment to its left
    if (pos == static_cast<double>(i) && i > 0) --i;
    return (bar_[i + 1] - bar_[i]) / (grid_[i + 1] - grid_[i]);
}

IronedRevenueCurve iron_revenue_curve(const RevenueCurve& rc, int grid_size, bool exclude_top,
                                      int agents) {
    return IronedRevenueCurve(rc, grid_size, exclude_top, agents);
}

bool is_regular(const RevenueCurve& rc, int grid_size, double tol) {
    if (grid_size < 16) throw std::invalid_argument("grid size must be >= 16");
    double prev2 = rc.revenue(0.0), prev1 = rc.revenue(1.0 / (grid_size - 1));
    for (int i = 2; i < grid_size; ++i) {
        double cur = rc.revenue(static_cast<double>(i) / (grid_size - 1));
        if (cur - 2.0 * prev1 + prev2 > tol) return false;
        prev2 = prev1;
        prev1 = cur;
    }
    return true;
}

}  // namespace rba
