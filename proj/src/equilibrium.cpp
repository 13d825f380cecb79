#include "rba/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "rba/quadrature.hpp"

namespace rba {

namespace {

constexpr double kFirstPriceQMin = 1e-8;

double win_integrand(const ValueDistribution& d, const AllocationRule& x, double t) {
    return d.value(t) * x.slope(t);
}

}  // namespace

double BidFunction::operator()(double q) const {
    if (!(q >= 0.0 && q <= 1.0)) throw std::domain_error("quantile out of [0,1]");
    auto it = std::upper_bound(grid.begin(), grid.end(), q);
    if (it == grid.begin()) return bids.front();
    if (it == grid.end()) return bids.back();
    std::size_t hi = static_cast<std::size_t>(it - grid.begin());
    std::size_t lo = hi - 1;
    double t = (q - grid[lo]) / (grid[hi] - grid[lo]);
    return bids[lo] * (1.0 - t) + bids[hi] * t;
}

double allpay_bid(const ValueDistribution& d, const AllocationRule& x, double q) {
    if (!(q >= 0.0 && q <= 1.0)) throw std::domain_error("quantile out of [0,1]");
    if (q == 0.0) return 0.0;
    return integrate([&](double t) { return win_integrand(d, x, t); }, 0.0, q, {},
                     d.kink_quantiles());
}

double firstprice_bid(const ValueDistribution& d, const AllocationRule& x, double q) {
    if (!(q >= 0.0 && q <= 1.0)) throw std::domain_error("quantile out of [0,1]");
    if (q == 0.0) {
        if (x.win_prob(0.0) > 0.0) return 0.0;
        q = kFirstPriceQMin;
    }
    double xq = x.win_prob(q);
    if (!(xq > 0.0)) {
        // x vanishes on [0,q]: the limit b = v is still well defined as long
        // as the distribution is, but no bid is placed; treat as degenerate.
        if (x.slope(q) > 0.0 || q <= kFirstPriceQMin) return d.value(q);
        throw DegenerateAllocationError("allocation is zero on [0,q]");
    }
    double num = integrate([&](double t) { return win_integrand(d, x, t); }, 0.0, q, {},
                           d.kink_quantiles());
    return num / xq;
}

BidFunction compute_bid_function(const ValueDistribution& d, const RankBasedAuction& a,
                                 int grid_size) {
    if (grid_size < 2) throw std::invalid_argument("grid size must be >= 2");
    AllocationRule x(a);
    BidFunction bf;
    bf.format = a.format();
    bf.grid.resize(grid_size);
    for (int i = 0; i < grid_size; ++i)
        bf.grid[i] = static_cast<double>(i) / (grid_size - 1);

    std::vector<double> cum = integrate_cumulative(
        [&](double t) { return win_integrand(d, x, t); }, 0.0, 1.0, bf.grid, {},
        d.kink_quantiles());

    bf.bids.resize(grid_size);
    if (a.format() == PaymentFormat::AllPay) {
        bf.bids = cum;
    } else {
        for (int i = 0; i < grid_size; ++i) {
            double q = bf.grid[i];
            if (i == 0) {
                bf.bids[i] = x.win_prob(0.0) > 0.0 ? 0.0
                                                   : firstprice_bid(d, x, 0.0);
                continue;
            }
            double xq = x.win_prob(q);
            bf.bids[i] = xq > 0.0 ? cum[i] / xq : d.value(q);
        }
    }
    // interpolation requires monotone bids; quadrature noise can leave
    // sub-epsilon wiggles at flat stretches
    for (int i = 1; i < grid_size; ++i)
        bf.bids[i] = std::max(bf.bids[i], bf.bids[i - 1]);
    return bf;
}

double per_agent_revenue(const ValueDistribution& d, const AllocationRule& x) {
    RevenueCurve rc(d);
    return integrate([&](double q) { return rc.revenue(q) * x.slope(q); }, 0.0, 1.0, {},
                     d.kink_quantiles());
}

double per_agent_revenue_by_parts(const ValueDistribution& d, const AllocationRule& x) {
    RevenueCurve rc(d);
    return integrate([&](double q) { return -rc.slope(q) * x.win_prob(q); }, 0.0, 1.0, {},
                     d.kink_quantiles());
}

MultiUnitRevenues multiunit_revenues(const ValueDistribution& d, int agents) {
    if (agents < 2) throw std::invalid_argument("need at least two agents");
    RevenueCurve rc(d);
    MultiUnitRevenues out;
    out.agents = agents;
    out.values.assign(agents + 1, 0.0);
    for (int k = 1; k < agents; ++k) {
        out.values[k] = integrate(
            [&](double q) { return rc.revenue(q) * multiunit_win_prob_slope(agents, k, q); },
            0.0, 1.0, {}, d.kink_quantiles());
        out.values[k] = std::max(0.0, out.values[k]);
    }
    return out;
}

double verify_bne(const ValueDistribution& d, const RankBasedAuction& a,
                  const BidFunction& bf, int grid_size) {
    AllocationRule x(a);
    std::vector<double> q(grid_size), v(grid_size), xs(grid_size), b(grid_size);
    for (int i = 0; i < grid_size; ++i) {
        q[i] = grid_size == 1 ? 0.5 : static_cast<double>(i) / (grid_size - 1);
        v[i] = d.value(q[i]);
        xs[i] = x.win_prob(q[i]);
        b[i] = bf(q[i]);
    }
    double worst = 0.0;
    for (int i = 0; i < grid_size; ++i) {
        double eq_u, best = -1e300;
        if (a.format() == PaymentFormat::FirstPrice) {
            eq_u = (v[i] - b[i]) * xs[i];
            for (int j = 0; j < grid_size; ++j)
                best = std::max(best, (v[i] - b[j]) * xs[j]);
        } else {
            eq_u = v[i] * xs[i] - b[i];
            for (int j = 0; j < grid_size; ++j)
                best = std::max(best, v[i] * xs[j] - b[j]);
        }
        worst = std::max(worst, best - eq_u);
    }
    return worst;
}

std::string bid_function_csv(const BidFunction& bf) {
    std::ostringstream os;
    os.precision(17);
    os << "q,b\n";
    for (std::size_t i = 0; i < bf.grid.size(); ++i)
        os << bf.grid[i] << "," << bf.bids[i] << "\n";
    return os.str();
}

}  // namespace rba
