#pragma once

#include <vector>

#include "rba/distribution.hpp"
#include "rba/position.hpp"

namespace rba {

// Symmetric BNE bid function on a quantile grid, interpolated monotone
// piecewise-linear between grid points.
struct BidFunction {
    PaymentFormat format;
    std::vector<double> grid;  // increasing quantiles spanning [0,1]
    std::vector<double> bids;  // b(grid[i]), nondecreasing

    double operator()(double q) const;
    double max_bid() const { return bids.back(); }
};

// Unique symmetric all-pay BNE bid: b(q) = int_0^q v(t) x'(t) dt.
double allpay_bid(const ValueDistribution& d, const AllocationRule& x, double q);

// Unique symmetric first-price BNE bid: b(q) = (1/x(q)) int_0^q v(t) x'(t) dt.
// At q = 0 with x(0) = 0 this is the limit v(0), evaluated at q_min = 1e-8.
double firstprice_bid(const ValueDistribution& d, const AllocationRule& x, double q);

// b on a uniform grid of `grid_size` points, one cumulative-quadrature sweep.
BidFunction compute_bid_function(const ValueDistribution& d, const RankBasedAuction& a,
                                 int grid_size = 512);

// Per-agent BNE revenue E_q[R(q) x'(q)].
double per_agent_revenue(const ValueDistribution& d, const AllocationRule& x);
// Same quantity through the other route, -E_q[R'(q) x(q)]; the two agree
// within twice the quadrature tolerance.
double per_agent_revenue_by_parts(const ValueDistribution& d, const AllocationRule& x);

// Per-agent revenues (P_0,...,P_n) of the k-unit highest-bids-win auctions.
struct MultiUnitRevenues {
    int agents;
    std::vector<double> values;  // size agents+1, values[0] = values[n] = 0

    double operator[](int k) const { return values.at(k); }
};

MultiUnitRevenues multiunit_revenues(const ValueDistribution& d, int agents);

// Max utility gain from any grid deviation (q -> bid of q') under the
// auction's payment format; ~0 for a correct equilibrium bid function.
double verify_bne(const ValueDistribution& d, const RankBasedAuction& a,
                  const BidFunction& bf, int grid_size = 512);

// CSV export, columns (q, b), LF line endings.
std::string bid_function_csv(const BidFunction& bf);

}  // namespace rba
