#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "rba/distribution.hpp"
#include "rba/inference.hpp"
#include "rba/position.hpp"

namespace rba {

// Histogram estimate of the bid density g(z) = d/dz b^{-1}(z): windowed count
// over a bin of full width h, g_hat = count / (N h).  The bid-function slope
// estimate is b_hat'(q) = 1 / g_hat(b_hat(q)); an empty window yields the
// +infinity sentinel for the slope.
class DensityEstimate {
  public:
    DensityEstimate(const EmpiricalBidFunction& fn, double bandwidth);

    double bandwidth() const { return h_; }
    // true when h N / log N falls below 10; window counts are then too sparse
    bool low_resolution() const;
    double at_bid(double b) const;       // g_hat(b), >= 0
    double at_quantile(double q) const;  // g_hat(b_hat(q))
    double slope_at(double q) const;     // 1/g_hat, +inf sentinel on empty window

    // Total estimated mass over the sampled bid range (sanity: ~1).
    double mass() const;

  private:
    std::vector<double> bids_;
    double h_;
};

// Bandwidth rule h = (max bid - min bid) * N^{-1/3}; keeps h N / log N growing.
double default_bandwidth(const BidSampleSet& s);

struct ValueFnEstimate {
    std::vector<double> grid;
    std::vector<double> v_hat;
    int clamped = 0;    // grid points clipped into [0, ceiling]
    int sentinels = 0;  // grid points with an empty density window
};

// Plug-in value estimate on a grid from explicit bid-function callables:
// all-pay v = b'/x', first-price v = b + x b'/x'.  Estimates are clamped to
// [0, 1.5] and passed through pool-adjacent-violators when `isotonic`.
ValueFnEstimate estimate_value_fn_from(const std::function<double(double)>& bid,
                                       const std::function<double(double)>& bid_slope,
                                       const AllocationRule& x, PaymentFormat format,
                                       const std::vector<double>& grid, bool isotonic = true);

// Same, with bid and slope taken from the empirical step function and the
// histogram density estimator at bandwidth h.
ValueFnEstimate estimate_value_fn(const EmpiricalBidFunction& fn, const RankBasedAuction& a,
                                  double bandwidth, const std::vector<double>& grid,
                                  bool isotonic = true);

struct RevenueCurveEstimate {
    std::vector<double> grid;
    std::vector<double> v_hat;
    std::vector<double> r_hat;  // (1-q) v_hat, clamped >= 0; exactly 0 at q = 1
    int clamped = 0;
    int sentinels = 0;
};

RevenueCurveEstimate estimate_revenue_curve(const EmpiricalBidFunction& fn,
                                            const RankBasedAuction& a, double bandwidth,
                                            const std::vector<double>& grid,
                                            bool isotonic = true);

// Pointwise slope conditions under which the revenue curve can be estimated
// to relative error eps(q) from N samples at density convergence rate r
// (constants set to 1).  `lower`: |x''|/(eps sqrt(N)) <= x'.  `upper`:
// x' <= eps r / v (all-pay) or x' <= x r eps (first-price).  `samples`:
// N >= (v'/(v eps))^2 / 2 (all-pay) or N >= (v'/eps)^2 / 2 (first-price).
struct SlopeConditionPoint {
    double q = 0.0;
    bool lower_ok = true;
    bool upper_ok = true;
    bool samples_ok = true;
};

struct SlopeConditionReport {
    std::vector<SlopeConditionPoint> points;
    double frac_lower = 0.0;
    double frac_upper = 0.0;
    double frac_samples = 0.0;
    double frac_all = 0.0;
};

SlopeConditionReport check_slope_conditions(const RankBasedAuction& a,
                                            const ValueDistribution& d, std::int64_t n,
                                            double rate,
                                            const std::function<double(double)>& eps_profile,
                                            const std::vector<double>& grid);

// Convergence-rate comparison on identical seeds: parametric P_k estimation
// vs sup-norm revenue-curve estimation on a central quantile band with
// h proportional to N^{-1/3}.
struct RateSeparation {
    std::vector<std::int64_t> sizes;
    std::vector<double> pk_rms;
    std::vector<double> curve_rms;
    double pk_exponent = 0.0;
    double curve_exponent = 0.0;
};

RateSeparation rate_separation_experiment(const ValueDistribution& d, const RankBasedAuction& a,
                                          int k, const std::vector<std::int64_t>& sizes,
                                          int trials, std::uint64_t seed, double band_lo = 0.2,
                                          double band_hi = 0.8, int threads = 1);

}  // namespace rba
