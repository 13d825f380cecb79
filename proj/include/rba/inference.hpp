#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rba/distribution.hpp"
#include "rba/equilibrium.hpp"
#include "rba/position.hpp"

namespace rba {

struct BidSampleSet {
    std::vector<double> bids;  // sorted ascending, all >= 0
    std::uint64_t seed = 0;
    std::string distribution;
    std::string auction;

    std::int64_t count() const { return static_cast<std::int64_t>(bids.size()); }
};

// N i.i.d. equilibrium bids: q ~ U[0,1], b = b(q).  `noise_halfwidth` adds
// optional uniform measurement error (clamped at zero); off by default.
BidSampleSet sample_bids(const ValueDistribution& d, const RankBasedAuction& a, std::int64_t n,
                         std::uint64_t seed, double noise_halfwidth = 0.0);
BidSampleSet sample_bids(const BidFunction& bf, std::int64_t n, std::uint64_t seed,
                         double noise_halfwidth = 0.0);

// Step estimate of the bid function: b_hat(q) = b_(i) on [(i-1)/N, i/N).
class EmpiricalBidFunction {
  public:
    explicit EmpiricalBidFunction(BidSampleSet samples);

    double operator()(double q) const;
    const std::vector<double>& bids() const { return samples_.bids; }
    std::int64_t count() const { return samples_.count(); }
    const BidSampleSet& samples() const { return samples_; }

  private:
    BidSampleSet samples_;
};

// sup_q |b_hat - b| against a reference bid function (exact on step interiors
// since both are monotone).
double sup_bid_error(const std::vector<double>& sorted_bids, const BidFunction& truth);

// Per-sample-grid kernel weights for one (auction, k, format), reusable across
// trials with the same N.  The estimators are linear in the sorted bids and
// integrate the kernel exactly against the step function; only kernel values
// enter (no numerical differentiation).
struct KernelWeights {
    int k = 0;
    PaymentFormat format = PaymentFormat::AllPay;
    std::vector<double> coeff;  // P_hat = sum_i coeff[i-1] * b_(i)

    double telescoping_constant() const;  // estimate on bids identically 1
};

KernelWeights make_kernel_weights(const AllocationRule& x, int k, PaymentFormat format,
                                  std::int64_t n);

double estimate_multiunit_revenue(const std::vector<double>& sorted_bids,
                                  const KernelWeights& weights);
// Convenience wrapper building the weights on the fly.
double estimate_multiunit_revenue(const EmpiricalBidFunction& fn, const RankBasedAuction& a,
                                  int k);

struct EstimationReport {
    std::int64_t samples = 0;
    int k = 0;
    PaymentFormat format = PaymentFormat::AllPay;
    int trials = 0;
    std::uint64_t seed = 0;
    double truth = 0.0;
    std::vector<double> estimates;   // one per trial
    double rms_error = 0.0;          // vs truth
    double bid_sup_rms = 0.0;        // RMS over trials of sup_q |b_hat - b|
    double bound = 0.0;              // allocation-based error bound at this N
    double bound_ratio = 0.0;        // rms_error / bound
};

// T independent sample-and-estimate trials at sample size N.
EstimationReport mse_experiment(const ValueDistribution& d, const RankBasedAuction& a, int k,
                                std::int64_t n, int trials, std::uint64_t seed,
                                int threads = 1);

// Least-squares slope of log(error) against log(N); needs >= 4 sizes spanning
// at least two decades.
double fit_rate(const std::vector<std::pair<std::int64_t, double>>& errors_by_size);

struct BoundBreakdown {
    double value = 0.0;        // sqrt(2/N) * slope_term * kernel_term
    double slope_term = 0.0;   // sup x' (all-pay) or sup x'/x (first-price)
    double kernel_term = 0.0;  // sup Z_k (all-pay) or sup x Z_k (first-price)
    bool saturated = true;     // false when the grid sup keeps growing under refinement
};

// Mean-squared-error bound for the linear P_k estimator from N samples.
BoundBreakdown theoretical_bound(const RankBasedAuction& a, int k, std::int64_t n,
                                 int grid_size = 4096, double q_min = 1e-4);

}  // namespace rba
