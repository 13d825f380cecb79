#include "rba/inference.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "rba/quadrature.hpp"
#include "rba/rng.hpp"

namespace rba {

BidSampleSet sample_bids(const ValueDistribution& d, const RankBasedAuction& a, std::int64_t n,
                         std::uint64_t seed, double noise_halfwidth) {
    BidFunction bf = compute_bid_function(d, a, 1024);
    BidSampleSet s = sample_bids(bf, n, seed, noise_halfwidth);
    s.distribution = d.describe();
    s.auction = a.serialize();
    return s;
}

BidSampleSet sample_bids(const BidFunction& bf, std::int64_t n, std::uint64_t seed,
                         double noise_halfwidth) {
    if (n < 1) throw std::invalid_argument("sample count must be >= 1");
    BidSampleSet s;
    s.seed = seed;
    s.bids.resize(n);
    Rng rng(seed);
    for (std::int64_t i = 0; i < n; ++i) {
        double b = bf(rng.uniform());
        if (noise_halfwidth > 0.0)
            b = std::max(0.0, b + rng.uniform(-noise_halfwidth, noise_halfwidth));
        s.bids[i] = b;
    }
    std::sort(s.bids.begin(), s.bids.end());
    return s;
}

EmpiricalBidFunction::EmpiricalBidFunction(BidSampleSet samples) : samples_(std::move(samples)) {
    if (samples_.bids.empty()) throw std::invalid_argument("empty bid sample");
    if (!std::is_sorted(samples_.bids.begin(), samples_.bids.end()))
        throw std::invalid_argument("bid sample must be sorted");
}

double EmpiricalBidFunction::operator()(double q) const {
    if (!(q >= 0.0 && q <= 1.0)) throw std::domain_error("quantile out of [0,1]");
    std::int64_t n = count();
    auto i = static_cast<std::int64_t>(q * n);  // step index, right-open
    if (i >= n) i = n - 1;
    return samples_.bids[i];
}

double sup_bid_error(const std::vector<double>& sorted_bids, const BidFunction& truth) {
    std::int64_t n = static_cast<std::int64_t>(sorted_bids.size());
    double worst = 0.0;
    // b and b_hat are monotone, so per step the gap peaks at an endpoint
    for (std::int64_t i = 0; i < n; ++i) {
        double lo = truth(static_cast<double>(i) / n);
        double hi = truth(static_cast<double>(i + 1) / n);
        worst = std::max({worst, std::abs(sorted_bids[i] - lo), std::abs(sorted_bids[i] - hi)});
    }
    return worst;
}

double KernelWeights::telescoping_constant() const {
    double sum = 0.0;
    for (double c : coeff) sum += c;
    return sum;
}

KernelWeights make_kernel_weights(const AllocationRule& x, int k, PaymentFormat format,
                                  std::int64_t n) {
    if (n < 1) throw std::invalid_argument("sample count must be >= 1");
    KernelWeights w;
    w.k = k;
    w.format = format;
    w.coeff.resize(n);

    std::vector<double> z(n + 1);
    for (std::int64_t i = 0; i <= n; ++i)
        z[i] = revenue_kernel(x, k, static_cast<double>(i) / n);

    if (format == PaymentFormat::AllPay) {
        for (std::int64_t i = 0; i < n; ++i) w.coeff[i] = z[i] - z[i + 1];
        return w;
    }

    // First price: per step, -int x Z' = [x Z]_hi^lo + int x' Z, and x'Z is
    // just (1-q) x_k'(q), integrated with a fixed 8-node rule per step.
    int agents = x.agents();
    std::vector<double> xv(n + 1);
    for (std::int64_t i = 0; i <= n; ++i)
        xv[i] = x.win_prob(static_cast<double>(i) / n);
    double ck = (k >= 1 && k <= agents - 1)
                    ? (agents - k) * std::exp(log_binomial(agents - 1, k - 1))
                    : 0.0;
    auto integrand = [&](double q) {
        if (q <= 0.0 || q >= 1.0)
            return (agents - k - 1 == 0 && q <= 0.0) ? ck : 0.0;
        return ck * std::exp((agents - k - 1) * std::log(q) + k * std::log1p(-q));
    };
    for (std::int64_t i = 0; i < n; ++i) {
        double lo = static_cast<double>(i) / n, hi = static_cast<double>(i + 1) / n;
        w.coeff[i] = xv[i] * z[i] - xv[i + 1] * z[i + 1] + gauss8(integrand, lo, hi);
    }
    return w;
}

double estimate_multiunit_revenue(const std::vector<double>& sorted_bids,
                                  const KernelWeights& weights) {
    if (sorted_bids.size() != weights.coeff.size())
        throw std::invalid_argument("bid count does not match kernel weights");
    double sum = 0.0;
    for (std::size_t i = 0; i < sorted_bids.size(); ++i) sum += weights.coeff[i] * sorted_bids[i];
    return sum;
}

double estimate_multiunit_revenue(const EmpiricalBidFunction& fn, const RankBasedAuction& a,
                                  int k) {
    KernelWeights w = make_kernel_weights(AllocationRule(a), k, a.format(), fn.count());
    return estimate_multiunit_revenue(fn.bids(), w);
}

EstimationReport mse_experiment(const ValueDistribution& d, const RankBasedAuction& a, int k,
                                std::int64_t n, int trials, std::uint64_t seed, int threads) {
    if (trials < 1) throw std::invalid_argument("need at least one trial");
    EstimationReport rep;
    rep.samples = n;
    rep.k = k;
    rep.format = a.format();
    rep.trials = trials;
    rep.seed = seed;

    MultiUnitRevenues P = multiunit_revenues(d, a.agents());
    rep.truth = P.values[k];

    BidFunction bf = compute_bid_function(d, a, 1024);
    KernelWeights weights = make_kernel_weights(AllocationRule(a), k, a.format(), n);

    rep.estimates.assign(trials, 0.0);
    std::vector<double> sup_err(trials, 0.0);
    auto run_range = [&](int lo, int hi) {
        for (int t = lo; t < hi; ++t) {
            BidSampleSet s = sample_bids(bf, n, trial_seed(seed, static_cast<std::uint64_t>(t)));
            rep.estimates[t] = estimate_multiunit_revenue(s.bids, weights);
            sup_err[t] = sup_bid_error(s.bids, bf);
        }
    };
    int workers = std::max(1, std::min<int>(threads, trials));
    if (workers == 1) {
        run_range(0, trials);
    } else {
        std::vector<std::thread> pool;
        int chunk = (trials + workers - 1) / workers;
        for (int wi = 0; wi < workers; ++wi) {
            int lo = wi * chunk, hi = std::min(trials, lo + chunk);
            if (lo >= hi) break;
            pool.emplace_back(run_range, lo, hi);
        }
        for (auto& th : pool) th.join();
    }

    double se = 0.0, sb = 0.0;
    for (int t = 0; t < trials; ++t) {
        double e = rep.estimates[t] - rep.truth;
        se += e * e;
        sb += sup_err[t] * sup_err[t];
    }
    rep.rms_error = std::sqrt(se / trials);
    rep.bid_sup_rms = std::sqrt(sb / trials);
    BoundBreakdown bd = theoretical_bound(a, k, n);
    rep.bound = bd.value;
    rep.bound_ratio = rep.bound > 0.0 ? rep.rms_error / rep.bound : 0.0;
    return rep;
}

double fit_rate(const std::vector<std::pair<std::int64_t, double>>& errors_by_size) {
    if (errors_by_size.size() < 4)
        throw std::invalid_argument("rate fit needs at least four sample sizes");
    std::int64_t lo = errors_by_size.front().first, hi = errors_by_size.front().first;
    for (const auto& [n, e] : errors_by_size) {
        lo = std::min(lo, n);
        hi = std::max(hi, n);
        if (!(e > 0.0)) throw std::invalid_argument("errors must be positive for a log fit");
    }
    if (static_cast<double>(hi) / lo < 100.0)
        throw std::invalid_argument("rate fit needs sizes spanning at least two decades");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t m = errors_by_size.size();
    for (const auto& [n, e] : errors_by_size) {
        double x = std::log(static_cast<double>(n)), y = std::log(e);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

BoundBreakdown theoretical_bound(const RankBasedAuction& a, int k, std::int64_t n,
                                 int grid_size, double q_min) {
    AllocationRule x(a);
    auto sup_terms = [&](double lo) {
        double slope_term = 0.0, kernel_term = 0.0;
        for (int i = 0; i < grid_size; ++i) {
            double q = lo + (1.0 - 2.0 * lo) * i / (grid_size - 1);
            double xp = x.slope(q);
            double z = revenue_kernel(x, k, q);
            if (a.format() == PaymentFormat::AllPay) {
                slope_term = std::max(slope_term, xp);
                kernel_term = std::max(kernel_term, z);
            } else {
                double xq = x.win_prob(q);
                if (xq > 0.0) slope_term = std::max(slope_term, xp / xq);
                kernel_term = std::max(kernel_term, xq * z);
            }
        }
        return std::pair<double, double>{slope_term, kernel_term};
    };
    auto [s1, k1] = sup_terms(q_min);
    auto [s2, k2] = sup_terms(q_min / 16.0);

    BoundBreakdown out;
    out.slope_term = s2;
    out.kernel_term = k2;
    out.saturated = s2 <= s1 * 1.01 + 1e-12 && k2 <= k1 * 1.01 + 1e-12;
    out.value = std::sqrt(2.0 / static_cast<double>(n)) * out.slope_term * out.kernel_term;
    return out;
}

}  // namespace rba
