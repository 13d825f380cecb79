#include "rba/density.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "rba/envelope.hpp"
#include "rba/rng.hpp"

namespace rba {

DensityEstimate::DensityEstimate(const EmpiricalBidFunction& fn, double bandwidth)
    : bids_(fn.bids()), h_(bandwidth) {
    if (!(h_ > 0.0)) throw std::invalid_argument("bandwidth must be positive");
}

bool DensityEstimate::low_resolution() const {
    double n = static_cast<double>(bids_.size());
    return h_ * n / std::log(std::max(n, 2.0)) < 10.0;
}

double DensityEstimate::at_bid(double b) const {
    auto lo = std::lower_bound(bids_.begin(), bids_.end(), b - h_ / 2.0);
    auto hi = std::upper_bound(bids_.begin(), bids_.end(), b + h_ / 2.0);
    double count = static_cast<double>(hi - lo);
    return count / (static_cast<double>(bids_.size()) * h_);
}

double DensityEstimate::at_quantile(double q) const {
    std::int64_t n = static_cast<std::int64_t>(bids_.size());
    auto i = static_cast<std::int64_t>(q * n);
    if (i >= n) i = n - 1;
    return at_bid(bids_[i]);
}

double DensityEstimate::slope_at(double q) const {
    double g = at_quantile(q);
    if (g <= 0.0) return std::numeric_limits<double>::infinity();
    return 1.0 / g;
}

double DensityEstimate::mass() const {
    // trapezoid over a fine grid of the bid range
    double lo = bids_.front(), hi = bids_.back();
    if (!(hi > lo)) return at_bid(lo) * h_;
    int m = 4096;
    double sum = 0.0, prev = at_bid(lo);
    for (int i = 1; i <= m; ++i) {
        double b = lo + (hi - lo) * i / m;
        double cur = at_bid(b);
        sum += 0.5 * (prev + cur) * (hi - lo) / m;
        prev = cur;
    }
    return sum;
}

double default_bandwidth(const BidSampleSet& s) {
    double range = s.bids.back() - s.bids.front();
    if (!(range > 0.0)) range = std::max(s.bids.back(), 1e-3);
    return range * std::pow(static_cast<double>(s.count()), -1.0 / 3.0);
}

namespace {

constexpr double kClampCeiling = 1.5;

ValueFnEstimate finish_estimate(std::vector<double> grid, std::vector<double> v, int clamped,
                                int sentinels, bool isotonic) {
    if (isotonic) v = pav_nondecreasing(v);
    ValueFnEstimate out;
    out.grid = std::move(grid);
    out.v_hat = std::move(v);
    out.clamped = clamped;
    out.sentinels = sentinels;
    return out;
}

}  // namespace

ValueFnEstimate estimate_value_fn_from(const std::function<double(double)>& bid,
                                       const std::function<double(double)>& bid_slope,
                                       const AllocationRule& x, PaymentFormat format,
                                       const std::vector<double>& grid, bool isotonic) {
    std::vector<double> v(grid.size());
    int clamped = 0, sentinels = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double q = grid[i];
        double bp = bid_slope(q);
        double xp = x.slope(q);
        double raw;
        if (!std::isfinite(bp)) {
            ++sentinels;
            raw = kClampCeiling;
        } else if (format == PaymentFormat::AllPay) {
            raw = xp > 0.0 ? bp / xp : kClampCeiling;
        } else {
            double xq = x.win_prob(q);
            raw = xp > 0.0 ? bid(q) + xq * bp / xp : kClampCeiling;
        }
        double clampedv = std::clamp(raw, 0.0, kClampCeiling);
        if (clampedv != raw) ++clamped;
        v[i] = clampedv;
    }
    return finish_estimate(grid, std::move(v), clamped, sentinels, isotonic);
}

ValueFnEstimate estimate_value_fn(const EmpiricalBidFunction& fn, const RankBasedAuction& a,
                                  double bandwidth, const std::vector<double>& grid,
                                  bool isotonic) {
    DensityEstimate g(fn, bandwidth);
    return estimate_value_fn_from([&fn](double q) { return fn(q); },
                                  [&g](double q) { return g.slope_at(q); }, AllocationRule(a),
                                  a.format(), grid, isotonic);
}

RevenueCurveEstimate estimate_revenue_curve(const EmpiricalBidFunction& fn,
                                            const RankBasedAuction& a, double bandwidth,
                                            const std::vector<double>& grid, bool isotonic) {
    ValueFnEstimate v = estimate_value_fn(fn, a, bandwidth, grid, isotonic);
    RevenueCurveEstimate out;
    out.grid = v.grid;
    out.v_hat = v.v_hat;
    out.clamped = v.clamped;
    out.sentinels = v.sentinels;
    out.r_hat.resize(out.grid.size());
    for (std::size_t i = 0; i < out.grid.size(); ++i)
        out.r_hat[i] = std::max(0.0, (1.0 - out.grid[i]) * out.v_hat[i]);
    return out;
}

SlopeConditionReport check_slope_conditions(const RankBasedAuction& a,
                                            const ValueDistribution& d, std::int64_t n,
                                            double rate,
                                            const std::function<double(double)>& eps_profile,
                                            const std::vector<double>& grid) {
    AllocationRule x(a);
    SlopeConditionReport rep;
    rep.points.reserve(grid.size());
    double sqn = std::sqrt(static_cast<double>(n));
    const double fd = 1e-4;
    int nl = 0, nu = 0, ns = 0, na = 0;
    for (double q : grid) {
        double ql = std::max(fd, std::min(1.0 - fd, q));
        double xpp = (x.slope(ql + fd) - x.slope(ql - fd)) / (2.0 * fd);
        double xp = x.slope(q);
        double v = d.value(q), vp = d.slope(q);
        double eps = eps_profile(q);

        SlopeConditionPoint pt;
        pt.q = q;
        pt.lower_ok = std::abs(xpp) / (eps * sqn) <= xp;
        if (a.format() == PaymentFormat::AllPay) {
            pt.upper_ok = v > 0.0 ? xp <= eps * rate / v : true;
            pt.samples_ok = v > 0.0
                                ? static_cast<double>(n) >= 0.5 * std::pow(vp / (v * eps), 2.0)
                                : false;
        } else {
            pt.upper_ok = xp <= x.win_prob(q) * rate * eps;
            pt.samples_ok = static_cast<double>(n) >= 0.5 * std::pow(vp / eps, 2.0);
        }
        nl += pt.lower_ok;
        nu += pt.upper_ok;
        ns += pt.samples_ok;
        na += pt.lower_ok && pt.upper_ok && pt.samples_ok;
        rep.points.push_back(pt);
    }
    double m = static_cast<double>(grid.size());
    rep.frac_lower = nl / m;
    rep.frac_upper = nu / m;
    rep.frac_samples = ns / m;
    rep.frac_all = na / m;
    return rep;
}

RateSeparation rate_separation_experiment(const ValueDistribution& d, const RankBasedAuction& a,
                                          int k, const std::vector<std::int64_t>& sizes,
                                          int trials, std::uint64_t seed, double band_lo,
                                          double band_hi, int threads) {
    if (trials < 1) throw std::invalid_argument("need at least one trial");
    RateSeparation out;
    out.sizes = sizes;

    BidFunction bf = compute_bid_function(d, a, 1024);
    AllocationRule x(a);
    MultiUnitRevenues P = multiunit_revenues(d, a.agents());
    double truth = P.values[k];

    const int band_points = 61;
    std::vector<double> band(band_points);
    std::vector<double> v_true(band_points), r_true(band_points);
    for (int i = 0; i < band_points; ++i) {
        band[i] = band_lo + (band_hi - band_lo) * i / (band_points - 1);
        v_true[i] = d.value(band[i]);
        r_true[i] = v_true[i] * (1.0 - band[i]);
    }

    for (std::int64_t n : sizes) {
        KernelWeights weights = make_kernel_weights(x, k, a.format(), n);
        std::vector<double> pk_err(trials, 0.0), curve_err(trials, 0.0);
        auto run_range = [&](int lo, int hi) {
            for (int t = lo; t < hi; ++t) {
                BidSampleSet s =
                    sample_bids(bf, n, trial_seed(seed, static_cast<std::uint64_t>(t)));
                double est = estimate_multiunit_revenue(s.bids, weights);
                pk_err[t] = est - truth;
                EmpiricalBidFunction fn(std::move(s));
                double h = default_bandwidth(fn.samples());
                RevenueCurveEstimate rc = estimate_revenue_curve(fn, a, h, band);
                double sup = 0.0;
                for (int i = 0; i < band_points; ++i)
                    sup = std::max(sup, std::abs(rc.r_hat[i] - r_true[i]));
                curve_err[t] = sup;
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
        double sp = 0.0, sc = 0.0;
        for (int t = 0; t < trials; ++t) {
            sp += pk_err[t] * pk_err[t];
            sc += curve_err[t] * curve_err[t];
        }
        out.pk_rms.push_back(std::sqrt(sp / trials));
        out.curve_rms.push_back(std::sqrt(sc / trials));
    }

    std::vector<std::pair<std::int64_t, double>> pk_pts, curve_pts;
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        pk_pts.emplace_back(sizes[i], out.pk_rms[i]);
        curve_pts.emplace_back(sizes[i], out.curve_rms[i]);
    }
    out.pk_exponent = fit_rate(pk_pts);
    out.curve_exponent = fit_rate(curve_pts);
    return out;
}

}  // namespace rba
