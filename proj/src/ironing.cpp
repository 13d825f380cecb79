#include "rba/ironing.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rba/envelope.hpp"
#include "rba/rng.hpp"

namespace rba {

namespace {

// marginals this far below zero count as genuinely negative; anything closer
// is quadrature noise around a flat stretch
constexpr double kDiscardTol = 1e-10;

std::vector<double> marginal_diffs(const std::vector<double>& vals) {
    std::vector<double> out(vals.size() - 1);
    for (std::size_t k = 1; k < vals.size(); ++k) out[k - 1] = vals[k] - vals[k - 1];
    return out;
}

double min_gap(const std::vector<double>& w) {
    double g = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k + 1 < w.size(); ++k) g = std::min(g, w[k] - w[k + 1]);
    return w.size() > 1 ? g : std::numeric_limits<double>::infinity();
}

std::vector<double> average_over_bridges(
    std::vector<double> w, const std::vector<std::pair<std::size_t, std::size_t>>& bridges) {
    for (const auto& [a, b] : bridges) {
        // vertex pair (a,b) on the revenue curve irons positions a+1..b
        double sum = 0.0;
        for (std::size_t k = a + 1; k <= b; ++k) sum += w[k - 1];
        double avg = sum / static_cast<double>(b - a);
        for (std::size_t k = a + 1; k <= b; ++k) w[k - 1] = avg;
    }
    return w;
}

}  // namespace

IronedMultiUnitRevenues iron_multiunit(const MultiUnitRevenues& P) {
    const int n = P.agents;
    if (std::abs(P.values.front()) > 1e-12 || std::abs(P.values.back()) > 1e-12)
        throw std::invalid_argument("multi-unit revenues must vanish at 0 and n units");
    std::vector<double> ks(n + 1);
    std::iota(ks.begin(), ks.end(), 0.0);
    ConcaveMajorant hull = upper_concave_majorant(ks, P.values);
    IronedMultiUnitRevenues out;
    out.bar = hull.values;
    out.marginals = marginal_diffs(P.values);
    out.ironed_marginals = marginal_diffs(hull.values);
    out.bridges = bridge_intervals(hull);
    return out;
}

double rank_based_revenue(const std::vector<double>& weights, const MultiUnitRevenues& P) {
    if (static_cast<int>(weights.size()) != P.agents)
        throw std::invalid_argument("weights/revenue dimension mismatch");
    double rev = 0.0;
    for (int k = 1; k <= P.agents; ++k) {
        double next = k < P.agents ? weights[k] : 0.0;
        rev += (weights[k - 1] - next) * P.values[k];
    }
    return rev;
}

DesignResult optimal_iron_by_rank(const PositionEnvironment& env, const MultiUnitRevenues& P) {
    if (env.agents() != P.agents)
        throw std::invalid_argument("environment/revenue dimension mismatch");
    IronedMultiUnitRevenues im = iron_multiunit(P);

    DesignResult out;
    out.weights = average_over_bridges(env.weights(), im.bridges);
    for (int k = 1; k <= env.agents(); ++k) {
        if (im.ironed_marginals[k - 1] < -kDiscardTol) {
            out.weights[k - 1] = 0.0;
            out.discarded_positions.push_back(k);
        }
    }
    for (const auto& [a, b] : im.bridges) out.ironed_intervals.emplace_back(a + 1, b);
    out.revenue = rank_based_revenue(out.weights, P);
    out.min_gap = min_gap(out.weights);
    return out;
}

namespace {

struct StrictCandidate {
    std::vector<double> weights;
    bool valid = false;
};

// Decomposition construction: subtract the strictly decreasing base
// ((n-1)eps, ..., eps, 0), iron the remainder monotone, average it over the
// revenue curve's ironed intervals, discard the negative-marginal suffix,
// then add the base back.  A final scaling keeps the cumulative weights
// inside the environment when the remainder had to be ironed.
StrictCandidate strict_by_construction(const PositionEnvironment& env,
                                       const IronedMultiUnitRevenues& im, double eps,
                                       bool* clipped) {
    const int n = env.agents();
    std::vector<double> y(n);
    for (int k = 1; k <= n; ++k) {
        y[k - 1] = env.weights()[k - 1] - (n - k) * eps;
        if (y[k - 1] < 0.0) {
            y[k - 1] = 0.0;
            *clipped = true;
        }
    }
    std::vector<double> yhat = pav_nonincreasing(y);
    yhat = average_over_bridges(std::move(yhat), im.bridges);
    for (int k = 1; k <= n; ++k)
        if (im.ironed_marginals[k - 1] < -kDiscardTol) yhat[k - 1] = 0.0;

    // lambda-scale the remainder so cumulative feasibility holds
    double lambda = 1.0;
    double cw = 0.0, ce = 0.0, cy = 0.0;
    for (int k = 1; k <= n; ++k) {
        cw += env.weights()[k - 1];
        ce += (n - k) * eps;
        cy += yhat[k - 1];
        if (cy > 1e-15) lambda = std::min(lambda, (cw - ce) / cy);
    }
    lambda = std::max(lambda, 0.0);

    StrictCandidate cand;
    cand.weights.resize(n);
    for (int k = 1; k <= n; ++k)
        cand.weights[k - 1] = lambda * yhat[k - 1] + (n - k) * eps;
    cand.valid = true;
    return cand;
}

// Keep the unconstrained optimum and lift the tail just enough to restore the
// gap constraint.
StrictCandidate strict_by_tail_repair(const PositionEnvironment& env,
                                      const std::vector<double>& opt_weights, double eps) {
    const int n = env.agents();
    StrictCandidate cand;
    cand.weights = opt_weights;
    for (int k = n - 1; k >= 1; --k)
        cand.weights[k - 1] = std::max(opt_weights[k - 1], cand.weights[k] + eps);
    if (cand.weights[0] > 1.0) return cand;
    cand.valid = is_feasible(env, cand.weights, 1e-12);
    return cand;
}

}  // namespace

DesignResult epsilon_strict_design(const PositionEnvironment& env, const MultiUnitRevenues& P,
                                   double eps) {
    if (eps < 0.0) throw std::invalid_argument("eps must be nonnegative");
    const int n = env.agents();

    // Pointwise-minimal eps-gap auction is ((n-1)eps, ..., eps, 0); if its
    // cumulative exceeds the environment anywhere, no eps-strict auction fits.
    double max_eps = std::numeric_limits<double>::infinity();
    {
        double cw = 0.0, cbase = 0.0;
        for (int k = 1; k <= n; ++k) {
            cw += env.weights()[k - 1];
            cbase += static_cast<double>(n - k);
            if (cbase > 0.0) max_eps = std::min(max_eps, cw / cbase);
        }
    }
    if (eps == 0.0) {
        DesignResult out = optimal_iron_by_rank(env, P);
        out.max_admissible_epsilon = max_eps;
        return out;
    }
    if (eps > max_eps + 1e-15)
        throw InfeasibleEpsilonError("no auction with the requested weight gap fits");

    IronedMultiUnitRevenues im = iron_multiunit(P);
    DesignResult opt = optimal_iron_by_rank(env, P);

    bool clipped = false;
    std::vector<StrictCandidate> cands;
    cands.push_back(strict_by_construction(env, im, eps, &clipped));
    cands.push_back(strict_by_tail_repair(env, opt.weights, eps));
    if (opt.min_gap >= eps) cands.push_back({opt.weights, true});

    const StrictCandidate* best = nullptr;
    double best_rev = -1.0;
    for (const StrictCandidate& c : cands) {
        if (!c.valid) continue;
        if (min_gap(c.weights) < eps - 1e-12) continue;
        double rev = rank_based_revenue(c.weights, P);
        if (rev > best_rev) {
            best_rev = rev;
            best = &c;
        }
    }
    if (!best) throw InfeasibleEpsilonError("strict design construction failed");

    DesignResult out;
    out.weights = best->weights;
    out.revenue = best_rev;
    out.ironed_intervals = opt.ironed_intervals;
    out.discarded_positions = opt.discarded_positions;
    out.min_gap = min_gap(out.weights);
    out.max_admissible_epsilon = max_eps;
    out.clipped = clipped;
    return out;
}

MonteCarloEstimate myerson_optimal_revenue(const ValueDistribution& d, int agents, int k,
                                           std::int64_t trials, std::uint64_t seed,
                                           bool exclude_top) {
    if (agents < 2) throw std::invalid_argument("need at least two agents");
    if (k < 0 || k > agents) throw std::domain_error("unit count outside [0,n]");
    if (trials < 1) throw std::invalid_argument("need at least one trial");
    MonteCarloEstimate est;
    est.trials = trials;
    if (k == 0) return est;

    RevenueCurve rc(d);
    IronedRevenueCurve bar = iron_revenue_curve(rc, 4096, exclude_top, agents);
    double sum = 0.0, sum2 = 0.0;
    std::vector<double> phi(agents);
    for (std::int64_t t = 0; t < trials; ++t) {
        Rng rng(trial_seed(seed, static_cast<std::uint64_t>(t)));
        for (int i = 0; i < agents; ++i) phi[i] = bar.ironed_virtual(rng.uniform());
        std::sort(phi.begin(), phi.end(), std::greater<>());
        double rev = 0.0;
        for (int i = 0; i < k && phi[i] > 0.0; ++i) rev += phi[i];
        sum += rev;
        sum2 += rev * rev;
    }
    est.mean = sum / trials;
    double var = std::max(0.0, sum2 / trials - est.mean * est.mean);
    est.stderr = std::sqrt(var / trials);
    return est;
}

ApproxCheck check_regular_approx(const ValueDistribution& d, int agents, int k,
                                 std::int64_t trials, std::uint64_t seed) {
    ApproxCheck out;
    out.threshold = 0.5;
    out.regular_input = is_regular(RevenueCurve(d));
    MultiUnitRevenues P = multiunit_revenues(d, agents);
    MonteCarloEstimate opt = myerson_optimal_revenue(d, agents, k, trials, seed);
    if (opt.mean <= 1e-12) {
        out.pass = true;  // both sides vanish; ratio defined as 1
        return out;
    }
    double best = 0.0;
    for (int kk = 1; kk <= k; ++kk) {
        double val = agents * P.values[kk];
        if (val > best) {
            best = val;
            out.best_k = kk;
        }
    }
    out.ratio = best / opt.mean;
    out.stderr = out.ratio * opt.stderr / opt.mean;
    out.pass = out.ratio >= out.threshold - 3.0 * out.stderr;
    return out;
}

ApproxCheck check_irregular_approx(const ValueDistribution& d, int agents, double q,
                                   std::int64_t trials, std::uint64_t seed) {
    if (agents < 2) throw std::invalid_argument("need at least two agents");
    if (!(q >= 0.0) || q > 1.0 - 1.0 / agents + 1e-12)
        throw std::domain_error("quantile must satisfy q <= 1 - 1/n");
    if (trials < 1) throw std::invalid_argument("need at least one trial");

    ApproxCheck out;
    out.threshold = 0.25;
    out.regular_input = is_regular(RevenueCurve(d));
    RevenueCurve rc(d);
    double target = agents * rc.revenue(q);
    if (target <= 1e-12) return out;  // ratio defined as 1

    int kmax = std::max(1, static_cast<int>(std::floor((1.0 - q) * agents + 1e-9)));
    kmax = std::min(kmax, agents);

    // One pass estimates n P_k for every k <= kmax: expected top-k virtual
    // surplus with raw (unironed) virtual values.
    std::vector<double> sum(kmax + 1, 0.0), sum2(kmax + 1, 0.0);
    std::vector<double> phi(agents);
    for (std::int64_t t = 0; t < trials; ++t) {
        Rng rng(trial_seed(seed, static_cast<std::uint64_t>(t)));
        for (int i = 0; i < agents; ++i) phi[i] = rc.virtual_value(rng.uniform());
        std::sort(phi.begin(), phi.end(), std::greater<>());
        double acc = 0.0;
        for (int kk = 1; kk <= kmax; ++kk) {
            acc += phi[kk - 1];
            sum[kk] += acc;
            sum2[kk] += acc * acc;
        }
    }
    double best = -1e300, best_err = 0.0;
    for (int kk = 1; kk <= kmax; ++kk) {
        double mean = sum[kk] / trials;
        double var = std::max(0.0, sum2[kk] / trials - mean * mean);
        if (mean > best) {
            best = mean;
            best_err = std::sqrt(var / trials);
            out.best_k = kk;
        }
    }
    out.ratio = best / target;
    out.stderr = best_err / target;
    out.pass = out.ratio >= out.threshold - 3.0 * out.stderr;
    return out;
}

ApproxCheck check_position_approx(const ValueDistribution& d, const PositionEnvironment& env,
                                  std::int64_t trials, std::uint64_t seed) {
    if (trials < 1) throw std::invalid_argument("need at least one trial");
    const int n = env.agents();
    ApproxCheck out;
    out.regular_input = is_regular(RevenueCurve(d));
    out.threshold = out.regular_input ? 0.5 : 0.25;

    MultiUnitRevenues P = multiunit_revenues(d, n);
    DesignResult design = optimal_iron_by_rank(env, P);
    double numer = n * design.revenue;

    std::vector<double> margw(n);
    for (int k = 1; k <= n; ++k) {
        double next = k < n ? env.weights()[k] : 0.0;
        margw[k - 1] = env.weights()[k - 1] - next;
    }

    RevenueCurve rc(d);
    IronedRevenueCurve bar = iron_revenue_curve(rc, 4096, !out.regular_input, n);
    double dsum = 0.0, dsum2 = 0.0;
    std::vector<double> phi(n);
    for (std::int64_t t = 0; t < trials; ++t) {
        Rng rng(trial_seed(seed, static_cast<std::uint64_t>(t)));
        for (int i = 0; i < n; ++i) phi[i] = bar.ironed_virtual(rng.uniform());
        std::sort(phi.begin(), phi.end(), std::greater<>());
        double acc = 0.0, mix = 0.0;
        for (int k = 1; k <= n; ++k) {
            if (phi[k - 1] > 0.0) acc += phi[k - 1];
            mix += margw[k - 1] * acc;  // opt auction serving at most k units
        }
        dsum += mix;
        dsum2 += mix * mix;
    }
    double denom = dsum / trials;
    if (denom <= 1e-12) return out;  // ratio defined as 1
    double var = std::max(0.0, dsum2 / trials - denom * denom);
    double denom_err = std::sqrt(var / trials);
    out.ratio = numer / denom;
    out.stderr = out.ratio * denom_err / denom;
    out.pass = out.ratio >= out.threshold - 3.0 * out.stderr;
    return out;
}

}  // namespace rba
