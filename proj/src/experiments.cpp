#include "rba/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "rba/density.hpp"
#include "rba/inference.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace rba {

namespace cases {

ValueDistribution random_distribution(Rng& rng, bool allow_irregular) {
    int pick = static_cast<int>(rng.below(allow_irregular ? 4 : 3));
    switch (pick) {
        case 0: return ValueDistribution::uniform01();
        case 1: return ValueDistribution::truncated_exponential(rng.uniform(0.5, 3.0));
        case 2: {
            int m = 2 + static_cast<int>(rng.below(4));  // interior knots
            std::vector<double> qs{0.0, 1.0}, vs{0.0, rng.uniform(0.6, 1.0)};
            for (int i = 0; i < m; ++i) qs.push_back(rng.uniform(0.05, 0.95));
            std::sort(qs.begin(), qs.end());
            for (int i = 0; i < m; ++i) vs.push_back(rng.uniform(0.0, vs[1]));
            std::sort(vs.begin(), vs.end());
            std::vector<ValueDistribution::Knot> knots;
            for (std::size_t i = 0; i < qs.size(); ++i) {
                if (i > 0 && qs[i] - qs[i - 1] < 1e-3) qs[i] = qs[i - 1] + 1e-3;
                knots.push_back({std::min(qs[i], 1.0), vs[i]});
            }
            knots.back().q = 1.0;
            return ValueDistribution::piecewise_linear(std::move(knots));
        }
        default: return ValueDistribution::bimodal_irregular();
    }
}

std::vector<double> random_monotone_weights(Rng& rng, int n) {
    std::vector<double> w(n);
    for (int i = 0; i < n; ++i) w[i] = rng.uniform();
    std::sort(w.begin(), w.end(), std::greater<>());
    if (w[0] > 0.0)
        for (double& v : w) v /= w[0];
    w[0] = 1.0;
    return w;
}

RankBasedAuction random_mixture_auction(Rng& rng, int n, PaymentFormat f, double min_mass) {
    std::vector<double> alpha(n);
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        alpha[i] = min_mass + rng.uniform();
        total += alpha[i];
    }
    for (double& a : alpha) a /= total;  // weights sum (w_1) becomes 1
    std::vector<double> w(n);
    double acc = 0.0;
    for (int i = n - 1; i >= 0; --i) {
        acc += alpha[i];
        w[i] = acc;
    }
    return RankBasedAuction(std::move(w), f);
}

MultiUnitRevenues random_multiunit_vector(Rng& rng, int n) {
    MultiUnitRevenues P;
    P.agents = n;
    P.values.assign(n + 1, 0.0);
    for (int k = 1; k < n; ++k) P.values[k] = rng.uniform();
    return P;
}

std::vector<double> random_feasible_weights(Rng& rng, const PositionEnvironment& env) {
    int n = env.agents();
    std::vector<double> u(n);
    for (int i = 0; i < n; ++i) u[i] = rng.uniform();
    std::sort(u.begin(), u.end(), std::greater<>());
    std::vector<double> cw = env.cumulative();
    double lambda = 1.0, cu = 0.0;
    for (int i = 0; i < n; ++i) {
        cu += u[i];
        if (cu > 1e-15) lambda = std::min(lambda, cw[i + 1] / cu);
    }
    lambda *= rng.uniform();  // interior of the feasible set, boundary included
    for (double& v : u) v = std::min(1.0, v * lambda);
    return u;
}

std::vector<double> random_gapped_weights(Rng& rng, int n, double min_gap) {
    // gaps >= min_gap between consecutive positions, anchored at w_1 = 1
    if (min_gap * (n - 1) > 0.98)
        throw std::invalid_argument("gap too large for the anchored environment");
    double slack = (0.98 - min_gap * (n - 1)) / (n - 1);
    std::vector<double> gaps(n - 1);
    double total = 0.0;
    for (int i = 0; i < n - 1; ++i) {
        gaps[i] = min_gap + rng.uniform() * slack;
        total += gaps[i];
    }
    std::vector<double> w(n);
    w[n - 1] = 1.0 - total;
    for (int i = n - 2; i >= 0; --i) w[i] = w[i + 1] + gaps[i];
    w[0] = 1.0;
    return w;
}

}  // namespace cases

std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

namespace {

struct Runner {
    ExperimentConfig cfg;
    RunOptions opts;
    RunResult result;
    json summary;
    std::vector<std::pair<std::string, std::string>> files;  // name -> body
    bool stop = false;

    std::uint64_t seed() const { return opts.seed_override.value_or(cfg.seed.value()); }

    std::vector<PaymentFormat> formats() const {
        if (!cfg.formats.empty()) return cfg.formats;
        return {cfg.format};
    }

    void check(const std::string& name, double value, const std::string& rel, double threshold) {
        if (stop) return;
        Assertion a;
        a.name = name;
        a.value = value;
        a.threshold = threshold;
        a.relation = rel;
        a.pass = rel == "<=" ? value <= threshold : value >= threshold;
        result.assertions.push_back(a);
        if (!a.pass) {
            result.assertions_ok = false;
            if (opts.strict) stop = true;
        }
    }

    void add_file(const std::string& name, const std::string& body) {
        files.emplace_back(name, body);
        result.artifacts.push_back(name);
    }

    RankBasedAuction build_auction(PaymentFormat f) const {
        if (cfg.auction_mode == "explicit") {
            if (!cfg.auction_weights.empty()) return RankBasedAuction(cfg.auction_weights, f);
            // default: single-unit auction over n agents
            int n = cfg.agents ? cfg.agents : static_cast<int>(cfg.env_weights.size());
            if (n < 2) throw ConfigValidationError("cannot infer auction weights");
            std::vector<double> w(n, 0.0);
            w[0] = 1.0;
            return RankBasedAuction(std::move(w), f);
        }
        PositionEnvironment env(cfg.env_weights);
        int n = env.agents();
        if (cfg.auction_mode == "uniform_marginal") {
            std::vector<double> w(n);
            for (int k = 1; k <= n; ++k) w[k - 1] = static_cast<double>(n - k + 1) / n;
            return RankBasedAuction(std::move(w), f);
        }
        ValueDistribution d = cfg.build_distribution();
        MultiUnitRevenues P = multiunit_revenues(d, n);
        DesignResult opt = optimal_iron_by_rank(env, P);
        if (cfg.auction_mode == "optimal") return RankBasedAuction(opt.weights, f);
        if (cfg.auction_mode == "epsilon_strict")
            return RankBasedAuction(epsilon_strict_design(env, P, cfg.epsilon).weights, f);
        if (cfg.auction_mode == "epsilon_mixture") {
            // run the optimal design w.p. 1-eps, the uniform-marginal auction w.p. eps
            std::vector<double> w(n);
            for (int k = 1; k <= n; ++k)
                w[k - 1] = (1.0 - cfg.epsilon) * opt.weights[k - 1] +
                           cfg.epsilon * static_cast<double>(n - k + 1) / n;
            return RankBasedAuction(std::move(w), f);
        }
        throw ConfigValidationError("unknown auction mode: " + cfg.auction_mode);
    }

    void run_equilibrium();
    void run_optimize();
    void run_estimate_pk();
    void run_revenue_curve();
    void run_approx_check();
    void run_rate_sweep();
};

std::string csv_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

void Runner::run_equilibrium() {
    ValueDistribution d = cfg.build_distribution();

    if (cfg.check == "identity" || cfg.check == "bne") {
        // randomized sweep over (distribution, mixture, n <= 10) cases
        std::ostringstream csv;
        csv << "case,n,format,revenue_direct,revenue_by_parts,decomposed_revenue,regret\n";
        double max_form_gap = 0.0, max_decomp_gap = 0.0, max_regret = 0.0;
        for (int c = 0; c < std::max(1, cfg.cases) && !stop; ++c) {
            Rng rng(trial_seed(seed(), static_cast<std::uint64_t>(c)));
            ValueDistribution dc = cases::random_distribution(rng);
            int n = 2 + static_cast<int>(rng.below(9));
            PaymentFormat f = rng.below(2) ? PaymentFormat::AllPay : PaymentFormat::FirstPrice;
            RankBasedAuction a = cases::random_mixture_auction(rng, n, f, 0.05);
            AllocationRule x(a);
            double rev = per_agent_revenue(dc, x);
            double rev2 = per_agent_revenue_by_parts(dc, x);
            MultiUnitRevenues P = multiunit_revenues(dc, n);
            double decomposed = rank_based_revenue(a.weights(), P);
            double regret = 0.0;
            if (cfg.check == "bne") {
                BidFunction bf = compute_bid_function(dc, a, cfg.grid_size);
                regret = verify_bne(dc, a, bf, cfg.grid_size);
            }
            max_form_gap = std::max(max_form_gap, std::abs(rev - rev2));
            max_decomp_gap = std::max(max_decomp_gap, std::abs(rev - decomposed));
            max_regret = std::max(max_regret, regret);
            csv << c << "," << n << "," << to_string(f) << "," << csv_double(rev) << ","
                << csv_double(rev2) << "," << csv_double(decomposed) << ","
                << csv_double(regret) << "\n";
        }
        add_file("identity_cases.csv", csv.str());
        summary["max_revenue_identity_gap"] = max_form_gap;
        summary["max_decomposition_gap"] = max_decomp_gap;
        check("revenue_identity_gap", max_form_gap, "<=", 2e-8);
        check("decomposition_gap", max_decomp_gap, "<=", 2e-8);
        if (cfg.check == "bne") {
            summary["max_regret"] = max_regret;
            check("bne_regret", max_regret, "<=", 1e-4);
        }
        return;
    }

    // single configured instance
    json formats_summary = json::object();
    for (PaymentFormat f : formats()) {
        RankBasedAuction a = build_auction(f);
        AllocationRule x(a);
        BidFunction bf = compute_bid_function(d, a, cfg.grid_size);
        add_file(std::string("bid_function_") + to_string(f) + ".csv", bid_function_csv(bf));
        double rev = per_agent_revenue(d, x);
        double rev2 = per_agent_revenue_by_parts(d, x);
        MultiUnitRevenues P = multiunit_revenues(d, a.agents());
        double decomposed = rank_based_revenue(a.weights(), P);
        double regret = verify_bne(d, a, bf, cfg.grid_size);
        json fj;
        fj["per_agent_revenue"] = rev;
        fj["per_agent_revenue_by_parts"] = rev2;
        fj["decomposed_revenue"] = decomposed;
        fj["bne_regret"] = regret;
        fj["multiunit_revenues"] = P.values;
        formats_summary[to_string(f)] = fj;
        check(std::string("revenue_identity_gap_") + to_string(f), std::abs(rev - rev2), "<=",
              2e-8);
        check(std::string("decomposition_gap_") + to_string(f), std::abs(rev - decomposed),
              "<=", 2e-8);
        check(std::string("bne_regret_") + to_string(f), regret, "<=", 1e-4);
        if (cfg.check == "golden-uniform" && a.agents() == 2) {
            // closed forms for the 2-agent single-unit auction on uniform values
            double max_gap = 0.0;
            for (std::size_t i = 0; i < bf.grid.size(); ++i) {
                double q = bf.grid[i];
                double golden = f == PaymentFormat::AllPay ? q * q / 2.0 : q / 2.0;
                max_gap = std::max(max_gap, std::abs(bf.bids[i] - golden));
            }
            check(std::string("golden_bid_gap_") + to_string(f), max_gap, "<=", 1e-8);
            check("golden_p1_gap", std::abs(P.values[1] - 1.0 / 6.0), "<=", 1e-8);
        }
    }
    summary["formats"] = formats_summary;
}

void Runner::run_optimize() {
    ValueDistribution d = cfg.build_distribution();
    PositionEnvironment env = cfg.build_environment();
    MultiUnitRevenues P = multiunit_revenues(d, env.agents());
    IronedMultiUnitRevenues im = iron_multiunit(P);
    DesignResult design = optimal_iron_by_rank(env, P);

    {
        std::ostringstream csv;
        csv << "k,P_k,P_bar_k,marginal,ironed_marginal\n";
        for (int k = 0; k <= env.agents(); ++k) {
            csv << k << "," << csv_double(P.values[k]) << "," << csv_double(im.bar[k]) << ",";
            csv << (k > 0 ? csv_double(im.marginals[k - 1]) : std::string("")) << ",";
            csv << (k > 0 ? csv_double(im.ironed_marginals[k - 1]) : std::string("")) << "\n";
        }
        add_file("multiunit_revenues.csv", csv.str());
    }
    {
        json dj;
        dj["weights"] = design.weights;
        dj["revenue"] = design.revenue;
        dj["ironed_intervals"] = design.ironed_intervals;
        dj["discarded_positions"] = design.discarded_positions;
        dj["feasible"] = is_feasible(env, design.auction(cfg.format));
        dj["environment"] = env.weights();
        add_file("design.json", dj.dump(2) + "\n");
        summary["design_revenue"] = design.revenue;
    }

    check("design_feasible", is_feasible(env, design.auction(cfg.format)) ? 1.0 : 0.0, ">=",
          1.0);

    if (cfg.trials > 0) {
        // random feasible challengers never beat the designed auction
        Rng rng(trial_seed(seed(), 0xC0FFEE));
        double best_gap = -1e300;
        for (int t = 0; t < cfg.trials; ++t) {
            std::vector<double> w = cases::random_feasible_weights(rng, env);
            best_gap = std::max(best_gap, rank_based_revenue(w, P) - design.revenue);
        }
        summary["best_challenger_gap"] = best_gap;
        check("challenger_gap", best_gap, "<=", 1e-9);
    }

    if (cfg.cases > 0) {
        // random multi-unit vectors: hull vs brute-force oracle + challengers
        double worst_hull_gap = 0.0, worst_challenger_gap = -1e300;
        for (int c = 0; c < cfg.cases && !stop; ++c) {
            Rng rng(trial_seed(seed(), 0xA11CE + c));
            int n = 2 + static_cast<int>(rng.below(31));
            MultiUnitRevenues rp = cases::random_multiunit_vector(rng, n);
            IronedMultiUnitRevenues ri = iron_multiunit(rp);
            for (int i = 0; i <= n; ++i) {
                // oracle: max over chords spanning i
                double best = rp.values[i];
                for (int a = 0; a <= i; ++a)
                    for (int b = i; b <= n; ++b) {
                        if (a == b) continue;
                        double t = static_cast<double>(i - a) / (b - a);
                        best = std::max(best,
                                        rp.values[a] + t * (rp.values[b] - rp.values[a]));
                    }
                worst_hull_gap = std::max(worst_hull_gap, std::abs(ri.bar[i] - best));
            }
            std::vector<double> ew = cases::random_monotone_weights(rng, n);
            PositionEnvironment renv(ew);
            DesignResult rd = optimal_iron_by_rank(renv, rp);
            for (int t = 0; t < std::max(1, cfg.trials); ++t) {
                std::vector<double> w = cases::random_feasible_weights(rng, renv);
                worst_challenger_gap =
                    std::max(worst_challenger_gap, rank_based_revenue(w, rp) - rd.revenue);
            }
        }
        summary["worst_hull_gap"] = worst_hull_gap;
        summary["worst_challenger_gap"] = worst_challenger_gap;
        check("hull_oracle_gap", worst_hull_gap, "<=", 1e-12);
        check("random_instance_challenger_gap", worst_challenger_gap, "<=", 1e-9);
    }

    if (!cfg.epsilons.empty()) {
        json sj = json::array();
        std::ostringstream csv;
        csv << "epsilon,min_gap,revenue,optimal_revenue,ratio\n";
        for (double eps_raw : cfg.epsilons) {
            double eps = eps_raw > 0.0 ? eps_raw : 0.1 / env.agents();
            DesignResult sd = epsilon_strict_design(env, P, eps);
            double ratio = design.revenue > 0 ? sd.revenue / design.revenue : 1.0;
            csv << csv_double(eps) << "," << csv_double(sd.min_gap) << ","
                << csv_double(sd.revenue) << "," << csv_double(design.revenue) << ","
                << csv_double(ratio) << "\n";
            json e;
            e["epsilon"] = eps;
            e["weights"] = sd.weights;
            e["revenue"] = sd.revenue;
            e["min_gap"] = sd.min_gap;
            sj.push_back(e);
            check("strict_gap_eps=" + csv_double(eps), sd.min_gap, ">=", eps - 1e-12);
            check("strict_revenue_eps=" + csv_double(eps), sd.revenue, ">=",
                  (1.0 - eps) * design.revenue);
            check("strict_feasible_eps=" + csv_double(eps),
                  is_feasible(env, sd.auction(cfg.format)) ? 1.0 : 0.0, ">=", 1.0);
        }
        add_file("strict_designs.csv", csv.str());
        add_file("strict_designs.json", sj.dump(2) + "\n");

        if (cfg.cases > 0) {
            // random strict-design instances over gap-compatible environments;
            // a nonpositive epsilon entry stands for 0.1/n
            double worst_gap_margin = 1e300, worst_rev_margin = 1e300;
            for (int c = 0; c < cfg.cases && !stop; ++c) {
                Rng rng(trial_seed(seed(), 0x57AC7 + c));
                int n = 3 + static_cast<int>(rng.below(4));
                std::vector<double> es;
                for (double eps : cfg.epsilons) es.push_back(eps > 0.0 ? eps : 0.1 / n);
                double max_eps = *std::max_element(es.begin(), es.end());
                ValueDistribution dc = rng.below(2)
                                           ? ValueDistribution::uniform01()
                                           : ValueDistribution::truncated_exponential(
                                                 rng.uniform(0.5, 3.0));
                MultiUnitRevenues cp = multiunit_revenues(dc, n);
                PositionEnvironment cenv(cases::random_gapped_weights(rng, n, max_eps * 1.05));
                DesignResult copt = optimal_iron_by_rank(cenv, cp);
                for (double e : es) {
                    DesignResult sd = epsilon_strict_design(cenv, cp, e);
                    worst_gap_margin = std::min(worst_gap_margin, sd.min_gap - e);
                    if (copt.revenue > 0)
                        worst_rev_margin =
                            std::min(worst_rev_margin, sd.revenue - (1.0 - e) * copt.revenue);
                    if (!is_feasible(cenv, sd.auction(cfg.format)))
                        check("strict_case_feasible", 0.0, ">=", 1.0);
                }
            }
            summary["worst_strict_gap_margin"] = worst_gap_margin;
            summary["worst_strict_revenue_margin"] = worst_rev_margin;
            check("strict_cases_min_gap_margin", worst_gap_margin, ">=", -1e-12);
            check("strict_cases_revenue_margin", worst_rev_margin, ">=", 0.0);
        }
    }
}

void Runner::run_estimate_pk() {
    ValueDistribution d = cfg.build_distribution();
    std::ostringstream csv;
    csv << "N,k,format,seed,rms_error,bound,bound_ratio,bid_sup_rms,truth\n";
    json per_format = json::object();
    json detail = json::array();

    for (PaymentFormat f : formats()) {
        RankBasedAuction a = build_auction(f);
        std::vector<std::pair<std::int64_t, double>> pts;
        for (std::int64_t n : cfg.n_grid) {
            EstimationReport rep = mse_experiment(d, a, cfg.k, n, cfg.trials, seed(),
                                                  opts.threads);
            csv << n << "," << cfg.k << "," << to_string(f) << "," << seed() << ","
                << csv_double(rep.rms_error) << "," << csv_double(rep.bound) << ","
                << csv_double(rep.bound_ratio) << "," << csv_double(rep.bid_sup_rms) << ","
                << csv_double(rep.truth) << "\n";
            json row;
            row["N"] = n;
            row["k"] = cfg.k;
            row["format"] = to_string(f);
            row["seed"] = seed();
            row["truth"] = rep.truth;
            row["rms_error"] = rep.rms_error;
            row["bound"] = rep.bound;
            row["bid_sup_rms"] = rep.bid_sup_rms;
            row["estimates"] = rep.estimates;
            detail.push_back(row);
            pts.emplace_back(n, rep.rms_error);
            check("rms_within_2x_bound_" + to_string(f) + "_N=" + std::to_string(n),
                  rep.rms_error, "<=", 2.0 * rep.bound);
        }
        json fj;
        if (pts.size() >= 4) {
            double slope = fit_rate(pts);
            fj["rate_exponent"] = slope;
            check("rate_exponent_lo_" + to_string(f), slope, ">=", -0.6);
            check("rate_exponent_hi_" + to_string(f), slope, "<=", -0.4);
        }
        per_format[to_string(f)] = fj;

        if (cfg.auction_mode == "epsilon_mixture") {
            AllocationRule x(a);
            int n_agents = a.agents();
            double worst = 0.0;
            for (int k = 1; k <= n_agents; ++k) {
                double sup = 0.0;
                for (int i = 0; i <= 4096; ++i)
                    sup = std::max(sup, revenue_kernel(x, k, static_cast<double>(i) / 4096));
                worst = std::max(worst, sup);
            }
            summary["sup_kernel"] = worst;
            check("kernel_sup_within_n_over_eps_" + to_string(f), worst, "<=",
                  n_agents / cfg.epsilon + 1e-6);
        }

        if (cfg.design_check) {
            // end-to-end: design from estimated revenues, measure recovered revenue
            PositionEnvironment env = cfg.build_environment();
            MultiUnitRevenues P = multiunit_revenues(d, env.agents());
            DesignResult opt = optimal_iron_by_rank(env, P);
            std::int64_t n = cfg.n_grid.back();
            BidFunction bf = compute_bid_function(d, a, 1024);
            AllocationRule x(a);
            std::vector<KernelWeights> kw;
            for (int k = 1; k < env.agents(); ++k)
                kw.push_back(make_kernel_weights(x, k, f, n));
            int t_design = std::min(cfg.trials, 20);
            double frac_sum = 0.0;
            for (int t = 0; t < t_design; ++t) {
                BidSampleSet s = sample_bids(bf, n, trial_seed(seed(), 0xD0 + t));
                MultiUnitRevenues Ph;
                Ph.agents = env.agents();
                Ph.values.assign(env.agents() + 1, 0.0);
                for (int k = 1; k < env.agents(); ++k)
                    Ph.values[k] = std::max(0.0, estimate_multiunit_revenue(s.bids, kw[k - 1]));
                DesignResult dh = optimal_iron_by_rank(env, Ph);
                double recovered = rank_based_revenue(dh.weights, P);
                frac_sum += opt.revenue > 0 ? recovered / opt.revenue : 1.0;
            }
            double mean_frac = frac_sum / t_design;
            summary["design_recovery_" + to_string(f)] = mean_frac;
            check("design_recovery_" + to_string(f), mean_frac, ">=", 0.95);
        }
    }
    summary["rates"] = per_format;
    add_file("estimate_pk.csv", csv.str());
    add_file("estimate_pk.json", detail.dump(2) + "\n");
}

void Runner::run_revenue_curve() {
    ValueDistribution d = cfg.build_distribution();
    RankBasedAuction a = build_auction(formats().front());
    std::int64_t n = cfg.n_grid.empty() ? 10000 : cfg.n_grid.back();

    BidSampleSet s = sample_bids(d, a, n, seed(), cfg.noise);
    EmpiricalBidFunction fn(std::move(s));
    double h = default_bandwidth(fn.samples());

    std::vector<double> grid;
    for (int i = 0; i <= 100; ++i) grid.push_back(i / 100.0);
    RevenueCurveEstimate est = estimate_revenue_curve(fn, a, h, grid);

    RevenueCurve rc(d);
    std::ostringstream csv;
    csv << "q,v_true,v_hat,R_true,R_hat,rel_err\n";
    std::vector<double> band_rel;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double q = grid[i];
        double vt = d.value(q), rt = rc.revenue(q);
        double rel = rt > 1e-12 ? std::abs(est.r_hat[i] - rt) / rt : 0.0;
        if (q >= cfg.band_lo - 1e-12 && q <= cfg.band_hi + 1e-12 && rt > 1e-12)
            band_rel.push_back(rel);
        csv << csv_double(q) << "," << csv_double(vt) << "," << csv_double(est.v_hat[i]) << ","
            << csv_double(rt) << "," << csv_double(est.r_hat[i]) << "," << csv_double(rel)
            << "\n";
    }
    add_file("revenue_curve.csv", csv.str());

    std::sort(band_rel.begin(), band_rel.end());
    double median = band_rel.empty() ? 0.0 : band_rel[band_rel.size() / 2];
    summary["median_relative_error"] = median;
    summary["bandwidth"] = h;
    summary["clamped_points"] = est.clamped;
    summary["sentinel_points"] = est.sentinels;
    check("median_relative_error", median, "<=", 0.1);

    SlopeConditionReport rep = check_slope_conditions(
        a, d, n, std::pow(static_cast<double>(n), 1.0 / 3.0), [](double) { return 0.2; }, grid);
    std::ostringstream scsv;
    scsv << "q,lower_ok,upper_ok,samples_ok\n";
    for (const auto& pt : rep.points)
        scsv << csv_double(pt.q) << "," << pt.lower_ok << "," << pt.upper_ok << ","
             << pt.samples_ok << "\n";
    add_file("slope_conditions.csv", scsv.str());
    summary["slope_fraction_all"] = rep.frac_all;
}

void Runner::run_approx_check() {
    std::ostringstream csv;
    csv << "check,distribution,n,k_or_q,seed,ratio,stderr,threshold,pass\n";
    auto emit = [&](const std::string& kind, const std::string& dist, int n, double kq,
                    const ApproxCheck& c) {
        csv << kind << "," << dist << "," << n << "," << csv_double(kq) << ","
            << seed() << "," << csv_double(c.ratio) << "," << csv_double(c.stderr) << ","
            << csv_double(c.threshold) << "," << (c.pass ? 1 : 0) << "\n";
        check(kind + "_" + dist + "_n" + std::to_string(n) + "_" + csv_double(kq), c.ratio,
              ">=", c.threshold - 3.0 * c.stderr);
    };

    std::int64_t trials = std::max(1, cfg.trials);
    if (cfg.check == "standard") {
        std::vector<std::pair<std::string, ValueDistribution>> regular{
            {"uniform01", ValueDistribution::uniform01()},
            {"truncated_exponential", ValueDistribution::truncated_exponential(1.0)}};
        for (auto& [name, d] : regular)
            for (int n : {2, 4, 8})
                for (int k = 1; k <= n / 2; ++k)
                    emit("regular", name, n, k, check_regular_approx(d, n, k, trials, seed()));
        ValueDistribution bi = ValueDistribution::bimodal_irregular();
        for (int n : {2, 4, 8}) {
            emit("irregular", "bimodal_irregular", n, 0.5,
                 check_irregular_approx(bi, n, 0.5, trials, seed()));
            double qb = 1.0 - 1.0 / n;
            emit("irregular", "bimodal_irregular", n, qb,
                 check_irregular_approx(bi, n, qb, trials, seed()));
        }
        for (auto& [name, d] : regular)
            for (int n : {2, 4, 8}) {
                std::vector<double> single(n, 0.0);
                single[0] = 1.0;
                emit("position", name, n, 1,
                     check_position_approx(d, PositionEnvironment(single), trials, seed()));
                std::vector<double> flat(n, 1.0);
                emit("position", name, n, n,
                     check_position_approx(d, PositionEnvironment(flat), trials, seed()));
            }
    } else {
        ValueDistribution d = cfg.build_distribution();
        int n = cfg.agents ? cfg.agents : static_cast<int>(cfg.env_weights.size());
        if (cfg.check == "regular")
            emit("regular", cfg.family, n, cfg.k,
                 check_regular_approx(d, n, cfg.k, trials, seed()));
        else if (cfg.check == "irregular")
            emit("irregular", cfg.family, n, cfg.q,
                 check_irregular_approx(d, n, cfg.q, trials, seed()));
        else
            emit("position", cfg.family, n, 0,
                 check_position_approx(d, cfg.build_environment(), trials, seed()));
    }
    add_file("approx_checks.csv", csv.str());
}

void Runner::run_rate_sweep() {
    ValueDistribution d = cfg.build_distribution();
    if (cfg.target == "pk") {
        run_estimate_pk();
        return;
    }
    RankBasedAuction a = build_auction(formats().front());
    RateSeparation sep = rate_separation_experiment(d, a, cfg.k, cfg.n_grid, cfg.trials, seed(),
                                                    cfg.band_lo, cfg.band_hi, opts.threads);
    std::ostringstream csv;
    csv << "N,seed,pk_rms,curve_sup_rms\n";
    for (std::size_t i = 0; i < sep.sizes.size(); ++i) {
        csv << sep.sizes[i] << "," << seed() << "," << csv_double(sep.pk_rms[i])
            << "," << csv_double(sep.curve_rms[i]) << "\n";
        if (sep.sizes[i] >= 1000)
            check("curve_error_exceeds_pk_N=" + std::to_string(sep.sizes[i]),
                  sep.curve_rms[i] - sep.pk_rms[i], ">=", 0.0);
    }
    add_file("rate_separation.csv", csv.str());
    summary["pk_exponent"] = sep.pk_exponent;
    summary["curve_exponent"] = sep.curve_exponent;
    check("pk_exponent_lo", sep.pk_exponent, ">=", -0.6);
    check("pk_exponent_hi", sep.pk_exponent, "<=", -0.4);
    check("curve_exponent_lo", sep.curve_exponent, ">=", -0.45);
    check("curve_exponent_hi", sep.curve_exponent, "<=", -0.2);
}

void write_atomic(const fs::path& path, const std::string& body) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        out << body;
        if (!out) throw std::runtime_error("failed to write " + tmp.string());
    }
    fs::rename(tmp, path);
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& cfg_in, const RunOptions& opts) {
    ExperimentConfig cfg = cfg_in;
    if (opts.seed_override) cfg.seed = *opts.seed_override;
    if (opts.out_dir_override) cfg.out_dir = *opts.out_dir_override;
    cfg.validate();

    Runner r;
    r.cfg = cfg;
    r.opts = opts;
    r.opts.seed_override = cfg.seed;

    auto started = std::chrono::system_clock::now();
    if (cfg.kind == "equilibrium") r.run_equilibrium();
    else if (cfg.kind == "optimize") r.run_optimize();
    else if (cfg.kind == "estimate-pk") r.run_estimate_pk();
    else if (cfg.kind == "revenue-curve") r.run_revenue_curve();
    else if (cfg.kind == "approx-check") r.run_approx_check();
    else if (cfg.kind == "rate-sweep") r.run_rate_sweep();
    auto finished = std::chrono::system_clock::now();

    fs::create_directories(cfg.out_dir);
    json hashes = json::object();
    for (const auto& [name, body] : r.files) {
        write_atomic(fs::path(cfg.out_dir) / name, body);
        std::ostringstream os;
        os << std::hex << fnv1a(body);
        hashes[name] = os.str();
    }

    json summary = r.summary;
    summary["kind"] = cfg.kind;
    summary["seed"] = cfg.seed.value();
    summary["artifact_hashes"] = hashes;
    json asserts = json::array();
    for (const Assertion& a : r.result.assertions) {
        json aj;
        aj["name"] = a.name;
        aj["value"] = a.value;
        aj["threshold"] = a.threshold;
        aj["relation"] = a.relation;
        aj["pass"] = a.pass;
        asserts.push_back(aj);
    }
    summary["assertions"] = asserts;
    summary["pass"] = r.result.assertions_ok;
    write_atomic(fs::path(cfg.out_dir) / "summary.json", summary.dump(2) + "\n");

    json manifest;
    manifest["tool"] = "rba 0.1.0";
    manifest["kind"] = cfg.kind;
    manifest["seed"] = cfg.seed.value();
    manifest["threads"] = opts.threads;
    manifest["out_dir"] = cfg.out_dir;
    manifest["started_unix_ms"] =
        std::chrono::duration_cast<std::chrono::milliseconds>(started.time_since_epoch()).count();
    manifest["elapsed_ms"] =
        std::chrono::duration_cast<std::chrono::milliseconds>(finished - started).count();
    json cj;
    cj["distribution"] = {{"family", cfg.family}, {"rate", cfg.rate}};
    cj["environment"] = {{"weights", cfg.env_weights}};
    cj["auction"] = {{"mode", cfg.auction_mode},
                     {"weights", cfg.auction_weights},
                     {"epsilon", cfg.epsilon}};
    json exp;
    exp["kind"] = cfg.kind;
    exp["trials"] = cfg.trials;
    exp["cases"] = cfg.cases;
    exp["k"] = cfg.k;
    exp["q"] = cfg.q;
    exp["n_grid"] = cfg.n_grid;
    exp["check"] = cfg.check;
    exp["target"] = cfg.target;
    cj["experiment"] = exp;
    manifest["config"] = cj;
    write_atomic(fs::path(cfg.out_dir) / "manifest.json", manifest.dump(2) + "\n");

    r.result.out_dir = cfg.out_dir;
    r.result.artifacts.push_back("summary.json");
    r.result.artifacts.push_back("manifest.json");
    return r.result;
}

const std::vector<std::pair<std::string, std::string>>& builtin_configs() {
    static const std::vector<std::pair<std::string, std::string>> table = {
        {"uniform_n2",
         "# Golden two-agent single-unit auction on uniform values.\n"
         "[distribution]\nfamily = uniform01\n"
         "[auction]\nweights = 1, 0\nformat = first_price, all_pay\n"
         "[experiment]\nkind = equilibrium\ncheck = golden-uniform\nseed = 1\ngrid = 512\n"
         "[output]\ndir = out/uniform_n2\n"},
        {"revenue_identity",
         "# Both revenue identities across random distributions and mixtures.\n"
         "[distribution]\nfamily = uniform01\n"
         "[experiment]\nkind = equilibrium\ncheck = identity\ncases = 50\nseed = 2\n"
         "[output]\ndir = out/revenue_identity\n"},
        {"bne_regret",
         "# Deviation regret of computed equilibria on a 512x512 grid.\n"
         "[distribution]\nfamily = uniform01\n"
         "[experiment]\nkind = equilibrium\ncheck = bne\ncases = 20\ngrid = 512\nseed = 3\n"
         "[output]\ndir = out/bne_regret\n"},
        {"ironing_oracle",
         "# Concave-majorant oracle sweep and random-challenger optimality.\n"
         "[distribution]\nfamily = uniform01\n"
         "[environment]\nn = 4\nweights = 1, 0.8, 0.5, 0.2\n"
         "[experiment]\nkind = optimize\ncases = 1000\ntrials = 1000\nseed = 4\n"
         "[output]\ndir = out/ironing_oracle\n"},
        {"strict_monotone",
         "# Gapped designs: min-gap and (1-eps) revenue on random instances.\n"
         "# epsilon entry 0 stands for 0.1/n.\n"
         "[distribution]\nfamily = uniform01\n"
         "[environment]\nn = 4\nweights = 1, 0.8, 0.5, 0.2\n"
         "[experiment]\nkind = optimize\nepsilons = 0.01, 0.05, 0\ncases = 100\ntrials = 0\n"
         "seed = 5\n"
         "[output]\ndir = out/strict_monotone\n"},
        {"approx_ratios",
         "# Desk-scale approximation battery: regular, irregular, position.\n"
         "[distribution]\nfamily = uniform01\n"
         "[experiment]\nkind = approx-check\ncheck = standard\ntrials = 100000\nseed = 6\n"
         "[output]\ndir = out/approx_ratios\n"},
        {"thm35_regular",
         "# Optimal rank-based design vs optimal-auction mix, regular input.\n"
         "[distribution]\nfamily = uniform01\n"
         "[environment]\nn = 4\nweights = 1, 1, 1, 1\n"
         "[experiment]\nkind = approx-check\ncheck = position\ntrials = 100000\nseed = 7\n"
         "[output]\ndir = out/thm35_regular\n"},
        {"parametric_rate",
         "# sqrt(N) convergence of the linear revenue estimators, both formats.\n"
         "[distribution]\nfamily = uniform01\n"
         "[environment]\nn = 4\nweights = 1, 1, 1, 1\n"
         "[auction]\nweights = uniform_marginal\nformat = all_pay, first_price\n"
         "[experiment]\nkind = rate-sweep\ntarget = pk\nk = 1\n"
         "n_grid = 100, 316, 1000, 3162, 10000, 31623, 100000\ntrials = 200\nseed = 8\n"
         "[output]\ndir = out/parametric_rate\n"},
        {"rate_sweep_allpay",
         "# All-pay estimator rate sweep.\n"
         "[distribution]\nfamily = uniform01\n"
         "[environment]\nn = 4\nweights = 1, 1, 1, 1\n"
         "[auction]\nweights = uniform_marginal\nformat = all_pay\n"
         "[experiment]\nkind = rate-sweep\ntarget = pk\nk = 1\n"
         "n_grid = 100, 316, 1000, 3162, 10000, 31623, 100000\ntrials = 200\nseed = 9\n"
         "[output]\ndir = out/rate_sweep_allpay\n"},
        {"rate_sweep_firstprice",
         "# First-price estimator rate sweep.\n"
         "[distribution]\nfamily = uniform01\n"
         "[environment]\nn = 4\nweights = 1, 1, 1, 1\n"
         "[auction]\nweights = uniform_marginal\nformat = first_price\n"
         "[experiment]\nkind = rate-sweep\ntarget = pk\nk = 1\n"
         "n_grid = 100, 316, 1000, 3162, 10000, 31623, 100000\ntrials = 200\nseed = 10\n"
         "[output]\ndir = out/rate_sweep_firstprice\n"},
        {"rate_separation",
         "# Parametric vs nonparametric rates on identical seeds.\n"
         "[distribution]\nfamily = uniform01\n"
         "[auction]\nweights = 1, 0\nformat = all_pay\n"
         "[experiment]\nkind = rate-sweep\ntarget = separation\nk = 1\n"
         "n_grid = 1000, 3162, 10000, 31623, 100000\ntrials = 50\nseed = 11\n"
         "[output]\ndir = out/rate_separation\n"},
        {"design_from_samples",
         "# Inference-design tradeoff: kernel sup bound and design recovery.\n"
         "[distribution]\nfamily = uniform01\n"
         "[environment]\nn = 8\nweights = 1, 1, 1, 1, 1, 1, 1, 1\n"
         "[auction]\nweights = epsilon_mixture\nepsilon = 0.1\nformat = all_pay\n"
         "[experiment]\nkind = estimate-pk\nk = 1\nn_grid = 10000\ntrials = 20\n"
         "design_check = true\nseed = 12\n"
         "[output]\ndir = out/design_from_samples\n"},
        {"revenue_curve_uniform",
         "# Nonparametric revenue-curve estimate, central-band relative error.\n"
         "[distribution]\nfamily = uniform01\n"
         "[auction]\nweights = 1, 0\nformat = all_pay\n"
         "[experiment]\nkind = revenue-curve\nn_grid = 10000\nseed = 13\n"
         "[output]\ndir = out/revenue_curve_uniform\n"},
        {"determinism_check",
         "# Small estimator run; re-run and compare CSV bodies byte for byte.\n"
         "[distribution]\nfamily = uniform01\n"
         "[auction]\nweights = 1, 0\nformat = all_pay\n"
         "[experiment]\nkind = estimate-pk\nk = 1\nn_grid = 1000\ntrials = 20\nseed = 14\n"
         "[output]\ndir = out/determinism_check\n"},
    };
    return table;
}

std::optional<std::string> builtin_config_text(const std::string& name) {
    for (const auto& [n, text] : builtin_configs())
        if (n == name) return text;
    return std::nullopt;
}

}  // namespace rba
