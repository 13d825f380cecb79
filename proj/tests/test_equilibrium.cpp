#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "rba/equilibrium.hpp"
#include "rba/experiments.hpp"
#include "rba/quadrature.hpp"
#include "rba/rng.hpp"

using namespace rba;

namespace {
const ValueDistribution kUniform = ValueDistribution::uniform01();

AllocationRule single_unit(int n) {
    std::vector<double> alpha(n, 0.0);
    alpha[0] = 1.0;
    return AllocationRule(n, alpha);
}
}  // namespace

TEST_CASE("all-pay bids for the two-agent single-unit auction") {
    AllocationRule x = single_unit(2);
    CHECK(allpay_bid(kUniform, x, 0.5) == doctest::Approx(0.125).epsilon(1e-10));
    CHECK(allpay_bid(kUniform, x, 0.0) == 0.0);
    CHECK(allpay_bid(kUniform, x, 1.0) == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("first-price bids for the two-agent single-unit auction") {
    AllocationRule x = single_unit(2);
    CHECK(firstprice_bid(kUniform, x, 0.5) == doctest::Approx(0.25).epsilon(1e-10));
    CHECK(firstprice_bid(kUniform, x, 1.0) == doctest::Approx(0.5).epsilon(1e-10));
    // v(0) = 0 limit
    CHECK(firstprice_bid(kUniform, x, 0.0) == doctest::Approx(0.0).epsilon(1e-7));
}

TEST_CASE("bid function grids match the golden closed forms") {
    RankBasedAuction fp({1.0, 0.0}, PaymentFormat::FirstPrice);
    RankBasedAuction ap({1.0, 0.0}, PaymentFormat::AllPay);
    BidFunction bfp = compute_bid_function(kUniform, fp, 512);
    BidFunction bap = compute_bid_function(kUniform, ap, 512);
    for (int i = 0; i < 512; ++i) {
        double q = bfp.grid[i];
        CHECK(std::abs(bfp.bids[i] - q / 2.0) <= 1e-8);
        CHECK(std::abs(bap.bids[i] - q * q / 2.0) <= 1e-8);
    }
}

TEST_CASE("bids never exceed value and are monotone") {
    Rng rng(31);
    for (int rep = 0; rep < 10; ++rep) {
        ValueDistribution d = cases::random_distribution(rng);
        int n = 2 + static_cast<int>(rng.below(5));
        PaymentFormat f = rng.below(2) ? PaymentFormat::AllPay : PaymentFormat::FirstPrice;
        RankBasedAuction a = cases::random_mixture_auction(rng, n, f, 0.05);
        BidFunction bf = compute_bid_function(d, a, 256);
        for (int i = 0; i < 256; ++i) {
            CHECK(bf.bids[i] <= d.value(bf.grid[i]) + 1e-9);
            if (i > 0) CHECK(bf.bids[i] >= bf.bids[i - 1] - 1e-12);
        }
    }
}

TEST_CASE("first-price bid on a dead allocation is degenerate") {
    AllocationRule null2(2, {0.0, 0.0});
    CHECK_THROWS_AS(firstprice_bid(kUniform, null2, 0.5), DegenerateAllocationError);
}

TEST_CASE("per-agent revenue for the canonical examples") {
    CHECK(per_agent_revenue(kUniform, single_unit(2)) ==
          doctest::Approx(1.0 / 6.0).epsilon(1e-9));
    AllocationRule null2(2, {0.0, 0.0});
    CHECK(per_agent_revenue(kUniform, null2) == doctest::Approx(0.0));
    AllocationRule serve_all(2, {0.0, 1.0});
    CHECK(per_agent_revenue(kUniform, serve_all) == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("multi-unit revenues: uniform golden values") {
    MultiUnitRevenues p2 = multiunit_revenues(kUniform, 2);
    CHECK(p2.values[0] == 0.0);
    CHECK(p2.values[2] == 0.0);
    CHECK(p2.values[1] == doctest::Approx(1.0 / 6.0).epsilon(1e-9));
    MultiUnitRevenues p3 = multiunit_revenues(kUniform, 3);
    CHECK(p3.values[1] == doctest::Approx(1.0 / 6.0).epsilon(1e-9));
    CHECK(p3.values[2] == doctest::Approx(1.0 / 6.0).epsilon(1e-9));
    CHECK_THROWS_AS(multiunit_revenues(kUniform, 1), std::invalid_argument);
}

TEST_CASE("uniform closed form P_k = k(n-k)/(n(n+1))") {
    for (int n : {4, 6}) {
        MultiUnitRevenues p = multiunit_revenues(kUniform, n);
        for (int k = 0; k <= n; ++k)
            CHECK(p.values[k] ==
                  doctest::Approx(static_cast<double>(k) * (n - k) / (n * (n + 1.0)))
                      .epsilon(1e-8));
    }
}

TEST_CASE("quadrature revenues match a direct auction simulation") {
    // total revenue of the k-unit auction equals the expected virtual
    // surplus of the k highest quantiles
    ValueDistribution texp = ValueDistribution::truncated_exponential(1.0);
    for (const ValueDistribution& d : {kUniform, texp}) {
        RevenueCurve rc(d);
        int n = 4;
        MultiUnitRevenues P = multiunit_revenues(d, n);
        Rng rng(31337);
        const int trials = 300000;
        std::vector<double> sum(n + 1, 0.0), sum2(n + 1, 0.0), phi(n);
        for (int t = 0; t < trials; ++t) {
            for (int i = 0; i < n; ++i) phi[i] = rc.virtual_value(rng.uniform());
            std::sort(phi.begin(), phi.end(), std::greater<>());
            double acc = 0.0;
            for (int k = 1; k <= n; ++k) {
                acc += phi[k - 1];
                sum[k] += acc;
                sum2[k] += acc * acc;
            }
        }
        for (int k = 1; k < n; ++k) {
            double mean = sum[k] / trials;
            double se = std::sqrt((sum2[k] / trials - mean * mean) / trials);
            CHECK(std::abs(n * P.values[k] - mean) <= 4 * se + 1e-4);
        }
    }
}

TEST_CASE("revenue identity: both routes agree on random cases") {
    Rng rng(47);
    for (int rep = 0; rep < 50; ++rep) {
        ValueDistribution d = cases::random_distribution(rng);
        int n = 2 + static_cast<int>(rng.below(9));
        RankBasedAuction a = cases::random_mixture_auction(rng, n, PaymentFormat::AllPay, 0.0);
        AllocationRule x(a);
        double direct = per_agent_revenue(d, x);
        double by_parts = per_agent_revenue_by_parts(d, x);
        CHECK(std::abs(direct - by_parts) <= 2e-8);
        // position-auction decomposition
        MultiUnitRevenues P = multiunit_revenues(d, n);
        double mix = 0.0;
        std::vector<double> alpha = a.marginals();
        for (int k = 1; k <= n; ++k) mix += alpha[k - 1] * P.values[k];
        CHECK(std::abs(direct - mix) <= 2e-8);
    }
}

TEST_CASE("revenue equivalence: expected equilibrium payments equal revenue") {
    Rng rng(53);
    for (int rep = 0; rep < 8; ++rep) {
        ValueDistribution d = cases::random_distribution(rng);
        int n = 2 + static_cast<int>(rng.below(4));
        RankBasedAuction ap = cases::random_mixture_auction(rng, n, PaymentFormat::AllPay, 0.05);
        RankBasedAuction fp(ap.weights(), PaymentFormat::FirstPrice);
        AllocationRule x(ap);
        double rev = per_agent_revenue(d, x);

        BidFunction bap = compute_bid_function(d, ap, 2048);
        BidFunction bfp = compute_bid_function(d, fp, 2048);
        // E[b_AP(q)] and E[x(q) b_FP(q)] by quadrature over the grids
        double pay_ap = integrate([&](double q) { return bap(q); }, 0.0, 1.0);
        double pay_fp = integrate([&](double q) { return x.win_prob(q) * bfp(q); }, 0.0, 1.0);
        CHECK(pay_ap == doctest::Approx(rev).epsilon(5e-5));
        CHECK(pay_fp == doctest::Approx(rev).epsilon(5e-5));
    }
}

TEST_CASE("equilibrium verification: regret is tiny for exact bids") {
    for (PaymentFormat f : {PaymentFormat::AllPay, PaymentFormat::FirstPrice}) {
        RankBasedAuction a({1.0, 0.0}, f);
        BidFunction bf = compute_bid_function(kUniform, a, 512);
        CHECK(verify_bne(kUniform, a, bf, 512) <= 1e-4);
    }
}

TEST_CASE("equilibrium verification flags a perturbed bid function") {
    RankBasedAuction a({1.0, 0.0}, PaymentFormat::FirstPrice);
    BidFunction bf = compute_bid_function(kUniform, a, 512);
    for (double& b : bf.bids) b += 0.05;
    CHECK(verify_bne(kUniform, a, bf, 512) > 1e-3);

    // all-pay: a multiplicative distortion shifts best responses
    RankBasedAuction ap({1.0, 0.0}, PaymentFormat::AllPay);
    BidFunction bap = compute_bid_function(kUniform, ap, 512);
    for (double& b : bap.bids) b *= 1.25;
    CHECK(verify_bne(kUniform, ap, bap, 512) > 1e-3);
}

TEST_CASE("single-point deviation grid has no regret") {
    RankBasedAuction a({1.0, 0.0}, PaymentFormat::AllPay);
    BidFunction bf = compute_bid_function(kUniform, a, 64);
    CHECK(verify_bne(kUniform, a, bf, 1) == 0.0);
}

TEST_CASE("bid csv export") {
    RankBasedAuction a({1.0, 0.0}, PaymentFormat::AllPay);
    BidFunction bf = compute_bid_function(kUniform, a, 16);
    std::string csv = bid_function_csv(bf);
    CHECK(csv.rfind("q,b\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 17);
}
