#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "rba/distribution.hpp"
#include "rba/rng.hpp"

using namespace rba;

TEST_CASE("uniform quantile function") {
    ValueDistribution d = ValueDistribution::uniform01();
    CHECK(d.value(0.5) == 0.5);
    CHECK(d.value(0.0) == 0.0);
    CHECK_THROWS_AS(d.value(1.5), std::domain_error);
    CHECK_THROWS_AS(d.value(-0.1), std::domain_error);
}

TEST_CASE("piecewise-linear interpolation") {
    ValueDistribution d =
        ValueDistribution::piecewise_linear({{0.0, 0.0}, {0.5, 0.2}, {1.0, 1.0}});
    CHECK(d.value(0.25) == doctest::Approx(0.1));
    CHECK(d.value(0.5) == doctest::Approx(0.2));
    CHECK(d.value(0.75) == doctest::Approx(0.6));
    CHECK(d.slope(0.25) == doctest::Approx(0.4));
    CHECK(d.slope(0.75) == doctest::Approx(1.6));
}

TEST_CASE("construction validation") {
    CHECK_THROWS_AS(ValueDistribution::truncated_exponential(-1.0), std::invalid_argument);
    CHECK_THROWS_AS(ValueDistribution::piecewise_linear({{0.0, 0.5}, {1.0, 0.2}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(ValueDistribution::piecewise_linear({{0.1, 0.0}, {1.0, 1.0}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(ValueDistribution::piecewise_linear({{0.0, 0.0}, {1.0, 1.5}}),
                    std::invalid_argument);
}

TEST_CASE("monotone and bounded on a fine grid") {
    std::vector<ValueDistribution> ds{
        ValueDistribution::uniform01(), ValueDistribution::truncated_exponential(1.0),
        ValueDistribution::truncated_exponential(3.0), ValueDistribution::bimodal_irregular()};
    for (const auto& d : ds) {
        double prev = -1.0;
        for (int i = 0; i <= 1000; ++i) {
            double v = d.value(i / 1000.0);
            CHECK(v >= prev - 1e-12);
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
            prev = v;
        }
        CHECK(d.value(1.0) <= 1.0);
    }
}

TEST_CASE("revenue curve values and boundary") {
    RevenueCurve rc(ValueDistribution::uniform01());
    CHECK(rc.revenue(0.5) == doctest::Approx(0.25));
    CHECK(rc.revenue(1.0) == 0.0);
    CHECK(rc.revenue(0.0) == 0.0);
    CHECK(rc.revenue(0.25) == doctest::Approx(0.1875));
    CHECK_THROWS_AS(rc.revenue(1.2), std::domain_error);
}

TEST_CASE("virtual values for uniform are 2q-1") {
    RevenueCurve rc(ValueDistribution::uniform01());
    CHECK(rc.virtual_value(0.5) == doctest::Approx(0.0));
    CHECK(rc.virtual_value(0.75) == doctest::Approx(0.5));
    CHECK(rc.virtual_value(0.25) == doctest::Approx(-0.5));
}

TEST_CASE("analytic virtual value agrees with central differences") {
    const double h = 1e-5;
    std::vector<ValueDistribution> ds{ValueDistribution::uniform01(),
                                      ValueDistribution::truncated_exponential(1.7)};
    for (const auto& d : ds) {
        RevenueCurve rc(d);
        for (int i = 1; i < 50; ++i) {
            double q = i / 50.0;
            double fd = -(rc.revenue(q + h) - rc.revenue(q - h)) / (2.0 * h);
            CHECK(rc.virtual_value(q) == doctest::Approx(fd).epsilon(1e-6));
        }
    }
}

TEST_CASE("regularity classification") {
    CHECK(is_regular(RevenueCurve(ValueDistribution::uniform01())));
    CHECK(is_regular(RevenueCurve(ValueDistribution::truncated_exponential(1.0))));
    CHECK_FALSE(is_regular(RevenueCurve(ValueDistribution::bimodal_irregular())));
}

TEST_CASE("ironed curve: concave input unchanged") {
    RevenueCurve rc(ValueDistribution::uniform01());
    IronedRevenueCurve bar = iron_revenue_curve(rc, 256);
    for (std::size_t i = 0; i < bar.grid().size(); ++i)
        CHECK(bar.values()[i] == doctest::Approx(rc.revenue(bar.grid()[i])).epsilon(1e-12));
}

TEST_CASE("ironed curve bridges the bimodal dip") {
    RevenueCurve rc(ValueDistribution::bimodal_irregular());
    IronedRevenueCurve bar = iron_revenue_curve(rc, 512);
    bool strictly_above = false;
    double prev_slope = 1e300;
    const auto& g = bar.grid();
    const auto& vals = bar.values();
    for (std::size_t i = 0; i < g.size(); ++i) {
        CHECK(vals[i] >= rc.revenue(g[i]) - 1e-12);
        if (vals[i] > rc.revenue(g[i]) + 1e-6) strictly_above = true;
        if (i > 0) {
            double s = (vals[i] - vals[i - 1]) / (g[i] - g[i - 1]);
            CHECK(s <= prev_slope + 1e-7);
            prev_slope = s;
        }
    }
    CHECK(strictly_above);
}

TEST_CASE("top-interval exclusion keeps raw revenue above the cutoff") {
    RevenueCurve rc(ValueDistribution::bimodal_irregular());
    int n = 4;
    IronedRevenueCurve bar = iron_revenue_curve(rc, 4096, true, n);
    for (double q : {0.80, 0.85, 0.95, 0.99})
        CHECK(bar.value(q) == doctest::Approx(rc.revenue(q)).epsilon(1e-4));
    // ironed below the cutoff
    CHECK(bar.value(0.65) > rc.revenue(0.65) + 1e-6);
}

TEST_CASE("grid size preconditions") {
    RevenueCurve rc(ValueDistribution::uniform01());
    CHECK_THROWS_AS(iron_revenue_curve(rc, 8), std::invalid_argument);
    CHECK_THROWS_AS(is_regular(rc, 4), std::invalid_argument);
}
