#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "rba/distribution.hpp"
#include "rba/equilibrium.hpp"
#include "rba/position.hpp"

namespace rba {

struct InfeasibleEpsilonError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Discrete concave majorant of the multi-unit revenue curve (k, P_k).
struct IronedMultiUnitRevenues {
    std::vector<double> bar;                                  // P_bar_0..P_bar_n
    std::vector<double> marginals;                            // p_k = P_k - P_{k-1}
    std::vector<double> ironed_marginals;                     // p_bar_k
    std::vector<std::pair<std::size_t, std::size_t>> bridges; // vertex index pairs
};

IronedMultiUnitRevenues iron_multiunit(const MultiUnitRevenues& P);

// Output of a revenue-optimal design step.
struct DesignResult {
    std::vector<double> weights;
    double revenue = 0.0;  // per-agent, sum_k alpha_k P_k
    std::vector<std::pair<std::size_t, std::size_t>> ironed_intervals;  // position ranges
    std::vector<int> discarded_positions;
    double min_gap = 0.0;                 // min over k<n of w_k - w_{k+1}
    double max_admissible_epsilon = 0.0;  // strict designs only
    bool clipped = false;                 // strict designs: w_k - (n-k)eps < 0 occurred

    RankBasedAuction auction(PaymentFormat f) const { return RankBasedAuction(weights, f); }
};

// Revenue of position weights under multi-unit revenues P (per agent).
double rank_based_revenue(const std::vector<double>& weights, const MultiUnitRevenues& P);

// Revenue-optimal iron-by-rank auction: environment weights averaged over the
// ironed intervals of P, positions with negative ironed marginal discarded.
DesignResult optimal_iron_by_rank(const PositionEnvironment& env, const MultiUnitRevenues& P);

// Best design with all consecutive weight gaps >= eps (positions 1..n-1), so
// every mixture coefficient used for inference stays bounded away from zero.
// Throws InfeasibleEpsilonError when no such auction fits the environment.
DesignResult epsilon_strict_design(const PositionEnvironment& env, const MultiUnitRevenues& P,
                                   double eps);

struct MonteCarloEstimate {
    double mean = 0.0;
    double stderr = 0.0;
    std::int64_t trials = 0;
};

// Monte-Carlo estimate of the optimal k-unit n-agent revenue: serve up to k
// agents with the highest positive ironed virtual values.
MonteCarloEstimate myerson_optimal_revenue(const ValueDistribution& d, int agents, int k,
                                           std::int64_t trials, std::uint64_t seed,
                                           bool exclude_top = false);

struct ApproxCheck {
    double ratio = 1.0;
    double stderr = 0.0;
    double threshold = 0.0;
    bool pass = true;
    bool regular_input = true;
    int best_k = 0;  // maximizing unit count
};

// Highest-bids-win vs optimal k-unit revenue (factor 1/2 for regular inputs).
ApproxCheck check_regular_approx(const ValueDistribution& d, int agents, int k,
                                 std::int64_t trials, std::uint64_t seed);

// Some k <= (1-q)n captures a quarter of the posted-price revenue n R(q).
ApproxCheck check_irregular_approx(const ValueDistribution& d, int agents, double q,
                                   std::int64_t trials, std::uint64_t seed);

// Optimal rank-based design vs the position-weighted optimal-auction mix
// (1/2 regular, 1/4 irregular with the top 1/n quantiles left unironed).
ApproxCheck check_position_approx(const ValueDistribution& d, const PositionEnvironment& env,
                                  std::int64_t trials, std::uint64_t seed);

}  // namespace rba
