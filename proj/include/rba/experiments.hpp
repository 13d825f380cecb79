#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rba/config.hpp"
#include "rba/equilibrium.hpp"
#include "rba/ironing.hpp"
#include "rba/rng.hpp"

namespace rba {

struct Assertion {
    std::string name;
    double value = 0.0;
    double threshold = 0.0;
    std::string relation;  // "<=", ">=", "in" (value must lie in [lo,hi] packed elsewhere)
    bool pass = false;
};

struct RunOptions {
    std::optional<std::uint64_t> seed_override;
    std::optional<std::string> out_dir_override;
    int threads = 1;
    bool strict = false;  // stop at the first failed assertion
};

struct RunResult {
    std::string out_dir;
    bool assertions_ok = true;
    std::vector<Assertion> assertions;
    std::vector<std::string> artifacts;
};

// Executes one experiment config: writes manifest.json, per-kind CSV
// artifacts, and summary.json under the output directory.
RunResult run_experiment(const ExperimentConfig& cfg, const RunOptions& opts = {});

// Bundled reproduction configs, name -> config text.
const std::vector<std::pair<std::string, std::string>>& builtin_configs();
std::optional<std::string> builtin_config_text(const std::string& name);

std::uint64_t fnv1a(const std::string& bytes);

// Deterministic generators for randomized test cases and experiment sweeps.
namespace cases {

ValueDistribution random_distribution(Rng& rng, bool allow_irregular = false);
// Nonincreasing weights in [0,1], w_1 = 1.
std::vector<double> random_monotone_weights(Rng& rng, int n);
// Strictly monotone mixture with every marginal >= min_mass.
RankBasedAuction random_mixture_auction(Rng& rng, int n, PaymentFormat f, double min_mass = 0.0);
// Random multi-unit revenue vector, P_0 = P_n = 0, entries in [0,1].
MultiUnitRevenues random_multiunit_vector(Rng& rng, int n);
// Rejection-free sample of weights feasible for env (cumulative dominance).
std::vector<double> random_feasible_weights(Rng& rng, const PositionEnvironment& env);
// Weights with all consecutive gaps >= min_gap and w_1 = 1.
std::vector<double> random_gapped_weights(Rng& rng, int n, double min_gap);

}  // namespace cases

}  // namespace rba
