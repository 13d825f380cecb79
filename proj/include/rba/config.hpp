#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rba/distribution.hpp"
#include "rba/position.hpp"

namespace rba {

struct ConfigParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Line-oriented `[section]` + `key = value` config, with JSON accepted as an
// alternative input (detected by a leading '{').
struct ExperimentConfig {
    // [distribution]
    std::string family = "uniform01";
    double rate = 1.0;
    std::vector<ValueDistribution::Knot> knots;
    double v_lo = 0.3, v_hi = 0.9, atom_mass = 0.1, atom_width = 0.02;

    // [environment]
    int agents = 0;
    std::vector<double> env_weights;

    // [auction]
    std::string auction_mode = "explicit";  // explicit|optimal|uniform_marginal|epsilon_mixture|epsilon_strict
    std::vector<double> auction_weights;
    PaymentFormat format = PaymentFormat::AllPay;
    std::vector<PaymentFormat> formats;  // optional multi-format sweep
    double epsilon = 0.0;

    // [experiment]
    std::string kind;  // equilibrium|optimize|estimate-pk|revenue-curve|approx-check|rate-sweep
    std::optional<std::uint64_t> seed;
    std::vector<std::int64_t> n_grid;
    int trials = 200;
    int cases = 0;
    int k = 1;
    double q = 0.5;
    int grid_size = 512;
    double band_lo = 0.2, band_hi = 0.8;
    std::vector<double> epsilons;
    std::string check = "standard";  // approx-check: regular|irregular|position|standard
    std::string target = "pk";       // rate-sweep: pk|separation
    bool design_check = false;       // estimate-pk: design-from-samples recovery
    double noise = 0.0;

    // [output]
    std::string out_dir = "out";

    ValueDistribution build_distribution() const;
    PositionEnvironment build_environment() const;  // validation error if absent

    static ExperimentConfig parse_text(const std::string& text);
    static ExperimentConfig parse_file(const std::string& path);

    // Throws ConfigValidationError on missing seed, unresolvable blocks, etc.
    void validate() const;
};

}  // namespace rba
