#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "rba/config.hpp"
#include "rba/experiments.hpp"

using namespace rba;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

}  // namespace

TEST_CASE("ini parsing") {
    ExperimentConfig c = ExperimentConfig::parse_text(
        "# comment\n"
        "[distribution]\nfamily = piecewise_linear\nknots = 0:0, 0.5:0.2, 1:1\n"
        "[environment]\nn = 3\nweights = 1, 0.5, 0.25\n"
        "[auction]\nformat = first_price\nweights = 1, 0.5, 0\n"
        "[experiment]\nkind = equilibrium\nseed = 9\n"
        "[output]\ndir = out/x\n");
    CHECK(c.family == "piecewise_linear");
    CHECK(c.knots.size() == 3);
    CHECK(c.env_weights == std::vector<double>{1.0, 0.5, 0.25});
    CHECK(c.auction_weights == std::vector<double>{1.0, 0.5, 0.0});
    CHECK(c.format == PaymentFormat::FirstPrice);
    CHECK(c.seed.value() == 9);
    c.validate();

    CHECK_THROWS_AS(ExperimentConfig::parse_text("[experiment]\nbogus_key = 1\n"),
                    ConfigParseError);
    CHECK_THROWS_AS(ExperimentConfig::parse_text("no equals sign"), ConfigParseError);
}

TEST_CASE("json parsing is accepted as an alternative") {
    ExperimentConfig c = ExperimentConfig::parse_text(R"({
        "distribution": {"family": "uniform01"},
        "auction": {"weights": [1, 0], "format": "all_pay"},
        "experiment": {"kind": "equilibrium", "seed": 4},
        "output": {"dir": "out/j"}
    })");
    CHECK(c.family == "uniform01");
    CHECK(c.auction_weights == std::vector<double>{1.0, 0.0});
    c.validate();
    CHECK_THROWS_AS(ExperimentConfig::parse_text("{ not json"), ConfigParseError);
}

TEST_CASE("validation rejects missing seed and bad kinds") {
    ExperimentConfig c = ExperimentConfig::parse_text(
        "[distribution]\nfamily = uniform01\n"
        "[auction]\nweights = 1, 0\n"
        "[experiment]\nkind = equilibrium\n");
    CHECK_THROWS_AS(c.validate(), ConfigValidationError);

    ExperimentConfig bad_kind = ExperimentConfig::parse_text(
        "[experiment]\nkind = nonsense\nseed = 1\n");
    CHECK_THROWS_AS(bad_kind.validate(), ConfigValidationError);

    ExperimentConfig needs_grid = ExperimentConfig::parse_text(
        "[distribution]\nfamily = uniform01\n[auction]\nweights = 1, 0\n"
        "[experiment]\nkind = estimate-pk\nseed = 1\n");
    CHECK_THROWS_AS(needs_grid.validate(), ConfigValidationError);
}

TEST_CASE("bundled catalog covers the reproduction set") {
    const auto& table = builtin_configs();
    CHECK(table.size() >= 8);
    bool has_rate_sweep = false, has_thm35 = false;
    for (const auto& [name, text] : table) {
        if (name == "rate_sweep_allpay") has_rate_sweep = true;
        if (name == "thm35_regular") has_thm35 = true;
        // every bundled config parses and validates
        ExperimentConfig c = ExperimentConfig::parse_text(text);
        c.validate();
    }
    CHECK(has_rate_sweep);
    CHECK(has_thm35);
    CHECK(builtin_config_text("uniform_n2").has_value());
    CHECK_FALSE(builtin_config_text("no_such_config").has_value());
}

TEST_CASE("runner writes manifest, summary, and deterministic csv bodies") {
    fs::path dir1 = fs::temp_directory_path() / "rba_cli_test_run1";
    fs::path dir2 = fs::temp_directory_path() / "rba_cli_test_run2";
    fs::remove_all(dir1);
    fs::remove_all(dir2);

    ExperimentConfig c = ExperimentConfig::parse_text(
        "[distribution]\nfamily = uniform01\n"
        "[auction]\nweights = 1, 0\nformat = all_pay\n"
        "[experiment]\nkind = estimate-pk\nk = 1\nn_grid = 500\ntrials = 10\nseed = 77\n");

    RunOptions o1;
    o1.out_dir_override = dir1.string();
    RunResult r1 = run_experiment(c, o1);
    CHECK(r1.assertions_ok);
    CHECK(fs::exists(dir1 / "manifest.json"));
    CHECK(fs::exists(dir1 / "summary.json"));
    CHECK(fs::exists(dir1 / "estimate_pk.csv"));

    RunOptions o2;
    o2.out_dir_override = dir2.string();
    run_experiment(c, o2);
    CHECK(slurp(dir1 / "estimate_pk.csv") == slurp(dir2 / "estimate_pk.csv"));

    // a different seed changes the csv body
    RunOptions o3;
    o3.out_dir_override = dir2.string();
    o3.seed_override = 78;
    run_experiment(c, o3);
    CHECK(slurp(dir1 / "estimate_pk.csv") != slurp(dir2 / "estimate_pk.csv"));

    fs::remove_all(dir1);
    fs::remove_all(dir2);
}

#ifdef RBA_CLI_PATH
namespace {
int run_cli(const std::string& args) {
    std::string cmd = std::string(RBA_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}
}  // namespace

TEST_CASE("cli exit codes") {
    fs::path dir = fs::temp_directory_path() / "rba_cli_codes";
    fs::remove_all(dir);
    fs::path bad_parse = dir / "bad_parse.cfg";
    fs::path bad_valid = dir / "bad_valid.cfg";
    fs::create_directories(dir);
    std::ofstream(bad_parse) << "this is not a config\n";
    std::ofstream(bad_valid) << "[experiment]\nkind = equilibrium\n";  // missing seed

    CHECK(run_cli("run --config " + bad_parse.string()) == 2);
    CHECK(run_cli("run --config " + bad_valid.string()) == 3);
    CHECK(run_cli("run --config " + (dir / "missing.cfg").string()) == 2);
    CHECK(run_cli("list-experiments") == 0);
    CHECK(run_cli("run --config determinism_check --out " + (dir / "ok").string()) == 0);
    fs::remove_all(dir);
}

TEST_CASE("repo config files stay in sync with the bundled catalog") {
    fs::path dir = fs::path(RBA_SOURCE_DIR) / "configs";
    for (const auto& [name, text] : builtin_configs()) {
        fs::path f = dir / (name + ".cfg");
        REQUIRE(fs::exists(f));
        CHECK(slurp(f) == text);
    }
}
#endif

TEST_CASE("equilibrium runner catches the golden uniform values") {
    fs::path dir = fs::temp_directory_path() / "rba_cli_test_golden";
    fs::remove_all(dir);
    ExperimentConfig c =
        ExperimentConfig::parse_text(builtin_config_text("uniform_n2").value());
    RunOptions o;
    o.out_dir_override = dir.string();
    RunResult r = run_experiment(c, o);
    CHECK(r.assertions_ok);
    bool saw_golden = false;
    for (const auto& a : r.assertions)
        if (a.name.rfind("golden_", 0) == 0) saw_golden = true;
    CHECK(saw_golden);
    CHECK(fs::exists(dir / "bid_function_all_pay.csv"));
    CHECK(fs::exists(dir / "bid_function_first_price.csv"));
    fs::remove_all(dir);
}
