#include "rba/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

namespace rba {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::istringstream is(s);
    std::string tok;
    while (std::getline(is, tok, sep)) {
        tok = trim(tok);
        if (!tok.empty()) out.push_back(tok);
    }
    return out;
}

double to_double(const std::string& s) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigParseError("not a number: " + s);
    }
}

std::int64_t to_int(const std::string& s) {
    try {
        std::size_t pos = 0;
        long long v = std::stoll(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigParseError("not an integer: " + s);
    }
}

std::vector<double> to_doubles(const std::string& s) {
    std::vector<double> out;
    for (const std::string& tok : split(s, ',')) out.push_back(to_double(tok));
    return out;
}

std::vector<ValueDistribution::Knot> to_knots(const std::string& s) {
    std::vector<ValueDistribution::Knot> out;
    for (const std::string& tok : split(s, ',')) {
        auto parts = split(tok, ':');
        if (parts.size() != 2) throw ConfigParseError("knot must look like q:v, got " + tok);
        out.push_back({to_double(parts[0]), to_double(parts[1])});
    }
    return out;
}

void apply_key(ExperimentConfig& c, const std::string& section, const std::string& key,
               const std::string& value) {
    auto is = [&](const char* s, const char* k) { return section == s && key == k; };
    if (is("distribution", "family")) c.family = value;
    else if (is("distribution", "rate")) c.rate = to_double(value);
    else if (is("distribution", "knots")) c.knots = to_knots(value);
    else if (is("distribution", "v_lo")) c.v_lo = to_double(value);
    else if (is("distribution", "v_hi")) c.v_hi = to_double(value);
    else if (is("distribution", "atom_mass")) c.atom_mass = to_double(value);
    else if (is("distribution", "atom_width")) c.atom_width = to_double(value);
    else if (is("environment", "n")) c.agents = static_cast<int>(to_int(value));
    else if (is("environment", "weights")) c.env_weights = to_doubles(value);
    else if (is("auction", "weights")) {
        if (value == "optimal" || value == "uniform_marginal" || value == "epsilon_mixture" ||
            value == "epsilon_strict")
            c.auction_mode = value;
        else {
            c.auction_mode = "explicit";
            c.auction_weights = to_doubles(value);
        }
    } else if (is("auction", "format")) {
        auto fs = split(value, ',');
        c.formats.clear();
        for (const std::string& f : fs) c.formats.push_back(payment_format_from_string(f));
        if (c.formats.empty()) throw ConfigParseError("empty format list");
        c.format = c.formats.front();
    } else if (is("auction", "epsilon")) c.epsilon = to_double(value);
    else if (is("experiment", "kind")) c.kind = value;
    else if (is("experiment", "seed")) c.seed = static_cast<std::uint64_t>(to_int(value));
    else if (is("experiment", "n_grid")) {
        c.n_grid.clear();
        for (const std::string& tok : split(value, ',')) c.n_grid.push_back(to_int(tok));
    } else if (is("experiment", "trials")) c.trials = static_cast<int>(to_int(value));
    else if (is("experiment", "cases")) c.cases = static_cast<int>(to_int(value));
    else if (is("experiment", "k")) c.k = static_cast<int>(to_int(value));
    else if (is("experiment", "q")) c.q = to_double(value);
    else if (is("experiment", "grid")) c.grid_size = static_cast<int>(to_int(value));
    else if (is("experiment", "band_lo")) c.band_lo = to_double(value);
    else if (is("experiment", "band_hi")) c.band_hi = to_double(value);
    else if (is("experiment", "epsilons")) c.epsilons = to_doubles(value);
    else if (is("experiment", "check")) c.check = value;
    else if (is("experiment", "target")) c.target = value;
    else if (is("experiment", "design_check")) c.design_check = (value == "true" || value == "1");
    else if (is("experiment", "noise")) c.noise = to_double(value);
    else if (is("output", "dir")) c.out_dir = value;
    else throw ConfigParseError("unknown config key [" + section + "] " + key);
}

ExperimentConfig parse_ini(const std::string& text) {
    ExperimentConfig c;
    std::istringstream is(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        std::size_t hash = line.find_first_of("#;");
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigParseError("bad section header at line " + std::to_string(lineno));
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigParseError("expected key = value at line " + std::to_string(lineno));
        apply_key(c, section, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return c;
}

ExperimentConfig parse_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const std::exception& e) {
        throw ConfigParseError(std::string("bad JSON config: ") + e.what());
    }
    ExperimentConfig c;
    for (auto& [section, body] : j.items()) {
        if (!body.is_object()) throw ConfigParseError("JSON section must be an object: " + section);
        for (auto& [key, val] : body.items()) {
            std::string s;
            if (val.is_string()) s = val.get<std::string>();
            else if (val.is_boolean()) s = val.get<bool>() ? "true" : "false";
            else if (val.is_number_integer()) s = std::to_string(val.get<long long>());
            else if (val.is_number()) {
                std::ostringstream os;
                os.precision(17);
                os << val.get<double>();
                s = os.str();
            } else if (val.is_array()) {
                std::ostringstream os;
                os.precision(17);
                bool first = true;
                for (auto& e : val) {
                    if (!first) os << ",";
                    first = false;
                    if (e.is_string()) os << e.get<std::string>();
                    else os << e.get<double>();
                }
                s = os.str();
            } else
                throw ConfigParseError("unsupported JSON value for " + key);
            apply_key(c, section, key, s);
        }
    }
    return c;
}

}  // namespace

ValueDistribution ExperimentConfig::build_distribution() const {
    if (family == "uniform01") return ValueDistribution::uniform01();
    if (family == "truncated_exponential") return ValueDistribution::truncated_exponential(rate);
    if (family == "piecewise_linear") {
        if (knots.empty()) throw ConfigValidationError("piecewise_linear requires knots");
        return ValueDistribution::piecewise_linear(knots);
    }
    if (family == "bimodal_irregular")
        return ValueDistribution::bimodal_irregular(v_lo, v_hi, atom_mass, atom_width);
    throw ConfigValidationError("unknown distribution family: " + family);
}

PositionEnvironment ExperimentConfig::build_environment() const {
    if (env_weights.empty())
        throw ConfigValidationError("experiment needs an [environment] weights block");
    if (agents != 0 && agents != static_cast<int>(env_weights.size()))
        throw ConfigValidationError("environment n does not match weight count");
    return PositionEnvironment(env_weights);
}

ExperimentConfig ExperimentConfig::parse_text(const std::string& text) {
    std::size_t first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') return parse_json(text);
    return parse_ini(text);
}

ExperimentConfig ExperimentConfig::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigParseError("cannot open config file: " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return parse_text(os.str());
}

void ExperimentConfig::validate() const {
    static const std::vector<std::string> kinds{"equilibrium", "optimize", "estimate-pk",
                                               "revenue-curve", "approx-check", "rate-sweep"};
    if (std::find(kinds.begin(), kinds.end(), kind) == kinds.end())
        throw ConfigValidationError("unknown or missing experiment kind: " + kind);
    if (!seed.has_value()) throw ConfigValidationError("seed is mandatory");
    if (trials < 0 || cases < 0) throw ConfigValidationError("trials/cases must be nonnegative");
    build_distribution();
    int n = agents;
    if (n == 0 && !env_weights.empty()) n = static_cast<int>(env_weights.size());
    if (n == 0 && !auction_weights.empty()) n = static_cast<int>(auction_weights.size());
    if (auction_mode == "explicit" && !auction_weights.empty() &&
        !std::is_sorted(auction_weights.rbegin(), auction_weights.rend()))
        throw ConfigValidationError("auction weights must be nonincreasing");
    if (auction_mode != "explicit" && env_weights.empty())
        throw ConfigValidationError("derived auction weights need an environment");
    if (!env_weights.empty()) build_environment();
    if (kind == "estimate-pk" || kind == "rate-sweep") {
        if (n_grid.empty()) throw ConfigValidationError(kind + " needs n_grid");
        for (std::int64_t v : n_grid)
            if (v < 1) throw ConfigValidationError("n_grid entries must be >= 1");
    }
    if (kind == "approx-check" && check != "standard" && check != "regular" &&
        check != "irregular" && check != "position")
        throw ConfigValidationError("unknown approx-check variant: " + check);
    if (kind == "rate-sweep" && target != "pk" && target != "separation")
        throw ConfigValidationError("unknown rate-sweep target: " + target);
}

}  // namespace rba
