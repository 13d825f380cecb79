#include "rba/position.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace rba {

std::string to_string(PaymentFormat f) {
    return f == PaymentFormat::FirstPrice ? "first_price" : "all_pay";
}

PaymentFormat payment_format_from_string(const std::string& s) {
    if (s == "first_price" || s == "firstprice" || s == "fp") return PaymentFormat::FirstPrice;
    if (s == "all_pay" || s == "allpay" || s == "ap") return PaymentFormat::AllPay;
    throw std::invalid_argument("unknown payment format: " + s);
}

double log_binomial(int n, int k) {
    if (k < 0 || k > n) throw std::domain_error("binomial index out of range");
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

namespace {

void check_rank(int n, int k) {
    if (n < 1) throw std::domain_error("need at least one agent");
    if (k < 0 || k > n) {
        std::ostringstream os;
        os << "unit count " << k << " outside [0," << n << "]";
        throw std::domain_error(os.str());
    }
}

void check_quantile(double q) {
    if (!(q >= 0.0 && q <= 1.0)) throw std::domain_error("quantile out of [0,1]");
}

// (n-k) C(n-1,k-1), the constant in x_k'(q) = c_k q^{n-k-1}(1-q)^{k-1}.
double slope_coeff(int n, int k) {
    if (k < 1 || k > n - 1) return 0.0;
    return (n - k) * std::exp(log_binomial(n - 1, k - 1));
}

// t^p computed as exp(p log t) with the right limits at t = 0.
double power(double t, double p) {
    if (p == 0.0) return 1.0;
    if (t <= 0.0) return p > 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return std::exp(p * std::log(t));
}

void validate_weights(const std::vector<double>& w) {
    if (w.empty()) throw std::invalid_argument("weights must be nonempty");
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (!(w[i] >= -1e-12 && w[i] <= 1.0 + 1e-12))
            throw std::invalid_argument("weights must lie in [0,1]");
        if (i > 0 && w[i] > w[i - 1] + 1e-12)
            throw std::invalid_argument("weights must be nonincreasing");
    }
}

}  // namespace

double multiunit_win_prob(int n, int k, double q) {
    check_rank(n, k);
    check_quantile(q);
    if (k == 0) return 0.0;
    if (k == n) return 1.0;
    // sum_{i=0}^{k-1} C(n-1,i) q^{n-1-i} (1-q)^i
    double sum = 0.0;
    for (int i = 0; i < k; ++i) {
        double lb = log_binomial(n - 1, i);
        double term;
        if (q <= 0.0)
            term = (n - 1 - i == 0) ? std::exp(lb) * power(1.0 - q, i) : 0.0;
        else if (q >= 1.0)
            term = (i == 0) ? std::exp(lb) * power(q, n - 1 - i) : 0.0;
        else
            term = std::exp(lb + (n - 1 - i) * std::log(q) + i * std::log1p(-q));
        sum += term;
    }
    return std::min(sum, 1.0);
}

double multiunit_win_prob_slope(int n, int k, double q) {
    check_rank(n, k);
    check_quantile(q);
    if (k == 0 || k == n) return 0.0;
    double c = slope_coeff(n, k);
    return c * power(q, n - k - 1) * power(1.0 - q, k - 1);
}

PositionEnvironment::PositionEnvironment(std::vector<double> weights)
    : weights_(std::move(weights)) {
    validate_weights(weights_);
}

std::vector<double> PositionEnvironment::cumulative() const {
    std::vector<double> cum(weights_.size() + 1, 0.0);
    for (std::size_t i = 0; i < weights_.size(); ++i) cum[i + 1] = cum[i] + weights_[i];
    return cum;
}

RankBasedAuction::RankBasedAuction(std::vector<double> weights, PaymentFormat format)
    : weights_(std::move(weights)), format_(format) {
    validate_weights(weights_);
}

std::vector<double> RankBasedAuction::cumulative() const {
    std::vector<double> cum(weights_.size() + 1, 0.0);
    for (std::size_t i = 0; i < weights_.size(); ++i) cum[i + 1] = cum[i] + weights_[i];
    return cum;
}

std::vector<double> RankBasedAuction::marginals() const {
    std::vector<double> alpha(weights_.size());
    for (std::size_t i = 0; i < weights_.size(); ++i) {
        double next = (i + 1 < weights_.size()) ? weights_[i + 1] : 0.0;
        alpha[i] = std::max(0.0, weights_[i] - next);
    }
    return alpha;
}

std::string RankBasedAuction::serialize() const {
    std::ostringstream os;
    os.precision(17);
    os << agents() << "|";
    for (int i = 0; i < agents(); ++i) {
        if (i) os << ",";
        os << weights_[i];
    }
    os << "|" << to_string(format_);
    return os.str();
}

RankBasedAuction RankBasedAuction::deserialize(const std::string& line) {
    std::istringstream is(line);
    std::string ns, ws, fs;
    if (!std::getline(is, ns, '|') || !std::getline(is, ws, '|') || !std::getline(is, fs))
        throw std::invalid_argument("malformed auction record: " + line);
    int n = std::stoi(ns);
    std::vector<double> w;
    std::istringstream wss(ws);
    std::string tok;
    while (std::getline(wss, tok, ',')) w.push_back(std::stod(tok));
    if (static_cast<int>(w.size()) != n)
        throw std::invalid_argument("auction record weight count mismatch");
    return RankBasedAuction(std::move(w), payment_format_from_string(fs));
}

AllocationRule::AllocationRule(const RankBasedAuction& a)
    : n_(a.agents()), alpha_(a.marginals()) {}

AllocationRule::AllocationRule(int agents, std::vector<double> marginals)
    : n_(agents), alpha_(std::move(marginals)) {
    if (static_cast<int>(alpha_.size()) != n_)
        throw std::invalid_argument("marginal count must equal agent count");
}

double AllocationRule::win_prob(double q) const {
    check_quantile(q);
    double sum = 0.0;
    for (int k = 1; k <= n_; ++k)
        if (alpha_[k - 1] > 0.0) sum += alpha_[k - 1] * multiunit_win_prob(n_, k, q);
    return sum;
}

double AllocationRule::slope(double q) const {
    check_quantile(q);
    double sum = 0.0;
    for (int k = 1; k < n_; ++k)
        if (alpha_[k - 1] > 0.0) sum += alpha_[k - 1] * multiunit_win_prob_slope(n_, k, q);
    return sum;
}

bool is_feasible(const PositionEnvironment& env, const std::vector<double>& weights,
                 double tol) {
    if (static_cast<int>(weights.size()) != env.agents())
        throw std::invalid_argument("environment/auction dimension mismatch");
    double cw = 0.0, ca = 0.0;
    for (int i = 0; i < env.agents(); ++i) {
        cw += env.weights()[i];
        ca += weights[i];
        if (ca > cw + tol) return false;
    }
    return true;
}

bool is_feasible(const PositionEnvironment& env, const RankBasedAuction& a, double tol) {
    return is_feasible(env, a.weights(), tol);
}

RankBasedAuction iron_by_rank(const RankBasedAuction& a, int k1, int k2) {
    if (!(1 <= k1 && k1 < k2 && k2 <= a.agents()))
        throw std::invalid_argument("invalid ironing interval");
    std::vector<double> w = a.weights();
    bool constant = true;
    double avg = 0.0;
    for (int k = k1; k <= k2; ++k) {
        avg += w[k - 1];
        constant = constant && w[k - 1] == w[k1 - 1];
    }
    if (constant) return a;
    avg /= (k2 - k1 + 1);
    for (int k = k1; k <= k2; ++k) w[k - 1] = avg;
    return RankBasedAuction(std::move(w), a.format());
}

RankBasedAuction rank_reserve(const RankBasedAuction& a, int k) {
    if (k < 0 || k > a.agents()) throw std::invalid_argument("invalid reserve rank");
    std::vector<double> w = a.weights();
    for (int j = k; j < a.agents(); ++j) w[j] = 0.0;
    return RankBasedAuction(std::move(w), a.format());
}

double revenue_kernel(const AllocationRule& x, int k, double q) {
    int n = x.agents();
    check_rank(n, k);
    check_quantile(q);
    if (k == 0 || k == n) return 0.0;  // x_k' vanishes identically

    const std::vector<double>& alpha = x.marginals();
    double ck = slope_coeff(n, k);
    int lowest = 0, highest = 0;  // support of the mixture below/above k
    for (int j = 1; j < n; ++j) {
        if (alpha[j - 1] <= 0.0) continue;
        if (lowest == 0) lowest = j;
        highest = j;
    }
    if (highest == 0) throw DegenerateAllocationError("allocation slope is identically zero");

    // Endpoint limits of Z_k = c_k (1-q) / sum_j alpha_j c_j q^{k-j}(1-q)^{j-k}.
    if (q == 0.0) {
        if (highest > k) return 0.0;
        if (highest == k) return 1.0 / alpha[k - 1];
        throw DegenerateAllocationError("allocation slope vanishes faster than x_k' at 0");
    }
    if (q == 1.0) {
        if (lowest <= k) return 0.0;
        // only mass above k: finite nonzero limit c_k / (alpha_{k+1} c_{k+1})
        return ck / (alpha[k] * slope_coeff(n, k + 1));
    }

    // Log-sum-exp over the cancelled beta-kernel ratio; stays finite where the
    // naive division hits 0/0 or overflow near the endpoints.
    double lq = std::log(q), l1q = std::log1p(-q);
    double mx = -std::numeric_limits<double>::infinity();
    std::vector<double> exps;
    exps.reserve(n);
    for (int j = 1; j < n; ++j) {
        if (alpha[j - 1] <= 0.0) continue;
        double e = std::log(alpha[j - 1] * slope_coeff(n, j)) + (k - j) * lq + (j - k) * l1q;
        exps.push_back(e);
        mx = std::max(mx, e);
    }
    double s = 0.0;
    for (double e : exps) s += std::exp(e - mx);
    return std::exp(std::log(ck) + l1q - mx) / s;
}

double revenue_kernel_argmax(const AllocationRule& x, int k, int grid_size) {
    double best_q = 0.0, best = -1.0;
    for (int i = 0; i < grid_size; ++i) {
        double q = static_cast<double>(i) / (grid_size - 1);
        double z = revenue_kernel(x, k, q);
        if (z > best) {
            best = z;
            best_q = q;
        }
    }
    return best_q;
}

}  // namespace rba
