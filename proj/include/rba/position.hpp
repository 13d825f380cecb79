#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace rba {

enum class PaymentFormat { FirstPrice, AllPay };

std::string to_string(PaymentFormat f);
PaymentFormat payment_format_from_string(const std::string& s);

struct DegenerateAllocationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// log C(n, k); computed via lgamma so n up to a few hundred stays exact enough.
double log_binomial(int n, int k);

// Allocation rule x_k(q) of the k-highest-bids-win auction with n agents:
// the probability that an agent at quantile q ranks among the top k.
double multiunit_win_prob(int n, int k, double q);

// d/dq x_k(q) = (n-k) C(n-1,k-1) q^{n-k-1} (1-q)^{k-1}; zero for k in {0, n}.
double multiunit_win_prob_slope(int n, int k, double q);

// Feasibility constraint: nonincreasing service probabilities by rank.
class PositionEnvironment {
  public:
    PositionEnvironment(std::vector<double> weights);

    int agents() const { return static_cast<int>(weights_.size()); }
    const std::vector<double>& weights() const { return weights_; }
    double weight(int k) const { return weights_.at(k - 1); }  // 1-indexed

    // W_k = sum_{j<=k} w_j with W_0 = 0; size agents()+1.
    std::vector<double> cumulative() const;

  private:
    std::vector<double> weights_;
};

// Rank-based auction: induced position weights plus payment format. The
// mixture coefficient alpha_k = w_k - w_{k+1} is the probability of running
// the k-unit highest-bids-win auction.
class RankBasedAuction {
  public:
    RankBasedAuction(std::vector<double> weights, PaymentFormat format);

    int agents() const { return static_cast<int>(weights_.size()); }
    PaymentFormat format() const { return format_; }
    const std::vector<double>& weights() const { return weights_; }
    double weight(int k) const { return weights_.at(k - 1); }

    std::vector<double> cumulative() const;
    // alpha_1..alpha_n (w_{n+1} = 0 convention); nonnegative, sums to w_1.
    std::vector<double> marginals() const;

    std::string serialize() const;  // "n|w_1,...,w_n|format"
    static RankBasedAuction deserialize(const std::string& line);

  private:
    std::vector<double> weights_;
    PaymentFormat format_;
};

// q -> x(q) induced by the auction's mixture over k-unit rules.
class AllocationRule {
  public:
    explicit AllocationRule(const RankBasedAuction& a);
    AllocationRule(int agents, std::vector<double> marginals);

    int agents() const { return n_; }
    const std::vector<double>& marginals() const { return alpha_; }

    double win_prob(double q) const;   // x(q)
    double slope(double q) const;      // x'(q)

  private:
    int n_;
    std::vector<double> alpha_;
};

// Cumulative dominance check: feasible iff What_k <= W_k + tol for all k.
bool is_feasible(const PositionEnvironment& env, const RankBasedAuction& a, double tol = 1e-9);
bool is_feasible(const PositionEnvironment& env, const std::vector<double>& weights,
                 double tol = 1e-9);

// Average the weights on ranks [k1, k2] (1-indexed, k1 < k2).
RankBasedAuction iron_by_rank(const RankBasedAuction& a, int k1, int k2);

// Zero out all ranks above k (0 <= k <= n); k = 0 rejects everyone.
RankBasedAuction rank_reserve(const RankBasedAuction& a, int k);

// Kernel Z_k(q) = (1-q) x_k'(q) / x'(q) converting observed bids linearly into
// the k-unit revenue estimate.  Evaluated through the ratio of beta kernels so
// the common powers cancel; boundary values are the continuity limits.
// Throws DegenerateAllocationError when x' vanishes identically around q.
double revenue_kernel(const AllocationRule& x, int k, double q);

// Grid argmax of Z_k over [0,1] (Z_k is unimodal for multi-unit mixtures).
double revenue_kernel_argmax(const AllocationRule& x, int k, int grid_size = 4096);

}  // namespace rba
