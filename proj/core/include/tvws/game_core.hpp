#pragma once

#include <cstdint>
#include <vector>

#include "tvws/net_model.hpp"

namespace tvws {

/// Base of the rate logarithm; 2 gives throughput in bits/s. Kept in one
/// place so the convention is changed consistently or not at all.
inline constexpr double kRateLogBase = 2.0;

/// Shannon-form rate: bandwidth * log_base(1 + sinr).
double shannon_bps(double bandwidth_hz, double sinr);

/// Joint channel choice, one entry per user (1-based channel index, which must
/// lie in that user's available set). Entries of inactive users are kept: a
/// user's standing choice persists across slots.
struct ChannelProfile {
  std::vector<int> choice;

  ChannelProfile() = default;
  explicit ChannelProfile(std::vector<int> c) : choice(std::move(c)) {}

  int operator[](int n) const { return choice[static_cast<std::size_t>(n)]; }
  int& operator[](int n) { return choice[static_cast<std::size_t>(n)]; }
  int size() const { return static_cast<int>(choice.size()); }

  bool operator==(const ChannelProfile&) const = default;
};

/// Throws ContractError unless prof has one in-set channel per user.
void validate_profile(const Network& net, const ChannelProfile& prof);

/// Active users other than n that sit on n's channel.
/// Precondition: n is active in b.
ActiveSet co_channel_set(const ActiveSet& b, const ChannelProfile& prof, int n);

/// Received SINR of active user n under activity realization b:
/// rx_power(n) / (sum of co-channel interference + noise).
double sinr(const Network& net, const ActiveSet& b, const ChannelProfile& prof, int n);

/// Achievable rate of active user n: shannon_bps(B, sinr).
double throughput_bps(const Network& net, const ActiveSet& b,
                      const ChannelProfile& prof, int n);

/// Per-state game payoff. Identical to throughput_bps by definition; game and
/// learning code call this so they never touch the PHY layer directly.
double utility(const Network& net, const ActiveSet& b, const ChannelProfile& prof, int n);

/// Weighted interference on active user n (non-positive):
/// -sum over co-channel peers i of P_i * P_n * dist(i,n)^(-alpha).
double weighted_interference(const Network& net, const ActiveSet& b,
                             const ChannelProfile& prof, int n);

/// One pair's weighted-interference term: P_i * P_j * dist(i,j)^(-alpha).
/// Symmetric in (i,j); the building block of weighted_interference and
/// potential_phi, exposed so checkers can re-sum the identical terms.
double pair_weight(const Network& net, int i, int j);

/// Aggregate weighted interference over all active users (non-positive);
/// the per-state potential. Empty b gives 0.
double potential_phi(const Network& net, const ActiveSet& b, const ChannelProfile& prof);

/// Interference-free rate of user n; the normalization cap for learning
/// payoffs and the value a lone user obtains.
double interference_free_throughput_bps(const Network& net, int n);

/// Everything the `eval` subcommand prints for one active user.
struct PayoffBreakdown {
  double sinr = 0.0;
  double throughput_bps = 0.0;
  double weighted_interference = 0.0;  // magnitude, i.e. -v_n >= 0
  std::vector<int> co_channel_peers;
};

PayoffBreakdown payoff_breakdown(const Network& net, const ActiveSet& b,
                                 const ChannelProfile& prof, int n);

/// How expectations over the activity distribution are evaluated: exact
/// enumeration of all 2^N states (N <= 12), or a seeded Monte Carlo sample
/// mean. Monte Carlo results are deterministic per (samples, seed).
class ExpectationMode {
 public:
  static ExpectationMode exact() { return ExpectationMode(true, 0, 0); }
  static ExpectationMode monte_carlo(std::size_t samples, std::uint64_t seed) {
    return ExpectationMode(false, samples, seed);
  }

  bool is_exact() const { return exact_; }
  std::size_t samples() const { return samples_; }
  std::uint64_t seed() const { return seed_; }

 private:
  ExpectationMode(bool exact, std::size_t samples, std::uint64_t seed)
      : exact_(exact), samples_(samples), seed_(seed) {}

  bool exact_;
  std::size_t samples_;
  std::uint64_t seed_;
};

/// Largest user count for which exact 2^N enumeration is allowed.
inline constexpr int kMaxExactUsers = 12;

/// Expectation engine bound to one network. Exact mode walks all 2^N activity
/// states with compensated summation; Monte Carlo mode draws its state pool
/// once at construction, so evaluating many profiles reuses the same states
/// (common random numbers). Construction throws CapacityError when exact mode
/// is requested past kMaxExactUsers.
class ExpectedValueEvaluator {
 public:
  ExpectedValueEvaluator(const Network& net, const ExpectationMode& mode);

  /// Expected per-state utility of user n; states where n is inactive
  /// contribute zero.
  double utility(const ChannelProfile& prof, int n) const;

  /// Expected per-state potential.
  double potential(const ChannelProfile& prof) const;

  /// Sum of expected utilities over all users; the centralized objective.
  double network_throughput(const ChannelProfile& prof) const;

  const Network& network() const { return net_; }

 private:
  template <typename PerState>
  double expect(PerState&& per_state) const;

  const Network& net_;
  ExpectationMode mode_;
  std::vector<ActiveSet> pool_;  // Monte Carlo states; empty in exact mode
};

/// One-shot conveniences over ExpectedValueEvaluator.
double expected_utility(const Network& net, const ChannelProfile& prof, int n,
                        const ExpectationMode& mode);
double expected_potential(const Network& net, const ChannelProfile& prof,
                          const ExpectationMode& mode);
double expected_network_throughput(const Network& net, const ChannelProfile& prof,
                                   const ExpectationMode& mode);

}  // namespace tvws
