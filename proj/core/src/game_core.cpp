#include "tvws/game_core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tvws/errors.hpp"
#include "tvws/numerics.hpp"

namespace tvws {

namespace {

void require_active(const ActiveSet& b, int n, const char* op) {
  if (!b.contains(n))
    throw ContractError(std::string(op) + ": user " + std::to_string(n) +
                        " is not in the active set");
}

void require_valid_user(const Network& net, int n, const char* op) {
  if (n < 0 || n >= net.size())
    throw ContractError(std::string(op) + ": user " + std::to_string(n) +
                        " out of range");
}

}  // namespace

double shannon_bps(double bandwidth_hz, double sinr) {
  return bandwidth_hz * std::log2(1.0 + sinr) / std::log2(kRateLogBase);
}

void validate_profile(const Network& net, const ChannelProfile& prof) {
  if (prof.size() != net.size())
    throw ContractError("ChannelProfile: needs one channel per user");
  for (int n = 0; n < net.size(); ++n) {
    const auto& channels = net.ap(n).channels;
    if (!std::binary_search(channels.begin(), channels.end(), prof[n]))
      throw ContractError("ChannelProfile: channel " + std::to_string(prof[n]) +
                          " is not available to user " + std::to_string(n));
  }
}

ActiveSet co_channel_set(const ActiveSet& b, const ChannelProfile& prof, int n) {
  require_active(b, n, "co_channel_set");
  ActiveSet peers;
  const int c = prof[n];
  for (std::uint64_t m = b.bits(); m != 0; m &= m - 1) {
    const int i = __builtin_ctzll(m);
    if (i != n && prof[i] == c) peers.insert(i);
  }
  return peers;
}

double sinr(const Network& net, const ActiveSet& b, const ChannelProfile& prof, int n) {
  require_valid_user(net, n, "sinr");
  require_active(b, n, "sinr");
  double interference = 0.0;
  const int c = prof[n];
  for (std::uint64_t m = b.bits(); m != 0; m &= m - 1) {
    const int i = __builtin_ctzll(m);
    if (i != n && prof[i] == c)
      interference += net.ap(i).tx_power_w * net.path_gain(i, n);
  }
  return net.rx_power_w(n) / (interference + net.noise_watts());
}

double throughput_bps(const Network& net, const ActiveSet& b,
                      const ChannelProfile& prof, int n) {
  return shannon_bps(net.bandwidth_hz(), sinr(net, b, prof, n));
}

double utility(const Network& net, const ActiveSet& b, const ChannelProfile& prof, int n) {
  return throughput_bps(net, b, prof, n);
}

double pair_weight(const Network& net, int i, int j) {
  return net.ap(i).tx_power_w * net.ap(j).tx_power_w * net.path_gain(i, j);
}

double weighted_interference(const Network& net, const ActiveSet& b,
                             const ChannelProfile& prof, int n) {
  require_valid_user(net, n, "weighted_interference");
  require_active(b, n, "weighted_interference");
  double sum = 0.0;
  const int c = prof[n];
  for (std::uint64_t m = b.bits(); m != 0; m &= m - 1) {
    const int i = __builtin_ctzll(m);
    if (i != n && prof[i] == c) sum += pair_weight(net, i, n);
  }
  return sum == 0.0 ? 0.0 : -sum;
}

double potential_phi(const Network& net, const ActiveSet& b, const ChannelProfile& prof) {
  // Sum of v_n over active users, i.e. minus the double sum over ordered
  // co-channel pairs of P_i * P_n * dist^(-alpha).
  double sum = 0.0;
  for (std::uint64_t m1 = b.bits(); m1 != 0; m1 &= m1 - 1) {
    const int i = __builtin_ctzll(m1);
    for (std::uint64_t m2 = m1 & (m1 - 1); m2 != 0; m2 &= m2 - 1) {
      const int j = __builtin_ctzll(m2);
      if (prof[i] == prof[j]) sum += 2.0 * pair_weight(net, i, j);
    }
  }
  return sum == 0.0 ? 0.0 : -sum;
}

double interference_free_throughput_bps(const Network& net, int n) {
  require_valid_user(net, n, "interference_free_throughput_bps");
  return shannon_bps(net.bandwidth_hz(), net.rx_power_w(n) / net.noise_watts());
}

PayoffBreakdown payoff_breakdown(const Network& net, const ActiveSet& b,
                                 const ChannelProfile& prof, int n) {
  PayoffBreakdown out;
  out.sinr = sinr(net, b, prof, n);
  out.throughput_bps = shannon_bps(net.bandwidth_hz(), out.sinr);
  out.weighted_interference = -weighted_interference(net, b, prof, n);
  out.co_channel_peers = co_channel_set(b, prof, n).members();
  return out;
}

ExpectedValueEvaluator::ExpectedValueEvaluator(const Network& net,
                                               const ExpectationMode& mode)
    : net_(net), mode_(mode) {
  if (mode_.is_exact()) {
    if (net.size() > kMaxExactUsers)
      throw CapacityError(
          "exact expectation enumerates 2^N states and is capped at N = " +
          std::to_string(kMaxExactUsers) + " users (got " +
          std::to_string(net.size()) + "); use ExpectationMode::monte_carlo");
  } else {
    if (mode_.samples() == 0)
      throw ContractError("monte_carlo expectation needs at least one sample");
    Rng rng(mode_.seed());
    pool_.reserve(mode_.samples());
    for (std::size_t s = 0; s < mode_.samples(); ++s)
      pool_.push_back(sample_active_set(net_, rng));
  }
}

template <typename PerState>
double ExpectedValueEvaluator::expect(PerState&& per_state) const {
  KahanSum acc;
  if (mode_.is_exact()) {
    const int n_users = net_.size();
    const std::uint64_t n_states = 1ULL << n_users;
    for (std::uint64_t bits = 0; bits < n_states; ++bits) {
      const ActiveSet b = ActiveSet::from_bits(bits);
      const double mu = state_probability(net_, b);
      acc.add(mu * per_state(b));
    }
    return acc.value();
  }
  for (const ActiveSet& b : pool_) acc.add(per_state(b));
  return acc.value() / static_cast<double>(pool_.size());
}

double ExpectedValueEvaluator::utility(const ChannelProfile& prof, int n) const {
  // An inactive user transmits nothing, so its per-state payoff is zero;
  // only states containing n contribute.
  return expect([&](const ActiveSet& b) {
    return b.contains(n) ? tvws::utility(net_, b, prof, n) : 0.0;
  });
}

double ExpectedValueEvaluator::potential(const ChannelProfile& prof) const {
  return expect([&](const ActiveSet& b) { return potential_phi(net_, b, prof); });
}

double ExpectedValueEvaluator::network_throughput(const ChannelProfile& prof) const {
  return expect([&](const ActiveSet& b) {
    double total = 0.0;
    for (std::uint64_t m = b.bits(); m != 0; m &= m - 1)
      total += tvws::utility(net_, b, prof, __builtin_ctzll(m));
    return total;
  });
}

double expected_utility(const Network& net, const ChannelProfile& prof, int n,
                        const ExpectationMode& mode) {
  require_valid_user(net, n, "expected_utility");
  return ExpectedValueEvaluator(net, mode).utility(prof, n);
}

double expected_potential(const Network& net, const ChannelProfile& prof,
                          const ExpectationMode& mode) {
  return ExpectedValueEvaluator(net, mode).potential(prof);
}

double expected_network_throughput(const Network& net, const ChannelProfile& prof,
                                   const ExpectationMode& mode) {
  return ExpectedValueEvaluator(net, mode).network_throughput(prof);
}

}  // namespace tvws
