// Test-side oracles: independent brute-force evaluations of the quantities the
// library computes. Everything here recomputes distances and gains from the
// raw AP fields with std::pow, enumerates states as plain vectors, and sums
// naively, so a library bug cannot hide in a shared code path.
#pragma once

#include <cmath>
#include <vector>

#include "tvws/game_core.hpp"
#include "tvws/net_model.hpp"

namespace oracle {

inline double distance(const tvws::Network& net, int i, int j) {
  const auto& a = net.ap(i);
  const auto& b = net.ap(j);
  return std::sqrt((a.x_m - b.x_m) * (a.x_m - b.x_m) + (a.y_m - b.y_m) * (a.y_m - b.y_m));
}

inline std::vector<int> co_channel_peers(const tvws::Network& net,
                                         const std::vector<int>& active,
                                         const std::vector<int>& prof, int n) {
  std::vector<int> peers;
  for (int i : active)
    if (i != n && prof[i] == prof[n]) peers.push_back(i);
  return peers;
}

inline double sinr(const tvws::Network& net, const std::vector<int>& active,
                   const std::vector<int>& prof, int n) {
  const double alpha = net.pathloss_exp();
  double interference = 0.0;
  for (int i : co_channel_peers(net, active, prof, n))
    interference += net.ap(i).tx_power_w * std::pow(distance(net, i, n), -alpha);
  const double signal = net.ap(n).tx_power_w * std::pow(net.ap(n).rx_distance_m, -alpha);
  return signal / (interference + net.noise_watts());
}

inline double throughput(const tvws::Network& net, const std::vector<int>& active,
                         const std::vector<int>& prof, int n) {
  return net.bandwidth_hz() * std::log2(1.0 + sinr(net, active, prof, n));
}

inline double weighted_interference(const tvws::Network& net, const std::vector<int>& active,
                                    const std::vector<int>& prof, int n) {
  const double alpha = net.pathloss_exp();
  double sum = 0.0;
  for (int i : co_channel_peers(net, active, prof, n))
    sum += net.ap(i).tx_power_w * net.ap(n).tx_power_w * std::pow(distance(net, i, n), -alpha);
  return -sum;
}

inline double potential(const tvws::Network& net, const std::vector<int>& active,
                        const std::vector<int>& prof) {
  double sum = 0.0;
  for (int n : active) sum += weighted_interference(net, active, prof, n);
  return sum;
}

inline double state_probability(const tvws::Network& net, const std::vector<int>& active) {
  std::vector<bool> in(static_cast<std::size_t>(net.size()), false);
  for (int n : active) in[static_cast<std::size_t>(n)] = true;
  double p = 1.0;
  for (int n = 0; n < net.size(); ++n)
    p *= in[static_cast<std::size_t>(n)] ? net.ap(n).active_prob : 1.0 - net.ap(n).active_prob;
  return p;
}

inline std::vector<std::vector<int>> all_subsets(int n_users) {
  std::vector<std::vector<int>> out;
  for (unsigned mask = 0; mask < (1u << n_users); ++mask) {
    std::vector<int> members;
    for (int n = 0; n < n_users; ++n)
      if (mask & (1u << n)) members.push_back(n);
    out.push_back(std::move(members));
  }
  return out;
}

/// Plain enumeration of the expected per-state utility (zero when inactive).
inline double expected_utility(const tvws::Network& net, const std::vector<int>& prof, int n) {
  double total = 0.0;
  for (const auto& active : all_subsets(net.size())) {
    bool contains = false;
    for (int i : active) contains |= (i == n);
    if (!contains) continue;
    total += state_probability(net, active) * throughput(net, active, prof, n);
  }
  return total;
}

inline double expected_network_throughput(const tvws::Network& net, const std::vector<int>& prof) {
  double total = 0.0;
  for (int n = 0; n < net.size(); ++n) total += expected_utility(net, prof, n);
  return total;
}

/// Closed form of the expected potential: minus the sum over ordered
/// co-channel pairs of lambda_i * lambda_j * P_i * P_j * d^(-alpha).
inline double expected_potential_closed_form(const tvws::Network& net,
                                             const std::vector<int>& prof) {
  const double alpha = net.pathloss_exp();
  double sum = 0.0;
  for (int i = 0; i < net.size(); ++i) {
    for (int j = 0; j < net.size(); ++j) {
      if (i == j || prof[i] != prof[j]) continue;
      sum += net.ap(i).active_prob * net.ap(j).active_prob * net.ap(i).tx_power_w *
             net.ap(j).tx_power_w * std::pow(distance(net, i, j), -alpha);
    }
  }
  return sum == 0.0 ? 0.0 : -sum;
}

/// Exhaustive pure-NE deviation check on the per-state game: every active
/// user, every alternative channel.
inline bool is_pure_ne_state(const tvws::Network& net, const std::vector<int>& active,
                             const std::vector<int>& prof, double rel_tol = 1e-12) {
  for (int n : active) {
    const double current = throughput(net, active, prof, n);
    for (int c : net.ap(n).channels) {
      if (c == prof[n]) continue;
      std::vector<int> moved = prof;
      moved[static_cast<std::size_t>(n)] = c;
      const double v = throughput(net, active, moved, n);
      if (v - current > rel_tol * std::max(std::abs(current), std::abs(v))) return false;
    }
  }
  return true;
}

/// Exhaustive pure-NE deviation check on the robust game via plain
/// enumeration.
inline bool is_pure_ne_robust(const tvws::Network& net, const std::vector<int>& prof,
                              double rel_tol = 1e-12) {
  for (int n = 0; n < net.size(); ++n) {
    const double current = expected_utility(net, prof, n);
    for (int c : net.ap(n).channels) {
      if (c == prof[n]) continue;
      std::vector<int> moved = prof;
      moved[static_cast<std::size_t>(n)] = c;
      const double v = expected_utility(net, moved, n);
      if (v - current > rel_tol * std::max(std::abs(current), std::abs(v))) return false;
    }
  }
  return true;
}

}  // namespace oracle
