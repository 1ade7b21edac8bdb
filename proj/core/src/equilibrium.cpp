#include "tvws/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "tvws/errors.hpp"

namespace tvws {

bool is_improvement(double from_value, double to_value) {
  const double gain = to_value - from_value;
  if (!(gain > 0.0)) return false;
  const double scale = std::max(std::abs(from_value), std::abs(to_value));
  return gain > kImprovementRelTol * scale;
}

NeCheck is_pure_ne_state(const Network& net, const ActiveSet& b,
                         const ChannelProfile& prof) {
  validate_profile(net, prof);
  ChannelProfile trial = prof;
  for (int n : b.members()) {
    const double current = utility(net, b, prof, n);
    for (int c : net.ap(n).channels) {
      if (c == prof[n]) continue;
      trial[n] = c;
      const double moved = utility(net, b, trial, n);
      if (is_improvement(current, moved))
        return {false, Deviation{n, c, moved - current}};
    }
    trial[n] = prof[n];
  }
  return {true, std::nullopt};
}

NeCheck is_pure_ne_robust(const ExpectedValueEvaluator& eval, const ChannelProfile& prof) {
  const Network& net = eval.network();
  validate_profile(net, prof);
  ChannelProfile trial = prof;
  for (int n = 0; n < net.size(); ++n) {
    const double current = eval.utility(prof, n);
    for (int c : net.ap(n).channels) {
      if (c == prof[n]) continue;
      trial[n] = c;
      const double moved = eval.utility(trial, n);
      if (is_improvement(current, moved))
        return {false, Deviation{n, c, moved - current}};
    }
    trial[n] = prof[n];
  }
  return {true, std::nullopt};
}

NeCheck is_pure_ne_robust(const Network& net, const ChannelProfile& prof,
                          const ExpectationMode& mode) {
  return is_pure_ne_robust(ExpectedValueEvaluator(net, mode), prof);
}

BrTrace best_response_dynamics(const Network& net, ChannelProfile start,
                               const BrOptions& opts) {
  validate_profile(net, start);
  if (opts.max_rounds < 1) throw ContractError("best_response_dynamics: max_rounds must be >= 1");

  const ExpectedValueEvaluator eval(net, opts.mode);
  Rng order_rng(derive_seed(opts.seed, 0x0bde7));

  BrTrace trace;
  trace.profiles.push_back(start);
  trace.potential_values.push_back(eval.potential(start));

  ChannelProfile prof = std::move(start);
  std::vector<int> order(static_cast<std::size_t>(net.size()));
  std::iota(order.begin(), order.end(), 0);

  for (int round = 0; round < opts.max_rounds; ++round) {
    trace.rounds = round + 1;
    if (opts.order == UpdateOrder::random) order_rng.shuffle(std::span<int>(order));

    bool switched_this_pass = false;
    for (int n : order) {
      const int current_channel = prof[n];
      const double current_value = eval.utility(prof, n);
      int best_channel = current_channel;
      double best_value = current_value;
      ChannelProfile trial = prof;
      for (int c : net.ap(n).channels) {
        if (c == current_channel) continue;
        trial[n] = c;
        const double v = eval.utility(trial, n);
        // Strict > keeps the current channel on exact ties and the lowest
        // index among tied alternatives.
        if (v > best_value) {
          best_value = v;
          best_channel = c;
        }
      }
      if (best_channel != current_channel && is_improvement(current_value, best_value)) {
        prof[n] = best_channel;
        trace.profiles.push_back(prof);
        trace.potential_values.push_back(eval.potential(prof));
        trace.switches += 1;
        switched_this_pass = true;
      }
    }

    if (!switched_this_pass) {
      trace.converged = true;
      break;
    }
  }

  trace.final_network_throughput = eval.network_throughput(prof);
  return trace;
}

OptimalResult exhaustive_optimal(const Network& net, const ExpectationMode& mode) {
  std::uint64_t space = 1;
  for (int n = 0; n < net.size(); ++n) {
    space *= net.ap(n).channels.size();
    if (space > kMaxExhaustiveProfiles)
      throw CapacityError("exhaustive_optimal: profile space exceeds " +
                          std::to_string(kMaxExhaustiveProfiles));
  }

  const ExpectedValueEvaluator eval(net, mode);
  const int n_users = net.size();

  // Odometer over per-user channel indices, lexicographic in the profile, so
  // the first strictly-better profile wins and ties resolve lexicographically.
  std::vector<std::size_t> pos(static_cast<std::size_t>(n_users), 0);
  ChannelProfile prof;
  prof.choice.resize(static_cast<std::size_t>(n_users));
  for (int n = 0; n < n_users; ++n) prof[n] = net.ap(n).channels[0];

  OptimalResult best{prof, eval.network_throughput(prof)};
  while (true) {
    int n = n_users - 1;
    while (n >= 0) {
      const auto& channels = net.ap(n).channels;
      if (++pos[static_cast<std::size_t>(n)] < channels.size()) {
        prof[n] = channels[pos[static_cast<std::size_t>(n)]];
        break;
      }
      pos[static_cast<std::size_t>(n)] = 0;
      prof[n] = channels[0];
      --n;
    }
    if (n < 0) break;

    const double value = eval.network_throughput(prof);
    if (value > best.expected_throughput_bps) {
      best.profile = prof;
      best.expected_throughput_bps = value;
    }
  }
  return best;
}

ChannelProfile random_profile(const Network& net, Rng& rng) {
  ChannelProfile prof;
  prof.choice.resize(static_cast<std::size_t>(net.size()));
  for (int n = 0; n < net.size(); ++n) {
    const auto& channels = net.ap(n).channels;
    prof[n] = channels[rng.uniform_index(channels.size())];
  }
  return prof;
}

}  // namespace tvws
