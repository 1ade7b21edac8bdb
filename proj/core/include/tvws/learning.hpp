#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "tvws/game_core.hpp"

namespace tvws {

/// Per-user mixed strategies over available channels. rows[n][j] is the
/// probability that user n picks its j-th available channel (ascending
/// channel order, matching AccessPoint::channels).
struct MixedStrategyTable {
  std::vector<std::vector<double>> rows;
  double step_size = 0.1;
  std::int64_t slot = 1;

  double row_sum(int n) const;
  double max_entry(int n) const;
  /// Channel (not index) with the largest probability; first maximum wins,
  /// so ties resolve to the lowest channel.
  int argmax_channel(const Network& net, int n) const;
  /// True when every row's max entry exceeds `threshold`.
  bool is_converged(double threshold) const;
};

/// Uniform initial table: 1/|A_n| per available channel, slot counter at 1.
MixedStrategyTable init_uniform(const Network& net, double step_size = 0.1);

/// Payoff scaled into [0,1]: per-state throughput divided by the user's
/// interference-free rate, clamped against round-off overshoot.
double normalized_payoff(const Network& net, const ActiveSet& b,
                         const ChannelProfile& prof, int n);

/// Linear reward-inaction update of user n's row: the chosen channel gains
/// b*r*(1 - q), every other channel loses b*r*q. Throws ContractError when r
/// is outside [0,1] or the channel is not available to n.
void sla_update(MixedStrategyTable& table, const Network& net, int n,
                int chosen_channel, double r);

/// What happened in one slot: who was active, what they picked, what they got.
struct SlotRecord {
  std::int64_t slot = 0;
  ActiveSet active;
  std::vector<int> users;       // active users, ascending
  std::vector<int> chosen;      // channel per active user
  std::vector<double> raw_bps;  // per-state throughput per active user
  std::vector<double> normalized;
};

/// Called after every completed slot with the record and the updated table.
using SlotObserver = std::function<void(const SlotRecord&, const MixedStrategyTable&)>;

struct LearningOptions {
  std::int64_t iterations = 2000;
  double step_size = 0.1;
  std::uint64_t seed = 0;
  /// A run counts as converged once every row's max entry exceeds this.
  double convergence_threshold = 0.99;
  /// Stop at the first converged slot instead of exhausting `iterations`.
  bool stop_when_converged = false;
};

struct LearningResult {
  MixedStrategyTable table;
  ChannelProfile final_profile;   // per-user argmax channel
  std::int64_t slots_run = 0;
  bool converged = false;
  std::int64_t convergence_slot = -1;  // first slot meeting the threshold; -1 if none
};

/// The distributed learning loop. Per slot: sample the active set, let each
/// active user draw a channel from its mixed strategy, score all active users
/// simultaneously on the joint draw, apply the reward-inaction update with the
/// normalized payoff, and leave inactive users' rows untouched. Deterministic
/// per seed; the activity stream and each user's channel stream are
/// independent sub-streams, so runs with different iteration counts share a
/// prefix.
LearningResult run_learning(const Network& net, const LearningOptions& opts,
                            const SlotObserver& observer = {});

}  // namespace tvws
