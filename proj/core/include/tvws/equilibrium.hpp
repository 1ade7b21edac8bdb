#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "tvws/game_core.hpp"

namespace tvws {

/// Minimum relative payoff gain for a deviation to count as an improvement.
/// Shared by the NE check and best-response dynamics so a converged run is a
/// fixed point of the check; guards against floating-point ping-pong between
/// exact-tie channels.
inline constexpr double kImprovementRelTol = 1e-12;

/// True when `gain` = to_value - from_value clears the relative threshold.
bool is_improvement(double from_value, double to_value);

struct Deviation {
  int user = 0;
  int channel = 0;  // the improving alternative
  double gain = 0.0;
};

struct NeCheck {
  bool is_ne = false;
  std::optional<Deviation> witness;  // set when is_ne is false
};

/// Pure-NE check for the per-state game on activity realization b: no active
/// user has an available channel with higher per-state utility. Scans users
/// and channels in ascending order; the witness is the first improvement.
NeCheck is_pure_ne_state(const Network& net, const ActiveSet& b, const ChannelProfile& prof);

/// Pure-NE check for the robust game: deviations are scored by expected
/// utility under `mode`.
NeCheck is_pure_ne_robust(const Network& net, const ChannelProfile& prof,
                          const ExpectationMode& mode);
NeCheck is_pure_ne_robust(const ExpectedValueEvaluator& eval, const ChannelProfile& prof);

enum class UpdateOrder {
  round_robin,  // users 0..N-1 in index order every pass
  random,       // fresh seeded permutation per pass
};

struct BrOptions {
  UpdateOrder order = UpdateOrder::random;
  std::uint64_t seed = 0;  // drives the per-pass permutations
  int max_rounds = 200;
  ExpectationMode mode = ExpectationMode::exact();
};

/// Trace of one best-response run on the robust game. profiles[0] is the
/// start; one further entry per accepted switch, with the expected potential
/// recorded alongside (strictly increasing across switches on every instance
/// where the potential-game property holds).
struct BrTrace {
  std::vector<ChannelProfile> profiles;
  std::vector<double> potential_values;
  bool converged = false;
  int rounds = 0;
  int switches = 0;

  const ChannelProfile& final_profile() const { return profiles.back(); }
  double final_network_throughput = 0.0;
};

/// Asynchronous best response on the robust game: each user in turn moves to
/// its expected-utility-maximizing channel (ties keep the current channel,
/// then prefer the lowest index; switches require a relative gain above
/// kImprovementRelTol). Stops after a full pass without a switch, or at
/// max_rounds with converged = false.
BrTrace best_response_dynamics(const Network& net, ChannelProfile start,
                               const BrOptions& opts);

/// Search-space guard for exhaustive_optimal.
inline constexpr std::uint64_t kMaxExhaustiveProfiles = 10'000'000;

struct OptimalResult {
  ChannelProfile profile;
  double expected_throughput_bps = 0.0;
};

/// Centralized oracle: argmax of expected network throughput over every joint
/// profile, iterated lexicographically (so ties resolve to the
/// lexicographically smallest profile). Throws CapacityError when the profile
/// count exceeds kMaxExhaustiveProfiles.
OptimalResult exhaustive_optimal(const Network& net, const ExpectationMode& mode);

/// Uniformly random valid profile (each user's channel drawn from its set).
ChannelProfile random_profile(const Network& net, Rng& rng);

}  // namespace tvws
