#pragma once

#include <cstdint>
#include <initializer_list>
#include <vector>

#include "tvws/rng.hpp"

namespace tvws {

/// One cognitive AP (transmitter/receiver link). The channel set and power cap
/// are the static geo-location database answer for this AP; `active_prob` is
/// the per-slot probability that the AP has traffic to send.
struct AccessPoint {
  int id = 0;             // 0-based internally; files use 1-based ids
  double x_m = 0.0;
  double y_m = 0.0;
  double tx_power_w = 0.0;
  std::vector<int> channels;  // sorted, duplicate-free, values in 1..num_channels
  double active_prob = 1.0;   // in (0,1]
  double rx_distance_m = 0.0; // distance to this AP's dedicated receiver
};

/// Subset of AP ids, i.e. one realization of the per-slot system state.
/// Stored as a bitmask; networks are capped at 64 APs.
class ActiveSet {
 public:
  ActiveSet() = default;
  ActiveSet(std::initializer_list<int> members) {
    for (int n : members) insert(n);
  }

  static ActiveSet full(int n_users) {
    ActiveSet b;
    b.bits_ = (n_users >= 64) ? ~0ULL : ((1ULL << n_users) - 1ULL);
    return b;
  }
  static ActiveSet from_bits(std::uint64_t bits) {
    ActiveSet b;
    b.bits_ = bits;
    return b;
  }

  void insert(int n) { bits_ |= (1ULL << n); }
  void erase(int n) { bits_ &= ~(1ULL << n); }
  bool contains(int n) const { return (bits_ >> n) & 1ULL; }
  bool empty() const { return bits_ == 0; }
  int size() const { return __builtin_popcountll(bits_); }
  std::uint64_t bits() const { return bits_; }

  std::vector<int> members() const {
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(size()));
    for (std::uint64_t m = bits_; m != 0; m &= m - 1) {
      out.push_back(__builtin_ctzll(m));
    }
    return out;
  }

  bool operator==(const ActiveSet&) const = default;

 private:
  std::uint64_t bits_ = 0;
};

/// Immutable network topology plus the channel/noise parameters shared by all
/// APs. Construction validates every invariant and precomputes the pairwise
/// distance and path-gain matrices; instances are safe to share across threads.
class Network {
 public:
  Network(std::vector<AccessPoint> aps, int num_channels, double bandwidth_hz,
          double noise_watts, double pathloss_exp);

  int size() const { return static_cast<int>(aps_.size()); }
  int num_channels() const { return num_channels_; }
  double bandwidth_hz() const { return bandwidth_hz_; }
  double noise_watts() const { return noise_watts_; }
  double pathloss_exp() const { return pathloss_exp_; }

  const AccessPoint& ap(int n) const { return aps_[static_cast<std::size_t>(n)]; }
  const std::vector<AccessPoint>& aps() const { return aps_; }

  /// Euclidean distance between AP i's and AP j's positions (symmetric).
  double dist(int i, int j) const { return dist_[idx(i, j)]; }

  /// dist(i,j)^(-alpha); the interference weight from transmitter i at n is
  /// tx_power(i) * path_gain(i,n). Only defined for i != j.
  double path_gain(int i, int j) const { return path_gain_[idx(i, j)]; }

  /// Received signal power at AP n's own receiver: P_n * rx_distance^(-alpha).
  double rx_power_w(int n) const { return rx_power_[static_cast<std::size_t>(n)]; }

 private:
  std::size_t idx(int i, int j) const {
    return static_cast<std::size_t>(i) * aps_.size() + static_cast<std::size_t>(j);
  }

  std::vector<AccessPoint> aps_;
  int num_channels_;
  double bandwidth_hz_;
  double noise_watts_;
  double pathloss_exp_;
  std::vector<double> dist_;
  std::vector<double> path_gain_;
  std::vector<double> rx_power_;
};

/// Parameters for random topology generation. Defaults are the benchmark
/// setting: 500 m square, 5 channels of 6 MHz, -100 dBm noise, pathloss 4,
/// 20 m receivers, channels independently available with probability 0.7,
/// powers drawn uniformly from a fixed mW menu, every AP active with
/// probability 0.8.
struct GenParams {
  double area_side_m = 500.0;
  int num_channels = 5;
  double bandwidth_hz = 6e6;
  double noise_dbm = -100.0;
  double pathloss_exp = 4.0;
  double rx_distance_m = 20.0;
  double channel_avail_prob = 0.7;
  std::vector<double> power_menu_mw = {100, 200, 250, 300, 350, 280, 400};
  double active_prob = 0.8;
};

/// Draw a random topology: i.i.d. uniform positions, per-channel availability
/// coin flips (an AP whose set comes up empty is redrawn until non-empty),
/// power sampled from the menu. Pure function of (n_aps, seed, params).
Network generate_random_network(int n_aps, std::uint64_t seed,
                                const GenParams& params = {});

/// The canonical eight-AP benchmark network. Channel sets of APs 1-4 and the
/// power of AP 1 are fixed by the benchmark definition; the remaining
/// constants are repo fixtures (see data/fig2_network.json, which ships the
/// same network in file form).
Network fixture_fig2();

/// Probability of the exact activity realization `b`:
/// prod_{n in b} active_prob(n) * prod_{n not in b} (1 - active_prob(n)).
double state_probability(const Network& net, const ActiveSet& b);

/// Sample an activity realization; each AP is included independently with its
/// own active_prob. Consumes exactly net.size() draws from `rng`.
ActiveSet sample_active_set(const Network& net, Rng& rng);

/// Copy of `net` with every AP's active_prob replaced (uniform or per-user).
Network with_active_prob(const Network& net, double lambda);
Network with_active_prob(const Network& net, const std::vector<double>& lambdas);

}  // namespace tvws
