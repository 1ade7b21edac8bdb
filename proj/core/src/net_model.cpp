#include "tvws/net_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tvws/errors.hpp"
#include "tvws/numerics.hpp"

namespace tvws {

Network::Network(std::vector<AccessPoint> aps, int num_channels,
                 double bandwidth_hz, double noise_watts, double pathloss_exp)
    : aps_(std::move(aps)),
      num_channels_(num_channels),
      bandwidth_hz_(bandwidth_hz),
      noise_watts_(noise_watts),
      pathloss_exp_(pathloss_exp) {
  if (aps_.empty()) throw ContractError("Network: needs at least one AP");
  if (aps_.size() > 64) throw ContractError("Network: at most 64 APs supported");
  if (num_channels_ < 1) throw ContractError("Network: num_channels must be >= 1");
  if (!(bandwidth_hz_ > 0.0)) throw ContractError("Network: bandwidth must be positive");
  if (!(noise_watts_ > 0.0)) throw ContractError("Network: noise power must be positive");
  if (!(pathloss_exp_ > 0.0)) throw ContractError("Network: pathloss exponent must be positive");

  for (std::size_t n = 0; n < aps_.size(); ++n) {
    const AccessPoint& ap = aps_[n];
    const std::string who = "AP " + std::to_string(n) + ": ";
    if (ap.id != static_cast<int>(n))
      throw ContractError(who + "id must equal its index (0-based)");
    if (!(ap.tx_power_w > 0.0)) throw ContractError(who + "tx_power must be positive");
    if (!(ap.rx_distance_m > 0.0)) throw ContractError(who + "rx_distance must be positive");
    if (!(ap.active_prob > 0.0 && ap.active_prob <= 1.0))
      throw ContractError(who + "active_prob must lie in (0,1]");
    if (ap.channels.empty()) throw ContractError(who + "channel set must be non-empty");
    if (!std::is_sorted(ap.channels.begin(), ap.channels.end()))
      throw ContractError(who + "channel set must be sorted ascending");
    if (std::adjacent_find(ap.channels.begin(), ap.channels.end()) != ap.channels.end())
      throw ContractError(who + "channel set must be duplicate-free");
    if (ap.channels.front() < 1 || ap.channels.back() > num_channels_)
      throw ContractError(who + "channels must lie in 1.." + std::to_string(num_channels_));
  }

  const std::size_t n = aps_.size();
  dist_.assign(n * n, 0.0);
  path_gain_.assign(n * n, 0.0);
  rx_power_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    rx_power_[i] = aps_[i].tx_power_w * std::pow(aps_[i].rx_distance_m, -pathloss_exp_);
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = aps_[i].x_m - aps_[j].x_m;
      const double dy = aps_[i].y_m - aps_[j].y_m;
      const double d = std::hypot(dx, dy);
      if (!(d > 0.0))
        throw ContractError("APs " + std::to_string(i) + " and " + std::to_string(j) +
                            " are co-located; pairwise distances must be positive");
      dist_[i * n + j] = d;
      dist_[j * n + i] = d;
      const double g = std::pow(d, -pathloss_exp_);
      path_gain_[i * n + j] = g;
      path_gain_[j * n + i] = g;
    }
  }
}

Network generate_random_network(int n_aps, std::uint64_t seed,
                                const GenParams& params) {
  if (n_aps < 1) throw ContractError("generate_random_network: n_aps must be >= 1");
  if (!(params.channel_avail_prob > 0.0 && params.channel_avail_prob <= 1.0))
    throw ContractError("generate_random_network: channel availability probability must lie in (0,1]");
  if (params.power_menu_mw.empty())
    throw ContractError("generate_random_network: power menu must be non-empty");

  // Separate sub-streams per concern so adding a draw to one never shifts the
  // others.
  Rng pos_rng(derive_seed(seed, 0));
  Rng chan_rng(derive_seed(seed, 1));
  Rng power_rng(derive_seed(seed, 2));

  std::vector<AccessPoint> aps(static_cast<std::size_t>(n_aps));
  for (int n = 0; n < n_aps; ++n) {
    AccessPoint& ap = aps[static_cast<std::size_t>(n)];
    ap.id = n;
    ap.x_m = pos_rng.uniform(0.0, params.area_side_m);
    ap.y_m = pos_rng.uniform(0.0, params.area_side_m);
    do {
      ap.channels.clear();
      for (int c = 1; c <= params.num_channels; ++c) {
        if (chan_rng.bernoulli(params.channel_avail_prob)) ap.channels.push_back(c);
      }
    } while (ap.channels.empty());
    const std::size_t pick = power_rng.uniform_index(params.power_menu_mw.size());
    ap.tx_power_w = params.power_menu_mw[pick] * 1e-3;
    ap.active_prob = params.active_prob;
    ap.rx_distance_m = params.rx_distance_m;
  }

  return Network(std::move(aps), params.num_channels, params.bandwidth_hz,
                 dbm_to_watts(params.noise_dbm), params.pathloss_exp);
}

double state_probability(const Network& net, const ActiveSet& b) {
  double p = 1.0;
  for (int n = 0; n < net.size(); ++n) {
    const double lambda = net.ap(n).active_prob;
    p *= b.contains(n) ? lambda : 1.0 - lambda;
  }
  return p;
}

ActiveSet sample_active_set(const Network& net, Rng& rng) {
  ActiveSet b;
  for (int n = 0; n < net.size(); ++n) {
    if (rng.bernoulli(net.ap(n).active_prob)) b.insert(n);
  }
  return b;
}

Network with_active_prob(const Network& net, double lambda) {
  return with_active_prob(net, std::vector<double>(static_cast<std::size_t>(net.size()), lambda));
}

Network with_active_prob(const Network& net, const std::vector<double>& lambdas) {
  if (static_cast<int>(lambdas.size()) != net.size())
    throw ContractError("with_active_prob: one probability per AP required");
  std::vector<AccessPoint> aps = net.aps();
  for (std::size_t n = 0; n < aps.size(); ++n) aps[n].active_prob = lambdas[n];
  return Network(std::move(aps), net.num_channels(), net.bandwidth_hz(),
                 net.noise_watts(), net.pathloss_exp());
}

}  // namespace tvws
