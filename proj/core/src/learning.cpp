#include "tvws/learning.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tvws/errors.hpp"
#include "tvws/numerics.hpp"

namespace tvws {

double MixedStrategyTable::row_sum(int n) const {
  KahanSum acc;
  for (double q : rows[static_cast<std::size_t>(n)]) acc.add(q);
  return acc.value();
}

double MixedStrategyTable::max_entry(int n) const {
  const auto& row = rows[static_cast<std::size_t>(n)];
  return *std::max_element(row.begin(), row.end());
}

int MixedStrategyTable::argmax_channel(const Network& net, int n) const {
  const auto& row = rows[static_cast<std::size_t>(n)];
  const std::size_t j = static_cast<std::size_t>(
      std::max_element(row.begin(), row.end()) - row.begin());
  return net.ap(n).channels[j];
}

bool MixedStrategyTable::is_converged(double threshold) const {
  for (std::size_t n = 0; n < rows.size(); ++n) {
    if (!(max_entry(static_cast<int>(n)) > threshold)) return false;
  }
  return true;
}

MixedStrategyTable init_uniform(const Network& net, double step_size) {
  if (!(step_size > 0.0 && step_size < 1.0))
    throw ContractError("init_uniform: step size must lie in (0,1)");
  MixedStrategyTable table;
  table.step_size = step_size;
  table.slot = 1;
  table.rows.resize(static_cast<std::size_t>(net.size()));
  for (int n = 0; n < net.size(); ++n) {
    const std::size_t width = net.ap(n).channels.size();
    table.rows[static_cast<std::size_t>(n)].assign(width, 1.0 / static_cast<double>(width));
  }
  return table;
}

double normalized_payoff(const Network& net, const ActiveSet& b,
                         const ChannelProfile& prof, int n) {
  const double r = throughput_bps(net, b, prof, n) / interference_free_throughput_bps(net, n);
  return std::clamp(r, 0.0, 1.0);
}

void sla_update(MixedStrategyTable& table, const Network& net, int n,
                int chosen_channel, double r) {
  if (!(r >= 0.0 && r <= 1.0))
    throw ContractError("sla_update: normalized payoff must lie in [0,1]");
  const auto& channels = net.ap(n).channels;
  const auto it = std::find(channels.begin(), channels.end(), chosen_channel);
  if (it == channels.end())
    throw ContractError("sla_update: channel " + std::to_string(chosen_channel) +
                        " is not available to user " + std::to_string(n));
  const std::size_t chosen = static_cast<std::size_t>(it - channels.begin());

  auto& row = table.rows[static_cast<std::size_t>(n)];
  const double br = table.step_size * r;
  for (std::size_t j = 0; j < row.size(); ++j) {
    if (j == chosen) {
      row[j] += br * (1.0 - row[j]);
    } else {
      row[j] -= br * row[j];
    }
  }
}

LearningResult run_learning(const Network& net, const LearningOptions& opts,
                            const SlotObserver& observer) {
  if (opts.iterations < 1) throw ContractError("run_learning: iterations must be >= 1");

  const int n_users = net.size();

  // Independent sub-streams: 0 for activity, n+1 for user n's channel draws.
  Rng activity_rng(derive_seed(opts.seed, 0));
  std::vector<Rng> draw_rngs;
  draw_rngs.reserve(static_cast<std::size_t>(n_users));
  for (int n = 0; n < n_users; ++n)
    draw_rngs.emplace_back(derive_seed(opts.seed, static_cast<std::uint64_t>(n) + 1));

  std::vector<double> rmax(static_cast<std::size_t>(n_users));
  for (int n = 0; n < n_users; ++n)
    rmax[static_cast<std::size_t>(n)] = interference_free_throughput_bps(net, n);

  MixedStrategyTable table = init_uniform(net, opts.step_size);

  // Standing choices; only entries of active users matter for payoffs.
  ChannelProfile prof;
  prof.choice.resize(static_cast<std::size_t>(n_users));
  for (int n = 0; n < n_users; ++n) prof[n] = net.ap(n).channels[0];

  LearningResult result;
  SlotRecord record;

  for (std::int64_t k = 0; k < opts.iterations; ++k) {
    const ActiveSet active = sample_active_set(net, activity_rng);

    record.slot = table.slot;
    record.active = active;
    record.users = active.members();
    record.chosen.clear();
    record.raw_bps.clear();
    record.normalized.clear();

    for (int n : record.users) {
      const auto& row = table.rows[static_cast<std::size_t>(n)];
      const std::size_t j = draw_rngs[static_cast<std::size_t>(n)].categorical(row);
      prof[n] = net.ap(n).channels[j];
      record.chosen.push_back(prof[n]);
    }

    // All active users transmit simultaneously on the joint draw.
    for (int n : record.users) {
      const double raw = throughput_bps(net, active, prof, n);
      record.raw_bps.push_back(raw);
      record.normalized.push_back(
          std::clamp(raw / rmax[static_cast<std::size_t>(n)], 0.0, 1.0));
    }

    for (std::size_t i = 0; i < record.users.size(); ++i) {
      sla_update(table, net, record.users[i], record.chosen[i], record.normalized[i]);
    }

    table.slot += 1;
    result.slots_run = k + 1;

    if (observer) observer(record, table);

    if (result.convergence_slot < 0 && table.is_converged(opts.convergence_threshold)) {
      result.convergence_slot = record.slot;
      if (opts.stop_when_converged) break;
    }
  }

  result.converged = table.is_converged(opts.convergence_threshold);
  result.final_profile.choice.resize(static_cast<std::size_t>(n_users));
  for (int n = 0; n < n_users; ++n)
    result.final_profile[n] = table.argmax_channel(net, n);
  result.table = std::move(table);
  return result;
}

}  // namespace tvws
