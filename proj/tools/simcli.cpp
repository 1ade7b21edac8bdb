// simcli: command line front end for the TV-white-space spectrum access
// simulator. Subcommands:
//
//   generate     draw a random topology and write it as a network file
//   eval         print per-user payoff breakdowns for one profile and state
//   learn        run the distributed learning algorithm on a network
//   equilibrium  run seeded best-response trials, report best/worst NE
//   optimal      exhaustive-search optimum of expected network throughput
//   experiment   run a config-driven sweep and emit records/summary files
//   verify       sample random deviations and check the potential-game
//                invariants (exit code 2 when a violation is found)
//
// All randomness is seeded; re-running a command with the same flags and
// config produces byte-identical outputs.

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tvws/equilibrium.hpp"
#include "tvws/game_core.hpp"
#include "tvws/harness.hpp"
#include "tvws/learning.hpp"
#include "tvws/net_model.hpp"
#include "tvws/network_io.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitViolation = 2;

tvws::Network resolve_network(const std::string& path) {
  if (path.empty() || path == "fixture") return tvws::fixture_fig2();
  return tvws::load_network(path);
}

void apply_lambda(tvws::Network& net, const std::optional<double>& uniform,
                  const std::vector<double>& per_user) {
  if (!per_user.empty()) {
    net = tvws::with_active_prob(net, per_user);
  } else if (uniform) {
    net = tvws::with_active_prob(net, *uniform);
  }
}

void write_text(const std::string& path, const std::string& body) {
  if (path.empty() || path == "-") {
    std::cout << body;
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out << body;
  if (!out) throw std::runtime_error(path + ": write failed");
}

std::string fmt(double x) { return tvws::format_double(x); }

tvws::ExpectationMode pick_mode(const tvws::Network& net, std::size_t mc_samples,
                                std::uint64_t seed) {
  if (net.size() <= tvws::kMaxExactUsers) return tvws::ExpectationMode::exact();
  return tvws::ExpectationMode::monte_carlo(mc_samples, seed);
}

int cmd_generate(int n_aps, std::uint64_t seed, const tvws::GenParams& params,
                 const std::string& output) {
  const tvws::Network net = tvws::generate_random_network(n_aps, seed, params);
  std::ostringstream body;
  tvws::write_network(net, body);
  write_text(output, body.str());
  return kExitOk;
}

int cmd_eval(const std::string& network, const std::vector<int>& profile,
             const std::vector<int>& active_ids, const std::string& output) {
  const tvws::Network net = resolve_network(network);

  tvws::ChannelProfile prof;
  if (profile.empty()) {
    for (int n = 0; n < net.size(); ++n) prof.choice.push_back(net.ap(n).channels[0]);
  } else {
    prof.choice = profile;
  }
  tvws::validate_profile(net, prof);

  tvws::ActiveSet b = tvws::ActiveSet::full(net.size());
  if (!active_ids.empty()) {
    b = tvws::ActiveSet();
    for (int id : active_ids) {
      if (id < 1 || id > net.size())
        throw std::runtime_error("--active: user id " + std::to_string(id) +
                                 " out of range 1.." + std::to_string(net.size()));
      b.insert(id - 1);
    }
  }

  std::ostringstream out;
  out << "user,channel,sinr,throughput_bps,v_n\n";
  for (int n : b.members()) {
    const tvws::PayoffBreakdown pb = tvws::payoff_breakdown(net, b, prof, n);
    out << (n + 1) << ',' << prof[n] << ',' << fmt(pb.sinr) << ','
        << fmt(pb.throughput_bps) << ',' << fmt(-pb.weighted_interference) << '\n';
  }
  write_text(output, out.str());
  return kExitOk;
}

int cmd_learn(const std::string& network, std::int64_t iterations, double step_size,
              std::uint64_t seed, const std::string& trace_path,
              const std::optional<double>& lambda, const std::vector<double>& lambdas,
              std::size_t mc_samples) {
  tvws::Network net = resolve_network(network);
  apply_lambda(net, lambda, lambdas);

  tvws::LearningOptions opts;
  opts.iterations = iterations;
  opts.step_size = step_size;
  opts.seed = seed;

  std::size_t widest = 0;
  for (int n = 0; n < net.size(); ++n)
    widest = std::max(widest, net.ap(n).channels.size());

  std::ofstream trace;
  tvws::SlotObserver observer;
  if (!trace_path.empty()) {
    trace.open(trace_path);
    if (!trace) throw std::runtime_error(trace_path + ": cannot open for writing");
    trace << "slot,user,active,chosen_channel,r";
    for (std::size_t j = 1; j <= widest; ++j) trace << ",q_" << j;
    trace << '\n';
    observer = [&](const tvws::SlotRecord& slot, const tvws::MixedStrategyTable& table) {
      for (int n = 0; n < net.size(); ++n) {
        const bool active = slot.active.contains(n);
        trace << slot.slot << ',' << (n + 1) << ',' << (active ? 1 : 0) << ',';
        if (active) {
          std::size_t i = 0;
          while (slot.users[i] != n) ++i;
          trace << slot.chosen[i] << ',' << fmt(slot.normalized[i]);
        } else {
          trace << ',';
        }
        const auto& row = table.rows[static_cast<std::size_t>(n)];
        for (std::size_t j = 0; j < widest; ++j) {
          trace << ',';
          if (j < row.size()) trace << fmt(row[j]);
        }
        trace << '\n';
      }
    };
  }

  const tvws::LearningResult result = tvws::run_learning(net, opts, observer);
  const tvws::ExpectationMode mode = pick_mode(net, mc_samples, tvws::derive_seed(seed, 0xE7A1));
  const double value = tvws::expected_network_throughput(net, result.final_profile, mode);

  std::cout << "slots=" << result.slots_run << " converged=" << (result.converged ? 1 : 0)
            << " convergence_slot=" << result.convergence_slot << " profile=";
  for (int n = 0; n < net.size(); ++n) {
    if (n) std::cout << ',';
    std::cout << result.final_profile[n];
  }
  std::cout << " expected_throughput_bps=" << fmt(value) << '\n';
  return kExitOk;
}

int cmd_equilibrium(const std::string& network, int trials, std::uint64_t seed,
                    int max_rounds, bool with_optimal, const std::string& output,
                    const std::optional<double>& lambda, const std::vector<double>& lambdas,
                    std::size_t mc_samples) {
  tvws::Network net = resolve_network(network);
  apply_lambda(net, lambda, lambdas);
  const tvws::ExpectationMode mode = pick_mode(net, mc_samples, tvws::derive_seed(seed, 0xE7A1));

  std::ostringstream out;
  out << "trial,seed,rounds,converged,expected_throughput_bps\n";
  std::optional<double> best, worst;
  for (int trial = 0; trial < trials; ++trial) {
    const std::uint64_t trial_seed = tvws::derive_seed(seed, static_cast<std::uint64_t>(trial));
    tvws::Rng start_rng(tvws::derive_seed(trial_seed, 0));
    tvws::BrOptions opts;
    opts.order = tvws::UpdateOrder::random;
    opts.seed = tvws::derive_seed(trial_seed, 1);
    opts.max_rounds = max_rounds;
    opts.mode = mode;
    const tvws::BrTrace trace =
        tvws::best_response_dynamics(net, tvws::random_profile(net, start_rng), opts);
    const double value = trace.final_network_throughput;
    if (!best || value > *best) best = value;
    if (!worst || value < *worst) worst = value;
    out << trial << ',' << trial_seed << ',' << trace.rounds << ','
        << (trace.converged ? 1 : 0) << ',' << fmt(value) << '\n';
  }

  out << "best_ne,worst_ne,optimal\n";
  out << (best ? fmt(*best) : "") << ',' << (worst ? fmt(*worst) : "") << ',';
  if (with_optimal) {
    const tvws::OptimalResult opt = tvws::exhaustive_optimal(net, mode);
    out << fmt(opt.expected_throughput_bps);
  }
  out << '\n';
  write_text(output, out.str());
  return kExitOk;
}

int cmd_optimal(const std::string& network, const std::string& output,
                const std::optional<double>& lambda, const std::vector<double>& lambdas,
                std::size_t mc_samples, std::uint64_t seed) {
  tvws::Network net = resolve_network(network);
  apply_lambda(net, lambda, lambdas);
  const tvws::ExpectationMode mode = pick_mode(net, mc_samples, tvws::derive_seed(seed, 0xE7A1));
  const tvws::OptimalResult opt = tvws::exhaustive_optimal(net, mode);

  std::ostringstream out;
  out << "trial,seed,rounds,converged,expected_throughput_bps\n";
  out << "0,0,0,1," << fmt(opt.expected_throughput_bps) << '\n';
  out << "best_ne,worst_ne,optimal\n";
  out << ",," << fmt(opt.expected_throughput_bps) << '\n';
  write_text(output, out.str());

  std::cerr << "optimal profile:";
  for (int n = 0; n < net.size(); ++n) std::cerr << ' ' << opt.profile[n];
  std::cerr << '\n';
  return kExitOk;
}

int cmd_experiment(const std::string& config_path, const std::string& output_dir,
                   const std::optional<std::uint64_t>& seed_override) {
  tvws::ExperimentConfig cfg = tvws::load_experiment_config(config_path);
  if (seed_override) cfg.seed = *seed_override;

  const tvws::ExperimentResult result = tvws::run_experiment(cfg);
  tvws::emit_outputs(result, tvws::OutputFormat::csv, output_dir);
  tvws::emit_outputs(result, tvws::OutputFormat::json, output_dir);

  // Human-readable recap on stdout; files carry the full data.
  std::cout << result.sweep_key << ",optimal,best_ne,worst_ne,learning_mean\n";
  for (const tvws::SweepSummary& s : result.summary) {
    auto cell = [](const std::optional<double>& v) { return v ? fmt(*v) : std::string(); };
    std::cout << fmt(s.sweep_value) << ',' << cell(s.optimal) << ',' << cell(s.best_ne)
              << ',' << cell(s.worst_ne) << ',' << cell(s.learning_mean) << '\n';
  }
  return kExitOk;
}

int cmd_verify(const std::string& network, int deviations, std::uint64_t seed,
               bool robust, std::size_t mc_samples,
               const std::optional<double>& lambda, const std::vector<double>& lambdas) {
  tvws::Network net = resolve_network(network);
  apply_lambda(net, lambda, lambdas);

  tvws::VerifyOptions opts;
  opts.deviations = deviations;
  opts.seed = seed;
  opts.state_checks = true;
  opts.robust_checks = robust;
  opts.mc_samples = mc_samples;

  const tvws::OpgReport report = tvws::verify_opg(net, opts);
  std::cout << "deviations=" << report.deviations << " state_checks=" << report.state_checks
            << " factor2_checks=" << report.factor2_checks
            << " robust_checks=" << report.robust_checks
            << " max_factor2_rel_err=" << fmt(report.max_factor2_rel_err)
            << " violations=" << report.violations.size() << '\n';
  for (const tvws::OpgViolation& v : report.violations) {
    std::cout << "violation check=" << v.check << " user=" << (v.user + 1)
              << " from=" << v.from_channel << " to=" << v.to_channel
              << " active_bits=" << v.active_bits << " delta_u=" << fmt(v.delta_utility)
              << " delta_v=" << fmt(v.delta_v) << " delta_phi=" << fmt(v.delta_potential)
              << " profile=";
    for (int n = 0; n < v.profile.size(); ++n) {
      if (n) std::cout << ',';
      std::cout << v.profile[n];
    }
    std::cout << '\n';
  }
  return report.ok() ? kExitOk : kExitViolation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"TV-white-space dynamic spectrum access simulator"};
  app.require_subcommand(1);

  // generate
  auto* generate = app.add_subcommand("generate", "Draw a random topology and write a network file");
  int gen_n_aps = 8;
  std::uint64_t gen_seed = 1;
  tvws::GenParams gen_params;
  std::string gen_output;
  generate->add_option("--n-aps", gen_n_aps, "Number of APs")->check(CLI::PositiveNumber);
  generate->add_option("--seed", gen_seed, "Generation seed");
  generate->add_option("--area", gen_params.area_side_m, "Square side, meters");
  generate->add_option("--channels", gen_params.num_channels, "Number of channels");
  generate->add_option("--theta", gen_params.channel_avail_prob,
                       "Per-channel availability probability");
  generate->add_option("--lambda", gen_params.active_prob, "Active probability per AP");
  generate->add_option("--output,-o", gen_output, "Network file path (default stdout)");

  // eval
  auto* eval = app.add_subcommand("eval", "Per-user payoff breakdown as CSV");
  std::string eval_network;
  std::vector<int> eval_profile, eval_active;
  std::string eval_output;
  eval->add_option("--network", eval_network, "Network file ('fixture' or empty for the built-in)");
  eval->add_option("--profile", eval_profile, "Channel per user, comma separated")->delimiter(',');
  eval->add_option("--active", eval_active, "Active user ids (1-based), comma separated; default all")
      ->delimiter(',');
  eval->add_option("--output,-o", eval_output, "CSV path (default stdout)");

  // learn
  auto* learn = app.add_subcommand("learn", "Run the distributed learning algorithm");
  std::string learn_network, learn_trace;
  std::int64_t learn_iterations = 2000;
  double learn_step = 0.1;
  std::uint64_t learn_seed = 1;
  std::optional<double> learn_lambda;
  std::vector<double> learn_lambdas;
  std::size_t learn_mc = 100000;
  learn->add_option("--network", learn_network, "Network file ('fixture' or empty for the built-in)");
  learn->add_option("--iterations", learn_iterations, "Slot budget")->check(CLI::PositiveNumber);
  learn->add_option("--step-size", learn_step, "Learning step size b");
  learn->add_option("--seed", learn_seed, "Run seed");
  learn->add_option("--trace", learn_trace, "Per-slot trace CSV path");
  learn->add_option("--lambda", learn_lambda, "Uniform active probability override");
  learn->add_option("--lambdas", learn_lambdas, "Per-user active probabilities")->delimiter(',');
  learn->add_option("--mc-samples", learn_mc, "Expectation samples past the exact cap");

  // equilibrium
  auto* equilibrium = app.add_subcommand("equilibrium", "Seeded best-response trials");
  std::string eq_network, eq_output;
  int eq_trials = 500;
  std::uint64_t eq_seed = 1;
  int eq_max_rounds = 200;
  bool eq_no_optimal = false;
  std::optional<double> eq_lambda;
  std::vector<double> eq_lambdas;
  std::size_t eq_mc = 100000;
  equilibrium->add_option("--network", eq_network, "Network file ('fixture' or empty for the built-in)");
  equilibrium->add_option("--trials", eq_trials, "Best-response trial count")->check(CLI::PositiveNumber);
  equilibrium->add_option("--seed", eq_seed, "Trial seed base");
  equilibrium->add_option("--max-rounds", eq_max_rounds, "Round cap per trial");
  equilibrium->add_flag("--no-optimal", eq_no_optimal, "Skip the exhaustive optimum in the summary row");
  equilibrium->add_option("--lambda", eq_lambda, "Uniform active probability override");
  equilibrium->add_option("--lambdas", eq_lambdas, "Per-user active probabilities")->delimiter(',');
  equilibrium->add_option("--mc-samples", eq_mc, "Expectation samples past the exact cap");
  equilibrium->add_option("--output,-o", eq_output, "CSV path (default stdout)");

  // optimal
  auto* optimal = app.add_subcommand("optimal", "Exhaustive-search optimum");
  std::string opt_network, opt_output;
  std::optional<double> opt_lambda;
  std::vector<double> opt_lambdas;
  std::size_t opt_mc = 100000;
  std::uint64_t opt_seed = 1;
  optimal->add_option("--network", opt_network, "Network file ('fixture' or empty for the built-in)");
  optimal->add_option("--lambda", opt_lambda, "Uniform active probability override");
  optimal->add_option("--lambdas", opt_lambdas, "Per-user active probabilities")->delimiter(',');
  optimal->add_option("--mc-samples", opt_mc, "Expectation samples past the exact cap");
  optimal->add_option("--seed", opt_seed, "Sampling seed past the exact cap");
  optimal->add_option("--output,-o", opt_output, "CSV path (default stdout)");

  // experiment
  auto* experiment = app.add_subcommand("experiment", "Config-driven sweep");
  std::string exp_config, exp_output = ".";
  std::optional<std::uint64_t> exp_seed;
  experiment->add_option("--config", exp_config, "Experiment config file")->required();
  experiment->add_option("--output,-o", exp_output, "Output directory");
  experiment->add_option("--seed", exp_seed, "Override the config seed");

  // verify
  auto* verify = app.add_subcommand("verify", "Check the potential-game invariants");
  std::string ver_network;
  int ver_deviations = 10000;
  std::uint64_t ver_seed = 1;
  bool ver_robust = false;
  std::size_t ver_mc = 100000;
  std::optional<double> ver_lambda;
  std::vector<double> ver_lambdas;
  verify->add_option("--network", ver_network, "Network file ('fixture' or empty for the built-in)");
  verify->add_option("--deviations", ver_deviations, "Sampled deviations")->check(CLI::PositiveNumber);
  verify->add_option("--seed", ver_seed, "Sampling seed");
  verify->add_flag("--robust", ver_robust, "Also check expected-quantity sign equivalence");
  verify->add_option("--mc-samples", ver_mc, "Expectation samples past the exact cap");
  verify->add_option("--lambda", ver_lambda, "Uniform active probability override");
  verify->add_option("--lambdas", ver_lambdas, "Per-user active probabilities")->delimiter(',');

  CLI11_PARSE(app, argc, argv);

  try {
    if (generate->parsed())
      return cmd_generate(gen_n_aps, gen_seed, gen_params, gen_output);
    if (eval->parsed())
      return cmd_eval(eval_network, eval_profile, eval_active, eval_output);
    if (learn->parsed())
      return cmd_learn(learn_network, learn_iterations, learn_step, learn_seed,
                       learn_trace, learn_lambda, learn_lambdas, learn_mc);
    if (equilibrium->parsed())
      return cmd_equilibrium(eq_network, eq_trials, eq_seed, eq_max_rounds,
                             !eq_no_optimal, eq_output, eq_lambda, eq_lambdas, eq_mc);
    if (optimal->parsed())
      return cmd_optimal(opt_network, opt_output, opt_lambda, opt_lambdas, opt_mc, opt_seed);
    if (experiment->parsed())
      return cmd_experiment(exp_config, exp_output, exp_seed);
    if (verify->parsed())
      return cmd_verify(ver_network, ver_deviations, ver_seed, ver_robust, ver_mc,
                        ver_lambda, ver_lambdas);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
