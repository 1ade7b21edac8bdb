#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tvws/equilibrium.hpp"
#include "tvws/learning.hpp"
#include "tvws/net_model.hpp"

namespace tvws {

enum class Method { optimal, best_response, learning };
std::string method_name(Method m);

struct NetworkSource {
  enum class Kind { fixture, file, random } kind = Kind::fixture;
  std::string path;        // kind == file
  int n_aps = 8;           // kind == random (overridden by an n_aps sweep)
  int topologies = 1;      // kind == random: independent topologies per sweep point
  std::uint64_t seed = 1;  // kind == random: topology seed base
  GenParams params;
};

struct LambdaSpec {
  enum class Kind { as_is, uniform, per_user, scenario } kind = Kind::as_is;
  double value = 0.8;          // uniform
  std::vector<double> values;  // per_user
  int scenario = 1;            // scenario (1..6)
};

struct SweepSpec {
  enum class Kind { none, lambda, n_aps, scenario } kind = Kind::none;
  std::vector<double> lambda_values;
  std::vector<int> int_values;  // AP counts or scenario ids
};

struct TrialCounts {
  int learning = 200;
  int best_response = 500;
};

/// Declarative description of one experiment; see configs/*.cfg for the JSON
/// schema (schema_version 1).
struct ExperimentConfig {
  int schema_version = 1;
  NetworkSource network;
  LambdaSpec lambda;
  std::vector<Method> methods{Method::optimal, Method::best_response, Method::learning};
  TrialCounts trials;
  std::int64_t iterations = 2000;
  double step_size = 0.1;
  SweepSpec sweep;
  std::size_t mc_samples = 100000;  // expectation sample count past the exact cap
  std::uint64_t seed = 1;
  int br_max_rounds = 200;
  bool write_trace = false;  // stream the first learning trial per sweep point
};

ExperimentConfig load_experiment_config(const std::string& path);
ExperimentConfig parse_experiment_config(std::istream& in, const std::string& origin);

/// The six named heterogeneous activity scenarios (1-based index); each is a
/// fixed list of eight per-user probabilities.
std::vector<double> scenario_lambdas(int index);

/// One method invocation on one (sweep point, topology, trial).
struct RunRecord {
  std::string method;
  double sweep_value = 0.0;
  int trial = 0;
  std::uint64_t seed = 0;
  double expected_throughput_bps = 0.0;
  /// Versus the optimal when computed, else versus the best NE at this point.
  std::optional<double> normalized_throughput;
  std::int64_t rounds_or_slots = 0;
};

struct SweepSummary {
  double sweep_value = 0.0;
  std::optional<double> optimal;
  std::optional<double> best_ne;
  std::optional<double> worst_ne;
  std::optional<double> learning_mean;
  std::optional<double> learning_std;
  std::optional<double> learning_norm_mean;  // only without an optimal baseline
};

/// One per-user learning trace row (per slot), for convergence plots.
struct TraceRow {
  double sweep_value = 0.0;
  std::int64_t slot = 0;
  int user = 0;  // 1-based, matching file convention
  bool active = false;
  int chosen_channel = 0;  // 0 when inactive
  double normalized_payoff = 0.0;
  std::vector<double> q;  // this user's row after the slot's update
};

struct ExperimentResult {
  std::string sweep_key;  // "lambda", "scenario", "n_aps" or "point"
  std::vector<RunRecord> records;
  std::vector<SweepSummary> summary;
  std::vector<TraceRow> trace;
};

/// Run every (sweep point x topology x method x trial) cell of the config.
/// Fully deterministic: every stochastic sub-task draws its seed from
/// cfg.seed via derive_seed chains.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

enum class OutputFormat { csv, json };

/// Write records/summary (and the trace when present) into `dir` as
/// records.{csv,json} etc. Re-emitting the same result is byte-identical;
/// CSV and JSON carry value-identical payloads.
void emit_outputs(const ExperimentResult& result, OutputFormat format,
                  const std::string& dir);

/// Shortest round-trip decimal form of x (the CSV number format).
std::string format_double(double x);

struct OpgViolation {
  std::string check;  // "state_sign", "factor2" or "robust_sign"
  std::uint64_t active_bits = 0;  // state for per-state checks
  ChannelProfile profile;
  int user = 0;
  int from_channel = 0;
  int to_channel = 0;
  double delta_utility = 0.0;      // delta omega for robust_sign
  double delta_v = 0.0;            // 0 for robust_sign
  double delta_potential = 0.0;    // delta Phi for robust_sign
};

struct VerifyOptions {
  int deviations = 10000;
  std::uint64_t seed = 1;
  bool state_checks = true;
  bool robust_checks = false;
  /// Sample count when the robust expectation cannot be exact (N past the cap).
  std::size_t mc_samples = 100000;
};

struct OpgReport {
  int deviations = 0;
  int state_checks = 0;
  int factor2_checks = 0;
  int robust_checks = 0;
  double max_factor2_rel_err = 0.0;
  std::vector<OpgViolation> violations;

  bool ok() const { return violations.empty(); }
};

/// Sample random (state, profile, user, alternative-channel) deviations and
/// check the potential-game invariants: per-state sign equivalence of
/// utility/potential changes, the potential change being exactly twice the
/// weighted-interference change, and (optionally) sign equivalence of the
/// expected quantities. Violations are report content, not exceptions.
OpgReport verify_opg(const Network& net, const VerifyOptions& opts);

/// Relative threshold below which a payoff/potential delta counts as zero in
/// sign-equivalence checks.
inline constexpr double kSignZeroRelTol = 1e-15;

}  // namespace tvws
