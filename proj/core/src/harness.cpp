#include "tvws/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "tvws/errors.hpp"
#include "tvws/network_io.hpp"
#include "tvws/numerics.hpp"

namespace tvws {

using nlohmann::json;

std::string method_name(Method m) {
  switch (m) {
    case Method::optimal: return "optimal";
    case Method::best_response: return "best_response";
    case Method::learning: return "learning";
  }
  return "?";
}

std::vector<double> scenario_lambdas(int index) {
  static const std::vector<double> scenarios[6] = {
      {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8},
      {0.3, 0.3, 0.3, 0.6, 0.6, 0.9, 0.9, 0.9},
      {0.3, 0.4, 0.5, 0.5, 0.5, 0.6, 0.7, 0.8},
      {0.4, 0.4, 0.4, 0.6, 0.6, 0.6, 0.6, 0.6},
      {0.3, 0.6, 0.6, 0.6, 0.6, 0.6, 0.6, 0.7},
      {0.6, 0.6, 0.6, 0.6, 0.6, 0.6, 0.6, 0.7},
  };
  if (index < 1 || index > 6)
    throw ContractError("scenario index must lie in 1..6");
  return scenarios[index - 1];
}

// ---------------------------------------------------------------------------
// Config parsing
// ---------------------------------------------------------------------------

namespace {

[[noreturn]] void fail(const std::string& origin, const std::string& what) {
  throw std::runtime_error(origin + ": " + what);
}

Method method_from_name(const std::string& name, const std::string& origin) {
  if (name == "optimal") return Method::optimal;
  if (name == "best_response") return Method::best_response;
  if (name == "learning") return Method::learning;
  fail(origin, "unknown method \"" + name + "\"");
}

GenParams parse_gen_params(const json& p, const std::string& origin) {
  GenParams out;
  out.area_side_m = p.value("area_side_m", out.area_side_m);
  out.num_channels = p.value("num_channels", out.num_channels);
  out.bandwidth_hz = p.value("bandwidth_hz", out.bandwidth_hz);
  out.noise_dbm = p.value("noise_dbm", out.noise_dbm);
  out.pathloss_exp = p.value("pathloss_exp", out.pathloss_exp);
  out.rx_distance_m = p.value("rx_distance_m", out.rx_distance_m);
  out.channel_avail_prob = p.value("channel_avail_prob", out.channel_avail_prob);
  if (p.contains("power_menu_mw"))
    out.power_menu_mw = p.at("power_menu_mw").get<std::vector<double>>();
  out.active_prob = p.value("active_prob", out.active_prob);
  if (!(out.channel_avail_prob > 0.0 && out.channel_avail_prob <= 1.0))
    fail(origin, "channel_avail_prob must lie in (0,1]");
  return out;
}

}  // namespace

ExperimentConfig parse_experiment_config(std::istream& in, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    fail(origin, std::string("not valid JSON: ") + e.what());
  }

  ExperimentConfig cfg;
  try {
    cfg.schema_version = doc.at("schema_version").get<int>();
    if (cfg.schema_version != 1)
      fail(origin, "unsupported schema_version " + std::to_string(cfg.schema_version));

    if (doc.contains("network")) {
      const json& net = doc.at("network");
      const std::string source = net.value("source", "fixture");
      if (source == "fixture") {
        cfg.network.kind = NetworkSource::Kind::fixture;
      } else if (source == "file") {
        cfg.network.kind = NetworkSource::Kind::file;
        cfg.network.path = net.at("path").get<std::string>();
      } else if (source == "random") {
        cfg.network.kind = NetworkSource::Kind::random;
        cfg.network.n_aps = net.value("n_aps", 8);
        cfg.network.topologies = net.value("topologies", 1);
        cfg.network.seed = net.value("seed", std::uint64_t{1});
        if (net.contains("params"))
          cfg.network.params = parse_gen_params(net.at("params"), origin);
      } else {
        fail(origin, "unknown network source \"" + source + "\"");
      }
    }

    if (doc.contains("lambda")) {
      const json& lam = doc.at("lambda");
      const std::string mode = lam.value("mode", "uniform");
      if (mode == "uniform") {
        cfg.lambda.kind = LambdaSpec::Kind::uniform;
        cfg.lambda.value = lam.at("value").get<double>();
      } else if (mode == "per_user") {
        cfg.lambda.kind = LambdaSpec::Kind::per_user;
        cfg.lambda.values = lam.at("values").get<std::vector<double>>();
      } else if (mode == "scenario") {
        cfg.lambda.kind = LambdaSpec::Kind::scenario;
        cfg.lambda.scenario = lam.at("index").get<int>();
        scenario_lambdas(cfg.lambda.scenario);  // range check
      } else if (mode == "as_is") {
        cfg.lambda.kind = LambdaSpec::Kind::as_is;
      } else {
        fail(origin, "unknown lambda mode \"" + mode + "\"");
      }
    }

    if (doc.contains("methods")) {
      cfg.methods.clear();
      for (const json& m : doc.at("methods"))
        cfg.methods.push_back(method_from_name(m.get<std::string>(), origin));
      if (cfg.methods.empty()) fail(origin, "methods must be non-empty");
    }

    if (doc.contains("trials")) {
      const json& t = doc.at("trials");
      cfg.trials.learning = t.value("learning", cfg.trials.learning);
      cfg.trials.best_response = t.value("best_response", cfg.trials.best_response);
      if (cfg.trials.learning < 1 || cfg.trials.best_response < 1)
        fail(origin, "trial counts must be >= 1");
    }

    cfg.iterations = doc.value("iterations", cfg.iterations);
    cfg.step_size = doc.value("step_size", cfg.step_size);
    cfg.mc_samples = doc.value("mc_samples", cfg.mc_samples);
    cfg.seed = doc.value("seed", cfg.seed);
    cfg.br_max_rounds = doc.value("br_max_rounds", cfg.br_max_rounds);
    cfg.write_trace = doc.value("write_trace", cfg.write_trace);
    if (cfg.iterations < 1) fail(origin, "iterations must be >= 1");
    if (!(cfg.step_size > 0.0 && cfg.step_size < 1.0))
      fail(origin, "step_size must lie in (0,1)");

    if (doc.contains("sweep")) {
      const json& sw = doc.at("sweep");
      const std::string key = sw.at("key").get<std::string>();
      if (key == "lambda") {
        cfg.sweep.kind = SweepSpec::Kind::lambda;
        cfg.sweep.lambda_values = sw.at("values").get<std::vector<double>>();
        for (double v : cfg.sweep.lambda_values)
          if (!(v > 0.0 && v <= 1.0)) fail(origin, "sweep lambda values must lie in (0,1]");
        if (cfg.sweep.lambda_values.empty()) fail(origin, "sweep values must be non-empty");
      } else if (key == "n_aps") {
        cfg.sweep.kind = SweepSpec::Kind::n_aps;
        cfg.sweep.int_values = sw.at("values").get<std::vector<int>>();
        for (int v : cfg.sweep.int_values)
          if (v < 1) fail(origin, "sweep n_aps values must be >= 1");
        if (cfg.sweep.int_values.empty()) fail(origin, "sweep values must be non-empty");
      } else if (key == "scenario") {
        cfg.sweep.kind = SweepSpec::Kind::scenario;
        cfg.sweep.int_values = sw.at("values").get<std::vector<int>>();
        for (int v : cfg.sweep.int_values) scenario_lambdas(v);  // range check
        if (cfg.sweep.int_values.empty()) fail(origin, "sweep values must be non-empty");
      } else {
        fail(origin, "unknown sweep key \"" + key + "\"");
      }
    }
  } catch (const json::exception& e) {
    fail(origin, std::string("bad experiment config: ") + e.what());
  }
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open config file");
  return parse_experiment_config(in, path);
}

// ---------------------------------------------------------------------------
// Experiment driver
// ---------------------------------------------------------------------------

namespace {

// Seed-derivation tags; one namespace per stochastic concern.
constexpr std::uint64_t kTagEval = 0xe1;
constexpr std::uint64_t kTagBr = 0xb2;
constexpr std::uint64_t kTagLearn = 0x13;

std::uint64_t seq_seed(std::uint64_t master, std::uint64_t tag, std::uint64_t a,
                       std::uint64_t b, std::uint64_t c = 0) {
  std::uint64_t s = derive_seed(master, tag);
  s = derive_seed(s, a);
  s = derive_seed(s, b);
  return derive_seed(s, c);
}

bool wants(const ExperimentConfig& cfg, Method m) {
  return std::find(cfg.methods.begin(), cfg.methods.end(), m) != cfg.methods.end();
}

struct SweepPoint {
  double value = 0.0;
  std::optional<double> lambda_uniform;
  std::optional<std::vector<double>> lambda_list;
  int n_aps = 0;  // 0 = from config
};

std::vector<SweepPoint> resolve_sweep(const ExperimentConfig& cfg, std::string& key) {
  std::vector<SweepPoint> points;
  auto base_lambda = [&](SweepPoint& p) {
    switch (cfg.lambda.kind) {
      case LambdaSpec::Kind::as_is: break;
      case LambdaSpec::Kind::uniform: p.lambda_uniform = cfg.lambda.value; break;
      case LambdaSpec::Kind::per_user: p.lambda_list = cfg.lambda.values; break;
      case LambdaSpec::Kind::scenario: p.lambda_list = scenario_lambdas(cfg.lambda.scenario); break;
    }
  };
  switch (cfg.sweep.kind) {
    case SweepSpec::Kind::none: {
      key = "point";
      SweepPoint p;
      base_lambda(p);
      points.push_back(std::move(p));
      break;
    }
    case SweepSpec::Kind::lambda: {
      key = "lambda";
      for (double v : cfg.sweep.lambda_values) {
        SweepPoint p;
        p.value = v;
        p.lambda_uniform = v;
        points.push_back(std::move(p));
      }
      break;
    }
    case SweepSpec::Kind::scenario: {
      key = "scenario";
      for (int s : cfg.sweep.int_values) {
        SweepPoint p;
        p.value = s;
        p.lambda_list = scenario_lambdas(s);
        points.push_back(std::move(p));
      }
      break;
    }
    case SweepSpec::Kind::n_aps: {
      key = "n_aps";
      for (int n : cfg.sweep.int_values) {
        SweepPoint p;
        p.value = n;
        p.n_aps = n;
        base_lambda(p);
        points.push_back(std::move(p));
      }
      break;
    }
  }
  return points;
}

double mean_of(const std::vector<double>& xs) {
  KahanSum acc;
  for (double x : xs) acc.add(x);
  return acc.value() / static_cast<double>(xs.size());
}

double stddev_of(const std::vector<double>& xs, double mean) {
  if (xs.size() < 2) return 0.0;
  KahanSum acc;
  for (double x : xs) acc.add((x - mean) * (x - mean));
  return std::sqrt(acc.value() / static_cast<double>(xs.size() - 1));
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  ExperimentResult result;
  std::vector<SweepPoint> points = resolve_sweep(cfg, result.sweep_key);

  // Random topologies are generated per sweep point; fixture/file networks are
  // shared across points (activity overrides produce copies).
  const Network base = (cfg.network.kind == NetworkSource::Kind::file)
                           ? load_network(cfg.network.path)
                           : fixture_fig2();

  for (std::size_t sp = 0; sp < points.size(); ++sp) {
    const SweepPoint& point = points[sp];

    const int topologies =
        (cfg.network.kind == NetworkSource::Kind::random) ? cfg.network.topologies : 1;

    std::vector<double> optimal_values;
    std::vector<double> bestne_values;
    std::vector<double> worstne_values;
    std::vector<double> learning_values;  // all trials, all topologies
    std::vector<double> learning_norms;   // per topology, only without optimal

    struct PendingRecord {
      RunRecord rec;
      int topology;
    };
    std::vector<PendingRecord> pending;

    for (int t = 0; t < topologies; ++t) {
      Network net = [&] {
        if (cfg.network.kind == NetworkSource::Kind::random) {
          GenParams params = cfg.network.params;
          const int n = point.n_aps > 0 ? point.n_aps : cfg.network.n_aps;
          const std::uint64_t topo_seed =
              derive_seed(derive_seed(cfg.network.seed, sp), static_cast<std::uint64_t>(t));
          return generate_random_network(n, topo_seed, params);
        }
        return base;
      }();
      if (point.lambda_uniform) net = with_active_prob(net, *point.lambda_uniform);
      if (point.lambda_list) net = with_active_prob(net, *point.lambda_list);

      const ExpectationMode mode =
          net.size() <= kMaxExactUsers
              ? ExpectationMode::exact()
              : ExpectationMode::monte_carlo(cfg.mc_samples,
                                             seq_seed(cfg.seed, kTagEval, sp, t));
      const ExpectedValueEvaluator eval(net, mode);

      std::optional<double> topo_optimal;
      if (wants(cfg, Method::optimal)) {
        try {
          OptimalResult opt = exhaustive_optimal(net, mode);
          topo_optimal = opt.expected_throughput_bps;
          optimal_values.push_back(opt.expected_throughput_bps);
          RunRecord rec;
          rec.method = "optimal";
          rec.sweep_value = point.value;
          rec.trial = t;
          rec.seed = 0;
          rec.expected_throughput_bps = opt.expected_throughput_bps;
          rec.rounds_or_slots = 0;
          pending.push_back({std::move(rec), t});
        } catch (const CapacityError& e) {
          throw CapacityError("sweep point " + format_double(point.value) +
                              ", topology " + std::to_string(t) + ": " + e.what());
        }
      }

      std::optional<double> topo_best_ne;
      std::optional<double> topo_worst_ne;
      if (wants(cfg, Method::best_response)) {
        for (int trial = 0; trial < cfg.trials.best_response; ++trial) {
          const std::uint64_t trial_seed = seq_seed(cfg.seed, kTagBr, sp, t, trial);
          Rng start_rng(derive_seed(trial_seed, 0));
          BrOptions opts;
          opts.order = UpdateOrder::random;
          opts.seed = derive_seed(trial_seed, 1);
          opts.max_rounds = cfg.br_max_rounds;
          opts.mode = mode;
          BrTrace trace = best_response_dynamics(net, random_profile(net, start_rng), opts);
          const double value = trace.final_network_throughput;
          if (!topo_best_ne || value > *topo_best_ne) topo_best_ne = value;
          if (!topo_worst_ne || value < *topo_worst_ne) topo_worst_ne = value;
          RunRecord rec;
          rec.method = "best_response";
          rec.sweep_value = point.value;
          rec.trial = t * cfg.trials.best_response + trial;
          rec.seed = trial_seed;
          rec.expected_throughput_bps = value;
          rec.rounds_or_slots = trace.rounds;
          pending.push_back({std::move(rec), t});
        }
        bestne_values.push_back(*topo_best_ne);
        worstne_values.push_back(*topo_worst_ne);
      }

      std::vector<double> topo_learning;
      if (wants(cfg, Method::learning)) {
        for (int trial = 0; trial < cfg.trials.learning; ++trial) {
          const std::uint64_t trial_seed = seq_seed(cfg.seed, kTagLearn, sp, t, trial);
          LearningOptions opts;
          opts.iterations = cfg.iterations;
          opts.step_size = cfg.step_size;
          opts.seed = trial_seed;

          SlotObserver observer;
          const bool traced = cfg.write_trace && t == 0 && trial == 0;
          if (traced) {
            observer = [&](const SlotRecord& slot, const MixedStrategyTable& table) {
              for (int n = 0; n < net.size(); ++n) {
                TraceRow row;
                row.sweep_value = point.value;
                row.slot = slot.slot;
                row.user = n + 1;
                row.active = slot.active.contains(n);
                if (row.active) {
                  const auto it = std::find(slot.users.begin(), slot.users.end(), n);
                  const std::size_t i = static_cast<std::size_t>(it - slot.users.begin());
                  row.chosen_channel = slot.chosen[i];
                  row.normalized_payoff = slot.normalized[i];
                }
                row.q = table.rows[static_cast<std::size_t>(n)];
                result.trace.push_back(std::move(row));
              }
            };
          }

          LearningResult lr = run_learning(net, opts, observer);
          const double value = eval.network_throughput(lr.final_profile);
          topo_learning.push_back(value);
          learning_values.push_back(value);
          RunRecord rec;
          rec.method = "learning";
          rec.sweep_value = point.value;
          rec.trial = t * cfg.trials.learning + trial;
          rec.seed = trial_seed;
          rec.expected_throughput_bps = value;
          rec.rounds_or_slots = lr.convergence_slot >= 0 ? lr.convergence_slot : lr.slots_run;
          pending.push_back({std::move(rec), t});
        }
      }

      // Normalization baseline: optimal when present, else this topology's
      // best NE.
      const std::optional<double> baseline = topo_optimal ? topo_optimal : topo_best_ne;
      if (baseline && *baseline > 0.0) {
        for (PendingRecord& pr : pending) {
          if (pr.topology == t && !pr.rec.normalized_throughput)
            pr.rec.normalized_throughput = pr.rec.expected_throughput_bps / *baseline;
        }
      }
      if (!topo_optimal && topo_best_ne && !topo_learning.empty() && *topo_best_ne > 0.0) {
        learning_norms.push_back(mean_of(topo_learning) / *topo_best_ne);
      }
    }

    // Emission order: method group, then trial.
    std::stable_sort(pending.begin(), pending.end(),
                     [](const PendingRecord& a, const PendingRecord& b) {
                       if (a.rec.method != b.rec.method) {
                         auto rank = [](const std::string& m) {
                           return m == "optimal" ? 0 : m == "best_response" ? 1 : 2;
                         };
                         return rank(a.rec.method) < rank(b.rec.method);
                       }
                       return a.rec.trial < b.rec.trial;
                     });
    for (PendingRecord& pr : pending) result.records.push_back(std::move(pr.rec));

    SweepSummary summary;
    summary.sweep_value = point.value;
    if (!optimal_values.empty()) summary.optimal = mean_of(optimal_values);
    if (!bestne_values.empty()) summary.best_ne = mean_of(bestne_values);
    if (!worstne_values.empty()) summary.worst_ne = mean_of(worstne_values);
    if (!learning_values.empty()) {
      summary.learning_mean = mean_of(learning_values);
      summary.learning_std = stddev_of(learning_values, *summary.learning_mean);
    }
    if (!learning_norms.empty()) summary.learning_norm_mean = mean_of(learning_norms);
    result.summary.push_back(std::move(summary));
  }

  return result;
}

// ---------------------------------------------------------------------------
// Output emission
// ---------------------------------------------------------------------------

std::string format_double(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

namespace {

std::string opt_cell(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

json opt_json(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

void write_file(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  out << body;
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

std::string records_csv(const ExperimentResult& r) {
  std::ostringstream out;
  out << "method,sweep_value,trial,seed,expected_throughput_bps,normalized_throughput,rounds_or_slots\n";
  for (const RunRecord& rec : r.records) {
    out << rec.method << ',' << format_double(rec.sweep_value) << ',' << rec.trial << ','
        << rec.seed << ',' << format_double(rec.expected_throughput_bps) << ','
        << opt_cell(rec.normalized_throughput) << ',' << rec.rounds_or_slots << '\n';
  }
  return out.str();
}

std::string summary_csv(const ExperimentResult& r) {
  const bool with_norm = std::any_of(r.summary.begin(), r.summary.end(),
                                     [](const SweepSummary& s) { return s.learning_norm_mean.has_value(); });
  std::ostringstream out;
  out << r.sweep_key << ",optimal,best_ne,worst_ne,learning_mean,learning_std";
  if (with_norm) out << ",learning_norm_mean";
  out << '\n';
  for (const SweepSummary& s : r.summary) {
    out << format_double(s.sweep_value) << ',' << opt_cell(s.optimal) << ','
        << opt_cell(s.best_ne) << ',' << opt_cell(s.worst_ne) << ','
        << opt_cell(s.learning_mean) << ',' << opt_cell(s.learning_std);
    if (with_norm) out << ',' << opt_cell(s.learning_norm_mean);
    out << '\n';
  }
  return out.str();
}

std::string trace_csv(const ExperimentResult& r, double sweep_value) {
  std::size_t widest = 0;
  for (const TraceRow& row : r.trace)
    if (row.sweep_value == sweep_value) widest = std::max(widest, row.q.size());

  std::ostringstream out;
  out << "slot,user,active,chosen_channel,r";
  for (std::size_t j = 1; j <= widest; ++j) out << ",q_" << j;
  out << '\n';
  for (const TraceRow& row : r.trace) {
    if (row.sweep_value != sweep_value) continue;
    out << row.slot << ',' << row.user << ',' << (row.active ? 1 : 0) << ',';
    if (row.active) out << row.chosen_channel;
    out << ',';
    if (row.active) out << format_double(row.normalized_payoff);
    for (std::size_t j = 0; j < widest; ++j) {
      out << ',';
      if (j < row.q.size()) out << format_double(row.q[j]);
    }
    out << '\n';
  }
  return out.str();
}

json records_json(const ExperimentResult& r) {
  json arr = json::array();
  for (const RunRecord& rec : r.records) {
    arr.push_back({{"method", rec.method},
                   {"sweep_value", rec.sweep_value},
                   {"trial", rec.trial},
                   {"seed", rec.seed},
                   {"expected_throughput_bps", rec.expected_throughput_bps},
                   {"normalized_throughput", opt_json(rec.normalized_throughput)},
                   {"rounds_or_slots", rec.rounds_or_slots}});
  }
  return arr;
}

json summary_json(const ExperimentResult& r) {
  json arr = json::array();
  for (const SweepSummary& s : r.summary) {
    arr.push_back({{r.sweep_key, s.sweep_value},
                   {"optimal", opt_json(s.optimal)},
                   {"best_ne", opt_json(s.best_ne)},
                   {"worst_ne", opt_json(s.worst_ne)},
                   {"learning_mean", opt_json(s.learning_mean)},
                   {"learning_std", opt_json(s.learning_std)},
                   {"learning_norm_mean", opt_json(s.learning_norm_mean)}});
  }
  return arr;
}

}  // namespace

void emit_outputs(const ExperimentResult& result, OutputFormat format,
                  const std::string& dir) {
  namespace fs = std::filesystem;
  const fs::path out = dir.empty() ? fs::path(".") : fs::path(dir);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw std::runtime_error(out.string() + ": cannot create output directory");

  if (format == OutputFormat::csv) {
    write_file(out / "records.csv", records_csv(result));
    write_file(out / "summary.csv", summary_csv(result));
    if (!result.trace.empty()) {
      std::vector<double> values;
      for (const TraceRow& row : result.trace)
        if (std::find(values.begin(), values.end(), row.sweep_value) == values.end())
          values.push_back(row.sweep_value);
      for (double v : values)
        write_file(out / ("trace_" + format_double(v) + ".csv"), trace_csv(result, v));
    }
  } else {
    write_file(out / "records.json", records_json(result).dump(2) + "\n");
    write_file(out / "summary.json", summary_json(result).dump(2) + "\n");
  }
}

// ---------------------------------------------------------------------------
// Invariant verification
// ---------------------------------------------------------------------------

namespace {

// The factor-of-2 identity equates two small differences of large sums; in
// double arithmetic the cancellation noise alone would swamp a 1e-12
// relative tolerance near ties. The checker therefore re-sums the exact
// pair_weight terms in quad precision, so the tolerance binds on the model
// (pairing structure, distance symmetry) and not on round-off.
__float128 potential_q(const Network& net, const ActiveSet& b, const ChannelProfile& prof) {
  __float128 sum = 0;
  for (std::uint64_t m1 = b.bits(); m1 != 0; m1 &= m1 - 1) {
    const int i = __builtin_ctzll(m1);
    for (std::uint64_t m2 = b.bits(); m2 != 0; m2 &= m2 - 1) {
      const int j = __builtin_ctzll(m2);
      if (i != j && prof[i] == prof[j]) sum += static_cast<__float128>(pair_weight(net, j, i));
    }
  }
  return -sum;
}

__float128 weighted_interference_q(const Network& net, const ActiveSet& b,
                                   const ChannelProfile& prof, int n) {
  __float128 sum = 0;
  for (std::uint64_t m = b.bits(); m != 0; m &= m - 1) {
    const int i = __builtin_ctzll(m);
    if (i != n && prof[i] == prof[n]) sum += static_cast<__float128>(pair_weight(net, i, n));
  }
  return -sum;
}

}  // namespace

OpgReport verify_opg(const Network& net, const VerifyOptions& opts) {
  if (opts.deviations < 1) throw ContractError("verify_opg: deviations must be >= 1");

  OpgReport report;

  std::vector<int> eligible;  // users with at least one alternative channel
  for (int n = 0; n < net.size(); ++n)
    if (net.ap(n).channels.size() >= 2) eligible.push_back(n);
  if (eligible.empty()) return report;  // no deviation possible anywhere

  Rng state_rng(derive_seed(opts.seed, 0));
  Rng prof_rng(derive_seed(opts.seed, 1));
  Rng pick_rng(derive_seed(opts.seed, 2));

  const std::optional<ExpectedValueEvaluator> eval =
      opts.robust_checks
          ? std::optional<ExpectedValueEvaluator>(std::in_place, net,
                net.size() <= kMaxExactUsers
                    ? ExpectationMode::exact()
                    : ExpectationMode::monte_carlo(opts.mc_samples, derive_seed(opts.seed, 3)))
          : std::nullopt;

  for (int d = 0; d < opts.deviations; ++d) {
    ChannelProfile prof = random_profile(net, prof_rng);

    // Active set containing at least one eligible user (active_prob > 0
    // guarantees termination; bounded for safety).
    ActiveSet b;
    int active_eligible = -1;
    for (int attempt = 0; attempt < 100000 && active_eligible < 0; ++attempt) {
      b = sample_active_set(net, state_rng);
      std::vector<int> candidates;
      for (int n : eligible)
        if (b.contains(n)) candidates.push_back(n);
      if (!candidates.empty())
        active_eligible = candidates[pick_rng.uniform_index(candidates.size())];
    }
    if (active_eligible < 0) break;
    const int n = active_eligible;

    const auto& channels = net.ap(n).channels;
    int alt = prof[n];
    while (alt == prof[n])
      alt = channels[pick_rng.uniform_index(channels.size())];

    ChannelProfile moved = prof;
    moved[n] = alt;
    report.deviations += 1;

    if (opts.state_checks) {
      const double u0 = utility(net, b, prof, n);
      const double u1 = utility(net, b, moved, n);
      const double v0 = weighted_interference(net, b, prof, n);
      const double v1 = weighted_interference(net, b, moved, n);
      const double phi0 = potential_phi(net, b, prof);
      const double phi1 = potential_phi(net, b, moved);

      const int su = sign_with_tol(u1 - u0, std::max(std::abs(u0), std::abs(u1)), kSignZeroRelTol);
      const int sphi = sign_with_tol(phi1 - phi0, std::max(std::abs(phi0), std::abs(phi1)), kSignZeroRelTol);
      const int sv = sign_with_tol(v1 - v0, std::max(std::abs(v0), std::abs(v1)), kSignZeroRelTol);
      report.state_checks += 1;
      if (su != sphi || su != sv) {
        report.violations.push_back({"state_sign", b.bits(), prof, n, prof[n], alt,
                                     u1 - u0, v1 - v0, phi1 - phi0});
      }

      // Potential change must be exactly twice the weighted-interference
      // change of the deviating user.
      report.factor2_checks += 1;
      const __float128 dphi_q = potential_q(net, b, moved) - potential_q(net, b, prof);
      const __float128 dv2_q = 2 * (weighted_interference_q(net, b, moved, n) -
                                    weighted_interference_q(net, b, prof, n));
      const double dphi = static_cast<double>(dphi_q);
      const double dv2 = static_cast<double>(dv2_q);
      if (!rel_close(dphi, dv2, 1e-12)) {
        report.violations.push_back({"factor2", b.bits(), prof, n, prof[n], alt,
                                     u1 - u0, v1 - v0, phi1 - phi0});
      }
      if (dphi != dv2) {
        const double scale = std::max(std::abs(dphi), std::abs(dv2));
        if (scale > 0.0)
          report.max_factor2_rel_err =
              std::max(report.max_factor2_rel_err, std::abs(dphi - dv2) / scale);
      }
    }

    if (opts.robust_checks) {
      const double w0 = eval->utility(prof, n);
      const double w1 = eval->utility(moved, n);
      const double p0 = eval->potential(prof);
      const double p1 = eval->potential(moved);
      const int sw = sign_with_tol(w1 - w0, std::max(std::abs(w0), std::abs(w1)), kSignZeroRelTol);
      const int sp = sign_with_tol(p1 - p0, std::max(std::abs(p0), std::abs(p1)), kSignZeroRelTol);
      report.robust_checks += 1;
      if (sw != sp) {
        report.violations.push_back({"robust_sign", 0, prof, n, prof[n], alt,
                                     w1 - w0, 0.0, p1 - p0});
      }
    }
  }

  return report;
}

}  // namespace tvws
