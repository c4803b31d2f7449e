#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "d2dnc/channel.hpp"
#include "d2dnc/scheduler.hpp"
#include "d2dnc/state.hpp"

namespace d2dnc {

// One sweep dimension; "none" runs the base configuration as a single point.
struct SweepSpec {
  std::string variable = "none";  // none | devices | files | file_bits | demand_ratio
  std::vector<double> values;
};

struct ScenarioConfig {
  int devices = 20;
  int files = 20;
  double file_bits = 1.0e6;
  RadioParams radio;               // noise, bandwidth, qmax, shadowing, cell radius
  double cache_lo = 0.45;
  double cache_hi = 0.55;
  double demand_ratio = -1;        // in (0,1) switches side information to demand-ratio mode
  std::vector<double> rate_thresholds = {0.5};
  std::vector<double> rate_ladder;
  std::vector<SchedulerKind> schemes = {
      SchedulerKind::Clnc, SchedulerKind::RaIdncSingle, SchedulerKind::CooperativeIdnc,
      SchedulerKind::CooperativeRlnc, SchedulerKind::UncodedBroadcast};
  int realizations = 200;
  std::uint64_t master_seed = 1;
  int workers = 0;                 // >0 pins the thread count; 0 uses the runtime default
  int slot_cap = 100000;
  bool validate_decisions = false;
  bool fading_per_slot = true;
  double power_rel_tolerance = 1e-6;
  int power_max_iterations = 100;
  bool power_gauss_seidel = false;
  SweepSpec sweep;
};

// Parses the YAML document (see README for the grammar) and validates it.
// Throws ConfigError with a field-level message on any violation.
ScenarioConfig load_config(const std::string& yaml_text);
ScenarioConfig load_config_file(const std::string& path);

// Config with the sweep variable overridden to one concrete value.
ScenarioConfig at_sweep_point(const ScenarioConfig& base, const std::string& variable,
                              double value);

struct PointStats {
  double sweep_value = 0;
  std::string scheme;              // scheme name, "@threshold"-suffixed when several apply
  int realizations = 0;            // attempted
  int stall_count = 0;
  double mean_t = 0;
  double std_t = 0;                // sample standard deviation; NaN below 2 samples
  double ci95 = 0;                 // normal-approximation half width; NaN below 2 samples
  double slots_mean = 0;
  double transmitters_per_slot_mean = 0;
  std::vector<double> completion_s;       // successful realizations, in realization order
  std::vector<double> slots;              // parallel to completion_s
  std::vector<double> tx_per_slot;        // parallel to completion_s
  std::vector<int> stalled_realizations;  // indices of realizations that stalled

  bool operator==(const PointStats&) const = default;
};

struct AggregateReport {
  std::string sweep_variable = "none";
  std::string ci_method = "normal-approx-95";
  std::vector<PointStats> points;

  bool operator==(const AggregateReport&) const = default;
};

// Deterministic seeds and shared per-realization inputs: every scheme of one
// realization sees the identical topology, loss map, fading stream and
// initial side information.
struct RealizationSetup {
  std::uint64_t env_seed = 0;
  Topology topology;
  Mat loss_db;
  std::uint64_t fading_seed = 0;
  NetworkState state;
};

RealizationSetup make_realization(const ScenarioConfig& cfg, int point_index, int realization);

// One scheme on one prepared realization (fresh state copy inside).
RunResult run_one(const ScenarioConfig& cfg, const RealizationSetup& setup, SchedulerKind kind,
                  double rate_threshold, bool keep_trace = false);

// Monte-Carlo map over (point, threshold, scheme, realization) with a
// deterministic reduce; parallelized when built with OpenMP. Threshold-blind
// baselines run once even when several thresholds are configured.
AggregateReport run_sweep(const ScenarioConfig& cfg);

// Plain sequential twin of run_sweep, kept as the reference for equivalence
// tests and benchmarking. Must produce a bit-identical report.
AggregateReport run_sweep_serial(const ScenarioConfig& cfg);

std::string to_csv(const AggregateReport& report);
std::string to_json(const AggregateReport& report);
AggregateReport report_from_json(const std::string& text);

// JSON-lines trace (one object per slot) for realization 0 of every
// configured scheme, in scheme order.
void write_trace(const ScenarioConfig& cfg, std::ostream& out);

}  // namespace d2dnc
