#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "d2dnc/graph.hpp"
#include "d2dnc/harness.hpp"
#include "d2dnc/rng.hpp"
#include "d2dnc/scheduler.hpp"

namespace {

// Slot-1 conflict graph of the joint scheduler on realization 0: candidates
// probe at full power with no standing interference.
std::string dump_first_graph(const d2dnc::ScenarioConfig& cfg) {
  using namespace d2dnc;
  RealizationSetup setup = make_realization(cfg, 0, 0);
  FadedGains provider(setup.loss_db, setup.fading_seed, cfg.fading_per_slot);
  const Mat& gains = provider.gains_for_slot(1);
  const Mat caps = single_tx_capacities(gains, cfg.radio.qmax_watts(), cfg.radio.noise_watts());
  const Mat if_caps = caps;
  const std::vector<double> harmonic = harmonic_rates_bps(if_caps, cfg.radio.bandwidth_hz);

  const NetworkState& state = setup.state;
  std::vector<int> demanders = state.demanders();
  std::vector<double> bounds(state.devices(), 0.0);
  for (int u = 0; u < state.devices(); ++u)
    bounds[u] = completion_lower_bound(state, u, harmonic[u]);
  std::vector<int> order = demanders;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (bounds[a] != bounds[b]) return bounds[a] > bounds[b];
    return a < b;
  });
  WeightContext wc;
  wc.lower_bound = bounds;
  wc.rank.assign(state.devices(), 0);
  for (int d = 0; d < static_cast<int>(order.size()); ++d) wc.rank[order[d]] = d + 1;
  wc.demander_count = static_cast<int>(demanders.size());
  wc.file_bits = state.frame().file_bits;

  GraphOptions opt;
  opt.rate_threshold = cfg.rate_thresholds.front();
  opt.rate_ladder = cfg.rate_ladder;

  std::vector<int> everyone(state.devices());
  for (int u = 0; u < state.devices(); ++u) everyone[u] = u;
  ConflictGraph g = build_graph(state, caps, everyone, demanders, wc, opt);
  return g.dump_json();
}

int run(int argc, char** argv) {
  CLI::App app{"cache-enabled D2D content delivery simulator"};
  std::string config_path;
  std::vector<std::string> scheme_names;
  int users = 0;
  int files = 0;
  double file_size = 0;
  double demand_ratio = 0;
  double rate_threshold = -1;
  int realizations = 0;
  std::uint64_t seed = 0;
  int workers = 0;
  std::string out_path;
  std::string format = "csv";
  std::string trace_path;
  std::string dump_graph_path;

  app.add_option("--config", config_path, "YAML scenario file");
  app.add_option("--scheme", scheme_names, "schemes to run (repeat or comma separate)")
      ->delimiter(',');
  auto* o_users = app.add_option("--users", users, "device count");
  auto* o_files = app.add_option("--files", files, "file count");
  auto* o_size = app.add_option("--file-size", file_size, "file size in bits");
  auto* o_mu = app.add_option("--demand-ratio", demand_ratio, "per-device demand fraction");
  auto* o_thr = app.add_option("--rate-threshold", rate_threshold, "minimum rate, bits/s/Hz");
  auto* o_reals = app.add_option("--realizations", realizations, "Monte-Carlo realizations");
  auto* o_seed = app.add_option("--seed", seed, "master seed");
  auto* o_workers = app.add_option("--workers", workers, "thread count (0 = runtime default)");
  app.add_option("--out", out_path, "output path (default stdout)");
  app.add_option("--format", format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--trace", trace_path, "also write a JSON-lines slot trace of realization 0");
  app.add_option("--dump-graph", dump_graph_path,
                 "also write the slot-1 conflict graph of realization 0 as JSON");

  CLI11_PARSE(app, argc, argv);

  d2dnc::ScenarioConfig cfg =
      config_path.empty() ? d2dnc::ScenarioConfig{} : d2dnc::load_config_file(config_path);
  if (!scheme_names.empty()) {
    cfg.schemes.clear();
    for (const std::string& name : scheme_names) {
      auto kind = d2dnc::scheduler_from_string(name);
      if (!kind) throw d2dnc::ConfigError("unknown scheme '" + name + "'");
      cfg.schemes.push_back(*kind);
    }
  }
  if (o_users->count()) cfg.devices = users;
  if (o_files->count()) cfg.files = files;
  if (o_size->count()) cfg.file_bits = file_size;
  if (o_mu->count()) cfg.demand_ratio = demand_ratio;
  if (o_thr->count()) cfg.rate_thresholds = {rate_threshold};
  if (o_reals->count()) cfg.realizations = realizations;
  if (o_seed->count()) cfg.master_seed = seed;
  if (o_workers->count()) cfg.workers = workers;

  if (!dump_graph_path.empty()) {
    std::ofstream out(dump_graph_path);
    if (!out) throw std::runtime_error("cannot open " + dump_graph_path);
    out << dump_first_graph(cfg) << '\n';
  }
  if (!trace_path.empty()) {
    std::ofstream out(trace_path);
    if (!out) throw std::runtime_error("cannot open " + trace_path);
    d2dnc::write_trace(cfg, out);
  }

  d2dnc::AggregateReport report = d2dnc::run_sweep(cfg);
  const std::string payload =
      format == "json" ? d2dnc::to_json(report) : d2dnc::to_csv(report);
  if (out_path.empty()) {
    std::cout << payload;
  } else {
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot open " + out_path);
    out << payload;
  }

  int stalls = 0;
  for (const auto& p : report.points) stalls += p.stall_count;
  if (stalls > 0) {
    std::cerr << "warning: " << stalls << " realization(s) stalled\n";
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const d2dnc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const d2dnc::StallError& e) {
    std::cerr << "stall: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
