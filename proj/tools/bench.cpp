#include <chrono>
#include <iostream>

#include <CLI11.hpp>

#include "d2dnc/harness.hpp"

// Times the parallel sweep against its sequential twin on the same workload
// and checks that both produce identical reports.

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sweep benchmark: parallel vs sequential reference"};
  int devices = 15;
  int files = 15;
  int realizations = 20;
  int workers = 0;
  std::uint64_t seed = 7;
  app.add_option("--users", devices, "device count");
  app.add_option("--files", files, "file count");
  app.add_option("--realizations", realizations, "realizations per scheme");
  app.add_option("--workers", workers, "thread count for the parallel run");
  app.add_option("--seed", seed, "master seed");
  CLI11_PARSE(app, argc, argv);

  d2dnc::ScenarioConfig cfg;
  cfg.devices = devices;
  cfg.files = files;
  cfg.realizations = realizations;
  cfg.workers = workers;
  cfg.master_seed = seed;

  auto t0 = std::chrono::steady_clock::now();
  d2dnc::AggregateReport serial = d2dnc::run_sweep_serial(cfg);
  const double t_serial = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  d2dnc::AggregateReport parallel = d2dnc::run_sweep(cfg);
  const double t_parallel = seconds_since(t0);

  std::cout << "sequential: " << t_serial << " s\n";
  std::cout << "parallel:   " << t_parallel << " s\n";
  std::cout << "speedup:    " << t_serial / t_parallel << "x\n";
  std::cout << "reports identical: " << (serial == parallel ? "yes" : "NO") << '\n';
  return serial == parallel ? 0 : 1;
}
