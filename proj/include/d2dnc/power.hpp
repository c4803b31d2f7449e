#pragma once

#include <vector>

#include "d2dnc/common.hpp"

namespace d2dnc {

// Concurrent transmissions whose powers are being balanced: transmitter k
// serves targets[k] (disjoint across transmitters, half-duplex respected).
struct ScheduleContext {
  std::vector<int> transmitters;
  std::vector<std::vector<int>> targets;  // parallel to transmitters
  const Mat* gains = nullptr;
  double noise_w = 0;
  double qmax_w = 0;
  double q_init_w = 0;  // <= 0 picks qmax_w
  int max_iterations = 100;
  double rel_tolerance = 1e-6;
  bool gauss_seidel = false;  // default is a synchronous (Jacobi) update
};

struct PowerResult {
  std::vector<double> powers_w;  // per device; zero for devices not transmitting
  int iterations = 0;
  bool converged = false;
  double objective = 0;  // sum capacity at the final powers
  double fixed_point_residual = 0;
  std::vector<double> objective_trace;
};

// Sum over scheduled pairs of log2(1 + SINR) with interference from the other
// scheduled transmitters at the given powers.
double sum_capacity(const ScheduleContext& ctx, const std::vector<double>& powers_w);

// One synchronous best-response update of every transmitter's power: the
// marginal-utility balance solved for Q_k, clamped to [0, qmax]. A transmitter
// with no competing interference (or a vanishing denominator) goes to qmax; a
// vanishing numerator goes to 0.
std::vector<double> power_update_step(const ScheduleContext& ctx,
                                      const std::vector<double>& powers_w);

// Iterates power_update_step from q_init until both the relative change of
// the objective and the per-step power movement (relative to qmax_w) drop
// below rel_tolerance, or max_iterations is hit.
PowerResult allocate_power(const ScheduleContext& ctx);

}  // namespace d2dnc
