#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "d2dnc/channel.hpp"
#include "d2dnc/common.hpp"
#include "d2dnc/graph.hpp"
#include "d2dnc/state.hpp"

namespace d2dnc {

enum class SchedulerKind {
  Clnc = 0,             // joint coding/rate/power scheduling across transmitters
  RaIdncSingle = 1,     // same machinery, first admitted transmitter only, full power
  CooperativeIdnc = 2,  // rate-blind XOR scheduling, maximize targeted count
  CooperativeRlnc = 3,  // largest cache transmits block-coded over its cache
  UncodedBroadcast = 4, // random holder broadcasts the most-wanted plain file
};

std::string to_string(SchedulerKind kind);
std::optional<SchedulerKind> scheduler_from_string(const std::string& name);
std::vector<std::string> scheduler_names();

struct SimParams {
  double noise_w = 0;
  double qmax_w = 0;
  double bandwidth_hz = 1;
  double rate_threshold = 0;
  double power_rel_tolerance = 1e-6;
  int power_max_iterations = 100;
  bool power_gauss_seidel = false;
  std::vector<double> rate_ladder;  // empty: rates come from capacities
  int slot_cap = 100000;
  bool validate_decisions = false;
  int dense_adjacency_limit = 4096;
};

struct SlotDecision {
  std::vector<int> transmitters;          // ascending device ids
  std::vector<CodedPacket> packets;       // parallel to transmitters
  std::vector<std::vector<int>> targets;  // parallel, each ascending
  std::vector<int> targeted;              // union of targets, ascending
  double rate = 0;                        // common rate, bits/s/Hz
  double duration_s = 0;
  std::vector<double> powers_w;           // per device, zero when silent
  double sum_capacity = 0;                // objective backing this decision
  int admission_rounds = 0;
};

// Everything a scheme needs to decide one slot.
struct SlotInputs {
  const NetworkState& state;
  const Mat& gains;
  const std::vector<double>& lower_bounds;  // completion-time bounds per device
  const SimParams& params;
};

SlotDecision clnc_slot(const SlotInputs& in);
SlotDecision ra_idnc_single_slot(const SlotInputs& in);
SlotDecision cooperative_idnc_slot(const SlotInputs& in);

// Block-decoding bookkeeping for the RLNC baseline: per receiver, innovative
// packets credited against the requirement fixed at the epoch start (a new
// transmitter starts a new epoch).
struct RlncProgress {
  int epoch_tx = -1;
  FileSet epoch_cache;
  std::vector<int> required;
  std::vector<int> credited;
};

SlotDecision rlnc_slot(const SlotInputs& in, RlncProgress& progress);
void rlnc_apply(NetworkState& state, RlncProgress& progress, const SlotDecision& d);

SlotDecision uncoded_broadcast_slot(const SlotInputs& in, std::mt19937_64& rng);

// Throws std::logic_error when the decision violates role-disjointness,
// packet validity, decodability (when idnc_semantics), the rate threshold, or
// rate feasibility under its own powers.
void validate_decision(const SlotDecision& d, const NetworkState& state, const Mat& gains,
                       const SimParams& params, double rate_threshold, bool idnc_semantics);

// log2(1 + qmax * g / noise) per ordered pair; each row computed as if only
// that transmitter were active.
Mat single_tx_capacities(const Mat& gains, double qmax_w, double noise_w);

// Harmonic mean over senders of the interference-free full-power capacities
// toward each device, scaled to bits/s; 0 when any incoming link is dead.
std::vector<double> harmonic_rates_bps(const Mat& interference_free_caps, double bandwidth_hz);

class GainProvider {
 public:
  virtual ~GainProvider() = default;
  virtual const Mat& gains_for_slot(int slot) = 0;  // slots are 1-based
};

class FixedGains : public GainProvider {
 public:
  explicit FixedGains(Mat gains) : gains_(std::move(gains)) {}
  const Mat& gains_for_slot(int) override { return gains_; }

 private:
  Mat gains_;
};

// Fixed path loss + shadowing; small-scale fading redrawn per slot (or once,
// when per_slot is off). Draws depend only on (seed, slot), never on the
// scheme, so paired runs see identical channels.
class FadedGains : public GainProvider {
 public:
  FadedGains(Mat loss_db, std::uint64_t seed, bool per_slot);
  const Mat& gains_for_slot(int slot) override;

 private:
  Mat loss_db_;
  std::uint64_t seed_;
  bool per_slot_;
  Mat current_;
  int current_slot_ = -1;
};

struct SlotTrace {
  int slot = 0;
  SlotDecision decision;
  int remaining_wanted = 0;
};

struct RunResult {
  SchedulerKind scheme = SchedulerKind::Clnc;
  double completion_s = 0;
  std::vector<double> per_device_completion_s;
  int slots = 0;
  double transmitters_per_slot = 0;
  std::vector<SlotTrace> trace;
};

// Runs one realization to completion, mutating the state. Throws StallError
// when a slot cannot make progress or the slot cap is exceeded.
RunResult run_schedule(NetworkState& state, GainProvider& gains, SchedulerKind kind,
                       const SimParams& params, std::uint64_t scheme_rng_seed,
                       bool keep_trace = false);

}  // namespace d2dnc
