#pragma once

#include <initializer_list>
#include <random>
#include <vector>

#include "d2dnc/channel.hpp"
#include "d2dnc/common.hpp"
#include "d2dnc/graph.hpp"
#include "d2dnc/power.hpp"
#include "d2dnc/scheduler.hpp"
#include "d2dnc/state.hpp"

namespace oracles {

d2dnc::FileSet fileset(int universe, std::initializer_list<int> bits);

// Six devices, four files, ten bits per file, unit bandwidth/noise/power cap.
// The hand-set gains admit a known two-slot schedule: two simultaneous
// transmitters at rate 2.5 (4 s), then one broadcast at rate 3 (10/3 s).
struct ReplayFixture {
  d2dnc::Frame frame;
  std::vector<d2dnc::FileSet> caches;
  d2dnc::Mat gains;
  d2dnc::SimParams params;
  std::vector<d2dnc::SlotDecision> schedule;
  double total_s = 0;  // 4 + 10/3
};

ReplayFixture replay_fixture();

d2dnc::NetworkState replay_state(const ReplayFixture& fx);

// Validates each canned slot against the fixture state, then commits it the
// same way the run loop does (ledger first, decodes second). Returns elapsed.
double replay_schedule(const ReplayFixture& fx, d2dnc::NetworkState& state);

// Random side information: every cache a nonempty subset (full caches
// allowed), union coverage enforced, at least one device left demanding.
d2dnc::NetworkState random_state(int devices, int files, std::mt19937_64& rng);

// Asymmetric log-uniform power gains over [lo, hi]; zero diagonal.
d2dnc::Mat random_gains(int devices, std::mt19937_64& rng, double lo = 1e-2, double hi = 1e3);

// Urgency ranks the way the schedulers assign them: demanders sorted by
// decreasing lower bound, ties toward the lower device id, 1-based.
d2dnc::WeightContext make_weights(const d2dnc::NetworkState& state,
                                  const std::vector<double>& lower_bounds);

// Rule-based conflict graph over a random state with interference-free
// full-power capacities; lower bounds come from the harmonic-rate formula.
struct GraphInstance {
  d2dnc::NetworkState state;
  d2dnc::Mat capacities;
  d2dnc::WeightContext weights;
  d2dnc::ConflictGraph graph;
};

GraphInstance random_graph_instance(int max_devices, int max_files, std::mt19937_64& rng,
                                    const d2dnc::GraphOptions& opt = {});

// Explicit-adjacency graph with random weights, one or two rate classes.
d2dnc::ConflictGraph random_explicit_graph(int max_vertices, std::mt19937_64& rng);

// The conflict rules restated independently of the library's adjacency code:
// distinct rates always conflict; same transmitter conflicts unless each
// involved target caches the other file; across transmitters a shared target
// or a transmitter doubling as the other's target conflicts.
bool reference_conflict(const d2dnc::Vertex& a, const d2dnc::Vertex& b,
                        const std::vector<d2dnc::FileSet>& caches);

// Exhaustive maximum weight over all independent subsets (nonnegative
// weights, so the maximum is attained by a maximal set).
double subset_max_weight(const d2dnc::ConflictGraph& g);

// Best objective over a (steps+1)^2 power grid spanning [0, qmax]^2 for a
// two-transmitter context.
double grid_best_objective(const d2dnc::ScheduleContext& ctx, int steps = 200);

// Exact minimum completion time for tiny instances (<= 4 devices, <= 4
// files, rates restricted to the ladder): dynamic program over demand
// states. Each slot candidate is a delivery pattern (receiver -> transmitter
// and file), screened for half-duplex, packet consistency (no delivered file
// may collide with another target's demand at the same transmitter) and
// joint SINR feasibility under the power cap via a monotone fixed point.
double optimal_completion(const d2dnc::NetworkState& start, const d2dnc::Mat& gains,
                          double noise_w, double qmax_w, double bandwidth_hz,
                          const std::vector<double>& rate_ladder);

}  // namespace oracles
