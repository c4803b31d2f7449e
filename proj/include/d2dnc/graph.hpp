#pragma once

#include <string>
#include <utility>
#include <vector>

#include "d2dnc/common.hpp"
#include "d2dnc/state.hpp"

namespace d2dnc {

// One candidate transmission: tx sends an XOR combination containing `file`
// to `target` at `rate` (bits/s/Hz). `weight` is the urgency-scaled payoff.
struct Vertex {
  int tx = -1;
  int target = -1;
  int file = -1;
  double rate = 0;
  double weight = 0;
};

// Inputs for vertex weights: per-device completion-time lower bounds and the
// 1-based urgency rank (position when demanders are sorted by decreasing
// bound, ties toward lower device id).
struct WeightContext {
  std::vector<double> lower_bound;  // indexed by device; only demanders read
  std::vector<int> rank;            // 1-based; 0 for devices without demand
  int demander_count = 0;
  double file_bits = 0;
};

// 2^(demanders - rank + 1) * lower_bound * rate / file_bits.
double vertex_weight(int rank, int demander_count, double lower_bound, double rate,
                     double file_bits);

// Distinct capacity values from tx toward the eligible targets, filtered to
// >= rate_threshold, sorted descending.
std::vector<double> candidate_rates(const Mat& capacities, int tx,
                                    const std::vector<int>& eligible_targets,
                                    double rate_threshold);

struct GraphOptions {
  double rate_threshold = 0;
  // When non-empty, candidate rates come from this ladder (filtered to the
  // threshold and to feasibility) instead of the capacity values themselves.
  std::vector<double> rate_ladder;
  // Explicit adjacency (edges()/dump paths) stays a dense bit matrix up to
  // this many vertices and switches to sorted neighbor lists beyond it.
  int dense_adjacency_limit = 4096;
};

// Conflict graph over candidate transmissions. Vertices conflict when they
// use different rates, share a target across transmitters, or combine files
// at one transmitter that some involved target could not strip.
//
// Adjacency is evaluated from those rules in O(1); rate classes group the
// vertices so that selection never has to touch cross-rate pairs (they are
// all conflicts by construction).
class ConflictGraph {
 public:
  ConflictGraph() = default;

  int size() const { return static_cast<int>(verts_.size()); }
  const Vertex& vertex(int v) const { return verts_[v]; }
  const std::vector<Vertex>& vertices() const { return verts_; }
  int file_universe() const { return file_universe_; }
  int device_count() const { return static_cast<int>(caches_.size()); }

  bool adjacent(int a, int b) const;
  bool edges_are_rule_based() const { return !explicit_adjacency_; }

  int class_count() const { return static_cast<int>(class_members_.size()); }
  double class_rate(int c) const { return class_rates_[c]; }
  const std::vector<int>& class_members(int c) const { return class_members_[c]; }
  int class_of(int v) const { return class_of_[v]; }
  const FileSet& cache_of(int device) const { return caches_[device]; }

  // Materialized adjacency for inspection, oracles and tests (not used by the
  // scheduling hot path). Pairs are (a, b) with a < b.
  std::vector<std::pair<int, int>> edges() const;
  std::string dump_json() const;

  // Test/oracle constructor with hand-given adjacency. Cross-rate pairs are
  // conflicts even when the edge list omits them.
  static ConflictGraph from_explicit(std::vector<Vertex> verts,
                                     const std::vector<std::pair<int, int>>& edges,
                                     int dense_adjacency_limit = 4096);

  friend ConflictGraph build_graph(const NetworkState&, const Mat&,
                                   const std::vector<int>&, const std::vector<int>&,
                                   const WeightContext&, const GraphOptions&);
  friend ConflictGraph build_unit_graph(const NetworkState&, const std::vector<int>&,
                                        const std::vector<int>&, int);

 private:
  void index_classes();

  std::vector<Vertex> verts_;
  std::vector<FileSet> caches_;  // snapshot at build time, for conflict tests
  int file_universe_ = 0;
  std::vector<int> class_of_;
  std::vector<std::vector<int>> class_members_;
  std::vector<double> class_rates_;

  bool explicit_adjacency_ = false;
  int dense_limit_ = 4096;
  bool store_dense_ = false;
  std::vector<std::uint64_t> dense_bits_;       // size*size bits, row-major
  std::vector<std::vector<int>> neighbor_lists_;  // sorted, when not dense
};

// One vertex per (transmitter, rate, target, wanted file) tuple that is
// feasible under the capacities and the rate threshold. Transmitters and
// targets come from the supplied pools; targets additionally need demand.
ConflictGraph build_graph(const NetworkState& state, const Mat& capacities,
                          const std::vector<int>& potential_tx,
                          const std::vector<int>& potential_targets,
                          const WeightContext& weights, const GraphOptions& opt);

// Rate-blind variant: every feasible (tx, target, file) triple at a single
// pseudo-rate with unit weight, so greedy selection maximizes target count.
ConflictGraph build_unit_graph(const NetworkState& state, const std::vector<int>& potential_tx,
                               const std::vector<int>& potential_targets,
                               int dense_adjacency_limit = 4096);

}  // namespace d2dnc
