#pragma once

#include <vector>

#include "d2dnc/common.hpp"
#include "d2dnc/graph.hpp"

namespace d2dnc {

// Per-transmitter view of a selected independent set: the XOR combination and
// the devices that decode from it.
struct Transmission {
  int tx = -1;
  FileSet files;
  std::vector<int> targets;  // ascending
};

struct IndependentSet {
  std::vector<int> vertices;  // graph indices in selection order
  double rate = 0;            // common rate of all members (0 when empty)
  double total_weight = 0;
  std::vector<Transmission> transmissions;  // grouped by transmitter, ascending

  bool empty() const { return vertices.empty(); }
};

// Sum of weights over all vertices NOT in conflict with v (v excluded).
double weighted_degree(const ConflictGraph& g, int v);

// Greedy maximal-weight independent set: repeatedly picks the vertex
// maximizing weight * weighted-degree over the surviving subgraph, falling
// back to plain weight when every such product is zero. Ties break toward
// larger weight, then ascending (transmitter, target, file), then index.
IndependentSet greedy_mwis(const ConflictGraph& g);

// Branch-and-bound maximum-weight independent set, extended to maximal.
// Refuses graphs above the vertex cap.
IndependentSet exact_mwis(const ConflictGraph& g, int vertex_cap = 20);

}  // namespace d2dnc
