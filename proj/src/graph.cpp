#include "d2dnc/graph.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <json.hpp>

namespace d2dnc {

double vertex_weight(int rank, int demander_count, double lower_bound, double rate,
                     double file_bits) {
  if (rank < 1 || rank > demander_count) throw std::invalid_argument("bad urgency rank");
  // ldexp keeps the power-of-two urgency factor exact.
  return std::ldexp(lower_bound * rate / file_bits, demander_count - rank + 1);
}

std::vector<double> candidate_rates(const Mat& capacities, int tx,
                                    const std::vector<int>& eligible_targets,
                                    double rate_threshold) {
  std::vector<double> rates;
  rates.reserve(eligible_targets.size());
  for (int i : eligible_targets) {
    if (i == tx) continue;
    const double c = capacities(tx, i);
    if (c >= rate_threshold && c > 0) rates.push_back(c);
  }
  std::sort(rates.begin(), rates.end(), std::greater<>());
  rates.erase(std::unique(rates.begin(), rates.end()), rates.end());
  return rates;
}

bool ConflictGraph::adjacent(int a, int b) const {
  if (a == b) return false;
  const Vertex& va = verts_[a];
  const Vertex& vb = verts_[b];
  if (va.rate != vb.rate) return true;  // one device, one rate per slot
  if (explicit_adjacency_) {
    if (store_dense_) {
      const size_t bit = static_cast<size_t>(a) * verts_.size() + b;
      return (dense_bits_[bit >> 6] >> (bit & 63)) & 1u;
    }
    const auto& nb = neighbor_lists_[a];
    return std::binary_search(nb.begin(), nb.end(), b);
  }
  if (va.tx != vb.tx) {
    // A target listens to exactly one transmitter, and no device can send
    // and receive in the same slot.
    return va.target == vb.target || va.tx == vb.target || vb.tx == va.target;
  }
  if (va.file == vb.file) return false;
  // Same transmitter, different files: combining is fine only if each target
  // can strip the other file from its cache.
  return !(caches_[vb.target].test(va.file) && caches_[va.target].test(vb.file));
}

void ConflictGraph::index_classes() {
  class_of_.assign(verts_.size(), -1);
  class_members_.clear();
  class_rates_.clear();
  std::map<double, int, std::greater<>> by_rate;
  for (int v = 0; v < size(); ++v) {
    by_rate.emplace(verts_[v].rate, 0);
  }
  for (auto& [rate, idx] : by_rate) {
    idx = static_cast<int>(class_rates_.size());
    class_rates_.push_back(rate);
  }
  class_members_.resize(class_rates_.size());
  for (int v = 0; v < size(); ++v) {
    const int c = by_rate[verts_[v].rate];
    class_of_[v] = c;
    class_members_[c].push_back(v);
  }
}

std::vector<std::pair<int, int>> ConflictGraph::edges() const {
  std::vector<std::pair<int, int>> out;
  for (int a = 0; a < size(); ++a)
    for (int b = a + 1; b < size(); ++b)
      if (adjacent(a, b)) out.emplace_back(a, b);
  return out;
}

std::string ConflictGraph::dump_json() const {
  nlohmann::json j;
  j["vertices"] = nlohmann::json::array();
  for (int v = 0; v < size(); ++v) {
    const Vertex& vx = verts_[v];
    j["vertices"].push_back({{"id", v},
                             {"tx", vx.tx},
                             {"target", vx.target},
                             {"file", vx.file},
                             {"rate", vx.rate},
                             {"weight", vx.weight}});
  }
  j["edges"] = nlohmann::json::array();
  for (const auto& [a, b] : edges()) j["edges"].push_back({a, b});
  return j.dump(2);
}

ConflictGraph ConflictGraph::from_explicit(std::vector<Vertex> verts,
                                           const std::vector<std::pair<int, int>>& edges,
                                           int dense_adjacency_limit) {
  ConflictGraph g;
  g.verts_ = std::move(verts);
  g.explicit_adjacency_ = true;
  g.dense_limit_ = dense_adjacency_limit;
  int max_file = -1;
  for (const Vertex& v : g.verts_) max_file = std::max(max_file, v.file);
  g.file_universe_ = max_file + 1;
  const int n = g.size();
  g.store_dense_ = n <= g.dense_limit_;
  if (g.store_dense_) {
    g.dense_bits_.assign((static_cast<size_t>(n) * n + 63) / 64, 0);
    auto set_bit = [&](int a, int b) {
      const size_t bit = static_cast<size_t>(a) * n + b;
      g.dense_bits_[bit >> 6] |= 1ull << (bit & 63);
    };
    for (const auto& [a, b] : edges) {
      set_bit(a, b);
      set_bit(b, a);
    }
  } else {
    g.neighbor_lists_.assign(n, {});
    for (const auto& [a, b] : edges) {
      g.neighbor_lists_[a].push_back(b);
      g.neighbor_lists_[b].push_back(a);
    }
    for (auto& nb : g.neighbor_lists_) std::sort(nb.begin(), nb.end());
  }
  g.index_classes();
  return g;
}

ConflictGraph build_graph(const NetworkState& state, const Mat& capacities,
                          const std::vector<int>& potential_tx,
                          const std::vector<int>& potential_targets,
                          const WeightContext& weights, const GraphOptions& opt) {
  ConflictGraph g;
  g.file_universe_ = state.files();
  g.dense_limit_ = opt.dense_adjacency_limit;
  g.caches_.reserve(state.devices());
  for (int u = 0; u < state.devices(); ++u) g.caches_.push_back(state.cache(u));

  std::vector<int> targets;
  targets.reserve(potential_targets.size());
  for (int i : potential_targets)
    if (state.wants(i).any()) targets.push_back(i);

  for (int k : potential_tx) {
    std::vector<double> rates;
    if (opt.rate_ladder.empty()) {
      rates = candidate_rates(capacities, k, targets, opt.rate_threshold);
    } else {
      double best = 0;
      for (int i : targets)
        if (i != k) best = std::max(best, capacities(k, i));
      for (double r : opt.rate_ladder)
        if (r >= opt.rate_threshold && r > 0 && r <= best) rates.push_back(r);
      std::sort(rates.begin(), rates.end(), std::greater<>());
      rates.erase(std::unique(rates.begin(), rates.end()), rates.end());
    }
    for (double r : rates) {
      for (int i : targets) {
        if (i == k || capacities(k, i) < r) continue;
        FileSet sendable = state.cache(k) & state.wants(i);
        for (auto pos = sendable.find_first(); pos != FileSet::npos;
             pos = sendable.find_next(pos)) {
          const int h = static_cast<int>(pos);
          Vertex v;
          v.tx = k;
          v.target = i;
          v.file = h;
          v.rate = r;
          v.weight = vertex_weight(weights.rank[i], weights.demander_count,
                                   weights.lower_bound[i], r, weights.file_bits);
          g.verts_.push_back(v);
        }
      }
    }
  }
  g.index_classes();
  return g;
}

ConflictGraph build_unit_graph(const NetworkState& state, const std::vector<int>& potential_tx,
                               const std::vector<int>& potential_targets,
                               int dense_adjacency_limit) {
  ConflictGraph g;
  g.file_universe_ = state.files();
  g.dense_limit_ = dense_adjacency_limit;
  g.caches_.reserve(state.devices());
  for (int u = 0; u < state.devices(); ++u) g.caches_.push_back(state.cache(u));

  for (int k : potential_tx) {
    for (int i : potential_targets) {
      if (i == k || !state.wants(i).any()) continue;
      FileSet sendable = state.cache(k) & state.wants(i);
      for (auto pos = sendable.find_first(); pos != FileSet::npos;
           pos = sendable.find_next(pos)) {
        Vertex v;
        v.tx = k;
        v.target = i;
        v.file = static_cast<int>(pos);
        v.rate = 1.0;
        v.weight = 1.0;
        g.verts_.push_back(v);
      }
    }
  }
  g.index_classes();
  return g;
}

}  // namespace d2dnc
