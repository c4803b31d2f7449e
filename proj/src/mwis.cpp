#include "d2dnc/mwis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

namespace d2dnc {

namespace {

// Selection order: modified weight desc, then plain weight desc, then
// ascending (transmitter, target, file), then vertex index. When every
// modified weight is zero this degenerates to the plain-weight pick.
struct Pick {
  double wm = -1;
  double wo = -1;
  int tx = 0, target = 0, file = 0, id = -1;
};

bool better(const Pick& a, const Pick& b) {
  if (a.wm != b.wm) return a.wm > b.wm;
  if (a.wo != b.wo) return a.wo > b.wo;
  if (a.tx != b.tx) return a.tx < b.tx;
  if (a.target != b.target) return a.target < b.target;
  if (a.file != b.file) return a.file < b.file;
  return a.id < b.id;
}

double modified_weight(double w, double gdeg) { return gdeg > 0 ? w * gdeg : 0.0; }

struct Scratch {
  std::vector<double> tx_total, target_total, tx_target, same_file, strip;
  std::vector<int> touched_pair;
};

Scratch& scratch() {
  thread_local Scratch s;
  return s;
}

// Weighted non-neighbor sums for same-rate vertices, computed in closed form
// from per-transmitter/per-target aggregates instead of touching every pair.
// `members` must list vertices of one rate class with equal-transmitter runs
// contiguous (true for build order and any subsequence of it).
void closed_form_gdeg(const ConflictGraph& g, std::span<const int> members,
                      std::vector<double>& out) {
  const int n = g.device_count();
  const int fu = g.file_universe();
  Scratch& s = scratch();
  s.tx_total.assign(n, 0.0);
  s.target_total.assign(n, 0.0);
  s.tx_target.assign(static_cast<size_t>(n) * n, 0.0);
  if (static_cast<int>(s.same_file.size()) < fu) s.same_file.resize(fu);
  if (s.strip.size() < static_cast<size_t>(fu) * fu)
    s.strip.resize(static_cast<size_t>(fu) * fu);

  double class_total = 0;
  for (int v : members) {
    const Vertex& vx = g.vertex(v);
    class_total += vx.weight;
    s.tx_total[vx.tx] += vx.weight;
    s.target_total[vx.target] += vx.weight;
    s.tx_target[static_cast<size_t>(vx.tx) * n + vx.target] += vx.weight;
  }

  out.resize(members.size());
  size_t block_start = 0;
  while (block_start < members.size()) {
    const int k = g.vertex(members[block_start]).tx;
    size_t block_end = block_start;
    while (block_end < members.size() && g.vertex(members[block_end]).tx == k) ++block_end;

    // same_file[h]: weight of this transmitter's vertices carrying file h.
    // strip[f][h]: weight of its vertices with file f whose target caches h
    // (i.e. the pairs a combination with h could still serve). Both the
    // entries written below and the (h, vx.file) entries read below must be
    // cleared: the scratch carries values from earlier blocks and calls.
    for (size_t m = block_start; m < block_end; ++m) {
      const Vertex& vx = g.vertex(members[m]);
      s.same_file[vx.file] = 0;
      const FileSet& tc = g.cache_of(vx.target);
      for (auto h = tc.find_first(); h != FileSet::npos; h = tc.find_next(h)) {
        s.strip[static_cast<size_t>(vx.file) * fu + h] = 0;
        s.strip[h * fu + vx.file] = 0;
      }
    }
    for (size_t m = block_start; m < block_end; ++m) {
      const Vertex& vx = g.vertex(members[m]);
      s.same_file[vx.file] += vx.weight;
      const FileSet& tc = g.cache_of(vx.target);
      for (auto h = tc.find_first(); h != FileSet::npos; h = tc.find_next(h))
        s.strip[static_cast<size_t>(vx.file) * fu + h] += vx.weight;
    }
    for (size_t m = block_start; m < block_end; ++m) {
      const Vertex& vx = g.vertex(members[m]);
      double same_tx = s.same_file[vx.file] - vx.weight;
      const FileSet& own = g.cache_of(vx.target);
      for (auto f = own.find_first(); f != FileSet::npos; f = own.find_next(f))
        same_tx += s.strip[f * fu + vx.file];
      // Other transmitters: everything except same-target conflicts and the
      // send/receive crossovers with vx's endpoints.
      const double other = class_total - s.tx_total[k] -
                           (s.target_total[vx.target] -
                            s.tx_target[static_cast<size_t>(k) * n + vx.target]) -
                           s.tx_total[vx.target] - s.target_total[k] +
                           s.tx_target[static_cast<size_t>(vx.target) * n + k];
      out[m] = same_tx + other;
    }
    block_start = block_end;
  }
}

void naive_gdeg(const ConflictGraph& g, std::span<const int> members,
                std::vector<double>& out) {
  out.assign(members.size(), 0.0);
  for (size_t a = 0; a < members.size(); ++a) {
    for (size_t b = 0; b < members.size(); ++b) {
      if (a == b) continue;
      if (!g.adjacent(members[a], members[b])) out[a] += g.vertex(members[b]).weight;
    }
  }
}

bool closed_form_applies(const ConflictGraph& g, std::span<const int> members) {
  for (int v : members)
    if (!std::isfinite(g.vertex(v).weight)) return false;
  return g.device_count() > 0;
}

void compute_gdeg(const ConflictGraph& g, bool rule_based, std::span<const int> members,
                  std::vector<double>& out) {
  if (rule_based && closed_form_applies(g, members)) {
    closed_form_gdeg(g, members, out);
  } else {
    naive_gdeg(g, members, out);
  }
}

IndependentSet finalize(const ConflictGraph& g, std::vector<int> sel) {
  IndependentSet s;
  s.vertices = std::move(sel);
  if (s.vertices.empty()) return s;
  s.rate = g.vertex(s.vertices.front()).rate;
  for (int v : s.vertices) {
    if (g.vertex(v).rate != s.rate)
      throw std::logic_error("independent set spans rate classes");
    s.total_weight += g.vertex(v).weight;
  }
  std::vector<int> order = s.vertices;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return g.vertex(a).tx < g.vertex(b).tx;
  });
  const int fu = std::max(1, g.file_universe());
  for (int v : order) {
    const Vertex& vx = g.vertex(v);
    if (s.transmissions.empty() || s.transmissions.back().tx != vx.tx) {
      Transmission t;
      t.tx = vx.tx;
      t.files = FileSet(fu);
      s.transmissions.push_back(std::move(t));
    }
    Transmission& t = s.transmissions.back();
    if (vx.file >= 0) t.files.set(vx.file);
    t.targets.push_back(vx.target);
  }
  for (Transmission& t : s.transmissions) {
    std::sort(t.targets.begin(), t.targets.end());
    t.targets.erase(std::unique(t.targets.begin(), t.targets.end()), t.targets.end());
  }
  return s;
}

}  // namespace

double weighted_degree(const ConflictGraph& g, int v) {
  double sum = 0;
  for (int u = 0; u < g.size(); ++u) {
    if (u == v) continue;
    if (!g.adjacent(v, u)) sum += g.vertex(u).weight;
  }
  return sum;
}

IndependentSet greedy_mwis(const ConflictGraph& g) {
  if (g.size() == 0) return {};
  const bool rule_based = g.edges_are_rule_based();

  std::vector<double> gdeg;
  Pick best;
  int best_class = -1;
  size_t best_pos = 0;
  for (int c = 0; c < g.class_count(); ++c) {
    const std::vector<int>& members = g.class_members(c);
    compute_gdeg(g, rule_based, members, gdeg);
    for (size_t m = 0; m < members.size(); ++m) {
      const Vertex& vx = g.vertex(members[m]);
      Pick p{modified_weight(vx.weight, gdeg[m]), vx.weight, vx.tx, vx.target,
             vx.file, members[m]};
      if (best.id < 0 || better(p, best)) {
        best = p;
        best_class = c;
        best_pos = m;
      }
    }
  }

  std::vector<int> sel{best.id};
  std::vector<int> survivors;
  for (size_t m = 0; m < g.class_members(best_class).size(); ++m) {
    if (m == best_pos) continue;
    const int v = g.class_members(best_class)[m];
    if (!g.adjacent(best.id, v)) survivors.push_back(v);
  }

  while (!survivors.empty()) {
    compute_gdeg(g, rule_based, survivors, gdeg);
    Pick pick;
    for (size_t m = 0; m < survivors.size(); ++m) {
      const Vertex& vx = g.vertex(survivors[m]);
      Pick p{modified_weight(vx.weight, gdeg[m]), vx.weight, vx.tx, vx.target,
             vx.file, survivors[m]};
      if (pick.id < 0 || better(p, pick)) pick = p;
    }
    sel.push_back(pick.id);
    std::vector<int> next;
    next.reserve(survivors.size());
    for (int v : survivors)
      if (v != pick.id && !g.adjacent(pick.id, v)) next.push_back(v);
    survivors.swap(next);
  }
  return finalize(g, std::move(sel));
}

IndependentSet exact_mwis(const ConflictGraph& g, int vertex_cap) {
  const int n = g.size();
  if (n > vertex_cap || n > 63)
    throw std::invalid_argument("exact search refuses graphs above the vertex cap");
  if (n == 0) return {};

  // Branch in descending-weight order for tighter bounds; ids break ties.
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (g.vertex(a).weight != g.vertex(b).weight)
      return g.vertex(a).weight > g.vertex(b).weight;
    return a < b;
  });
  std::vector<std::uint64_t> adj(n, 0);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      if (a != b && g.adjacent(order[a], order[b])) adj[a] |= 1ull << b;
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) w[i] = g.vertex(order[i]).weight;

  double best_w = -1;
  std::uint64_t best_set = 0;
  auto dfs = [&](auto&& self, std::uint64_t cand, double cur, std::uint64_t set) -> void {
    if (cur > best_w) {
      best_w = cur;
      best_set = set;
    }
    if (!cand) return;
    double bound = cur;
    for (std::uint64_t rest = cand; rest;) {
      const int v = std::countr_zero(rest);
      rest &= rest - 1;
      bound += w[v];
    }
    if (bound <= best_w) return;
    const int v = std::countr_zero(cand);
    self(self, cand & ~adj[v] & ~(1ull << v), cur + w[v], set | (1ull << v));
    self(self, cand & ~(1ull << v), cur, set);
  };
  dfs(dfs, n == 64 ? ~0ull : ((1ull << n) - 1), 0.0, 0);

  std::vector<int> sel;
  for (int i = 0; i < n; ++i)
    if (best_set & (1ull << i)) sel.push_back(order[i]);
  std::sort(sel.begin(), sel.end());
  // Extend to maximal (only zero-weight vertices can still fit).
  for (int v = 0; v < n; ++v) {
    bool fits = std::find(sel.begin(), sel.end(), v) == sel.end();
    for (int u : sel)
      if (fits && g.adjacent(u, v)) fits = false;
    if (fits) sel.insert(std::lower_bound(sel.begin(), sel.end(), v), v);
  }
  return finalize(g, std::move(sel));
}

}  // namespace d2dnc
