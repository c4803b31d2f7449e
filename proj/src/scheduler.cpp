#include "d2dnc/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "d2dnc/mwis.hpp"
#include "d2dnc/power.hpp"
#include "d2dnc/rng.hpp"

namespace d2dnc {

namespace {

constexpr double kAdmissionMargin = 1e-9;  // relative objective gain required to admit

struct Ranked {
  std::vector<int> demanders;
  std::vector<int> rank;  // 1-based among demanders, 0 elsewhere
};

Ranked rank_demanders(const NetworkState& state, const std::vector<double>& lower_bounds) {
  Ranked out;
  out.demanders = state.demanders();
  out.rank.assign(state.devices(), 0);
  std::vector<int> order = out.demanders;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (lower_bounds[a] != lower_bounds[b]) return lower_bounds[a] > lower_bounds[b];
    return a < b;
  });
  for (int d = 0; d < static_cast<int>(order.size()); ++d) out.rank[order[d]] = d + 1;
  return out;
}

std::vector<int> all_devices(const NetworkState& state) {
  std::vector<int> ids(state.devices());
  std::iota(ids.begin(), ids.end(), 0);
  return ids;
}

// Capacity of the (tx, rx) link when exactly the listed transmitters are
// active at the given per-device powers.
double pair_capacity(const Mat& gains, const std::vector<double>& powers_w,
                     const std::vector<int>& active, int tx, int rx, double noise_w) {
  double interference = 0;
  for (int m : active)
    if (m != tx) interference += powers_w[m] * gains(m, rx);
  const double sinr = powers_w[tx] * gains(tx, rx) / (noise_w + interference);
  return std::log2(1.0 + sinr);
}

// Smallest usable rate: threshold itself, or the smallest ladder rate at or
// above it when a ladder is active.
double rate_floor(const SimParams& p) {
  if (p.rate_ladder.empty()) return p.rate_threshold;
  double floor = std::numeric_limits<double>::infinity();
  for (double r : p.rate_ladder)
    if (r >= p.rate_threshold && r > 0) floor = std::min(floor, r);
  return floor;
}

// Largest ladder rate not exceeding cap (caller guarantees one exists).
double quantize_rate(double cap, const std::vector<double>& ladder) {
  double best = 0;
  for (double r : ladder)
    if (r <= cap) best = std::max(best, r);
  if (best <= 0) throw std::logic_error("no ladder rate fits the reconciled capacity");
  return best;
}

struct Admitted {
  int tx = -1;
  FileSet files;
  std::vector<int> assigned;  // targets given to this transmitter
  std::vector<int> passing;   // assigned targets currently meeting the floor
};

void erase_value(std::vector<int>& v, int value) {
  v.erase(std::remove(v.begin(), v.end(), value), v.end());
}

// XOR of the transmitter's copies of the combined files (only when end-to-end
// payload verification is on).
std::vector<std::uint8_t> xor_payload(const NetworkState& state, int tx, const FileSet& files) {
  std::vector<std::uint8_t> bytes;
  if (!state.payload_mode()) return bytes;
  for (auto f = files.find_first(); f != FileSet::npos; f = files.find_next(f)) {
    const auto& src = state.device_payload(tx, static_cast<int>(f));
    if (bytes.empty()) {
      bytes = src;
    } else {
      if (bytes.size() != src.size()) throw std::logic_error("payload length mismatch");
      for (size_t b = 0; b < bytes.size(); ++b) bytes[b] ^= src[b];
    }
  }
  return bytes;
}

ScheduleContext make_power_context(const std::vector<Admitted>& admitted, const Mat& gains,
                                   const SimParams& p) {
  ScheduleContext ctx;
  ctx.gains = &gains;
  ctx.noise_w = p.noise_w;
  ctx.qmax_w = p.qmax_w;
  ctx.q_init_w = p.qmax_w;
  ctx.max_iterations = p.power_max_iterations;
  ctx.rel_tolerance = p.power_rel_tolerance;
  ctx.gauss_seidel = p.power_gauss_seidel;
  for (const Admitted& a : admitted) {
    ctx.transmitters.push_back(a.tx);
    ctx.targets.push_back(a.passing.empty() ? a.assigned : a.passing);
  }
  return ctx;
}

[[noreturn]] void stall(const std::string& scheme, const NetworkState& state,
                        const std::string& why) {
  std::ostringstream msg;
  msg << scheme << ": no feasible transmission (" << why
      << "; demanders=" << state.demanders().size()
      << ", remaining=" << state.total_wanted() << ")";
  throw StallError(msg.str());
}

}  // namespace

std::string to_string(SchedulerKind kind) {
  switch (kind) {
    case SchedulerKind::Clnc: return "clnc";
    case SchedulerKind::RaIdncSingle: return "ra-idnc-single";
    case SchedulerKind::CooperativeIdnc: return "cooperative-idnc";
    case SchedulerKind::CooperativeRlnc: return "cooperative-rlnc";
    case SchedulerKind::UncodedBroadcast: return "uncoded-broadcast";
  }
  throw std::logic_error("unknown scheduler kind");
}

std::optional<SchedulerKind> scheduler_from_string(const std::string& name) {
  for (SchedulerKind k :
       {SchedulerKind::Clnc, SchedulerKind::RaIdncSingle, SchedulerKind::CooperativeIdnc,
        SchedulerKind::CooperativeRlnc, SchedulerKind::UncodedBroadcast})
    if (to_string(k) == name) return k;
  return std::nullopt;
}

std::vector<std::string> scheduler_names() {
  return {"clnc", "ra-idnc-single", "cooperative-idnc", "cooperative-rlnc",
          "uncoded-broadcast"};
}

Mat single_tx_capacities(const Mat& gains, double qmax_w, double noise_w) {
  Mat caps(gains.rows(), gains.cols());
  for (int k = 0; k < gains.rows(); ++k)
    for (int i = 0; i < gains.cols(); ++i)
      if (i != k) caps(k, i) = std::log2(1.0 + qmax_w * gains(k, i) / noise_w);
  return caps;
}

std::vector<double> harmonic_rates_bps(const Mat& interference_free_caps, double bandwidth_hz) {
  const int n = interference_free_caps.rows();
  std::vector<double> rates(n, 0.0);
  for (int u = 0; u < n; ++u) {
    double inv_sum = 0;
    bool dead = (n <= 1);
    for (int k = 0; k < n && !dead; ++k) {
      if (k == u) continue;
      const double c = interference_free_caps(k, u);
      if (c <= 0) {
        dead = true;
        break;
      }
      inv_sum += 1.0 / c;
    }
    if (!dead) rates[u] = bandwidth_hz * (n - 1) / inv_sum;
  }
  return rates;
}

SlotDecision clnc_slot(const SlotInputs& in) {
  const NetworkState& state = in.state;
  const SimParams& p = in.params;
  const int n = state.devices();
  const Ranked ranked = rank_demanders(state, in.lower_bounds);
  if (ranked.demanders.empty()) throw std::logic_error("clnc_slot called with no demand");

  WeightContext wc;
  wc.lower_bound = in.lower_bounds;
  wc.rank = ranked.rank;
  wc.demander_count = static_cast<int>(ranked.demanders.size());
  wc.file_bits = state.frame().file_bits;

  GraphOptions opt;
  opt.rate_threshold = p.rate_threshold;
  opt.rate_ladder = p.rate_ladder;
  opt.dense_adjacency_limit = p.dense_adjacency_limit;

  const double floor = rate_floor(p);

  std::vector<Admitted> admitted;
  std::vector<char> rejected(n, 0);
  std::vector<double> q(n, 0.0);
  double prev_obj = 0;

  SlotDecision best;
  double best_metric = std::numeric_limits<double>::infinity();
  bool have_best = false;

  auto is_admitted_tx = [&](int u) {
    return std::any_of(admitted.begin(), admitted.end(),
                       [&](const Admitted& a) { return a.tx == u; });
  };

  const int round_cap = 4 * n + 8;
  int round = 0;
  while (round < round_cap) {
    ++round;
    std::vector<char> passing_any(n, 0);
    for (const Admitted& a : admitted)
      for (int i : a.passing) passing_any[i] = 1;

    std::vector<int> pool_tx;
    for (int u = 0; u < n; ++u)
      if (!rejected[u] && !passing_any[u] && !is_admitted_tx(u)) pool_tx.push_back(u);
    std::vector<int> pool_targets;
    for (int u : ranked.demanders)
      if (!passing_any[u] && !is_admitted_tx(u)) pool_targets.push_back(u);
    if (pool_tx.empty() || pool_targets.empty()) break;

    // Candidates probe at full power against the interference the standing
    // transmitters already create.
    Mat cand_caps(n, n);
    std::vector<int> active = [&] {
      std::vector<int> ids;
      for (const Admitted& a : admitted) ids.push_back(a.tx);
      return ids;
    }();
    for (int k : pool_tx) {
      for (int i : pool_targets) {
        if (i == k) continue;
        double interference = 0;
        for (int m : active) interference += q[m] * in.gains(m, i);
        cand_caps(k, i) =
            std::log2(1.0 + p.qmax_w * in.gains(k, i) / (p.noise_w + interference));
      }
    }

    ConflictGraph g = build_graph(state, cand_caps, pool_tx, pool_targets, wc, opt);
    if (g.size() == 0) break;
    IndependentSet is = greedy_mwis(g);
    if (is.empty()) break;

    const int new_tx = g.vertex(is.vertices.front()).tx;
    const Transmission* chosen = nullptr;
    for (const Transmission& t : is.transmissions)
      if (t.tx == new_tx) chosen = &t;
    if (!chosen) throw std::logic_error("selected transmitter missing from grouping");

    std::vector<Admitted> tentative = admitted;
    for (Admitted& a : tentative) {
      erase_value(a.assigned, new_tx);
      erase_value(a.passing, new_tx);
      for (int i : chosen->targets) {
        erase_value(a.assigned, i);
        erase_value(a.passing, i);
      }
    }
    Admitted fresh;
    fresh.tx = new_tx;
    fresh.files = chosen->files;
    fresh.assigned = chosen->targets;
    fresh.passing = chosen->targets;
    tentative.push_back(std::move(fresh));

    PowerResult pres = allocate_power(make_power_context(tentative, in.gains, p));
    if (!(pres.objective > prev_obj * (1.0 + kAdmissionMargin)) ||
        !(pres.objective > 0)) {
      break;  // failed admission ends the search
    }

    const double round_start_obj = prev_obj;
    const std::vector<Admitted> saved_admitted = admitted;
    const std::vector<double> saved_q = q;
    const std::vector<char> saved_rejected = rejected;

    admitted = std::move(tentative);
    q = pres.powers_w;
    prev_obj = pres.objective;

    // Re-validate rates at the balanced powers; evict transmitters left with
    // no viable target and re-balance until stable.
    while (!admitted.empty()) {
      std::vector<int> act;
      for (const Admitted& a : admitted) act.push_back(a.tx);
      for (Admitted& a : admitted) {
        a.passing.clear();
        for (int i : a.assigned)
          if (pair_capacity(in.gains, q, act, a.tx, i, p.noise_w) >= floor)
            a.passing.push_back(i);
      }
      std::vector<Admitted> survivors;
      for (Admitted& a : admitted) {
        if (a.passing.empty()) {
          rejected[a.tx] = 1;
          q[a.tx] = 0;
        } else {
          survivors.push_back(std::move(a));
        }
      }
      const bool evicted_some = survivors.size() != admitted.size();
      admitted = std::move(survivors);
      if (!evicted_some || admitted.empty()) break;
      PowerResult re = allocate_power(make_power_context(admitted, in.gains, p));
      q = re.powers_w;
      prev_obj = re.objective;
    }

    // An admission only stands if the configuration that survives rate
    // re-validation still improves on the previous round; otherwise the round
    // is voided and the search stops, keeping the sum-capacity monotone.
    if (admitted.empty() || !(prev_obj > round_start_obj * (1.0 + kAdmissionMargin)) ||
        !(prev_obj > 0)) {
      admitted = saved_admitted;
      q = saved_q;
      rejected = saved_rejected;
      prev_obj = round_start_obj;
      break;
    }

    // Snapshot this round's schedule and keep the one with the smallest
    // worst-case completion metric.
    std::vector<int> act;
    for (const Admitted& a : admitted) act.push_back(a.tx);
    double min_cap = std::numeric_limits<double>::infinity();
    std::vector<char> targeted_now(n, 0);
    for (const Admitted& a : admitted)
      for (int i : a.passing) {
        targeted_now[i] = 1;
        min_cap = std::min(min_cap, pair_capacity(in.gains, q, act, a.tx, i, p.noise_w));
      }
    const double rate = p.rate_ladder.empty() ? min_cap : quantize_rate(min_cap, p.rate_ladder);
    const double duration = state.frame().file_bits / (rate * p.bandwidth_hz);
    // Anticipated completion bound after a hypothetical commit: a targeted
    // demander decodes one file (its remaining-demand term shrinks by
    // (T̄-delay)/|W|, one file's share), everyone else accrues the slot.
    double metric = 0;
    for (int u : ranked.demanders) {
      const double tbar = in.lower_bounds[u];
      double anticipated;
      if (targeted_now[u]) {
        const double delay = state.accumulated_delay(u);
        const double wcount = static_cast<double>(state.wants(u).count());
        anticipated = std::isfinite(tbar) ? tbar - (tbar - delay) / wcount
                                          : (wcount == 1 ? delay : tbar);
      } else {
        anticipated = tbar + duration;
      }
      metric = std::max(metric, anticipated);
    }
    if (metric < best_metric) {
      best_metric = metric;
      SlotDecision d;
      std::vector<Admitted> ordered = admitted;
      std::sort(ordered.begin(), ordered.end(),
                [](const Admitted& a, const Admitted& b) { return a.tx < b.tx; });
      for (const Admitted& a : ordered) {
        d.transmitters.push_back(a.tx);
        CodedPacket pkt;
        pkt.tx = a.tx;
        pkt.files = a.files;
        pkt.payload = xor_payload(state, a.tx, a.files);
        d.packets.push_back(std::move(pkt));
        std::vector<int> tg = a.passing;
        std::sort(tg.begin(), tg.end());
        for (int i : tg) d.targeted.push_back(i);
        d.targets.push_back(std::move(tg));
      }
      std::sort(d.targeted.begin(), d.targeted.end());
      d.rate = rate;
      d.duration_s = duration;
      d.powers_w = q;
      d.sum_capacity = prev_obj;
      d.admission_rounds = round;
      best = std::move(d);
      have_best = true;
    }
  }
  if (round >= round_cap) throw std::logic_error("clnc admission loop exceeded round cap");
  if (!have_best) stall("clnc", state, "no admissible independent set");
  return best;
}

SlotDecision ra_idnc_single_slot(const SlotInputs& in) {
  const NetworkState& state = in.state;
  const SimParams& p = in.params;
  const Ranked ranked = rank_demanders(state, in.lower_bounds);
  if (ranked.demanders.empty()) throw std::logic_error("ra_idnc_single_slot: no demand");

  WeightContext wc;
  wc.lower_bound = in.lower_bounds;
  wc.rank = ranked.rank;
  wc.demander_count = static_cast<int>(ranked.demanders.size());
  wc.file_bits = state.frame().file_bits;

  GraphOptions opt;
  opt.rate_threshold = p.rate_threshold;
  opt.rate_ladder = p.rate_ladder;
  opt.dense_adjacency_limit = p.dense_adjacency_limit;

  const Mat caps = single_tx_capacities(in.gains, p.qmax_w, p.noise_w);
  ConflictGraph g = build_graph(state, caps, all_devices(state), ranked.demanders, wc, opt);
  if (g.size() == 0) stall("ra-idnc-single", state, "empty conflict graph");
  IndependentSet is = greedy_mwis(g);
  const int tx = g.vertex(is.vertices.front()).tx;
  const Transmission* chosen = nullptr;
  for (const Transmission& t : is.transmissions)
    if (t.tx == tx) chosen = &t;

  SlotDecision d;
  d.transmitters = {tx};
  CodedPacket pkt;
  pkt.tx = tx;
  pkt.files = chosen->files;
  pkt.payload = xor_payload(state, tx, chosen->files);
  d.packets.push_back(std::move(pkt));
  d.targets.push_back(chosen->targets);
  d.targeted = chosen->targets;
  d.powers_w.assign(state.devices(), 0.0);
  d.powers_w[tx] = p.qmax_w;

  double min_cap = std::numeric_limits<double>::infinity();
  for (int i : chosen->targets) min_cap = std::min(min_cap, caps(tx, i));
  d.rate = p.rate_ladder.empty() ? min_cap : quantize_rate(min_cap, p.rate_ladder);
  d.duration_s = state.frame().file_bits / (d.rate * p.bandwidth_hz);

  ScheduleContext ctx;
  ctx.transmitters = {tx};
  ctx.targets = {chosen->targets};
  ctx.gains = &in.gains;
  ctx.noise_w = p.noise_w;
  ctx.qmax_w = p.qmax_w;
  d.sum_capacity = sum_capacity(ctx, d.powers_w);
  d.admission_rounds = 1;
  return d;
}

SlotDecision cooperative_idnc_slot(const SlotInputs& in) {
  const NetworkState& state = in.state;
  const SimParams& p = in.params;
  const std::vector<int> demanders = state.demanders();
  if (demanders.empty()) throw std::logic_error("cooperative_idnc_slot: no demand");

  ConflictGraph g =
      build_unit_graph(state, all_devices(state), demanders, p.dense_adjacency_limit);
  if (g.size() == 0) stall("cooperative-idnc", state, "no holder of any wanted file");
  IndependentSet is = greedy_mwis(g);

  SlotDecision d;
  d.powers_w.assign(state.devices(), 0.0);
  std::vector<int> active;
  for (const Transmission& t : is.transmissions) active.push_back(t.tx);
  for (int tx : active) d.powers_w[tx] = p.qmax_w;

  double min_cap = std::numeric_limits<double>::infinity();
  double sum_cap = 0;
  for (const Transmission& t : is.transmissions) {
    d.transmitters.push_back(t.tx);
    CodedPacket pkt;
    pkt.tx = t.tx;
    pkt.files = t.files;
    pkt.payload = xor_payload(state, t.tx, t.files);
    d.packets.push_back(std::move(pkt));
    d.targets.push_back(t.targets);
    for (int i : t.targets) {
      const double c = pair_capacity(in.gains, d.powers_w, active, t.tx, i, p.noise_w);
      min_cap = std::min(min_cap, c);
      sum_cap += c;
      d.targeted.push_back(i);
    }
  }
  std::sort(d.targeted.begin(), d.targeted.end());
  if (!(min_cap > 0)) stall("cooperative-idnc", state, "zero capacity on a scheduled link");
  d.rate = min_cap;
  d.duration_s = state.frame().file_bits / (d.rate * p.bandwidth_hz);
  d.sum_capacity = sum_cap;
  d.admission_rounds = 1;
  return d;
}

SlotDecision rlnc_slot(const SlotInputs& in, RlncProgress& progress) {
  const NetworkState& state = in.state;
  const SimParams& p = in.params;
  const int n = state.devices();
  if (state.all_met()) throw std::logic_error("rlnc_slot: no demand");

  int tx = 0;
  for (int u = 1; u < n; ++u)
    if (state.cache(u).count() > state.cache(tx).count()) tx = u;

  if (progress.epoch_tx != tx) {
    progress.epoch_tx = tx;
    progress.epoch_cache = state.cache(tx);
    progress.required.assign(n, 0);
    progress.credited.assign(n, 0);
    for (int i = 0; i < n; ++i)
      if (i != tx) progress.required[i] =
          static_cast<int>((progress.epoch_cache & state.wants(i)).count());
  }

  double min_cap = std::numeric_limits<double>::infinity();
  double sum_cap = 0;
  for (int i = 0; i < n; ++i) {
    if (i == tx) continue;
    const double c = std::log2(1.0 + p.qmax_w * in.gains(tx, i) / p.noise_w);
    min_cap = std::min(min_cap, c);
    sum_cap += c;
  }
  if (!(min_cap > 0)) stall("cooperative-rlnc", state, "zero broadcast capacity");

  SlotDecision d;
  d.transmitters = {tx};
  CodedPacket pkt;
  pkt.tx = tx;
  pkt.files = progress.epoch_cache;
  pkt.rlnc = true;
  d.packets.push_back(std::move(pkt));
  std::vector<int> decoders;
  for (int i = 0; i < n; ++i)
    if (i != tx && progress.required[i] > 0 &&
        progress.credited[i] == progress.required[i] - 1)
      decoders.push_back(i);
  d.targets.push_back(decoders);
  d.targeted = decoders;
  d.powers_w.assign(n, 0.0);
  d.powers_w[tx] = p.qmax_w;
  d.rate = min_cap;
  d.duration_s = state.frame().file_bits / (d.rate * p.bandwidth_hz);
  d.sum_capacity = sum_cap;
  d.admission_rounds = 1;
  return d;
}

void rlnc_apply(NetworkState& state, RlncProgress& progress, const SlotDecision& d) {
  const int tx = d.transmitters.at(0);
  for (int i = 0; i < state.devices(); ++i) {
    if (i == tx || progress.credited[i] >= progress.required[i]) continue;
    ++progress.credited[i];
    if (progress.credited[i] == progress.required[i]) {
      FileSet missing = progress.epoch_cache & state.wants(i);
      for (auto f = missing.find_first(); f != FileSet::npos; f = missing.find_next(f))
        state.grant_file(i, static_cast<int>(f));
    }
  }
}

SlotDecision uncoded_broadcast_slot(const SlotInputs& in, std::mt19937_64& rng) {
  const NetworkState& state = in.state;
  const SimParams& p = in.params;
  const int n = state.devices();
  if (state.all_met()) throw std::logic_error("uncoded_broadcast_slot: no demand");

  FileSet wanted_union(static_cast<size_t>(state.files()));
  for (int i = 0; i < n; ++i) wanted_union |= state.wants(i);

  std::vector<int> eligible;
  for (int u = 0; u < n; ++u)
    if ((state.cache(u) & wanted_union).any()) eligible.push_back(u);
  if (eligible.empty()) stall("uncoded-broadcast", state, "no holder of any wanted file");

  std::uniform_int_distribution<size_t> pick(0, eligible.size() - 1);
  const int tx = eligible[pick(rng)];

  int best_file = -1;
  int best_count = 0;
  FileSet sendable = state.cache(tx) & wanted_union;
  for (auto f = sendable.find_first(); f != FileSet::npos; f = sendable.find_next(f)) {
    int cnt = 0;
    for (int i = 0; i < n; ++i)
      if (i != tx && state.wants(i).test(f)) ++cnt;
    if (cnt > best_count) {
      best_count = cnt;
      best_file = static_cast<int>(f);
    }
  }
  if (best_file < 0) stall("uncoded-broadcast", state, "chosen holder has no wanted file");

  double min_cap = std::numeric_limits<double>::infinity();
  double sum_cap = 0;
  for (int i = 0; i < n; ++i) {
    if (i == tx) continue;
    const double c = std::log2(1.0 + p.qmax_w * in.gains(tx, i) / p.noise_w);
    min_cap = std::min(min_cap, c);
    sum_cap += c;
  }
  if (!(min_cap > 0)) stall("uncoded-broadcast", state, "zero broadcast capacity");

  SlotDecision d;
  d.transmitters = {tx};
  CodedPacket pkt;
  pkt.tx = tx;
  pkt.files = FileSet(static_cast<size_t>(state.files()));
  pkt.files.set(best_file);
  if (state.payload_mode()) pkt.payload = state.device_payload(tx, best_file);
  d.packets.push_back(std::move(pkt));
  std::vector<int> targets;
  for (int i = 0; i < n; ++i)
    if (i != tx && state.wants(i).test(best_file)) targets.push_back(i);
  d.targets.push_back(targets);
  d.targeted = targets;
  d.powers_w.assign(n, 0.0);
  d.powers_w[tx] = p.qmax_w;
  d.rate = min_cap;
  d.duration_s = state.frame().file_bits / (d.rate * p.bandwidth_hz);
  d.sum_capacity = sum_cap;
  d.admission_rounds = 1;
  return d;
}

void validate_decision(const SlotDecision& d, const NetworkState& state, const Mat& gains,
                       const SimParams& params, double rate_threshold, bool idnc_semantics) {
  auto fail = [](const std::string& what) { throw std::logic_error("invalid decision: " + what); };
  const int n = state.devices();
  if (d.transmitters.empty()) fail("no transmitter");
  if (d.packets.size() != d.transmitters.size() || d.targets.size() != d.transmitters.size())
    fail("packet/target lists not parallel to transmitters");
  if (!std::is_sorted(d.transmitters.begin(), d.transmitters.end()) ||
      std::adjacent_find(d.transmitters.begin(), d.transmitters.end()) != d.transmitters.end())
    fail("transmitters not sorted unique");

  std::vector<char> is_tx(n, 0);
  for (int t : d.transmitters) {
    if (t < 0 || t >= n) fail("transmitter out of range");
    is_tx[t] = 1;
  }
  std::vector<char> is_target(n, 0);
  std::vector<int> union_targets;
  for (size_t k = 0; k < d.transmitters.size(); ++k) {
    const CodedPacket& pkt = d.packets[k];
    if (pkt.tx != d.transmitters[k]) fail("packet source mismatch");
    if (pkt.files.size() != static_cast<size_t>(state.files())) fail("packet universe size");
    if (!pkt.files.any()) fail("empty packet");
    if (!pkt.files.is_subset_of(state.cache(pkt.tx))) fail("transmitter lacks a combined file");
    const auto& tg = d.targets[k];
    if (!std::is_sorted(tg.begin(), tg.end()) ||
        std::adjacent_find(tg.begin(), tg.end()) != tg.end())
      fail("targets not sorted unique");
    for (int i : tg) {
      if (i < 0 || i >= n) fail("target out of range");
      if (is_tx[i]) fail("device both transmits and receives");
      if (is_target[i]) fail("device targeted by two transmitters");
      is_target[i] = 1;
      union_targets.push_back(i);
      if (idnc_semantics && !is_instantly_decodable(pkt, state, i))
        fail("target cannot instantly decode");
    }
  }
  std::sort(union_targets.begin(), union_targets.end());
  if (union_targets != d.targeted) fail("targeted union mismatch");

  if (!(d.rate > 0)) fail("non-positive rate");
  if (d.rate < rate_threshold * (1.0 - 1e-12)) fail("rate below threshold");
  const double expect =
      state.frame().file_bits / (d.rate * params.bandwidth_hz);
  if (std::abs(d.duration_s - expect) > 1e-9 * expect) fail("duration/rate mismatch");

  if (d.powers_w.size() != static_cast<size_t>(n)) fail("power vector size");
  for (int u = 0; u < n; ++u) {
    if (d.powers_w[u] < 0 || d.powers_w[u] > params.qmax_w * (1.0 + 1e-12))
      fail("power out of range");
    if (is_tx[u] && !(d.powers_w[u] > 0)) fail("transmitter silent");
    if (!is_tx[u] && d.powers_w[u] != 0) fail("non-transmitter with power");
  }
  for (size_t k = 0; k < d.transmitters.size(); ++k) {
    for (int i : d.targets[k]) {
      const double c =
          pair_capacity(gains, d.powers_w, d.transmitters, d.transmitters[k], i, params.noise_w);
      if (c < d.rate * (1.0 - 1e-9)) fail("scheduled link cannot sustain the common rate");
    }
  }
}

FadedGains::FadedGains(Mat loss_db, std::uint64_t seed, bool per_slot)
    : loss_db_(std::move(loss_db)), seed_(seed), per_slot_(per_slot) {}

const Mat& FadedGains::gains_for_slot(int slot) {
  const int want = per_slot_ ? slot : 1;
  if (current_slot_ != want) {
    auto rng = make_rng(derive_seed(seed_, {0xFADu, static_cast<std::uint64_t>(want)}));
    current_ = apply_fading(loss_db_, rng);
    current_slot_ = want;
  }
  return current_;
}

RunResult run_schedule(NetworkState& state, GainProvider& gains, SchedulerKind kind,
                       const SimParams& params, std::uint64_t scheme_rng_seed,
                       bool keep_trace) {
  RunResult rr;
  rr.scheme = kind;
  const int n = state.devices();

  const Mat if_caps = single_tx_capacities(gains.gains_for_slot(1), params.qmax_w, params.noise_w);
  const std::vector<double> harmonic = harmonic_rates_bps(if_caps, params.bandwidth_hz);

  rr.per_device_completion_s.assign(n, 0.0);
  std::vector<char> done(n, 0);
  for (int u = 0; u < n; ++u)
    if (state.demand_met(u)) done[u] = 1;

  RlncProgress progress;
  auto rng = make_rng(scheme_rng_seed);
  const bool idnc_semantics = kind != SchedulerKind::CooperativeRlnc;
  const double threshold =
      (kind == SchedulerKind::Clnc || kind == SchedulerKind::RaIdncSingle)
          ? params.rate_threshold
          : 0.0;

  long long tx_total = 0;
  int slot = 0;
  while (!state.all_met()) {
    if (slot >= params.slot_cap) {
      std::ostringstream msg;
      msg << to_string(kind) << ": slot cap " << params.slot_cap
          << " exceeded with " << state.total_wanted() << " files still wanted";
      throw StallError(msg.str());
    }
    ++slot;
    const Mat& g = gains.gains_for_slot(slot);

    std::vector<double> bounds(n, 0.0);
    for (int u = 0; u < n; ++u) bounds[u] = completion_lower_bound(state, u, harmonic[u]);

    SlotInputs in{state, g, bounds, params};
    SlotDecision d;
    switch (kind) {
      case SchedulerKind::Clnc: d = clnc_slot(in); break;
      case SchedulerKind::RaIdncSingle: d = ra_idnc_single_slot(in); break;
      case SchedulerKind::CooperativeIdnc: d = cooperative_idnc_slot(in); break;
      case SchedulerKind::CooperativeRlnc: d = rlnc_slot(in, progress); break;
      case SchedulerKind::UncodedBroadcast: d = uncoded_broadcast_slot(in, rng); break;
    }
    if (params.validate_decisions)
      validate_decision(d, state, g, params, threshold, idnc_semantics);

    state.accrue_delay(d.duration_s, d.targeted, d.transmitters);
    if (kind == SchedulerKind::CooperativeRlnc) {
      rlnc_apply(state, progress, d);
    } else {
      for (size_t k = 0; k < d.transmitters.size(); ++k)
        for (int i : d.targets[k]) state.apply_decode(d.packets[k], i);
    }
    for (int u = 0; u < n; ++u)
      if (!done[u] && state.demand_met(u)) {
        done[u] = 1;
        rr.per_device_completion_s[u] = state.elapsed();
      }
    tx_total += static_cast<long long>(d.transmitters.size());
    if (keep_trace) rr.trace.push_back({slot, d, state.total_wanted()});
  }
  rr.slots = slot;
  rr.completion_s = state.elapsed();
  rr.transmitters_per_slot = slot > 0 ? static_cast<double>(tx_total) / slot : 0.0;
  return rr;
}

}  // namespace d2dnc
