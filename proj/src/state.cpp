#include "d2dnc/state.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace d2dnc {

namespace {

void check_side_information_args(const Frame& frame, int devices) {
  if (frame.files < 1) throw ConfigError("frame needs at least one file");
  if (frame.file_bits <= 0) throw ConfigError("file size must be positive");
  if (devices < 2) throw ConfigError("need at least 2 devices");
}

std::vector<int> pick_subset(int universe, int count, std::mt19937_64& rng) {
  std::vector<int> ids(universe);
  std::iota(ids.begin(), ids.end(), 0);
  for (int j = 0; j < count; ++j) {
    std::uniform_int_distribution<int> pick(j, universe - 1);
    std::swap(ids[j], ids[pick(rng)]);
  }
  ids.resize(count);
  return ids;
}

void enforce_union_coverage(std::vector<FileSet>& caches, int files, std::mt19937_64& rng) {
  FileSet covered(files);
  for (const FileSet& c : caches) covered |= c;
  std::uniform_int_distribution<int> pick_dev(0, static_cast<int>(caches.size()) - 1);
  for (int f = 0; f < files; ++f) {
    if (!covered.test(f)) caches[pick_dev(rng)].set(f);
  }
}

}  // namespace

NetworkState::NetworkState(Frame frame, std::vector<FileSet> caches)
    : frame_(std::move(frame)), cache_(std::move(caches)) {
  const int n = static_cast<int>(cache_.size());
  if (n < 2) throw ConfigError("need at least 2 devices");
  FileSet covered(frame_.files);
  for (const FileSet& c : cache_) {
    if (static_cast<int>(c.size()) != frame_.files)
      throw std::invalid_argument("cache bitset size does not match frame");
    covered |= c;
  }
  if (!covered.all()) throw ConfigError("initial caches do not cover the frame");
  if (frame_.payload_mode() &&
      static_cast<int>(frame_.payloads.size()) != frame_.files)
    throw std::invalid_argument("payload list does not match file count");

  wants_.reserve(n);
  for (const FileSet& c : cache_) wants_.push_back(~c);
  initial_want_.resize(n);
  delay_.assign(n, 0.0);
  for (int u = 0; u < n; ++u) initial_want_[u] = static_cast<int>(wants_[u].count());
  if (frame_.payload_mode()) {
    held_.assign(n, std::vector<std::vector<std::uint8_t>>(frame_.files));
    for (int u = 0; u < n; ++u)
      for (int f = 0; f < frame_.files; ++f)
        if (cache_[u].test(f)) held_[u][f] = frame_.payloads[f];
  }
}

bool NetworkState::all_met() const {
  for (const FileSet& w : wants_)
    if (w.any()) return false;
  return true;
}

std::vector<int> NetworkState::demanders() const {
  std::vector<int> out;
  for (int u = 0; u < devices(); ++u)
    if (wants_[u].any()) out.push_back(u);
  return out;
}

int NetworkState::total_wanted() const {
  int total = 0;
  for (const FileSet& w : wants_) total += static_cast<int>(w.count());
  return total;
}

void NetworkState::grant_file(int u, int f) {
  if (!wants_[u].test(f)) throw std::logic_error("grant_file: file not wanted");
  wants_[u].reset(f);
  cache_[u].set(f);
  if (payload_mode()) held_[u][f] = frame_.payloads[f];
}

void NetworkState::apply_decode(const CodedPacket& p, int u) {
  if (!is_instantly_decodable(p, *this, u))
    throw std::logic_error("apply_decode: packet not instantly decodable here");
  const int wanted = static_cast<int>((p.files & wants_[u]).find_first());
  if (payload_mode()) {
    std::vector<std::uint8_t> bytes = p.payload;
    for (auto pos = p.files.find_first(); pos != FileSet::npos;
         pos = p.files.find_next(pos)) {
      const int f = static_cast<int>(pos);
      if (f == wanted) continue;
      const auto& own = held_[u][f];
      if (own.size() != bytes.size()) throw std::logic_error("payload length mismatch");
      for (size_t b = 0; b < bytes.size(); ++b) bytes[b] ^= own[b];
    }
    if (bytes != frame_.payloads[wanted])
      throw std::logic_error("decoded payload does not match the frame");
  }
  wants_[u].reset(wanted);
  cache_[u].set(wanted);
  if (payload_mode()) held_[u][wanted] = frame_.payloads[wanted];
}

void NetworkState::accrue_delay(double slot_seconds, const std::vector<int>& targeted,
                                const std::vector<int>& transmitters) {
  if (slot_seconds < 0) throw std::invalid_argument("negative slot duration");
  std::vector<char> is_targeted(devices(), 0);
  for (int u : targeted) is_targeted[u] = 1;
  for (int u : transmitters)
    if (is_targeted[u]) throw std::logic_error("device both transmits and is targeted");
  for (int u = 0; u < devices(); ++u) {
    if (wants_[u].any() && !is_targeted[u]) delay_[u] += slot_seconds;
  }
  elapsed_ += slot_seconds;
}

const std::vector<std::uint8_t>& NetworkState::device_payload(int u, int f) const {
  if (!payload_mode()) throw std::logic_error("payload mode is off");
  if (!cache_[u].test(f)) throw std::logic_error("device does not hold this file");
  return held_[u][f];
}

NetworkState init_side_information(const Frame& frame, int devices, double lo, double hi,
                                   std::mt19937_64& rng) {
  check_side_information_args(frame, devices);
  if (!(lo > 0.0) || !(hi < 1.0) || lo > hi)
    throw ConfigError("cache-size range must satisfy 0 < lo <= hi < 1");
  if (static_cast<double>(devices) * hi * frame.files < frame.files)
    throw ConfigError("cache-size range cannot cover the frame");

  std::uniform_real_distribution<double> frac(lo, hi);
  std::vector<FileSet> caches;
  caches.reserve(devices);
  for (int u = 0; u < devices; ++u) {
    int size = static_cast<int>(std::lround(frac(rng) * frame.files));
    size = std::clamp(size, 1, frame.files);
    FileSet c(frame.files);
    for (int f : pick_subset(frame.files, size, rng)) c.set(f);
    caches.push_back(std::move(c));
  }
  enforce_union_coverage(caches, frame.files, rng);
  return NetworkState(frame, std::move(caches));
}

NetworkState init_side_information_by_demand(const Frame& frame, int devices,
                                             double demand_ratio, std::mt19937_64& rng) {
  check_side_information_args(frame, devices);
  if (!(demand_ratio > 0.0) || !(demand_ratio < 1.0))
    throw ConfigError("demand ratio must lie in (0, 1)");
  const int want = std::clamp(
      static_cast<int>(std::ceil(demand_ratio * frame.files)), 1, frame.files - 1);
  std::vector<FileSet> caches;
  caches.reserve(devices);
  for (int u = 0; u < devices; ++u) {
    FileSet wanted(frame.files);
    for (int f : pick_subset(frame.files, want, rng)) wanted.set(f);
    caches.push_back(~wanted);
  }
  enforce_union_coverage(caches, frame.files, rng);
  return NetworkState(frame, std::move(caches));
}

bool is_instantly_decodable(const CodedPacket& p, const NetworkState& s, int u) {
  if (p.rlnc || p.files.none()) return false;
  return (p.files & s.wants(u)).count() == 1;
}

double completion_lower_bound(const NetworkState& s, int u, double harmonic_rate_bps) {
  if (s.initial_want_count(u) == 0) return s.accumulated_delay(u);
  if (harmonic_rate_bps <= 0.0) return std::numeric_limits<double>::infinity();
  return s.frame().file_bits * s.initial_want_count(u) / harmonic_rate_bps +
         s.accumulated_delay(u);
}

}  // namespace d2dnc
