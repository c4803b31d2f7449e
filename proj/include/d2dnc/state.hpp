#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "d2dnc/common.hpp"

namespace d2dnc {

// The content frame every device ultimately needs. Payloads are only filled
// when end-to-end XOR verification is switched on.
struct Frame {
  int files = 0;
  double file_bits = 0;
  std::vector<std::vector<std::uint8_t>> payloads;

  bool payload_mode() const { return !payloads.empty(); }
};

// One on-air transmission from a single device. `files` is the XOR
// combination; for the block-coded scheme it marks the whole source cache and
// `rlnc` is set (the packet is then not instantly decodable by definition).
struct CodedPacket {
  int tx = -1;
  FileSet files;
  bool rlnc = false;
  std::vector<std::uint8_t> payload;
};

// Side information (per-device cache/demand split), the per-device delay
// ledger and the elapsed clock for one realization.
class NetworkState {
 public:
  NetworkState(Frame frame, std::vector<FileSet> caches);

  int devices() const { return static_cast<int>(cache_.size()); }
  int files() const { return frame_.files; }
  const Frame& frame() const { return frame_; }

  const FileSet& cache(int u) const { return cache_[u]; }
  const FileSet& wants(int u) const { return wants_[u]; }
  int initial_want_count(int u) const { return initial_want_[u]; }
  bool demand_met(int u) const { return wants_[u].none(); }
  bool all_met() const;
  std::vector<int> demanders() const;
  int total_wanted() const;

  double accumulated_delay(int u) const { return delay_[u]; }
  double elapsed() const { return elapsed_; }

  // Moves f from the demand set to the cache (direct grant; used by block
  // decoding and by packet decoding below).
  void grant_file(int u, int f);

  // Applies an instantly decodable packet at device u: the unique wanted file
  // of the combination moves to the cache. In payload mode the recovered
  // bytes are XOR-reconstructed from the device's own copies and must match
  // the frame.
  void apply_decode(const CodedPacket& p, int u);

  // One committed slot of the delay ledger: every device with outstanding
  // demand that was not targeted (including busy transmitters) accrues the
  // slot duration. Targeted and transmitting sets must be disjoint.
  void accrue_delay(double slot_seconds, const std::vector<int>& targeted,
                    const std::vector<int>& transmitters);

  bool payload_mode() const { return frame_.payload_mode(); }
  const std::vector<std::uint8_t>& device_payload(int u, int f) const;

 private:
  Frame frame_;
  std::vector<FileSet> cache_;
  std::vector<FileSet> wants_;
  std::vector<int> initial_want_;
  std::vector<double> delay_;
  double elapsed_ = 0;
  // device -> file -> bytes; empty vectors for files the device does not hold
  std::vector<std::vector<std::vector<std::uint8_t>>> held_;
};

// Random caches with |cache| drawn from [lo*F, hi*F] (rounded); demand is the
// complement. Union coverage of the frame is enforced by assigning each
// uncovered file to a random device.
NetworkState init_side_information(const Frame& frame, int devices, double lo, double hi,
                                   std::mt19937_64& rng);

// Demand-ratio variant: each device demands a random ceil(ratio*F)-subset and
// caches the complement.
NetworkState init_side_information_by_demand(const Frame& frame, int devices,
                                             double demand_ratio, std::mt19937_64& rng);

// True iff exactly one file of the combination is still wanted by u (every
// other combined file then sits in u's cache because demand is the cache
// complement). Always false for rlnc markers.
bool is_instantly_decodable(const CodedPacket& p, const NetworkState& s, int u);

// Completion-time lower bound: file_bits * |initial demand| / harmonic_rate_bps
// plus the accumulated delay. A device nobody can reach (harmonic rate 0)
// reports an infinite bound.
double completion_lower_bound(const NetworkState& s, int u, double harmonic_rate_bps);

}  // namespace d2dnc
