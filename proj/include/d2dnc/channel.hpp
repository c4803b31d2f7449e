#pragma once

#include <random>
#include <vector>

#include "d2dnc/common.hpp"

namespace d2dnc {

struct Vec2 {
  double x = 0;
  double y = 0;
};

// Cell-level radio constants. Power spectral densities are configured in
// dBm/Hz and integrated over the bandwidth; all computation is in linear watts.
struct RadioParams {
  double noise_dbm_per_hz = -174.0;
  double bandwidth_hz = 1.0e6;
  double qmax_dbm_per_hz = -42.60;
  double shadowing_sigma_db = 4.0;
  double cell_radius_m = 500.0;

  double noise_watts() const;
  double qmax_watts() const;
};

struct Topology {
  double cell_radius_m = 0;
  std::vector<Vec2> positions;
  int size() const { return static_cast<int>(positions.size()); }
};

// Regular hexagon centered at the origin with two vertices on the x axis.
bool inside_hex_cell(Vec2 p, double radius_m);

// Uniform placement by rejection sampling from the bounding rectangle.
// Coincident points are rejected and resampled so pairwise distances stay
// strictly positive.
Topology generate_topology(int devices, double radius_m, std::mt19937_64& rng);

// Path loss 148 + 37.6 log10(d_km) plus log-normal shadowing, in dB, for every
// ordered pair. Fixed for the lifetime of one realization; diagonal is 0.
Mat base_loss_db(const Topology& topo, double shadowing_sigma_db, std::mt19937_64& rng);

// Linear power gains: 10^(-loss/10) scaled by a fresh Rayleigh |h|^2 draw
// (unit-mean exponential) per ordered pair. Diagonal is 0.
Mat apply_fading(const Mat& loss_db, std::mt19937_64& rng);

// One-shot gains for a realization: path loss + shadowing + Rayleigh fading.
Mat sample_gains(const Topology& topo, double shadowing_sigma_db, std::mt19937_64& rng);

// SINR of the tx -> rx link when every device in `active` transmits with the
// given power. Requires tx in `active` and rx != tx.
double sinr(const Mat& gains, const std::vector<double>& powers_w,
            const std::vector<int>& active, int tx, int rx, double noise_w);

// log2(1 + SINR) for every (active tx, rx != tx) pair, 0 elsewhere.
Mat capacity_matrix(const Mat& gains, const std::vector<double>& powers_w,
                    const std::vector<int>& active, double noise_w);

}  // namespace d2dnc
