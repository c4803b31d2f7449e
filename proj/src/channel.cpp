#include "d2dnc/channel.hpp"

#include <algorithm>
#include <cmath>

namespace d2dnc {

namespace {

constexpr double kSqrt3 = 1.7320508075688772;
// Below this separation (meters) a placement counts as coincident and is
// redrawn; probability ~0 under the uniform distribution, so the placement
// distribution is unaffected.
constexpr double kMinSeparationM = 1e-6;

double pathloss_db(double distance_m) {
  return 148.0 + 37.6 * std::log10(distance_m / 1000.0);
}

}  // namespace

double RadioParams::noise_watts() const {
  return dbm_to_watts(noise_dbm_per_hz + 10.0 * std::log10(bandwidth_hz));
}

double RadioParams::qmax_watts() const {
  return dbm_to_watts(qmax_dbm_per_hz + 10.0 * std::log10(bandwidth_hz));
}

bool inside_hex_cell(Vec2 p, double radius_m) {
  const double ax = std::abs(p.x);
  const double ay = std::abs(p.y);
  if (ax > radius_m) return false;
  if (ay > kSqrt3 * 0.5 * radius_m) return false;
  return ay <= kSqrt3 * (radius_m - ax);
}

Topology generate_topology(int devices, double radius_m, std::mt19937_64& rng) {
  if (devices < 2) throw ConfigError("topology needs at least 2 devices");
  if (radius_m <= 0) throw ConfigError("cell radius must be positive");
  Topology topo;
  topo.cell_radius_m = radius_m;
  topo.positions.reserve(devices);
  std::uniform_real_distribution<double> ux(-radius_m, radius_m);
  std::uniform_real_distribution<double> uy(-kSqrt3 * 0.5 * radius_m, kSqrt3 * 0.5 * radius_m);
  while (static_cast<int>(topo.positions.size()) < devices) {
    Vec2 p{ux(rng), uy(rng)};
    if (!inside_hex_cell(p, radius_m)) continue;
    bool coincident = false;
    for (const Vec2& q : topo.positions) {
      if (std::hypot(p.x - q.x, p.y - q.y) < kMinSeparationM) {
        coincident = true;
        break;
      }
    }
    if (!coincident) topo.positions.push_back(p);
  }
  return topo;
}

Mat base_loss_db(const Topology& topo, double shadowing_sigma_db, std::mt19937_64& rng) {
  const int n = topo.size();
  Mat loss = Mat::square(n, 0.0);
  std::normal_distribution<double> shadow(0.0, shadowing_sigma_db);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      if (a == b) continue;
      const Vec2& p = topo.positions[a];
      const Vec2& q = topo.positions[b];
      const double d = std::hypot(p.x - q.x, p.y - q.y);
      loss(a, b) = pathloss_db(d) + (shadowing_sigma_db > 0 ? shadow(rng) : 0.0);
    }
  }
  return loss;
}

Mat apply_fading(const Mat& loss_db, std::mt19937_64& rng) {
  const int n = loss_db.rows();
  Mat gains = Mat::square(n, 0.0);
  std::exponential_distribution<double> rayleigh_power(1.0);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      if (a == b) continue;
      gains(a, b) = db_to_linear(-loss_db(a, b)) * rayleigh_power(rng);
    }
  }
  return gains;
}

Mat sample_gains(const Topology& topo, double shadowing_sigma_db, std::mt19937_64& rng) {
  return apply_fading(base_loss_db(topo, shadowing_sigma_db, rng), rng);
}

double sinr(const Mat& gains, const std::vector<double>& powers_w,
            const std::vector<int>& active, int tx, int rx, double noise_w) {
  if (rx == tx) throw std::invalid_argument("sinr: rx equals tx");
  bool tx_active = false;
  double interference = 0.0;
  for (int m : active) {
    if (m == tx) {
      tx_active = true;
    } else {
      interference += powers_w[m] * gains(m, rx);
    }
  }
  if (!tx_active) throw std::invalid_argument("sinr: tx not in active set");
  return powers_w[tx] * gains(tx, rx) / (noise_w + interference);
}

Mat capacity_matrix(const Mat& gains, const std::vector<double>& powers_w,
                    const std::vector<int>& active, double noise_w) {
  const int n = gains.rows();
  Mat cap = Mat::square(n, 0.0);
  for (int k : active) {
    for (int i = 0; i < n; ++i) {
      if (i == k) continue;
      cap(k, i) = std::log2(1.0 + sinr(gains, powers_w, active, k, i, noise_w));
    }
  }
  return cap;
}

}  // namespace d2dnc
