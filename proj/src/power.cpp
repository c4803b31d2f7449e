#include "d2dnc/power.hpp"

#include <algorithm>
#include <cmath>

namespace d2dnc {

namespace {

void validate(const ScheduleContext& ctx) {
  if (!ctx.gains) throw std::invalid_argument("power: missing gain matrix");
  if (ctx.transmitters.empty()) throw std::invalid_argument("power: no transmitters");
  if (ctx.targets.size() != ctx.transmitters.size())
    throw std::invalid_argument("power: target lists do not match transmitters");
  if (!(ctx.qmax_w > 0)) throw std::invalid_argument("power: qmax must be positive");
  const int n = ctx.gains->rows();
  std::vector<char> role(n, 0);
  for (int k : ctx.transmitters) {
    if (role[k]) throw std::logic_error("power: duplicate transmitter");
    role[k] = 1;
  }
  for (size_t t = 0; t < ctx.targets.size(); ++t) {
    for (int i : ctx.targets[t]) {
      if (role[i]) throw std::logic_error("power: device scheduled twice");
      role[i] = 2;
    }
  }
}

double pair_sinr(const ScheduleContext& ctx, const std::vector<double>& q, size_t t, int rx) {
  double interference = 0;
  for (size_t m = 0; m < ctx.transmitters.size(); ++m) {
    if (m == t) continue;
    interference += q[m] * (*ctx.gains)(ctx.transmitters[m], rx);
  }
  return q[t] * (*ctx.gains)(ctx.transmitters[t], rx) / (ctx.noise_w + interference);
}

// q holds one power per context transmitter (not per device).
double objective(const ScheduleContext& ctx, const std::vector<double>& q) {
  double sum = 0;
  for (size_t t = 0; t < ctx.transmitters.size(); ++t)
    for (int rx : ctx.targets[t]) sum += std::log2(1.0 + pair_sinr(ctx, q, t, rx));
  return sum;
}

std::vector<double> update(const ScheduleContext& ctx, const std::vector<double>& q_in,
                           bool in_place) {
  std::vector<double> q_next = q_in;
  const Mat& g = *ctx.gains;
  for (size_t k = 0; k < ctx.transmitters.size(); ++k) {
    const std::vector<double>& q = in_place ? q_next : q_in;
    double num = 0;
    for (int rx : ctx.targets[k]) {
      const double s = pair_sinr(ctx, q, k, rx);
      num += s / (1.0 + s);
    }
    double den = 0;
    for (size_t m = 0; m < ctx.transmitters.size(); ++m) {
      if (m == k) continue;
      const double qm = q[m];
      for (int rx : ctx.targets[m]) {
        const double gm = g(ctx.transmitters[m], rx);
        if (qm <= 0 || gm <= 0) continue;  // that pair carries nothing to trade off
        const double s = pair_sinr(ctx, q, m, rx);
        const double frac = s / (1.0 + s);
        den += frac * frac * g(ctx.transmitters[k], rx) / (qm * gm);
      }
    }
    double qk;
    if (num <= 0) {
      qk = 0;
    } else if (den <= 0) {
      qk = ctx.qmax_w;  // nobody to protect: full power
    } else {
      qk = std::clamp(num / den, 0.0, ctx.qmax_w);
    }
    q_next[k] = qk;
  }
  return q_next;
}

std::vector<double> expand(const ScheduleContext& ctx, const std::vector<double>& q) {
  std::vector<double> full(ctx.gains->rows(), 0.0);
  for (size_t t = 0; t < ctx.transmitters.size(); ++t) full[ctx.transmitters[t]] = q[t];
  return full;
}

std::vector<double> compress(const ScheduleContext& ctx, const std::vector<double>& powers_w) {
  std::vector<double> q(ctx.transmitters.size(), 0.0);
  for (size_t t = 0; t < ctx.transmitters.size(); ++t) q[t] = powers_w[ctx.transmitters[t]];
  return q;
}

}  // namespace

double sum_capacity(const ScheduleContext& ctx, const std::vector<double>& powers_w) {
  validate(ctx);
  return objective(ctx, compress(ctx, powers_w));
}

std::vector<double> power_update_step(const ScheduleContext& ctx,
                                      const std::vector<double>& powers_w) {
  validate(ctx);
  return expand(ctx, update(ctx, compress(ctx, powers_w), false));
}

PowerResult allocate_power(const ScheduleContext& ctx) {
  validate(ctx);
  const double q0 = ctx.q_init_w > 0 ? std::min(ctx.q_init_w, ctx.qmax_w) : ctx.qmax_w;
  std::vector<double> q(ctx.transmitters.size(), q0);

  PowerResult res;
  double prev_obj = objective(ctx, q);
  res.objective_trace.push_back(prev_obj);
  for (int it = 1; it <= ctx.max_iterations; ++it) {
    const std::vector<double> q_prev = q;
    q = update(ctx, q, ctx.gauss_seidel);
    const double obj = objective(ctx, q);
    res.objective_trace.push_back(obj);
    res.iterations = it;
    // The objective is first-order flat at the fixed point, so its delta
    // alone goes quiet while the powers are still moving; require the
    // iterate itself to have settled too.
    double moved = 0;
    for (size_t t = 0; t < q.size(); ++t) moved = std::max(moved, std::abs(q[t] - q_prev[t]));
    if (std::abs(obj - prev_obj) <= ctx.rel_tolerance * std::max(std::abs(prev_obj), 1e-12) &&
        moved <= ctx.rel_tolerance * ctx.qmax_w) {
      res.converged = true;
      prev_obj = obj;
      break;
    }
    prev_obj = obj;
  }
  res.objective = prev_obj;
  const std::vector<double> probe = update(ctx, q, false);
  double residual = 0;
  for (size_t t = 0; t < q.size(); ++t) residual = std::max(residual, std::abs(probe[t] - q[t]));
  res.fixed_point_residual = residual;
  res.powers_w = expand(ctx, q);
  return res;
}

}  // namespace d2dnc
