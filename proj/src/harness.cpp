#include "d2dnc/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>
#include <yaml-cpp/yaml.h>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "d2dnc/rng.hpp"

namespace d2dnc {

namespace {

constexpr double kZ95 = 1.959963984540054;
constexpr std::uint64_t kEnvLane = 0xE17;

std::string fmt(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

bool uses_threshold(SchedulerKind k) {
  return k == SchedulerKind::Clnc || k == SchedulerKind::RaIdncSingle;
}

[[noreturn]] void cfg_error(const std::string& field, const std::string& what) {
  throw ConfigError("config field '" + field + "': " + what);
}

void check_known_keys(const YAML::Node& node, const std::set<std::string>& allowed,
                      const std::string& where) {
  if (!node.IsDefined() || node.IsNull()) return;
  if (!node.IsMap()) cfg_error(where, "expected a mapping");
  for (const auto& kv : node) {
    const std::string key = kv.first.as<std::string>();
    if (!allowed.count(key)) cfg_error(where.empty() ? key : where + "." + key, "unknown key");
  }
}

template <typename T>
T read_scalar(const YAML::Node& node, const std::string& field, T fallback) {
  if (!node.IsDefined() || node.IsNull()) return fallback;
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    cfg_error(field, "cannot parse value");
  }
}

std::vector<double> read_double_list(const YAML::Node& node, const std::string& field,
                                     std::vector<double> fallback) {
  if (!node.IsDefined() || node.IsNull()) return fallback;
  if (!node.IsSequence()) cfg_error(field, "expected a list");
  std::vector<double> out;
  for (const auto& item : node) out.push_back(read_scalar<double>(item, field, 0.0));
  return out;
}

void validate_config(const ScenarioConfig& c) {
  if (c.devices < 1) cfg_error("devices", "must be >= 1");
  if (c.files < 1) cfg_error("files", "must be >= 1");
  if (!(c.file_bits > 0)) cfg_error("file_bits", "must be > 0");
  if (!(c.radio.bandwidth_hz > 0)) cfg_error("bandwidth_hz", "must be > 0");
  if (!(c.radio.cell_radius_m > 0)) cfg_error("cell_radius_m", "must be > 0");
  if (c.radio.shadowing_sigma_db < 0) cfg_error("shadowing_sigma_db", "must be >= 0");
  if (c.demand_ratio >= 0 && !(c.demand_ratio > 0 && c.demand_ratio < 1))
    cfg_error("demand_ratio", "must lie strictly between 0 and 1");
  if (c.demand_ratio < 0) {
    if (!(c.cache_lo > 0 && c.cache_hi < 1 && c.cache_lo <= c.cache_hi))
      cfg_error("cache_fraction", "requires 0 < lo <= hi < 1");
  }
  if (c.rate_thresholds.empty()) cfg_error("rate_thresholds", "must list at least one value");
  for (double t : c.rate_thresholds)
    if (t < 0) cfg_error("rate_thresholds", "entries must be >= 0");
  for (double r : c.rate_ladder)
    if (!(r > 0)) cfg_error("rate_ladder", "entries must be > 0");
  if (c.schemes.empty()) cfg_error("schemes", "must list at least one scheme");
  for (size_t a = 0; a < c.schemes.size(); ++a)
    for (size_t b = a + 1; b < c.schemes.size(); ++b)
      if (c.schemes[a] == c.schemes[b]) cfg_error("schemes", "duplicate scheme");
  if (c.realizations < 1) cfg_error("realizations", "must be >= 1");
  if (c.slot_cap < 1) cfg_error("slot_cap", "must be >= 1");
  if (!(c.power_rel_tolerance > 0)) cfg_error("power.rel_tolerance", "must be > 0");
  if (c.power_max_iterations < 1) cfg_error("power.max_iterations", "must be >= 1");

  const std::set<std::string> sweep_vars = {"none", "devices", "files", "file_bits",
                                            "demand_ratio"};
  if (!sweep_vars.count(c.sweep.variable)) cfg_error("sweep.variable", "unknown variable");
  if (c.sweep.variable != "none") {
    if (c.sweep.values.empty()) cfg_error("sweep.values", "must list at least one value");
    for (double v : c.sweep.values) {
      if (c.sweep.variable == "devices" || c.sweep.variable == "files") {
        if (!(v >= 1) || v != std::floor(v)) cfg_error("sweep.values", "must be integers >= 1");
      } else if (c.sweep.variable == "file_bits") {
        if (!(v > 0)) cfg_error("sweep.values", "must be > 0");
      } else if (c.sweep.variable == "demand_ratio") {
        if (!(v > 0 && v < 1)) cfg_error("sweep.values", "must lie strictly between 0 and 1");
      }
    }
  }
}

struct Cell {
  int point = 0;
  double sweep_value = 0;
  double threshold = 0;
  SchedulerKind kind = SchedulerKind::Clnc;
  std::string label;
};

struct JobOut {
  bool ok = false;
  bool stalled = false;
  double completion_s = 0;
  double slots = 0;
  double tx_per_slot = 0;
  std::string error;
};

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  double s = 0;
  for (double x : v) s += (x - mean) * (x - mean);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

AggregateReport run_sweep_impl(const ScenarioConfig& cfg, bool parallel) {
  validate_config(cfg);

  std::vector<double> values =
      cfg.sweep.variable == "none" ? std::vector<double>{0.0} : cfg.sweep.values;
  std::vector<ScenarioConfig> point_cfgs;
  for (double v : values)
    point_cfgs.push_back(cfg.sweep.variable == "none" ? cfg
                                                      : at_sweep_point(cfg, cfg.sweep.variable, v));

  const bool multi_thr = cfg.rate_thresholds.size() > 1;
  std::vector<Cell> cells;
  for (int p = 0; p < static_cast<int>(values.size()); ++p) {
    for (size_t t = 0; t < cfg.rate_thresholds.size(); ++t) {
      for (SchedulerKind k : cfg.schemes) {
        if (!uses_threshold(k) && t > 0) continue;  // threshold-blind: run once
        Cell c;
        c.point = p;
        c.sweep_value = values[p];
        c.threshold = uses_threshold(k) ? cfg.rate_thresholds[t] : 0.0;
        c.kind = k;
        c.label = to_string(k);
        if (multi_thr && uses_threshold(k)) c.label += "@" + fmt(c.threshold);
        cells.push_back(std::move(c));
      }
    }
  }

  const int reals = cfg.realizations;
  const std::int64_t total = static_cast<std::int64_t>(cells.size()) * reals;
  std::vector<JobOut> results(static_cast<size_t>(total));

  auto run_job = [&](std::int64_t j) {
    const Cell& cell = cells[static_cast<size_t>(j / reals)];
    const int r = static_cast<int>(j % reals);
    JobOut out;
    try {
      const ScenarioConfig& pc = point_cfgs[cell.point];
      RealizationSetup setup = make_realization(pc, cell.point, r);
      RunResult rr = run_one(pc, setup, cell.kind, cell.threshold);
      out.ok = true;
      out.completion_s = rr.completion_s;
      out.slots = rr.slots;
      out.tx_per_slot = rr.transmitters_per_slot;
    } catch (const StallError& e) {
      out.stalled = true;
      out.error = e.what();
    } catch (const std::exception& e) {
      out.error = e.what();
    }
    return out;
  };

  if (parallel) {
#ifdef _OPENMP
    const int nthreads = cfg.workers > 0 ? cfg.workers : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(nthreads)
    for (std::int64_t j = 0; j < total; ++j) results[static_cast<size_t>(j)] = run_job(j);
#else
    for (std::int64_t j = 0; j < total; ++j) results[static_cast<size_t>(j)] = run_job(j);
#endif
  } else {
    for (std::int64_t j = 0; j < total; ++j) results[static_cast<size_t>(j)] = run_job(j);
  }

  for (std::int64_t j = 0; j < total; ++j) {
    const JobOut& out = results[static_cast<size_t>(j)];
    if (!out.ok && !out.stalled)
      throw std::runtime_error("realization " + std::to_string(j % reals) + " of " +
                               cells[static_cast<size_t>(j / reals)].label +
                               " failed: " + out.error);
  }

  AggregateReport report;
  report.sweep_variable = cfg.sweep.variable;
  for (size_t c = 0; c < cells.size(); ++c) {
    PointStats ps;
    ps.sweep_value = cells[c].sweep_value;
    ps.scheme = cells[c].label;
    ps.realizations = reals;
    for (int r = 0; r < reals; ++r) {
      const JobOut& out = results[c * reals + r];
      if (out.stalled) {
        ++ps.stall_count;
        ps.stalled_realizations.push_back(r);
      } else {
        ps.completion_s.push_back(out.completion_s);
        ps.slots.push_back(out.slots);
        ps.tx_per_slot.push_back(out.tx_per_slot);
      }
    }
    ps.mean_t = mean_of(ps.completion_s);
    ps.std_t = sample_std(ps.completion_s, ps.mean_t);
    ps.ci95 = ps.completion_s.size() >= 2
                  ? kZ95 * ps.std_t / std::sqrt(static_cast<double>(ps.completion_s.size()))
                  : std::numeric_limits<double>::quiet_NaN();
    ps.slots_mean = mean_of(ps.slots);
    ps.transmitters_per_slot_mean = mean_of(ps.tx_per_slot);
    report.points.push_back(std::move(ps));
  }
  return report;
}

nlohmann::json nan_safe(double v) {
  if (std::isnan(v)) return nullptr;
  return v;
}

double nan_unsafe(const nlohmann::json& j) {
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  return j.get<double>();
}

}  // namespace

ScenarioConfig load_config(const std::string& yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  check_known_keys(root,
                   {"devices", "files", "file_bits", "cell_radius_m", "shadowing_sigma_db",
                    "noise_dbm_per_hz", "bandwidth_hz", "qmax_dbm_per_hz", "cache_fraction",
                    "demand_ratio", "rate_thresholds", "rate_ladder", "schemes", "realizations",
                    "seed", "workers", "slot_cap", "validate_decisions", "fading_per_slot",
                    "power", "sweep"},
                   "");

  ScenarioConfig c;
  c.devices = read_scalar<int>(root["devices"], "devices", c.devices);
  c.files = read_scalar<int>(root["files"], "files", c.files);
  c.file_bits = read_scalar<double>(root["file_bits"], "file_bits", c.file_bits);
  c.radio.cell_radius_m =
      read_scalar<double>(root["cell_radius_m"], "cell_radius_m", c.radio.cell_radius_m);
  c.radio.shadowing_sigma_db = read_scalar<double>(root["shadowing_sigma_db"],
                                                   "shadowing_sigma_db",
                                                   c.radio.shadowing_sigma_db);
  c.radio.noise_dbm_per_hz =
      read_scalar<double>(root["noise_dbm_per_hz"], "noise_dbm_per_hz", c.radio.noise_dbm_per_hz);
  c.radio.bandwidth_hz =
      read_scalar<double>(root["bandwidth_hz"], "bandwidth_hz", c.radio.bandwidth_hz);
  c.radio.qmax_dbm_per_hz =
      read_scalar<double>(root["qmax_dbm_per_hz"], "qmax_dbm_per_hz", c.radio.qmax_dbm_per_hz);

  if (root["cache_fraction"].IsDefined() && !root["cache_fraction"].IsNull()) {
    check_known_keys(root["cache_fraction"], {"lo", "hi"}, "cache_fraction");
    c.cache_lo = read_scalar<double>(root["cache_fraction"]["lo"], "cache_fraction.lo", c.cache_lo);
    c.cache_hi = read_scalar<double>(root["cache_fraction"]["hi"], "cache_fraction.hi", c.cache_hi);
  }
  c.demand_ratio = read_scalar<double>(root["demand_ratio"], "demand_ratio", c.demand_ratio);
  c.rate_thresholds =
      read_double_list(root["rate_thresholds"], "rate_thresholds", c.rate_thresholds);
  c.rate_ladder = read_double_list(root["rate_ladder"], "rate_ladder", c.rate_ladder);

  if (root["schemes"].IsDefined() && !root["schemes"].IsNull()) {
    if (!root["schemes"].IsSequence()) cfg_error("schemes", "expected a list");
    c.schemes.clear();
    for (const auto& item : root["schemes"]) {
      const std::string name = read_scalar<std::string>(item, "schemes", "");
      auto kind = scheduler_from_string(name);
      if (!kind) {
        std::string valid;
        for (const std::string& s : scheduler_names()) valid += (valid.empty() ? "" : ", ") + s;
        cfg_error("schemes", "unknown scheme '" + name + "' (valid: " + valid + ")");
      }
      c.schemes.push_back(*kind);
    }
  }

  c.realizations = read_scalar<int>(root["realizations"], "realizations", c.realizations);
  c.master_seed = read_scalar<std::uint64_t>(root["seed"], "seed", c.master_seed);
  c.workers = read_scalar<int>(root["workers"], "workers", c.workers);
  c.slot_cap = read_scalar<int>(root["slot_cap"], "slot_cap", c.slot_cap);
  c.validate_decisions =
      read_scalar<bool>(root["validate_decisions"], "validate_decisions", c.validate_decisions);
  c.fading_per_slot =
      read_scalar<bool>(root["fading_per_slot"], "fading_per_slot", c.fading_per_slot);

  if (root["power"].IsDefined() && !root["power"].IsNull()) {
    check_known_keys(root["power"], {"rel_tolerance", "max_iterations", "gauss_seidel"}, "power");
    c.power_rel_tolerance = read_scalar<double>(root["power"]["rel_tolerance"],
                                                "power.rel_tolerance", c.power_rel_tolerance);
    c.power_max_iterations = read_scalar<int>(root["power"]["max_iterations"],
                                              "power.max_iterations", c.power_max_iterations);
    c.power_gauss_seidel = read_scalar<bool>(root["power"]["gauss_seidel"], "power.gauss_seidel",
                                             c.power_gauss_seidel);
  }

  if (root["sweep"].IsDefined() && !root["sweep"].IsNull()) {
    check_known_keys(root["sweep"], {"variable", "values"}, "sweep");
    c.sweep.variable =
        read_scalar<std::string>(root["sweep"]["variable"], "sweep.variable", c.sweep.variable);
    c.sweep.values = read_double_list(root["sweep"]["values"], "sweep.values", c.sweep.values);
  }

  validate_config(c);
  return c;
}

ScenarioConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_config(buf.str());
}

ScenarioConfig at_sweep_point(const ScenarioConfig& base, const std::string& variable,
                              double value) {
  ScenarioConfig c = base;
  if (variable == "devices") {
    c.devices = static_cast<int>(value);
  } else if (variable == "files") {
    c.files = static_cast<int>(value);
  } else if (variable == "file_bits") {
    c.file_bits = value;
  } else if (variable == "demand_ratio") {
    c.demand_ratio = value;
  } else {
    cfg_error("sweep.variable", "unknown variable '" + variable + "'");
  }
  return c;
}

RealizationSetup make_realization(const ScenarioConfig& cfg, int point_index, int realization) {
  const std::uint64_t env_seed =
      derive_seed(cfg.master_seed, {kEnvLane, static_cast<std::uint64_t>(point_index),
                                    static_cast<std::uint64_t>(realization)});
  auto topo_rng = make_rng(derive_seed(env_seed, {1}));
  Topology topology = generate_topology(cfg.devices, cfg.radio.cell_radius_m, topo_rng);
  Mat loss_db = base_loss_db(topology, cfg.radio.shadowing_sigma_db, topo_rng);
  auto state_rng = make_rng(derive_seed(env_seed, {2}));
  Frame frame{cfg.files, cfg.file_bits, {}};
  NetworkState state =
      cfg.demand_ratio > 0
          ? init_side_information_by_demand(frame, cfg.devices, cfg.demand_ratio, state_rng)
          : init_side_information(frame, cfg.devices, cfg.cache_lo, cfg.cache_hi, state_rng);
  return RealizationSetup{env_seed, std::move(topology), std::move(loss_db),
                          derive_seed(env_seed, {3}), std::move(state)};
}

RunResult run_one(const ScenarioConfig& cfg, const RealizationSetup& setup, SchedulerKind kind,
                  double rate_threshold, bool keep_trace) {
  SimParams p;
  p.noise_w = cfg.radio.noise_watts();
  p.qmax_w = cfg.radio.qmax_watts();
  p.bandwidth_hz = cfg.radio.bandwidth_hz;
  p.rate_threshold = rate_threshold;
  p.rate_ladder = cfg.rate_ladder;
  p.slot_cap = cfg.slot_cap;
  p.validate_decisions = cfg.validate_decisions;
  p.power_rel_tolerance = cfg.power_rel_tolerance;
  p.power_max_iterations = cfg.power_max_iterations;
  p.power_gauss_seidel = cfg.power_gauss_seidel;

  NetworkState state = setup.state;
  FadedGains gains(setup.loss_db, setup.fading_seed, cfg.fading_per_slot);
  const std::uint64_t scheme_seed =
      derive_seed(setup.env_seed, {4, static_cast<std::uint64_t>(kind)});
  return run_schedule(state, gains, kind, p, scheme_seed, keep_trace);
}

AggregateReport run_sweep(const ScenarioConfig& cfg) { return run_sweep_impl(cfg, true); }

AggregateReport run_sweep_serial(const ScenarioConfig& cfg) { return run_sweep_impl(cfg, false); }

std::string to_csv(const AggregateReport& report) {
  std::string head = report.sweep_variable == "none" ? "point" : report.sweep_variable;
  std::string out = head +
                    ",scheme,mean_T,std_T,ci95,slots_mean,transmitters_per_slot_mean,"
                    "stall_count\n";
  for (const PointStats& p : report.points) {
    out += fmt(p.sweep_value);
    out += ',' + p.scheme;
    out += ',' + fmt(p.mean_t);
    out += ',' + fmt(p.std_t);
    out += ',' + fmt(p.ci95);
    out += ',' + fmt(p.slots_mean);
    out += ',' + fmt(p.transmitters_per_slot_mean);
    out += ',' + std::to_string(p.stall_count);
    out += '\n';
  }
  return out;
}

std::string to_json(const AggregateReport& report) {
  nlohmann::json j;
  j["sweep_variable"] = report.sweep_variable;
  j["ci_method"] = report.ci_method;
  j["points"] = nlohmann::json::array();
  for (const PointStats& p : report.points) {
    nlohmann::json jp;
    jp["sweep_value"] = p.sweep_value;
    jp["scheme"] = p.scheme;
    jp["realizations"] = p.realizations;
    jp["stall_count"] = p.stall_count;
    jp["mean_T"] = nan_safe(p.mean_t);
    jp["std_T"] = nan_safe(p.std_t);
    jp["ci95"] = nan_safe(p.ci95);
    jp["slots_mean"] = nan_safe(p.slots_mean);
    jp["transmitters_per_slot_mean"] = nan_safe(p.transmitters_per_slot_mean);
    jp["completion_s"] = p.completion_s;
    jp["slots"] = p.slots;
    jp["tx_per_slot"] = p.tx_per_slot;
    jp["stalled_realizations"] = p.stalled_realizations;
    j["points"].push_back(std::move(jp));
  }
  return j.dump(2);
}

AggregateReport report_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  AggregateReport report;
  report.sweep_variable = j.at("sweep_variable").get<std::string>();
  report.ci_method = j.at("ci_method").get<std::string>();
  for (const auto& jp : j.at("points")) {
    PointStats p;
    p.sweep_value = jp.at("sweep_value").get<double>();
    p.scheme = jp.at("scheme").get<std::string>();
    p.realizations = jp.at("realizations").get<int>();
    p.stall_count = jp.at("stall_count").get<int>();
    p.mean_t = nan_unsafe(jp.at("mean_T"));
    p.std_t = nan_unsafe(jp.at("std_T"));
    p.ci95 = nan_unsafe(jp.at("ci95"));
    p.slots_mean = nan_unsafe(jp.at("slots_mean"));
    p.transmitters_per_slot_mean = nan_unsafe(jp.at("transmitters_per_slot_mean"));
    p.completion_s = jp.at("completion_s").get<std::vector<double>>();
    p.slots = jp.at("slots").get<std::vector<double>>();
    p.tx_per_slot = jp.at("tx_per_slot").get<std::vector<double>>();
    p.stalled_realizations = jp.at("stalled_realizations").get<std::vector<int>>();
    report.points.push_back(std::move(p));
  }
  return report;
}

void write_trace(const ScenarioConfig& cfg, std::ostream& out) {
  validate_config(cfg);
  for (SchedulerKind kind : cfg.schemes) {
    RealizationSetup setup = make_realization(cfg, 0, 0);
    const double thr = uses_threshold(kind) ? cfg.rate_thresholds.front() : 0.0;
    RunResult rr = run_one(cfg, setup, kind, thr, /*keep_trace=*/true);
    for (const SlotTrace& t : rr.trace) {
      nlohmann::json j;
      j["scheme"] = to_string(kind);
      j["slot"] = t.slot;
      j["rate"] = t.decision.rate;
      j["duration_s"] = t.decision.duration_s;
      j["sum_capacity"] = t.decision.sum_capacity;
      j["transmitters"] = t.decision.transmitters;
      nlohmann::json packets = nlohmann::json::array();
      nlohmann::json rlnc = nlohmann::json::array();
      for (const CodedPacket& pkt : t.decision.packets) {
        std::vector<int> files;
        for (auto f = pkt.files.find_first(); f != FileSet::npos; f = pkt.files.find_next(f))
          files.push_back(static_cast<int>(f));
        packets.push_back(files);
        rlnc.push_back(pkt.rlnc);
      }
      j["packets"] = std::move(packets);
      j["rlnc"] = std::move(rlnc);
      j["targets"] = t.decision.targets;
      j["powers_w"] = t.decision.powers_w;
      j["remaining_wanted"] = t.remaining_wanted;
      out << j.dump() << '\n';
    }
  }
}

}  // namespace d2dnc
