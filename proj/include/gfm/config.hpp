#pragma once
// JSON configuration for the command-line tool. Unknown keys are rejected
// with their full path; "comment" keys are allowed anywhere and ignored.
#include <json.hpp>

#include <fstream>
#include <initializer_list>
#include <optional>
#include <string>

#include "gfm/analysis.hpp"
#include "gfm/errors.hpp"
#include "gfm/metrics.hpp"
#include "gfm/simulate.hpp"

namespace gfm {

struct OutputConfig {
  std::string trace_path = "trace.csv";
  std::string metrics_path = "metrics.json";
  int precision = 9;
};

struct Config {
  int schema_version = 1;
  Scenario scenario;
  bool has_droop = false;
  bool has_vsg = false;
  bool has_udc = false;
  std::optional<DesignParams> design;
  OutputConfig output;
  MetricConfig metrics;
};

inline Strategy parse_strategy(const std::string& name) {
  if (name == "droop") return Strategy::droop;
  if (name == "vsg") return Strategy::vsg;
  if (name == "udc") return Strategy::udc;
  throw ConfigError("unknown strategy \"" + name + "\" (expected droop, vsg, or udc)");
}

inline Mode parse_mode(const std::string& name) {
  if (name == "gc") return Mode::gc;
  if (name == "is") return Mode::is;
  throw ConfigError("unknown mode \"" + name + "\" (expected gc or is)");
}

inline EventKind parse_event_kind(const std::string& name) {
  if (name == "reference_step") return EventKind::reference_step;
  if (name == "load_step") return EventKind::load_step;
  if (name == "island") return EventKind::island;
  if (name == "reconnect") return EventKind::reconnect;
  throw ConfigError("unknown event kind \"" + name + "\"");
}

namespace detail {

using json = nlohmann::json;

inline void check_keys(const json& obj, const std::string& path,
                       std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    const std::string& key = it.key();
    if (key == "comment") continue;
    bool ok = false;
    for (const char* a : allowed)
      if (key == a) {
        ok = true;
        break;
      }
    if (!ok) throw ConfigError("unknown key: " + (path.empty() ? key : path + "." + key));
  }
}

inline double opt_number(const json& obj, const std::string& path, const char* key,
                         double fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_number()) throw ConfigError(path + "." + key + ": must be a number");
  return it->get<double>();
}

inline double req_number(const json& obj, const std::string& path, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(path + "." + key + ": is required");
  if (!it->is_number()) throw ConfigError(path + "." + key + ": must be a number");
  return it->get<double>();
}

inline std::string req_string(const json& obj, const std::string& path, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(path + "." + key + ": is required");
  if (!it->is_string()) throw ConfigError(path + "." + key + ": must be a string");
  return it->get<std::string>();
}

inline void require_positive(double value, const std::string& keypath) {
  if (!(value > 0.0)) throw ConfigError(keypath + ": must be > 0");
}

inline void require_nonnegative(double value, const std::string& keypath) {
  if (!(value >= 0.0)) throw ConfigError(keypath + ": must be >= 0");
}

inline void parse_droop_block(const json& blk, const std::string& path, DroopParams& p) {
  check_keys(blk, path,
             {"kp_droop", "kd_droop", "tau", "m", "n", "omega_ref", "v_ref", "p_ref", "q_ref"});
  p.kp_droop = opt_number(blk, path, "kp_droop", p.kp_droop);
  p.kd_droop = opt_number(blk, path, "kd_droop", p.kd_droop);
  p.tau = opt_number(blk, path, "tau", p.tau);
  p.m = opt_number(blk, path, "m", p.m);
  p.n = opt_number(blk, path, "n", p.n);
  p.omega_ref = opt_number(blk, path, "omega_ref", p.omega_ref);
  p.v_ref = opt_number(blk, path, "v_ref", p.v_ref);
  p.p_ref = opt_number(blk, path, "p_ref", p.p_ref);
  p.q_ref = opt_number(blk, path, "q_ref", p.q_ref);
  require_positive(p.kp_droop, path + ".kp_droop");
  require_positive(p.tau, path + ".tau");
  require_nonnegative(p.kd_droop, path + ".kd_droop");
}

inline void parse_vsg_block(const json& blk, const std::string& path, VsgParams& p) {
  check_keys(blk, path, {"j", "d", "k_omega", "tau", "omega0", "omega_ref", "p_ref"});
  p.j = opt_number(blk, path, "j", p.j);
  p.d = opt_number(blk, path, "d", p.d);
  p.k_omega = opt_number(blk, path, "k_omega", p.k_omega);
  p.tau = opt_number(blk, path, "tau", p.tau);
  p.omega0 = opt_number(blk, path, "omega0", p.omega0);
  p.omega_ref = opt_number(blk, path, "omega_ref", p.omega_ref);
  p.p_ref = opt_number(blk, path, "p_ref", p.p_ref);
  require_positive(p.j, path + ".j");
  require_nonnegative(p.d, path + ".d");
  require_positive(p.tau, path + ".tau");
  require_positive(p.omega0, path + ".omega0");
}

inline void parse_udc_block(const json& blk, const std::string& path, UdcParams& p) {
  check_keys(blk, path, {"kp_droop", "tau", "xi", "m", "omega0", "omega_ref", "v_ref",
                         "p_ref", "kd_droop", "n", "q_ref"});
  p.kp_droop = opt_number(blk, path, "kp_droop", p.kp_droop);
  p.tau = opt_number(blk, path, "tau", p.tau);
  p.xi = opt_number(blk, path, "xi", p.xi);
  p.m = opt_number(blk, path, "m", p.m);
  p.omega0 = opt_number(blk, path, "omega0", p.omega0);
  p.omega_ref = opt_number(blk, path, "omega_ref", p.omega_ref);
  p.v_ref = opt_number(blk, path, "v_ref", p.v_ref);
  p.p_ref = opt_number(blk, path, "p_ref", p.p_ref);
  p.kd_droop = opt_number(blk, path, "kd_droop", p.kd_droop);
  p.n = opt_number(blk, path, "n", p.n);
  p.q_ref = opt_number(blk, path, "q_ref", p.q_ref);
  require_positive(p.kp_droop, path + ".kp_droop");
  require_positive(p.tau, path + ".tau");
  require_nonnegative(p.kd_droop, path + ".kd_droop");
  require_positive(p.omega0, path + ".omega0");
}

inline void parse_scenario(const json& s, Config& cfg) {
  check_keys(s, "scenario",
             {"mode", "strategy", "t_end", "dt", "linear_plant", "plant", "droop", "vsg",
              "udc", "events"});
  Scenario& sc = cfg.scenario;

  const std::string mode = req_string(s, "scenario", "mode");
  if (mode != "gc" && mode != "is")
    throw ConfigError("scenario.mode: must be \"gc\" or \"is\"");
  sc.mode = parse_mode(mode);

  const std::string strategy = req_string(s, "scenario", "strategy");
  if (strategy != "droop" && strategy != "vsg" && strategy != "udc")
    throw ConfigError("scenario.strategy: must be \"droop\", \"vsg\", or \"udc\"");
  sc.strategy = parse_strategy(strategy);

  sc.t_end = opt_number(s, "scenario", "t_end", sc.t_end);
  sc.dt = opt_number(s, "scenario", "dt", sc.dt);
  require_positive(sc.dt, "scenario.dt");
  if (sc.t_end <= sc.dt) throw ConfigError("scenario.t_end: must exceed dt");

  if (auto it = s.find("linear_plant"); it != s.end()) {
    if (!it->is_boolean()) throw ConfigError("scenario.linear_plant: must be a boolean");
    sc.linear_plant = it->get<bool>();
  }

  if (auto it = s.find("plant"); it != s.end()) {
    if (!it->is_object()) throw ConfigError("scenario.plant: must be an object");
    check_keys(*it, "scenario.plant", {"x_line", "e0", "v0", "omega0", "p_load"});
    sc.plant.x_line = opt_number(*it, "scenario.plant", "x_line", sc.plant.x_line);
    sc.plant.e0 = opt_number(*it, "scenario.plant", "e0", sc.plant.e0);
    sc.plant.v0 = opt_number(*it, "scenario.plant", "v0", sc.plant.v0);
    sc.plant.omega0 = opt_number(*it, "scenario.plant", "omega0", sc.plant.omega0);
    sc.p_load = opt_number(*it, "scenario.plant", "p_load", sc.p_load);
    require_positive(sc.plant.x_line, "scenario.plant.x_line");
    require_positive(sc.plant.e0, "scenario.plant.e0");
    require_positive(sc.plant.v0, "scenario.plant.v0");
    require_positive(sc.plant.omega0, "scenario.plant.omega0");
  }

  if (auto it = s.find("droop"); it != s.end()) {
    if (!it->is_object()) throw ConfigError("scenario.droop: must be an object");
    parse_droop_block(*it, "scenario.droop", sc.droop);
    cfg.has_droop = true;
  }
  if (auto it = s.find("vsg"); it != s.end()) {
    if (!it->is_object()) throw ConfigError("scenario.vsg: must be an object");
    parse_vsg_block(*it, "scenario.vsg", sc.vsg);
    cfg.has_vsg = true;
  }
  if (auto it = s.find("udc"); it != s.end()) {
    if (!it->is_object()) throw ConfigError("scenario.udc: must be an object");
    parse_udc_block(*it, "scenario.udc", sc.udc);
    cfg.has_udc = true;
  }

  if ((sc.strategy == Strategy::droop && !cfg.has_droop) ||
      (sc.strategy == Strategy::vsg && !cfg.has_vsg) ||
      (sc.strategy == Strategy::udc && !cfg.has_udc))
    throw ConfigError("scenario." + strategy + ": block is required for strategy \"" +
                      strategy + "\"");

  if (cfg.has_droop && sc.dt > sc.droop.tau / 10.0)
    throw ConfigError("scenario.dt: must be at most one tenth of scenario.droop.tau");
  if (cfg.has_vsg && sc.dt > sc.vsg.tau / 10.0)
    throw ConfigError("scenario.dt: must be at most one tenth of scenario.vsg.tau");
  if (cfg.has_udc && sc.dt > sc.udc.tau / 10.0)
    throw ConfigError("scenario.dt: must be at most one tenth of scenario.udc.tau");

  if (auto it = s.find("events"); it != s.end()) {
    if (!it->is_array()) throw ConfigError("scenario.events: must be an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const json& e = (*it)[i];
      const std::string path = "scenario.events[" + std::to_string(i) + "]";
      if (!e.is_object()) throw ConfigError(path + ": must be an object");
      check_keys(e, path, {"time", "kind", "magnitude_w"});
      Event ev;
      ev.time = req_number(e, path, "time");
      const std::string kind = req_string(e, path, "kind");
      if (kind != "reference_step" && kind != "load_step" && kind != "island" &&
          kind != "reconnect")
        throw ConfigError(path + ".kind: unknown event kind \"" + kind + "\"");
      ev.kind = parse_event_kind(kind);
      ev.magnitude_w = opt_number(e, path, "magnitude_w", 0.0);
      if ((ev.kind == EventKind::island || ev.kind == EventKind::reconnect) &&
          ev.magnitude_w != 0.0)
        throw ConfigError(path + ".magnitude_w: must be 0 for island/reconnect events");
      if (ev.time < 0.0 || ev.time > sc.t_end)
        throw ConfigError(path + ".time: must be within [0, t_end]");
      if (!sc.events.empty() && ev.time < sc.events.back().time)
        throw ConfigError("scenario.events: must be sorted by time");
      sc.events.push_back(ev);
    }
  }
}

}  // namespace detail

inline Config parse_config(const nlohmann::json& root) {
  if (!root.is_object()) throw ConfigError("config root must be an object");
  detail::check_keys(root, "", {"schema_version", "scenario", "design", "output", "metrics"});

  auto sv = root.find("schema_version");
  if (sv == root.end()) throw ConfigError("schema_version: is required");
  if (!sv->is_number_integer() || sv->get<long long>() != 1)
    throw ConfigError("schema_version: must be the integer 1");

  Config cfg;
  cfg.schema_version = 1;

  auto scn = root.find("scenario");
  if (scn == root.end()) throw ConfigError("scenario: object is required");
  if (!scn->is_object()) throw ConfigError("scenario: must be an object");
  detail::parse_scenario(*scn, cfg);

  if (auto it = root.find("design"); it != root.end()) {
    if (!it->is_object()) throw ConfigError("design: must be an object");
    detail::check_keys(*it, "design", {"t_z1", "t_p1", "t_p2", "t_p3", "beta"});
    DesignParams dp;
    dp.t_z1 = detail::req_number(*it, "design", "t_z1");
    dp.t_p1 = detail::req_number(*it, "design", "t_p1");
    dp.t_p2 = detail::req_number(*it, "design", "t_p2");
    dp.t_p3 = detail::req_number(*it, "design", "t_p3");
    dp.beta = detail::opt_number(*it, "design", "beta", dp.beta);
    detail::require_positive(dp.t_z1, "design.t_z1");
    detail::require_positive(dp.t_p1, "design.t_p1");
    detail::require_positive(dp.t_p2, "design.t_p2");
    detail::require_positive(dp.t_p3, "design.t_p3");
    detail::require_nonnegative(dp.beta, "design.beta");
    cfg.design = dp;
  }

  if (auto it = root.find("output"); it != root.end()) {
    if (!it->is_object()) throw ConfigError("output: must be an object");
    detail::check_keys(*it, "output", {"trace_path", "metrics_path", "precision"});
    if (auto f = it->find("trace_path"); f != it->end()) {
      if (!f->is_string()) throw ConfigError("output.trace_path: must be a string");
      cfg.output.trace_path = f->get<std::string>();
    }
    if (auto f = it->find("metrics_path"); f != it->end()) {
      if (!f->is_string()) throw ConfigError("output.metrics_path: must be a string");
      cfg.output.metrics_path = f->get<std::string>();
    }
    if (auto f = it->find("precision"); f != it->end()) {
      if (!f->is_number_integer() || f->get<long long>() < 3 || f->get<long long>() > 17)
        throw ConfigError("output.precision: must be an integer in [3, 17]");
      cfg.output.precision = static_cast<int>(f->get<long long>());
    }
  }

  if (auto it = root.find("metrics"); it != root.end()) {
    if (!it->is_object()) throw ConfigError("metrics: must be an object");
    detail::check_keys(*it, "metrics",
                       {"rocof_window_s", "rocof_limit_hz_s", "rise_low_pct", "rise_high_pct",
                        "settle_band_pct"});
    MetricConfig& mc = cfg.metrics;
    mc.rocof_window_s = detail::opt_number(*it, "metrics", "rocof_window_s", mc.rocof_window_s);
    mc.rocof_limit_hz_s =
        detail::opt_number(*it, "metrics", "rocof_limit_hz_s", mc.rocof_limit_hz_s);
    mc.rise_low = detail::opt_number(*it, "metrics", "rise_low_pct", mc.rise_low * 100.0) / 100.0;
    mc.rise_high =
        detail::opt_number(*it, "metrics", "rise_high_pct", mc.rise_high * 100.0) / 100.0;
    mc.settle_band =
        detail::opt_number(*it, "metrics", "settle_band_pct", mc.settle_band * 100.0) / 100.0;
    detail::require_positive(mc.rocof_window_s, "metrics.rocof_window_s");
    detail::require_positive(mc.rocof_limit_hz_s, "metrics.rocof_limit_hz_s");
    if (!(mc.rise_low > 0.0 && mc.rise_low < 1.0))
      throw ConfigError("metrics.rise_low_pct: must be in (0, 100)");
    if (!(mc.rise_high > 0.0 && mc.rise_high < 1.0))
      throw ConfigError("metrics.rise_high_pct: must be in (0, 100)");
    if (mc.rise_high <= mc.rise_low)
      throw ConfigError("metrics.rise_high_pct: must exceed rise_low_pct");
    if (!(mc.settle_band > 0.0 && mc.settle_band < 1.0))
      throw ConfigError("metrics.settle_band_pct: must be in (0, 100)");
  }

  return cfg;
}

inline Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config file not found: " + path);
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  return parse_config(root);
}

inline nlohmann::ordered_json config_to_json(const Config& cfg) {
  nlohmann::ordered_json root;
  root["schema_version"] = cfg.schema_version;

  nlohmann::ordered_json s;
  const Scenario& sc = cfg.scenario;
  s["mode"] = to_string(sc.mode);
  s["strategy"] = to_string(sc.strategy);
  s["t_end"] = sc.t_end;
  s["dt"] = sc.dt;
  s["linear_plant"] = sc.linear_plant;
  s["plant"] = {{"x_line", sc.plant.x_line}, {"e0", sc.plant.e0},     {"v0", sc.plant.v0},
                {"omega0", sc.plant.omega0}, {"p_load", sc.p_load}};
  if (cfg.has_droop) {
    const DroopParams& p = sc.droop;
    s["droop"] = {{"kp_droop", p.kp_droop}, {"kd_droop", p.kd_droop}, {"tau", p.tau},
                  {"m", p.m},               {"n", p.n},               {"omega_ref", p.omega_ref},
                  {"v_ref", p.v_ref},       {"p_ref", p.p_ref},       {"q_ref", p.q_ref}};
  }
  if (cfg.has_vsg) {
    const VsgParams& p = sc.vsg;
    s["vsg"] = {{"j", p.j},           {"d", p.d},
                {"k_omega", p.k_omega}, {"tau", p.tau},
                {"omega0", p.omega0},   {"omega_ref", p.omega_ref},
                {"p_ref", p.p_ref}};
  }
  if (cfg.has_udc) {
    const UdcParams& p = sc.udc;
    s["udc"] = {{"kp_droop", p.kp_droop}, {"tau", p.tau},           {"xi", p.xi},
                {"m", p.m},               {"omega0", p.omega0},     {"omega_ref", p.omega_ref},
                {"v_ref", p.v_ref},       {"p_ref", p.p_ref},       {"kd_droop", p.kd_droop},
                {"n", p.n},               {"q_ref", p.q_ref}};
  }
  nlohmann::ordered_json evs = nlohmann::ordered_json::array();
  for (const Event& ev : sc.events)
    evs.push_back({{"time", ev.time}, {"kind", to_string(ev.kind)}, {"magnitude_w", ev.magnitude_w}});
  s["events"] = evs;
  root["scenario"] = s;

  if (cfg.design) {
    root["design"] = {{"t_z1", cfg.design->t_z1}, {"t_p1", cfg.design->t_p1},
                      {"t_p2", cfg.design->t_p2}, {"t_p3", cfg.design->t_p3},
                      {"beta", cfg.design->beta}};
  }
  root["output"] = {{"trace_path", cfg.output.trace_path},
                    {"metrics_path", cfg.output.metrics_path},
                    {"precision", cfg.output.precision}};
  root["metrics"] = {{"rocof_window_s", cfg.metrics.rocof_window_s},
                     {"rocof_limit_hz_s", cfg.metrics.rocof_limit_hz_s},
                     {"rise_low_pct", cfg.metrics.rise_low * 100.0},
                     {"rise_high_pct", cfg.metrics.rise_high * 100.0},
                     {"settle_band_pct", cfg.metrics.settle_band * 100.0}};
  return root;
}

}  // namespace gfm
