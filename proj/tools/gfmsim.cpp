// Command-line front end: scenario simulation, strategy comparison, and
// small-signal design analysis, all driven by a JSON config.
#include <CLI11.hpp>
#include <json.hpp>

#include <complex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include "gfm/gfm.hpp"

namespace {

std::string join_path(const std::string& dir, const std::string& path) {
  if (dir.empty()) return path;
  std::filesystem::path p(path);
  if (p.is_absolute()) return path;
  return (std::filesystem::path(dir) / p).string();
}

std::vector<std::string> split_csv(const std::string& csv) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : csv) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (c != ' ') {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

unsigned resolve_threads() {
  const char* env = std::getenv("GFMSIM_THREADS");
  if (env == nullptr || *env == '\0') {
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1u : hc;
  }
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (end == nullptr || *end != '\0' || v < 1)
    throw gfm::ConfigError("GFMSIM_THREADS: must be a positive integer");
  return static_cast<unsigned>(v);
}

nlohmann::ordered_json metrics_row_json(gfm::Strategy st, gfm::Mode mode,
                                        const gfm::StepMetrics& m, bool rocof_pass) {
  nlohmann::ordered_json row;
  row["strategy"] = gfm::to_string(st);
  row["mode"] = gfm::to_string(mode);
  row["rise_time_s"] = m.rise_time_10_90;
  row["settling_time_s"] = m.settling_time_2pct;
  row["overshoot_pct"] = m.overshoot_pct;
  row["max_rocof_hz_s"] = m.max_rocof;
  row["rocof_pass"] = rocof_pass;
  return row;
}

void write_json_file(const std::string& path, const nlohmann::ordered_json& j) {
  std::ofstream out(path);
  if (!out) throw gfm::Error("cannot open metrics file for writing: " + path);
  out << j.dump(2) << "\n";
  if (!out) throw gfm::Error("failed while writing metrics file: " + path);
}

struct MetricColumns {
  bool rise = true, settling = true, overshoot = true, rocof = true;
};

MetricColumns parse_metric_columns(const std::string& csv) {
  MetricColumns cols;
  if (csv.empty()) return cols;
  cols = MetricColumns{false, false, false, false};
  for (const std::string& tok : split_csv(csv)) {
    if (tok == "rise") cols.rise = true;
    else if (tok == "settling") cols.settling = true;
    else if (tok == "overshoot") cols.overshoot = true;
    else if (tok == "rocof") cols.rocof = true;
    else throw gfm::ConfigError("--metrics: unknown column \"" + tok +
                                "\" (expected rise, settling, overshoot, rocof)");
  }
  return cols;
}

void print_metrics_header(const MetricColumns& cols) {
  std::printf("%-8s %-4s", "strategy", "mode");
  if (cols.rise) std::printf(" %12s", "rise_s");
  if (cols.settling) std::printf(" %12s", "settle_s");
  if (cols.overshoot) std::printf(" %12s", "overshoot_%");
  if (cols.rocof) std::printf(" %12s %6s", "rocof_Hz/s", "rocof");
  std::printf("\n");
}

void print_metrics_row(gfm::Strategy st, gfm::Mode mode, const gfm::StepMetrics& m,
                       bool rocof_pass, const MetricColumns& cols) {
  std::printf("%-8s %-4s", gfm::to_string(st), gfm::to_string(mode));
  if (cols.rise) std::printf(" %12.6g", m.rise_time_10_90);
  if (cols.settling) std::printf(" %12.6g", m.settling_time_2pct);
  if (cols.overshoot) std::printf(" %12.6g", m.overshoot_pct);
  if (cols.rocof) std::printf(" %12.6g %6s", m.max_rocof, rocof_pass ? "pass" : "FAIL");
  std::printf("\n");
}

void print_poles(const char* label, const std::vector<std::complex<double>>& poles) {
  std::printf("%s:\n", label);
  for (const auto& p : poles) std::printf("  %14.6g %+14.6gi rad/s\n", p.real(), p.imag());
}

int cmd_simulate(const gfm::Config& cfg, const std::string& out_dir) {
  const gfm::Trace tr = gfm::run_scenario(cfg.scenario);
  const gfm::StepMetrics m = gfm::scenario_metrics(cfg.scenario, tr, cfg.metrics);
  const bool rocof_pass = m.max_rocof <= cfg.metrics.rocof_limit_hz_s + 1e-12;

  const std::string trace_path = join_path(out_dir, cfg.output.trace_path);
  gfm::write_trace_csv(trace_path, tr, cfg.output.precision);
  const std::string metrics_path = join_path(out_dir, cfg.output.metrics_path);
  write_json_file(metrics_path,
                  metrics_row_json(cfg.scenario.strategy, cfg.scenario.mode, m, rocof_pass));

  const MetricColumns cols;
  print_metrics_header(cols);
  print_metrics_row(cfg.scenario.strategy, cfg.scenario.mode, m, rocof_pass, cols);
  const gfm::SteadyState ss = gfm::predict_steady_state(cfg.scenario);
  std::printf("post-event steady state: omega=%.6g rad/s  freq=%.6g Hz  v=%.6g V  "
              "p=%.6g W  q=%.6g var\n",
              ss.omega, ss.freq, ss.v, ss.p, ss.q);
  std::printf("wrote %s\n", trace_path.c_str());
  std::printf("wrote %s\n", metrics_path.c_str());
  return 0;
}

int cmd_compare(const gfm::Config& cfg, const std::string& out_dir,
                const std::string& strategies_csv, const std::string& metrics_csv) {
  std::vector<gfm::Strategy> strategies;
  if (strategies_csv.empty()) {
    if (cfg.has_droop) strategies.push_back(gfm::Strategy::droop);
    if (cfg.has_vsg) strategies.push_back(gfm::Strategy::vsg);
    if (cfg.has_udc) strategies.push_back(gfm::Strategy::udc);
  } else {
    for (const std::string& tok : split_csv(strategies_csv))
      strategies.push_back(gfm::parse_strategy(tok));
  }
  if (strategies.empty())
    throw gfm::ConfigError("compare requires at least one strategy block in the config");
  for (gfm::Strategy st : strategies) {
    const bool present = (st == gfm::Strategy::droop && cfg.has_droop) ||
                         (st == gfm::Strategy::vsg && cfg.has_vsg) ||
                         (st == gfm::Strategy::udc && cfg.has_udc);
    if (!present)
      throw gfm::ConfigError(std::string("scenario.") + gfm::to_string(st) +
                             ": block required for --strategies " + gfm::to_string(st));
  }

  std::vector<gfm::Scenario> scenarios;
  scenarios.reserve(strategies.size());
  for (gfm::Strategy st : strategies) {
    gfm::Scenario sc = cfg.scenario;
    sc.strategy = st;
    scenarios.push_back(sc);
  }
  const unsigned threads =
      std::min<unsigned>(resolve_threads(), static_cast<unsigned>(scenarios.size()));
  const std::vector<gfm::ComparisonRow> rows =
      gfm::run_comparison(scenarios, cfg.metrics, threads);

  const std::filesystem::path trace_template(cfg.output.trace_path);
  nlohmann::ordered_json out_rows = nlohmann::ordered_json::array();
  const MetricColumns cols = parse_metric_columns(metrics_csv);
  print_metrics_header(cols);
  for (const gfm::ComparisonRow& row : rows) {
    print_metrics_row(row.strategy, cfg.scenario.mode, row.metrics, row.rocof_pass, cols);
    out_rows.push_back(
        metrics_row_json(row.strategy, cfg.scenario.mode, row.metrics, row.rocof_pass));
    std::filesystem::path per = trace_template;
    per.replace_filename(trace_template.stem().string() + "_" + gfm::to_string(row.strategy) +
                         trace_template.extension().string());
    const std::string trace_path = join_path(out_dir, per.string());
    gfm::write_trace_csv(trace_path, row.trace, cfg.output.precision);
    std::printf("wrote %s\n", trace_path.c_str());
  }
  nlohmann::ordered_json doc;
  doc["mode"] = gfm::to_string(cfg.scenario.mode);
  doc["rows"] = out_rows;
  const std::string metrics_path = join_path(out_dir, cfg.output.metrics_path);
  write_json_file(metrics_path, doc);
  std::printf("wrote %s\n", metrics_path.c_str());
  return 0;
}

int cmd_analyze(const gfm::Config& cfg, const std::string& out_dir) {
  if (!cfg.design) throw gfm::ConfigError("design: block is required for analyze");
  const gfm::DesignParams& dp = *cfg.design;

  const gfm::TransferFunction target = gfm::design_target(dp);
  const auto target_poles = gfm::tf_poles(target);
  bool all_real_stable = true;
  for (const auto& p : target_poles)
    if (!(p.real() < 0.0) || std::abs(p.imag()) > 1e-7 * std::max(1.0, std::abs(p.real())))
      all_real_stable = false;
  std::printf("design target: zero at %.6g rad/s, dc gain %.3f\n", -1.0 / dp.t_z1,
              target.dc_gain());
  print_poles("design target poles", target_poles);
  std::printf("three real stable poles: %s\n", all_real_stable ? "yes" : "no");

  const gfm::TransferFunction model = gfm::build_gc_design_model(dp, cfg.scenario.plant);
  print_poles("grid-connected model poles", gfm::tf_poles(model));
  std::printf("grid-connected model dc gain: %.3f\n", model.dc_gain());

  const gfm::LoopFunctions lf = gfm::scenario_loop_functions(cfg.scenario);
  const gfm::TransferFunction is_loop = gfm::build_is_closed_loop(lf);
  print_poles("islanded load-to-frequency poles", gfm::tf_poles(is_loop));
  std::printf("islanded load-to-frequency dc gain: %.6g (rad/s)/W\n", is_loop.dc_gain());

  const std::string fr_path = join_path(out_dir, "frequency_response.csv");
  std::ofstream fr(fr_path);
  if (!fr) throw gfm::Error("cannot open frequency response file for writing: " + fr_path);
  fr << "omega,re,im,mag_db,phase_deg\n";
  char buf[192];
  for (int i = 0; i < 400; ++i) {
    const double w = std::pow(10.0, -2.0 + 6.0 * static_cast<double>(i) / 399.0);
    const std::complex<double> h = model.eval(std::complex<double>(0.0, w));
    const double mag_db = 20.0 * std::log10(std::abs(h));
    const double phase_deg = std::arg(h) * 180.0 / std::numbers::pi;
    std::snprintf(buf, sizeof buf, "%.9g,%.9g,%.9g,%.9g,%.9g\n", w, h.real(), h.imag(),
                  mag_db, phase_deg);
    fr << buf;
  }
  if (!fr) throw gfm::Error("failed while writing frequency response file: " + fr_path);
  std::printf("wrote %s\n", fr_path.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"grid-forming inverter simulation and small-signal analysis"};
  app.require_subcommand(1);

  std::string config_path, out_dir, strategies_csv, metrics_csv;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON configuration file")->required();
    sub->add_option("--out-dir", out_dir, "directory prefix for relative output paths");
  };
  CLI::App* sim =
      app.add_subcommand("simulate", "run one scenario; write trace CSV and metrics JSON");
  add_common(sim);
  CLI::App* cmp =
      app.add_subcommand("compare", "run several control laws through the same disturbance");
  add_common(cmp);
  cmp->add_option("--strategies", strategies_csv,
                  "comma-separated subset of droop,vsg,udc (default: all configured)");
  cmp->add_option("--metrics", metrics_csv,
                  "comma-separated table columns: rise,settling,overshoot,rocof");
  CLI::App* ana = app.add_subcommand(
      "analyze", "pole/zero and frequency-response report for the design block");
  add_common(ana);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }

  try {
    const gfm::Config cfg = gfm::load_config(config_path);
    if (!out_dir.empty()) std::filesystem::create_directories(out_dir);
    if (sim->parsed()) return cmd_simulate(cfg, out_dir);
    if (cmp->parsed()) return cmd_compare(cfg, out_dir, strategies_csv, metrics_csv);
    return cmd_analyze(cfg, out_dir);
  } catch (const gfm::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const gfm::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
