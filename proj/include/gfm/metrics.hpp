#pragma once
// Step-response quality metrics on sampled series: 10-90% rise time, 2%-band
// settling time, percentage overshoot, steady-state value, and the maximum
// windowed rate of change of frequency.
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "gfm/errors.hpp"

namespace gfm {

struct MetricConfig {
  double rise_low = 0.10;        // fraction of the step change
  double rise_high = 0.90;       // fraction of the step change
  double settle_band = 0.02;     // fraction of the step change
  double steady_tail = 0.05;     // trailing fraction averaged for steady state
  double settled_tol = 1e-3;     // tail spread limit, fraction of |step|
  double rocof_window_s = 0.1;   // s, frequency-slope window
  double rocof_limit_hz_s = 1.0; // Hz/s, pass/fail threshold
};

struct StepMetrics {
  double rise_time_10_90 = 0.0;   // s
  double settling_time_2pct = 0.0; // s
  double overshoot_pct = 0.0;      // percent of the realized change
  double steady_state = 0.0;       // series units
  double max_rocof = 0.0;          // Hz/s (filled by the caller for traces)
};

namespace detail {

// First index fraction at which progress rho crosses threshold c, linearly
// interpolated; rho[0] >= c counts as crossing at t = 0.
inline double first_crossing(const std::vector<double>& rho, double c) {
  if (rho.front() >= c) return 0.0;
  for (std::size_t k = 1; k < rho.size(); ++k) {
    if (rho[k] >= c) {
      const double span = rho[k] - rho[k - 1];
      const double frac = (span > 0.0) ? (c - rho[k - 1]) / span : 1.0;
      return static_cast<double>(k - 1) + std::clamp(frac, 0.0, 1.0);
    }
  }
  return -1.0;
}

}  // namespace detail

// Metrics of a uniformly sampled step response. step_magnitude is the
// commanded (or realized) change in series units; it scales the settled-tail
// tolerance. max_rocof is left zero: frequency slope is a property of the
// frequency trace, not of an arbitrary series.
inline StepMetrics step_metrics(const std::vector<double>& series, double dt,
                                double step_magnitude, const MetricConfig& mc = {}) {
  if (series.empty()) throw Error("step metrics require a non-empty series");
  if (dt <= 0.0) throw Error("step metrics require dt > 0");
  if (step_magnitude == 0.0) throw Error("step metrics require a nonzero step magnitude");

  StepMetrics out;
  const std::size_t n = series.size();
  const std::size_t tail_len =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(mc.steady_tail * n)));
  double tail_sum = 0.0, tail_min = series[n - tail_len], tail_max = tail_min;
  for (std::size_t k = n - tail_len; k < n; ++k) {
    tail_sum += series[k];
    tail_min = std::min(tail_min, series[k]);
    tail_max = std::max(tail_max, series[k]);
  }
  out.steady_state = tail_sum / static_cast<double>(tail_len);
  if (tail_max - tail_min >= mc.settled_tol * std::abs(step_magnitude))
    throw NotSettled("trailing samples still move more than the settled tolerance");

  const double front = series.front();
  const double change = out.steady_state - front;
  if (change == 0.0) return out;  // constant response: all timing metrics are zero
  const double sgn = (change > 0.0) ? 1.0 : -1.0;

  double worst = 0.0;
  for (double y : series) worst = std::max(worst, (y - out.steady_state) * sgn);
  out.overshoot_pct = 100.0 * worst / std::abs(change);

  std::vector<double> rho(n);
  for (std::size_t k = 0; k < n; ++k) rho[k] = (series[k] - front) / change;
  const double k_low = detail::first_crossing(rho, mc.rise_low);
  const double k_high = detail::first_crossing(rho, mc.rise_high);
  if (k_low < 0.0 || k_high < 0.0)
    throw NotSettled("response never reaches the upper rise threshold");
  out.rise_time_10_90 = (k_high - k_low) * dt;

  const double band = mc.settle_band * std::abs(change);
  std::size_t last_out = n;  // n means "never outside the band"
  for (std::size_t k = n; k-- > 0;) {
    if (std::abs(series[k] - out.steady_state) > band) {
      last_out = k;
      break;
    }
  }
  if (last_out == n) {
    out.settling_time_2pct = 0.0;
  } else if (last_out == n - 1) {
    throw NotSettled("final sample lies outside the settling band");
  } else {
    const double d0 = std::abs(series[last_out] - out.steady_state);
    const double d1 = std::abs(series[last_out + 1] - out.steady_state);
    const double frac = (d0 > d1) ? std::clamp((d0 - band) / (d0 - d1), 0.0, 1.0) : 1.0;
    out.settling_time_2pct = (static_cast<double>(last_out) + frac) * dt;
  }
  return out;
}

// Maximum |f(t + w) - f(t)| / w over the trace, with w = window_s rounded to
// whole samples. A window longer than the trace degrades to the full span.
inline double max_rocof(const std::vector<double>& freq_hz, double dt, double window_s = 0.1) {
  if (dt <= 0.0) throw Error("rocof requires dt > 0");
  if (window_s < dt) throw Error("rocof window must be at least one sample");
  if (freq_hz.size() < 2) return 0.0;
  std::size_t w = static_cast<std::size_t>(std::max(1LL, std::llround(window_s / dt)));
  if (w >= freq_hz.size()) w = freq_hz.size() - 1;
  double worst = 0.0;
  for (std::size_t k = 0; k + w < freq_hz.size(); ++k)
    worst = std::max(worst, std::abs(freq_hz[k + w] - freq_hz[k]));
  return worst / (static_cast<double>(w) * dt);
}

}  // namespace gfm
