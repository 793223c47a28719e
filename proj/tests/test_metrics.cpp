#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "gfm/metrics.hpp"

using gfm::MetricConfig;
using gfm::StepMetrics;

namespace {

std::vector<double> first_order_step(double tau, double dt, double t_end) {
  const std::size_t n = static_cast<std::size_t>(std::llround(t_end / dt)) + 1;
  std::vector<double> y(n);
  for (std::size_t k = 0; k < n; ++k)
    y[k] = 1.0 - std::exp(-static_cast<double>(k) * dt / tau);
  return y;
}

}  // namespace

TEST_CASE("first-order step metrics match the closed-form times") {
  const double tau = 1.0, dt = 1e-3;
  const auto y = first_order_step(tau, dt, 15.0 * tau);
  const StepMetrics m = gfm::step_metrics(y, dt, 1.0);
  REQUIRE_THAT(m.rise_time_10_90,
               Catch::Matchers::WithinRel(tau * std::log(9.0), 1e-3));
  REQUIRE_THAT(m.settling_time_2pct,
               Catch::Matchers::WithinRel(tau * std::log(50.0), 1e-3));
  REQUIRE(m.overshoot_pct < 1e-3);
  REQUIRE_THAT(m.steady_state, Catch::Matchers::WithinAbs(1.0, 1e-3));
}

TEST_CASE("second-order overshoot matches the damping-ratio formula") {
  const double zeta = 0.5, wn = 1.0, dt = 1e-3;
  const double wd = wn * std::sqrt(1.0 - zeta * zeta);
  const std::size_t n = 60001;
  std::vector<double> y(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) * dt;
    y[k] = 1.0 - std::exp(-zeta * wn * t) *
                     (std::cos(wd * t) + zeta * wn / wd * std::sin(wd * t));
  }
  const StepMetrics m = gfm::step_metrics(y, dt, 1.0);
  const double expected = 100.0 * std::exp(-std::numbers::pi * zeta /
                                           std::sqrt(1.0 - zeta * zeta));
  REQUIRE_THAT(m.overshoot_pct, Catch::Matchers::WithinRel(expected, 1e-3));
}

TEST_CASE("downward steps measure against the signed change") {
  const double tau = 0.5, dt = 1e-3;
  auto y = first_order_step(tau, dt, 6.0);
  for (double& v : y) v = -2.0 * v;  // step from 0 to -2
  const StepMetrics m = gfm::step_metrics(y, dt, -2.0);
  REQUIRE_THAT(m.rise_time_10_90,
               Catch::Matchers::WithinRel(tau * std::log(9.0), 1e-3));
  REQUIRE_THAT(m.steady_state, Catch::Matchers::WithinAbs(-2.0, 2e-3));
  REQUIRE(m.overshoot_pct < 1e-3);
}

TEST_CASE("a series with no realized change reports zero timing metrics") {
  std::vector<double> y(1000, 5.0);
  const StepMetrics m = gfm::step_metrics(y, 1e-3, 1.0);
  REQUIRE(m.rise_time_10_90 == 0.0);
  REQUIRE(m.settling_time_2pct == 0.0);
  REQUIRE(m.overshoot_pct == 0.0);
  REQUIRE(m.steady_state == 5.0);
}

TEST_CASE("a zero commanded magnitude is rejected") {
  std::vector<double> y(1000, 5.0);
  REQUIRE_THROWS_AS(gfm::step_metrics(y, 1e-3, 0.0), gfm::Error);
}

TEST_CASE("a still-moving tail is reported, not measured") {
  // Truncating the exponential at one time constant leaves the tail moving.
  const auto y = first_order_step(1.0, 1e-3, 1.0);
  REQUIRE_THROWS_AS(gfm::step_metrics(y, 1e-3, 1.0), gfm::NotSettled);
}

TEST_CASE("residual ripple wider than the band of the realized change is reported") {
  // The commanded step mostly fails to materialize: the tail is quiet on the
  // commanded scale (spread < 1e-3 of it) yet the last sample sits outside
  // the 2% band of the small realized change.
  const double dt = 1e-3;
  std::vector<double> y(4096, 0.0);
  for (std::size_t k = 1024; k < y.size(); ++k) {
    const double phase = 2.0 * std::numbers::pi *
                         static_cast<double>(y.size() - 1 - k) / 64.0;
    y[k] = 0.01 + 4e-4 * std::cos(phase);  // cos(0) = 1 at the final sample
  }
  REQUIRE_THROWS_WITH(gfm::step_metrics(y, dt, 1.0),
                      Catch::Matchers::ContainsSubstring("settling band"));
}

TEST_CASE("degenerate metric inputs are rejected") {
  std::vector<double> y{0.0, 1.0};
  REQUIRE_THROWS_AS(gfm::step_metrics({}, 1e-3, 1.0), gfm::Error);
  REQUIRE_THROWS_AS(gfm::step_metrics(y, 0.0, 1.0), gfm::Error);
}

TEST_CASE("rocof of a linear frequency ramp is the slope") {
  const double dt = 1e-3, slope = 0.7;  // Hz/s
  std::vector<double> f(2001);
  for (std::size_t k = 0; k < f.size(); ++k)
    f[k] = 50.0 + slope * static_cast<double>(k) * dt;
  REQUIRE_THAT(gfm::max_rocof(f, dt, 0.1), Catch::Matchers::WithinRel(slope, 1e-12));
}

TEST_CASE("rocof averages a jump over the full window") {
  const double dt = 1e-3;
  std::vector<double> f(1000, 50.0);
  for (std::size_t k = 500; k < f.size(); ++k) f[k] = 50.2;
  // A 0.2 Hz jump seen through a 100 ms window reads 2 Hz/s.
  REQUIRE_THAT(gfm::max_rocof(f, dt, 0.1), Catch::Matchers::WithinRel(2.0, 1e-12));
}

TEST_CASE("rocof window shorter than one sample is rejected") {
  std::vector<double> f(100, 50.0);
  REQUIRE_THROWS_AS(gfm::max_rocof(f, 1e-3, 1e-4), gfm::Error);
}

TEST_CASE("rocof degrades gracefully on short series") {
  REQUIRE(gfm::max_rocof({50.0}, 1e-3, 0.1) == 0.0);
  // Two samples: the window clamps to the full span.
  REQUIRE_THAT(gfm::max_rocof({50.0, 50.1}, 1e-3, 0.1),
               Catch::Matchers::WithinRel(0.1 / 1e-3, 1e-12));
}
