#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>

#include "gfm/constants.hpp"
#include "gfm/controllers.hpp"

using gfm::ControllerState;
using gfm::DroopParams;
using gfm::UdcParams;
using gfm::VsgParams;
using gfm::nominal_omega;

TEST_CASE("droop outputs slide down the frequency characteristic") {
  DroopParams p;
  ControllerState st;
  st.x_filter_p = 1000.0;  // filtered (P - P_ref)
  st.x_filter_q = 200.0;   // filtered (Q - Q_ref)
  const auto out = gfm::droop_outputs(p, st);
  REQUIRE_THAT(out.omega,
               Catch::Matchers::WithinRel(p.omega_ref - p.kp_droop * 1000.0, 1e-15));
  REQUIRE_THAT(out.v, Catch::Matchers::WithinRel(p.v_ref - p.kd_droop * 200.0, 1e-15));
}

TEST_CASE("cross-coupled outputs solve the two-by-two system") {
  DroopParams p;
  p.m = 0.02;
  p.n = 2.0;
  ControllerState st;
  st.x_filter_p = 1000.0;
  st.x_filter_q = 200.0;
  const auto out = gfm::droop_outputs(p, st);
  // omega = omega_ref - kp*x_p + m*(v_ref - v), v = v_ref - kd*x_q - n*(omega_ref - omega)
  REQUIRE_THAT(out.omega,
               Catch::Matchers::WithinRel(
                   p.omega_ref - p.kp_droop * st.x_filter_p + p.m * (p.v_ref - out.v),
                   1e-12));
  REQUIRE_THAT(out.v,
               Catch::Matchers::WithinRel(
                   p.v_ref - p.kd_droop * st.x_filter_q - p.n * (p.omega_ref - out.omega),
                   1e-12));
}

TEST_CASE("coupling gains on the singular surface are rejected") {
  DroopParams p;
  p.m = 0.5;
  p.n = 2.0;  // m*n = 1
  ControllerState st;
  REQUIRE_THROWS_AS(gfm::droop_outputs(p, st), gfm::SingularCoupling);

  UdcParams u;
  u.m = 0.1;
  u.n = 10.0;
  REQUIRE_THROWS_AS(gfm::udc_outputs(u, st), gfm::SingularCoupling);
}

TEST_CASE("unified law raises frequency with a positive filter state") {
  UdcParams p;
  ControllerState st;
  st.x_filter_p = 500.0;  // filtered (P_ref + xi*(omega_ref - omega) - P)
  const auto out = gfm::udc_outputs(p, st);
  REQUIRE_THAT(out.omega,
               Catch::Matchers::WithinRel(p.omega0 + p.kp_droop * 500.0, 1e-15));
}

TEST_CASE("filter derivatives pull the state toward the driving signal") {
  DroopParams p;
  ControllerState st;
  const auto d = gfm::droop_derivatives(p, st, 700.0, -50.0);
  REQUIRE_THAT(d.dx_filter_p, Catch::Matchers::WithinRel(700.0 / p.tau, 1e-14));
  REQUIRE_THAT(d.dx_filter_q, Catch::Matchers::WithinRel(-50.0 / p.tau, 1e-14));
  REQUIRE(d.domega == 0.0);  // droop frequency is algebraic, not integrated
  REQUIRE(d.dtheta == d.out.omega);
}

TEST_CASE("unified filter input closes over the frequency output") {
  UdcParams p;
  p.xi = 1000.0;
  ControllerState st;
  st.x_filter_p = 400.0;
  const auto d = gfm::udc_derivatives(p, st, 900.0, 0.0);
  const double omega_out = p.omega0 + p.kp_droop * 400.0;
  const double target = p.p_ref + p.xi * (p.omega_ref - omega_out) - 900.0;
  REQUIRE_THAT(d.dx_filter_p,
               Catch::Matchers::WithinRel((target - 400.0) / p.tau, 1e-12));
}

TEST_CASE("non-finite measurements are rejected before they reach a state") {
  DroopParams p;
  ControllerState st;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  REQUIRE_THROWS_AS(gfm::droop_derivatives(p, st, nan, 0.0), gfm::Error);
  UdcParams u;
  REQUIRE_THROWS_AS(gfm::udc_derivatives(u, st, 0.0, nan), gfm::Error);
  VsgParams v;
  REQUIRE_THROWS_AS(gfm::vsg_derivatives(v, st, nan), gfm::Error);
}

TEST_CASE("swing law accelerates under surplus mechanical power") {
  VsgParams p;
  p.p_ref = 2000.0;
  ControllerState st;
  st.omega = nominal_omega;
  const auto d = gfm::vsg_derivatives(p, st, 1000.0);  // P_m > P
  REQUIRE(d.domega > 0.0);
  REQUIRE_THAT(d.domega,
               Catch::Matchers::WithinRel(1000.0 / nominal_omega / p.j, 1e-12));
  REQUIRE(d.out.omega == st.omega);
  REQUIRE(d.dtheta == st.omega);
}

TEST_CASE("swing law refuses a nonpositive frequency") {
  VsgParams p;
  ControllerState st;
  st.omega = 0.0;
  REQUIRE_THROWS_AS(gfm::vsg_derivatives(p, st, 0.0), gfm::NonPhysicalFrequency);
  st.omega = -10.0;
  REQUIRE_THROWS_AS(gfm::vsg_derivatives(p, st, 0.0), gfm::NonPhysicalFrequency);
}

TEST_CASE("unified-to-swing parameter map reproduces the frequency loop") {
  UdcParams u;
  u.kp_droop = 3e-4;
  u.tau = 0.05;
  u.xi = 2000.0;
  const VsgParams v = gfm::map_droop_to_vsg(u);
  // delta_omega/delta_P denominators: tau s + 1 + kp*xi  vs  kp*(J omega0 s + D omega0)
  REQUIRE_THAT(u.kp_droop * v.j * u.omega0, Catch::Matchers::WithinRel(u.tau, 1e-14));
  REQUIRE_THAT(u.kp_droop * v.d * u.omega0,
               Catch::Matchers::WithinRel(1.0 + u.kp_droop * u.xi, 1e-14));
  REQUIRE(v.k_omega == 0.0);
  REQUIRE(v.tau == u.tau);
}

TEST_CASE("parameter maps invert each other") {
  UdcParams u;
  u.kp_droop = 2.5e-4;
  u.tau = 0.03;
  u.xi = 4500.0;
  u.p_ref = 1200.0;
  const UdcParams back = gfm::map_vsg_to_droop(gfm::map_droop_to_vsg(u));
  REQUIRE_THAT(back.kp_droop, Catch::Matchers::WithinRel(u.kp_droop, 1e-12));
  REQUIRE_THAT(back.xi, Catch::Matchers::WithinRel(u.xi, 1e-9));
  REQUIRE(back.tau == u.tau);
  REQUIRE(back.p_ref == u.p_ref);
  REQUIRE(back.m == 0.0);
}

TEST_CASE("parameter map rejects degenerate gains") {
  UdcParams u;
  u.kp_droop = 0.0;
  REQUIRE_THROWS_AS(gfm::map_droop_to_vsg(u), gfm::Error);
  VsgParams v;
  v.j = -1.0;
  REQUIRE_THROWS_AS(gfm::map_vsg_to_droop(v), gfm::Error);
}
