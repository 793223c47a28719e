#pragma once
// The three grid-forming control laws (frequency/voltage droop, swing-based
// synchronous emulation, and the unified law combining both behaviors), their
// continuous-time derivatives, and exact parameter maps between the droop
// family and the swing family.
#include <cmath>

#include "gfm/constants.hpp"
#include "gfm/errors.hpp"

namespace gfm {

struct DroopParams {
  double kp_droop = default_kp_droop;  // (rad/s)/W
  double kd_droop = 1e-3;              // V/var
  double tau = default_tau;            // s, power-filter time constant
  double m = 0.0;                      // (rad/s)/V, voltage-to-frequency coupling
  double n = 0.0;                      // V/(rad/s), frequency-to-voltage coupling
  double omega_ref = nominal_omega;    // rad/s
  double v_ref = 380.0;                // V
  double p_ref = 0.0;                  // W
  double q_ref = 0.0;                  // var
};

struct VsgParams {
  double j = 3.36;                   // kg m^2, rotor inertia
  double d = 30.0;                   // W s^2/rad^2, damping torque coefficient
  double k_omega = 0.0;              // W/(rad/s), governor gain
  double tau = default_tau;          // s, governor-filter time constant
  double omega0 = nominal_omega;     // rad/s, damping reference
  double omega_ref = nominal_omega;  // rad/s, governor reference
  double p_ref = 0.0;                // W
};

struct UdcParams {
  double kp_droop = default_kp_droop;  // (rad/s)/W
  double tau = default_tau;            // s
  double xi = 0.0;                     // W/(rad/s), frequency-stiffening gain
  double m = 0.0;                      // (rad/s)/V
  double omega0 = nominal_omega;       // rad/s, frequency anchor
  double omega_ref = nominal_omega;    // rad/s
  double v_ref = 380.0;                // V
  double p_ref = 0.0;                  // W
  double kd_droop = 1e-3;              // V/var
  double n = 0.0;                      // V/(rad/s)
  double q_ref = 0.0;                  // var
};

struct ControllerState {
  double x_filter_p = 0.0;  // filtered active-power channel state
  double x_filter_q = 0.0;  // filtered reactive-power channel state
  double omega = nominal_omega;  // rad/s (integrated state for the swing law)
  double theta = 0.0;            // rad
  double v = 380.0;              // V (algebraic output mirror)
};

struct ControllerOutputs {
  double omega = nominal_omega;  // rad/s
  double v = 380.0;              // V
};

struct ControllerDerivs {
  double dx_filter_p = 0.0;
  double dx_filter_q = 0.0;
  double domega = 0.0;
  double dtheta = 0.0;
  ControllerOutputs out;
};

namespace detail {

// Solve the coupled output equations
//   omega = r_omega - m*(v     - 0)   ->  omega + m*v = r_omega
//   v     = r_v     + n*(omega - 0)   ->  -n*omega + v = r_v
// i.e. [1 m; -n 1] [omega; v] = [r_omega; r_v], det = 1 + m*n.
// The coupling contract also forbids the m*n = 1 surface outright.
inline ControllerOutputs solve_coupled(double m, double n, double r_omega, double r_v) {
  const double det = 1.0 + m * n;
  if (std::abs(1.0 - m * n) < 1e-12 || std::abs(det) < 1e-12)
    throw SingularCoupling("cross-coupling gains m, n make the output equations singular");
  ControllerOutputs out;
  out.omega = (r_omega - m * r_v) / det;
  out.v = (r_v + n * r_omega) / det;
  return out;
}

inline void require_finite_measurement(double p, double q) {
  if (!std::isfinite(p) || !std::isfinite(q))
    throw Error("power measurement is not finite");
}

}  // namespace detail

// Algebraic droop outputs for a given filter state:
//   omega = omega_ref - x_p*kp + m*(v_ref - v)
//   v     = v_ref     - x_q*kd - n*(omega_ref - omega)
inline ControllerOutputs droop_outputs(const DroopParams& p, const ControllerState& st) {
  const double r_omega = p.omega_ref - p.kp_droop * st.x_filter_p + p.m * p.v_ref;
  const double r_v = p.v_ref - p.kd_droop * st.x_filter_q - p.n * p.omega_ref;
  return detail::solve_coupled(p.m, p.n, r_omega, r_v);
}

// Unified-law outputs: the active channel anchors at omega0 and its filter
// state carries p_ref + xi*(omega_ref - omega) - P; the reactive channel is
// identical to droop.
inline ControllerOutputs udc_outputs(const UdcParams& p, const ControllerState& st) {
  const double r_omega = p.omega0 + p.kp_droop * st.x_filter_p + p.m * p.v_ref;
  const double r_v = p.v_ref - p.kd_droop * st.x_filter_q - p.n * p.omega_ref;
  return detail::solve_coupled(p.m, p.n, r_omega, r_v);
}

inline ControllerDerivs droop_derivatives(const DroopParams& p, const ControllerState& st,
                                          double meas_p, double meas_q) {
  detail::require_finite_measurement(meas_p, meas_q);
  ControllerDerivs d;
  d.out = droop_outputs(p, st);
  d.dx_filter_p = ((meas_p - p.p_ref) - st.x_filter_p) / p.tau;
  d.dx_filter_q = ((meas_q - p.q_ref) - st.x_filter_q) / p.tau;
  d.domega = 0.0;
  d.dtheta = d.out.omega;
  return d;
}

inline ControllerDerivs udc_derivatives(const UdcParams& p, const ControllerState& st,
                                        double meas_p, double meas_q) {
  detail::require_finite_measurement(meas_p, meas_q);
  ControllerDerivs d;
  d.out = udc_outputs(p, st);
  d.dx_filter_p =
      ((p.p_ref + p.xi * (p.omega_ref - d.out.omega) - meas_p) - st.x_filter_p) / p.tau;
  d.dx_filter_q = ((meas_q - p.q_ref) - st.x_filter_q) / p.tau;
  d.domega = 0.0;
  d.dtheta = d.out.omega;
  return d;
}

// Swing dynamics: J domega/dt = (P_m - P)/omega - D*(omega - omega0) with the
// mechanical power P_m = p_ref + governor filter output, and the governor
// filter x driven by k_omega*(omega_ref - omega).
inline ControllerDerivs vsg_derivatives(const VsgParams& p, const ControllerState& st,
                                        double meas_p) {
  detail::require_finite_measurement(meas_p, 0.0);
  if (st.omega <= 0.0)
    throw NonPhysicalFrequency("swing law requires omega > 0");
  ControllerDerivs d;
  const double p_m = p.p_ref + st.x_filter_p;
  d.dx_filter_p = (p.k_omega * (p.omega_ref - st.omega) - st.x_filter_p) / p.tau;
  d.dx_filter_q = 0.0;
  d.domega = ((p_m - meas_p) / st.omega - p.d * (st.omega - p.omega0)) / p.j;
  d.dtheta = st.omega;
  d.out.omega = st.omega;
  d.out.v = st.v;
  return d;
}

// Exact small-signal parameter map from the unified law to the swing law
// (valid for m = 0). Matching the frequency-loop transfer functions
//   unified:  delta_omega = -kp/(tau s + 1 + kp*xi) * delta_P
//   swing:    delta_omega = -1/(J*omega0 s + D*omega0) * delta_P   (k_omega = 0)
// coefficient-by-coefficient gives J = tau/(kp*omega0), D = (xi + 1/kp)/omega0.
inline VsgParams map_droop_to_vsg(const UdcParams& u) {
  if (u.kp_droop <= 0.0) throw Error("parameter map requires kp_droop > 0");
  if (u.omega0 <= 0.0) throw Error("parameter map requires omega0 > 0");
  VsgParams v;
  v.j = u.tau / (u.kp_droop * u.omega0);
  v.d = (u.xi + 1.0 / u.kp_droop) / u.omega0;
  v.k_omega = 0.0;
  v.tau = u.tau;
  v.omega0 = u.omega0;
  v.omega_ref = u.omega_ref;
  v.p_ref = u.p_ref;
  return v;
}

// Inverse of map_droop_to_vsg (for k_omega = 0 swing parameters).
inline UdcParams map_vsg_to_droop(const VsgParams& v) {
  if (v.j <= 0.0) throw Error("parameter map requires inertia j > 0");
  if (v.omega0 <= 0.0) throw Error("parameter map requires omega0 > 0");
  UdcParams u;
  u.kp_droop = v.tau / (v.j * v.omega0);
  u.tau = v.tau;
  u.xi = v.d * v.omega0 - v.j * v.omega0 / v.tau;
  u.m = 0.0;
  u.omega0 = v.omega0;
  u.omega_ref = v.omega_ref;
  u.p_ref = v.p_ref;
  return u;
}

}  // namespace gfm
