#pragma once
// Small-signal machinery: scalar loop functions of the frequency channel,
// the closed-loop maps for grid-connected and islanded operation, the
// three-pole/one-zero design template with its grid-connected realization,
// and controller linearization around a verified equilibrium.
#include <cmath>
#include <string>

#include "gfm/constants.hpp"
#include "gfm/controllers.hpp"
#include "gfm/errors.hpp"
#include "gfm/plant.hpp"
#include "gfm/transfer_function.hpp"

namespace gfm {

// Frequency-channel loop decomposition:
//   g_l: forward path from power error to frequency deviation (includes gain),
//   g_f: frequency feedback folded into the forward summing junction,
//   g_b: power-measurement branch.
struct LoopFunctions {
  TransferFunction g_f = tf_constant(0.0);
  TransferFunction g_l = tf_constant(1.0);
  TransferFunction g_b = tf_constant(1.0);
};

// Target shape (1 + s T_z1) / ((1 + s T_p1)(1 + s T_p2)(1 + s T_p3)) and the
// feedback weight beta used by its grid-connected realization.
struct DesignParams {
  double t_z1 = 0.1;  // s
  double t_p1 = 0.05; // s
  double t_p2 = 0.1;  // s
  double t_p3 = 0.3;  // s
  double beta = 0.01; // s
};

namespace detail {

inline void require_loop_sanity(const LoopFunctions& lf) {
  if (!lf.g_f.proper() || !lf.g_l.proper() || !lf.g_b.proper())
    throw ImproperTransferFunction("loop functions must be proper");
  for (const auto& pole : tf_poles(lf.g_l))
    if (pole.real() > 1e-9)
      throw Error("forward path g_l has an unstable pole");
}

inline Polynomial laplace_s() { return Polynomial{0.0, 1.0}; }

}  // namespace detail

// Grid-connected closed loop from commanded power to delivered power:
//   E0*V0*G_L / (s*X + s*G_F*G_L + E0*V0*G_L*G_B)
// cleared of denominators.
inline TransferFunction build_gc_closed_loop(const LoopFunctions& lf, const PlantParams& plant) {
  detail::require_loop_sanity(lf);
  if (plant.x_line <= 0.0) throw Error("closed loop requires line reactance x > 0");
  const double vv = plant.e0 * plant.v0;
  const Polynomial s = detail::laplace_s();
  const Polynomial& nf = lf.g_f.num;
  const Polynomial& df = lf.g_f.den;
  const Polynomial& nl = lf.g_l.num;
  const Polynomial& dl = lf.g_l.den;
  const Polynomial& nb = lf.g_b.num;
  const Polynomial& db = lf.g_b.den;

  Polynomial num = poly_scale(poly_mul(nl, poly_mul(df, db)), vv);
  Polynomial den = poly_add(
      poly_add(poly_scale(poly_mul(s, poly_mul(df, poly_mul(dl, db))), plant.x_line),
               poly_mul(s, poly_mul(nf, poly_mul(nl, db)))),
      poly_scale(poly_mul(nl, poly_mul(df, nb)), vv));
  den.normalize();
  if (den.is_zero())
    throw DegenerateLoop("grid-connected loop denominator vanishes identically");
  return TransferFunction(std::move(num), std::move(den));
}

// Islanded closed loop from load power to frequency deviation:
//   -G_B*G_L / (1 + G_F*G_L)
// cleared of denominators.
inline TransferFunction build_is_closed_loop(const LoopFunctions& lf) {
  detail::require_loop_sanity(lf);
  const Polynomial& nf = lf.g_f.num;
  const Polynomial& df = lf.g_f.den;
  const Polynomial& nl = lf.g_l.num;
  const Polynomial& dl = lf.g_l.den;
  const Polynomial& nb = lf.g_b.num;
  const Polynomial& db = lf.g_b.den;

  Polynomial num = poly_scale(poly_mul(nb, poly_mul(nl, df)), -1.0);
  Polynomial den = poly_mul(db, poly_add(poly_mul(df, dl), poly_mul(nf, nl)));
  den.normalize();
  if (den.is_zero())
    throw DegenerateLoop("islanded loop denominator vanishes identically");
  return TransferFunction(std::move(num), std::move(den));
}

namespace detail {

inline void require_positive_design(double value, const char* name) {
  if (!(value > 0.0)) throw InvalidDesign(std::string(name) + " must be > 0");
}

inline void require_nonnegative_design(double value, const char* name) {
  if (!(value >= 0.0)) throw InvalidDesign(std::string(name) + " must be >= 0");
}

}  // namespace detail

// The unity-DC target (1 + s t_z1) / prod_i (1 + s t_pi).
inline TransferFunction design_target(const DesignParams& dp) {
  detail::require_positive_design(dp.t_z1, "t_z1");
  detail::require_positive_design(dp.t_p1, "t_p1");
  detail::require_positive_design(dp.t_p2, "t_p2");
  detail::require_positive_design(dp.t_p3, "t_p3");
  Polynomial den =
      poly_mul(poly_mul(Polynomial{1.0, dp.t_p1}, Polynomial{1.0, dp.t_p2}),
               Polynomial{1.0, dp.t_p3});
  return TransferFunction(Polynomial{1.0, dp.t_z1}, std::move(den));
}

// Grid-connected realization of the design template:
//   E0*V0*(1 + s t_z1) / [ s*X*prod(1 + s t_pi) + E0*V0*(1 + s t_z1)*(1 + s beta) ].
// Zero time constants are allowed here; the corresponding factor drops out.
inline TransferFunction build_gc_design_model(const DesignParams& dp, const PlantParams& plant) {
  detail::require_nonnegative_design(dp.t_z1, "t_z1");
  detail::require_nonnegative_design(dp.t_p1, "t_p1");
  detail::require_nonnegative_design(dp.t_p2, "t_p2");
  detail::require_nonnegative_design(dp.t_p3, "t_p3");
  detail::require_nonnegative_design(dp.beta, "beta");
  if (plant.x_line <= 0.0) throw Error("design model requires line reactance x > 0");
  const double vv = plant.e0 * plant.v0;
  const Polynomial s = detail::laplace_s();
  const Polynomial zero_factor{1.0, dp.t_z1};
  Polynomial pole_prod =
      poly_mul(poly_mul(Polynomial{1.0, dp.t_p1}, Polynomial{1.0, dp.t_p2}),
               Polynomial{1.0, dp.t_p3});
  Polynomial num = poly_scale(zero_factor, vv);
  Polynomial den =
      poly_add(poly_scale(poly_mul(s, pole_prod), plant.x_line),
               poly_scale(poly_mul(zero_factor, Polynomial{1.0, dp.beta}), vv));
  return TransferFunction(std::move(num), std::move(den));
}

// Design parameters whose grid-connected model reproduces the unified law's
// linearized grid-connected dynamics exactly (m = 0): the loop
//   K_theta*K_P / (tau s^2 + (1 + xi*K_P) s + K_theta*K_P)
// rewritten in template form has one pole time constant tau/kp and feedback
// weight beta = X*(1/kp + xi - 1)/(E0*V0).
inline DesignParams matched_design_params(const UdcParams& u, const PlantParams& plant) {
  if (u.kp_droop <= 0.0) throw InvalidDesign("matched design requires kp_droop > 0");
  if (u.tau <= 0.0) throw InvalidDesign("matched design requires tau > 0");
  if (u.m != 0.0) throw Error("matched design requires decoupled outputs (m = 0)");
  if (plant.x_line <= 0.0) throw Error("matched design requires line reactance x > 0");
  DesignParams dp;
  dp.t_z1 = 0.0;
  dp.t_p1 = u.tau / u.kp_droop;
  dp.t_p2 = 0.0;
  dp.t_p3 = 0.0;
  dp.beta = plant.x_line * (1.0 / u.kp_droop + u.xi - 1.0) / (plant.e0 * plant.v0);
  return dp;
}

namespace detail {

inline void require_filter_equilibrium(double derivative_times_tau, double state,
                                       const char* channel) {
  if (std::abs(derivative_times_tau) > 1e-9 * std::max(1.0, std::abs(state)))
    throw NotAnEquilibrium(std::string(channel) + " filter state is not at equilibrium");
}

}  // namespace detail

// Small-signal loop functions of the droop law about an equilibrium:
// g_f = 0, g_l = kp/(tau s + 1), g_b = 1.
inline LoopFunctions linearize_controller(const DroopParams& p, const ControllerState& st,
                                          double meas_p, double meas_q) {
  if (p.m != 0.0)
    throw Error("linearization of the frequency channel requires m = 0");
  const ControllerDerivs d = droop_derivatives(p, st, meas_p, meas_q);
  detail::require_filter_equilibrium(d.dx_filter_p * p.tau, st.x_filter_p, "active-power");
  detail::require_filter_equilibrium(d.dx_filter_q * p.tau, st.x_filter_q, "reactive-power");
  LoopFunctions lf;
  lf.g_f = tf_constant(0.0);
  lf.g_l = tf_first_order(p.kp_droop, p.tau);
  lf.g_b = tf_constant(1.0);
  return lf;
}

// Small-signal loop functions of the unified law about an equilibrium:
// g_f = xi, g_l = kp/(tau s + 1), g_b = 1.
inline LoopFunctions linearize_controller(const UdcParams& p, const ControllerState& st,
                                          double meas_p, double meas_q) {
  if (p.m != 0.0)
    throw Error("linearization of the frequency channel requires m = 0");
  const ControllerDerivs d = udc_derivatives(p, st, meas_p, meas_q);
  detail::require_filter_equilibrium(d.dx_filter_p * p.tau, st.x_filter_p, "active-power");
  detail::require_filter_equilibrium(d.dx_filter_q * p.tau, st.x_filter_q, "reactive-power");
  LoopFunctions lf;
  lf.g_f = tf_constant(p.xi);
  lf.g_l = tf_first_order(p.kp_droop, p.tau);
  lf.g_b = tf_constant(1.0);
  return lf;
}

// Small-signal loop functions of the swing law about an equilibrium:
// g_f = k_omega/(tau s + 1), g_l = 1/(J omega0 s + D omega0), g_b = 1.
inline LoopFunctions linearize_controller(const VsgParams& p, const ControllerState& st,
                                          double meas_p) {
  const ControllerDerivs d = vsg_derivatives(p, st, meas_p);
  detail::require_filter_equilibrium(d.dx_filter_p * p.tau, st.x_filter_p, "governor");
  if (std::abs(d.domega) > 1e-9 * p.omega0)
    throw NotAnEquilibrium("swing state is not at equilibrium");
  LoopFunctions lf;
  lf.g_f = tf_first_order(p.k_omega, p.tau);
  lf.g_l = TransferFunction(Polynomial{1.0}, Polynomial{p.d * p.omega0, p.j * p.omega0});
  lf.g_b = tf_constant(1.0);
  return lf;
}

}  // namespace gfm
