#pragma once
// Time-domain scenario engine: fixed-step RK4 integration of one inverter
// against a stiff bus (grid-connected) or an islanded load, equilibrium
// initialization, event handling, derived step metrics, multi-strategy
// comparisons, two-unit parallel power sharing, and cross-validation of the
// nonlinear simulation against the small-signal models.
#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <future>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "gfm/analysis.hpp"
#include "gfm/constants.hpp"
#include "gfm/controllers.hpp"
#include "gfm/errors.hpp"
#include "gfm/metrics.hpp"
#include "gfm/plant.hpp"
#include "gfm/state_space.hpp"

namespace gfm {

enum class Strategy { droop, vsg, udc };
enum class EventKind { reference_step, load_step, island, reconnect };

inline const char* to_string(Strategy s) {
  switch (s) {
    case Strategy::droop: return "droop";
    case Strategy::vsg: return "vsg";
    case Strategy::udc: return "udc";
  }
  return "?";
}

inline const char* to_string(Mode m) { return m == Mode::gc ? "gc" : "is"; }

inline const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::reference_step: return "reference_step";
    case EventKind::load_step: return "load_step";
    case EventKind::island: return "island";
    case EventKind::reconnect: return "reconnect";
  }
  return "?";
}

struct Event {
  double time = 0.0;                             // s
  EventKind kind = EventKind::reference_step;
  double magnitude_w = 0.0;                      // W (ignored by island/reconnect)
};

struct Scenario {
  Mode mode = Mode::gc;
  Strategy strategy = Strategy::droop;
  DroopParams droop;
  VsgParams vsg;
  UdcParams udc;
  PlantParams plant;
  double p_load = 0.0;  // W, islanded base load
  std::vector<Event> events;
  double t_end = 10.0;  // s
  double dt = 1e-4;     // s
  bool linear_plant = false;  // replace the sine power flow by its tangent
};

struct Trace {
  std::vector<double> t, omega, freq, v, p, q, theta, p_ref_effective, p_load_effective;
  std::size_t size() const { return t.size(); }
  void reserve(std::size_t n) {
    t.reserve(n); omega.reserve(n); freq.reserve(n); v.reserve(n); p.reserve(n);
    q.reserve(n); theta.reserve(n); p_ref_effective.reserve(n); p_load_effective.reserve(n);
  }
};

struct SteadyState {
  double omega = 0.0;  // rad/s
  double freq = 0.0;   // Hz
  double v = 0.0;      // V
  double p = 0.0;      // W
  double q = 0.0;      // var
  double delta = 0.0;  // rad relative to the rotating frame (gc only)
};

namespace detail {

// Integrator state: {x_filter_p, x_filter_q, delta, omega}. delta is the
// angle relative to the omega0 rotating frame; the omega slot is integrated
// only by the swing law.
using SimState = std::array<double, 4>;

struct UnitDynamics {
  Strategy strategy = Strategy::droop;
  DroopParams droop;
  VsgParams vsg;
  UdcParams udc;
  PlantParams plant;
  Mode mode = Mode::gc;
  double p_load_eff = 0.0;
  bool linear_plant = false;
  double k_theta = 0.0;      // tangent power-flow slope, W/rad
  double p_anchor = 0.0;     // tangent point power, W
  double q_anchor = 0.0;     // tangent point reactive power, var
  double delta_anchor = 0.0; // tangent point angle, rad

  double active_tau() const {
    switch (strategy) {
      case Strategy::droop: return droop.tau;
      case Strategy::vsg: return vsg.tau;
      case Strategy::udc: return udc.tau;
    }
    return 0.0;
  }

  double active_p_ref() const {
    switch (strategy) {
      case Strategy::droop: return droop.p_ref;
      case Strategy::vsg: return vsg.p_ref;
      case Strategy::udc: return udc.p_ref;
    }
    return 0.0;
  }

  void shift_p_ref(double dw) {
    switch (strategy) {
      case Strategy::droop: droop.p_ref += dw; break;
      case Strategy::vsg: vsg.p_ref += dw; break;
      case Strategy::udc: udc.p_ref += dw; break;
    }
  }

  ControllerState controller_state(const SimState& y) const {
    ControllerState st;
    st.x_filter_p = y[0];
    st.x_filter_q = y[1];
    st.omega = y[3];
    st.theta = y[2];
    st.v = plant.e0;
    return st;
  }

  ControllerOutputs outputs(const SimState& y) const {
    const ControllerState st = controller_state(y);
    switch (strategy) {
      case Strategy::droop: return droop_outputs(droop, st);
      case Strategy::udc: return udc_outputs(udc, st);
      case Strategy::vsg: break;
    }
    ControllerOutputs out;
    out.omega = y[3];
    out.v = plant.e0;
    return out;
  }

  PowerFlow measure(double delta, double e_out) const {
    if (mode == Mode::is) {
      PowerFlow pf;
      pf.p = p_load_eff;
      pf.q = 0.0;
      return pf;
    }
    if (linear_plant) {
      PowerFlow pf;
      pf.p = p_anchor + k_theta * (delta - delta_anchor);
      pf.q = q_anchor;
      return pf;
    }
    return power_flow(e_out, plant.v0, delta, plant.x_line);
  }

  SimState deriv_with_measure(const SimState& y, const PowerFlow& pf) const {
    const ControllerState st = controller_state(y);
    switch (strategy) {
      case Strategy::droop: {
        const ControllerDerivs d = droop_derivatives(droop, st, pf.p, pf.q);
        return SimState{d.dx_filter_p, d.dx_filter_q, d.out.omega - plant.omega0, 0.0};
      }
      case Strategy::udc: {
        const ControllerDerivs d = udc_derivatives(udc, st, pf.p, pf.q);
        return SimState{d.dx_filter_p, d.dx_filter_q, d.out.omega - plant.omega0, 0.0};
      }
      case Strategy::vsg: break;
    }
    const ControllerDerivs d = vsg_derivatives(vsg, st, pf.p);
    return SimState{d.dx_filter_p, 0.0, y[3] - plant.omega0, d.domega};
  }

  SimState deriv(const SimState& y) const {
    const ControllerOutputs out = outputs(y);
    return deriv_with_measure(y, measure(y[2], out.v));
  }
};

inline SimState sim_axpy(const SimState& a, double h, const SimState& b) {
  return SimState{a[0] + h * b[0], a[1] + h * b[1], a[2] + h * b[2], a[3] + h * b[3]};
}

template <class Deriv>
inline SimState rk4_step_generic(const Deriv& f, const SimState& y, double dt) {
  const SimState k1 = f(y);
  const SimState k2 = f(sim_axpy(y, 0.5 * dt, k1));
  const SimState k3 = f(sim_axpy(y, 0.5 * dt, k2));
  const SimState k4 = f(sim_axpy(y, dt, k3));
  SimState out;
  for (int i = 0; i < 4; ++i)
    out[i] = y[i] + (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return out;
}

inline SimState rk4_step(const UnitDynamics& dyn, const SimState& y, double dt) {
  return rk4_step_generic([&dyn](const SimState& s) { return dyn.deriv(s); }, y, dt);
}

inline void validate_plant(const PlantParams& p) {
  if (p.x_line <= 0.0) throw Error("plant: x_line must be > 0");
  if (p.e0 <= 0.0) throw Error("plant: e0 must be > 0");
  if (p.v0 <= 0.0) throw Error("plant: v0 must be > 0");
  if (p.omega0 <= 0.0) throw Error("plant: omega0 must be > 0");
}

inline void validate_active_law(const Scenario& sc) {
  switch (sc.strategy) {
    case Strategy::droop:
      if (sc.droop.kp_droop <= 0.0) throw Error("droop: kp_droop must be > 0");
      if (sc.droop.tau <= 0.0) throw Error("droop: tau must be > 0");
      if (sc.droop.kd_droop < 0.0) throw Error("droop: kd_droop must be >= 0");
      break;
    case Strategy::vsg:
      if (sc.vsg.j <= 0.0) throw Error("vsg: inertia j must be > 0");
      if (sc.vsg.d < 0.0) throw Error("vsg: damping d must be >= 0");
      if (sc.vsg.tau <= 0.0) throw Error("vsg: tau must be > 0");
      if (sc.vsg.omega0 <= 0.0) throw Error("vsg: omega0 must be > 0");
      break;
    case Strategy::udc:
      if (sc.udc.kp_droop <= 0.0) throw Error("udc: kp_droop must be > 0");
      if (sc.udc.tau <= 0.0) throw Error("udc: tau must be > 0");
      if (sc.udc.kd_droop < 0.0) throw Error("udc: kd_droop must be >= 0");
      break;
  }
}

inline void validate_events(const std::vector<Event>& events, double t_end) {
  for (std::size_t i = 0; i < events.size(); ++i) {
    const Event& ev = events[i];
    if (!std::isfinite(ev.time) || !std::isfinite(ev.magnitude_w))
      throw Error("event fields must be finite");
    if (ev.time < -1e-12 || ev.time > t_end + 1e-12)
      throw Error("event time must lie within [0, t_end]");
    if (i > 0 && ev.time < events[i - 1].time - 1e-12)
      throw Error("events must be sorted by time");
  }
}

inline void validate_scenario(const Scenario& sc) {
  if (sc.dt <= 0.0) throw Error("scenario: dt must be > 0");
  if (sc.t_end <= sc.dt) throw Error("scenario: t_end must exceed dt");
  validate_plant(sc.plant);
  validate_active_law(sc);
  validate_events(sc.events, sc.t_end);
  UnitDynamics probe;
  probe.strategy = sc.strategy;
  probe.droop = sc.droop;
  probe.vsg = sc.vsg;
  probe.udc = sc.udc;
  if (sc.dt > probe.active_tau() / 10.0)
    throw Error("scenario: dt must be at most one tenth of the power-filter time constant");
}

inline UnitDynamics make_dynamics(const Scenario& sc) {
  UnitDynamics dyn;
  dyn.strategy = sc.strategy;
  dyn.droop = sc.droop;
  dyn.vsg = sc.vsg;
  dyn.udc = sc.udc;
  dyn.plant = sc.plant;
  dyn.mode = sc.mode;
  dyn.p_load_eff = sc.p_load;
  dyn.linear_plant = false;  // tangent anchors are installed by the caller
  return dyn;
}

inline void apply_event(UnitDynamics& dyn, const Event& ev) {
  switch (ev.kind) {
    case EventKind::reference_step: dyn.shift_p_ref(ev.magnitude_w); break;
    case EventKind::load_step: dyn.p_load_eff += ev.magnitude_w; break;
    case EventKind::island: dyn.mode = Mode::is; break;
    case EventKind::reconnect: dyn.mode = Mode::gc; break;
  }
}

// Steady power delivered by one unit when its frequency output settles at
// omega (islanded algebra; reactive channel settled at q = 0).
inline double settled_power_at(const UnitDynamics& dyn, double omega) {
  switch (dyn.strategy) {
    case Strategy::droop: {
      const DroopParams& p = dyn.droop;
      const double v = p.v_ref + p.kd_droop * p.q_ref - p.n * (p.omega_ref - omega);
      return p.p_ref + (p.omega_ref - omega + p.m * (p.v_ref - v)) / p.kp_droop;
    }
    case Strategy::udc: {
      const UdcParams& p = dyn.udc;
      const double v = p.v_ref + p.kd_droop * p.q_ref - p.n * (p.omega_ref - omega);
      return p.p_ref + p.xi * (p.omega_ref - omega) -
             (omega - p.omega0 - p.m * (p.v_ref - v)) / p.kp_droop;
    }
    case Strategy::vsg: {
      const VsgParams& p = dyn.vsg;
      return p.p_ref + p.k_omega * (p.omega_ref - omega) - p.d * omega * (omega - p.omega0);
    }
  }
  return 0.0;
}

inline void verify_equilibrium(const UnitDynamics& dyn, const SimState& y) {
  const double tau = dyn.active_tau();
  const SimState d = dyn.deriv(y);
  if (std::abs(d[0]) * tau > 1e-9 * std::max(1.0, std::abs(y[0])))
    throw UnstableEquilibrium("active-power filter state failed to settle");
  if (dyn.strategy != Strategy::vsg &&
      std::abs(d[1]) * tau > 1e-9 * std::max(1.0, std::abs(y[1])))
    throw UnstableEquilibrium("reactive-power filter state failed to settle");
  if (dyn.strategy == Strategy::vsg && std::abs(d[3]) > 1e-9 * dyn.plant.omega0)
    throw UnstableEquilibrium("swing acceleration failed to vanish");
  if (dyn.mode == Mode::gc && std::abs(d[2]) > 1e-9 * dyn.plant.omega0)
    throw UnstableEquilibrium("grid-connected angle failed to lock");
}

// Operating point of a single unit with the current (event-adjusted)
// parameters. Grid-connected equilibria pin omega to the frame frequency and
// solve the angle/voltage fixed point of the sine power flow; islanded
// equilibria come from the settled-output algebra.
inline SimState solve_equilibrium(const UnitDynamics& dyn_in) {
  UnitDynamics dyn = dyn_in;
  dyn.linear_plant = false;  // equilibria always refer to the sine power flow
  SimState y{0.0, 0.0, 0.0, dyn.plant.omega0};

  if (dyn.mode == Mode::gc) {
    const double wg = dyn.plant.omega0;
    const double vv_bus = dyn.plant.v0;
    if (dyn.strategy == Strategy::vsg) {
      const VsgParams& p = dyn.vsg;
      const double p_target =
          p.p_ref + p.k_omega * (p.omega_ref - wg) - p.d * wg * (wg - p.omega0);
      const double sd = p_target * dyn.plant.x_line / (dyn.plant.e0 * vv_bus);
      if (std::abs(sd) > 0.999)
        throw UnstableEquilibrium("commanded power exceeds the line transfer limit");
      y = SimState{p.k_omega * (p.omega_ref - wg), 0.0, std::asin(sd), wg};
    } else {
      auto p_target_at = [&](double v_mag) {
        if (dyn.strategy == Strategy::droop) {
          const DroopParams& p = dyn.droop;
          return p.p_ref + (p.omega_ref - wg + p.m * (p.v_ref - v_mag)) / p.kp_droop;
        }
        const UdcParams& p = dyn.udc;
        return p.p_ref + p.xi * (p.omega_ref - wg) -
               (wg - p.omega0 - p.m * (p.v_ref - v_mag)) / p.kp_droop;
      };
      auto angle_at = [&](double v_mag) {
        if (v_mag <= 0.0)
          throw UnstableEquilibrium("voltage collapsed while solving the operating point");
        const double sd = p_target_at(v_mag) * dyn.plant.x_line / (v_mag * vv_bus);
        if (std::abs(sd) > 0.999)
          throw UnstableEquilibrium("commanded power exceeds the line transfer limit");
        return std::asin(sd);
      };
      auto q_at = [&](double v_mag, double angle) {
        return (v_mag * v_mag - v_mag * vv_bus * std::cos(angle)) / dyn.plant.x_line;
      };
      auto v_law = [&](double q_meas) {
        if (dyn.strategy == Strategy::droop) {
          const DroopParams& p = dyn.droop;
          return p.v_ref - p.kd_droop * (q_meas - p.q_ref) - p.n * (p.omega_ref - wg);
        }
        const UdcParams& p = dyn.udc;
        return p.v_ref - p.kd_droop * (q_meas - p.q_ref) - p.n * (p.omega_ref - wg);
      };
      double v = (dyn.strategy == Strategy::droop) ? dyn.droop.v_ref : dyn.udc.v_ref;
      // Damped fixed point on the voltage magnitude, driven to roundoff so the
      // equilibrium residuals verify at the 1e-9 absolute level.
      for (int iter = 0; iter < 500; ++iter) {
        const double v_new = v_law(q_at(v, angle_at(v)));
        const double v_next = 0.5 * (v + v_new);
        const bool done = std::abs(v_next - v) <= 1e-15 * std::max(1.0, std::abs(v));
        v = v_next;
        if (done) break;
      }
      const double delta = angle_at(v);  // final angle sync against the settled voltage
      const PowerFlow pf = power_flow(v, vv_bus, delta, dyn.plant.x_line);
      if (dyn.strategy == Strategy::droop) {
        y = SimState{pf.p - dyn.droop.p_ref, pf.q - dyn.droop.q_ref, delta, wg};
      } else {
        const UdcParams& p = dyn.udc;
        const double x_p = (wg - p.omega0 - p.m * (p.v_ref - v)) / p.kp_droop;
        y = SimState{x_p, pf.q - p.q_ref, delta, wg};
      }
    }
  } else {
    const double p_l = dyn.p_load_eff;
    switch (dyn.strategy) {
      case Strategy::droop: {
        const DroopParams& p = dyn.droop;
        SimState cand{p_l - p.p_ref, -p.q_ref, 0.0, dyn.plant.omega0};
        const ControllerOutputs out = dyn.outputs(cand);
        cand[3] = out.omega;
        y = cand;
        break;
      }
      case Strategy::udc: {
        const UdcParams& p = dyn.udc;
        // [1 + kp*xi   m ] [omega]   [omega0 + kp*(p_ref + xi*omega_ref - p_l) + m*v_ref]
        // [   -n       1 ] [  v  ] = [v_ref + kd*q_ref - n*omega_ref                    ]
        const double a11 = 1.0 + p.kp_droop * p.xi;
        const double a12 = p.m;
        const double a21 = -p.n;
        const double a22 = 1.0;
        const double b1 = p.omega0 + p.kp_droop * (p.p_ref + p.xi * p.omega_ref - p_l) +
                          p.m * p.v_ref;
        const double b2 = p.v_ref + p.kd_droop * p.q_ref - p.n * p.omega_ref;
        const double det = a11 * a22 - a12 * a21;
        if (std::abs(det) < 1e-12)
          throw UnstableEquilibrium("islanded output equations are singular");
        const double omega = (b1 * a22 - a12 * b2) / det;
        const double v = (a11 * b2 - b1 * a21) / det;
        const double x_p = (omega - p.omega0 - p.m * (p.v_ref - v)) / p.kp_droop;
        y = SimState{x_p, -p.q_ref, 0.0, omega};
        break;
      }
      case Strategy::vsg: {
        const VsgParams& p = dyn.vsg;
        double lo = 0.2 * p.omega0, hi = 2.0 * p.omega0;
        auto g = [&](double w) { return settled_power_at(dyn, w) - p_l; };
        double glo = g(lo), ghi = g(hi);
        if (glo * ghi > 0.0)
          throw UnstableEquilibrium("no islanded operating frequency in the physical range");
        for (int iter = 0; iter < 200; ++iter) {
          const double mid = 0.5 * (lo + hi);
          const double gm = g(mid);
          if (glo * gm <= 0.0) {
            hi = mid;
            ghi = gm;
          } else {
            lo = mid;
            glo = gm;
          }
        }
        const double omega = 0.5 * (lo + hi);
        y = SimState{p.k_omega * (p.omega_ref - omega), 0.0, 0.0, omega};
        break;
      }
    }
  }
  verify_equilibrium(dyn, y);
  return y;
}

inline double nominal_power_scale(const Scenario& sc) {
  UnitDynamics dyn = make_dynamics(sc);
  double nom = std::max(1000.0, std::abs(dyn.active_p_ref()));
  nom = std::max(nom, std::abs(sc.p_load));
  for (const Event& ev : sc.events) nom = std::max(nom, std::abs(ev.magnitude_w));
  return nom;
}

inline void guard_state(const UnitDynamics& dyn, const SimState& y, double nom_power) {
  for (double c : y)
    if (!std::isfinite(c)) throw NumericalBlowup("simulation state is not finite");
  const double lim = 1e6 * nom_power;
  if (std::abs(y[0]) > lim || std::abs(y[1]) > lim)
    throw NumericalBlowup("filter state exceeded a million times the nominal power scale");
  if (dyn.strategy == Strategy::vsg && std::abs(y[3]) > 1e6 * dyn.plant.omega0)
    throw NumericalBlowup("frequency state exceeded a million times nominal");
}

inline void emit_sample(Trace& tr, const UnitDynamics& dyn, double t, const SimState& y) {
  const ControllerOutputs out = dyn.outputs(y);
  const PowerFlow pf = dyn.measure(y[2], out.v);
  tr.t.push_back(t);
  tr.omega.push_back(out.omega);
  tr.freq.push_back(out.omega / (2.0 * std::numbers::pi));
  tr.v.push_back(out.v);
  tr.p.push_back(pf.p);
  tr.q.push_back(pf.q);
  tr.theta.push_back(y[2] + dyn.plant.omega0 * t);
  tr.p_ref_effective.push_back(dyn.active_p_ref());
  tr.p_load_effective.push_back(dyn.p_load_eff);
}

// First trace index at or after an event time (sample times are k*dt).
inline std::size_t sample_index_at(double time, double dt, std::size_t n_samples) {
  const long long k = static_cast<long long>(std::ceil(time / dt - 1e-9));
  const long long clamped = std::clamp<long long>(k, 0, static_cast<long long>(n_samples) - 1);
  return static_cast<std::size_t>(clamped);
}

}  // namespace detail

// Simulate one scenario from its pre-event equilibrium. Events apply at the
// first sample at or after their timestamp; the trace is sampled every dt.
inline Trace run_scenario(const Scenario& sc) {
  detail::validate_scenario(sc);
  detail::UnitDynamics dyn = detail::make_dynamics(sc);
  detail::SimState y = detail::solve_equilibrium(dyn);

  // Tangent anchors for the linearized power flow, taken at the initial
  // operating point.
  const ControllerOutputs out0 = dyn.outputs(y);
  const PowerFlow pf0 = dyn.measure(y[2], out0.v);
  dyn.k_theta = linearized_gain(sc.plant);
  dyn.p_anchor = pf0.p;
  dyn.q_anchor = pf0.q;
  dyn.delta_anchor = y[2];
  dyn.linear_plant = sc.linear_plant;

  const long long steps = std::llround(sc.t_end / sc.dt);
  const double nom_power = detail::nominal_power_scale(sc);
  Trace tr;
  tr.reserve(static_cast<std::size_t>(steps) + 1);

  std::size_t next_event = 0;
  auto apply_events_at = [&](double t) {
    while (next_event < sc.events.size() && sc.events[next_event].time <= t + 1e-12) {
      detail::apply_event(dyn, sc.events[next_event]);
      ++next_event;
    }
  };

  apply_events_at(0.0);
  detail::emit_sample(tr, dyn, 0.0, y);
  for (long long k = 1; k <= steps; ++k) {
    y = detail::rk4_step(dyn, y, sc.dt);
    detail::guard_state(dyn, y, nom_power);
    const double t = static_cast<double>(k) * sc.dt;
    apply_events_at(t);
    detail::emit_sample(tr, dyn, t, y);
  }
  return tr;
}

// Loop functions of the active law linearized about the scenario's initial
// equilibrium.
inline LoopFunctions scenario_loop_functions(const Scenario& sc) {
  detail::validate_scenario(sc);
  detail::UnitDynamics dyn = detail::make_dynamics(sc);
  const detail::SimState y = detail::solve_equilibrium(dyn);
  const ControllerOutputs out = dyn.outputs(y);
  const PowerFlow pf = dyn.measure(y[2], out.v);
  ControllerState st = dyn.controller_state(y);
  st.v = out.v;
  switch (sc.strategy) {
    case Strategy::droop: return linearize_controller(sc.droop, st, pf.p, pf.q);
    case Strategy::udc: return linearize_controller(sc.udc, st, pf.p, pf.q);
    case Strategy::vsg: break;
  }
  return linearize_controller(sc.vsg, st, pf.p);
}

// Operating point after all events have been applied (references shifted,
// loads added, final mode in force).
inline SteadyState predict_steady_state(const Scenario& sc) {
  detail::validate_scenario(sc);
  detail::UnitDynamics dyn = detail::make_dynamics(sc);
  for (const Event& ev : sc.events) detail::apply_event(dyn, ev);
  const detail::SimState y = detail::solve_equilibrium(dyn);
  const ControllerOutputs out = dyn.outputs(y);
  const PowerFlow pf = dyn.measure(y[2], out.v);
  SteadyState ss;
  ss.omega = out.omega;
  ss.freq = out.omega / (2.0 * std::numbers::pi);
  ss.v = out.v;
  ss.p = pf.p;
  ss.q = pf.q;
  ss.delta = (dyn.mode == Mode::gc) ? y[2] : 0.0;
  return ss;
}

// Step metrics of a simulated trace. The analyzed series starts at the first
// reference or load step: delivered power when grid-connected, frequency when
// islanded. max_rocof is evaluated on the frequency over the same segment.
inline StepMetrics scenario_metrics(const Scenario& sc, const Trace& tr,
                                    const MetricConfig& mc = {}) {
  if (tr.size() < 2) throw Error("metrics require at least two trace samples");
  std::size_t i0 = 0;
  double commanded = 0.0;
  for (const Event& ev : sc.events) {
    if (ev.kind == EventKind::reference_step || ev.kind == EventKind::load_step) {
      i0 = detail::sample_index_at(ev.time, sc.dt, tr.size());
      commanded = ev.magnitude_w;
      break;
    }
  }
  const std::vector<double>& column = (sc.mode == Mode::gc) ? tr.p : tr.freq;
  std::vector<double> segment(column.begin() + static_cast<std::ptrdiff_t>(i0), column.end());
  std::vector<double> freq_segment(tr.freq.begin() + static_cast<std::ptrdiff_t>(i0),
                                   tr.freq.end());

  double magnitude = (sc.mode == Mode::gc) ? commanded : 0.0;
  if (magnitude == 0.0) {
    const std::size_t n = segment.size();
    const std::size_t tail_len =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(mc.steady_tail * n)));
    double tail_sum = 0.0;
    for (std::size_t k = n - tail_len; k < n; ++k) tail_sum += segment[k];
    magnitude = tail_sum / static_cast<double>(tail_len) - segment.front();
    if (magnitude == 0.0) magnitude = std::max(1.0, std::abs(segment.front()));
  }

  StepMetrics m = step_metrics(segment, sc.dt, magnitude, mc);
  m.max_rocof = max_rocof(freq_segment, sc.dt, mc.rocof_window_s);
  return m;
}

struct ComparisonRow {
  Strategy strategy = Strategy::droop;
  StepMetrics metrics;
  bool rocof_pass = true;
  Trace trace;
};

namespace detail {

inline bool same_plant(const PlantParams& a, const PlantParams& b) {
  return a.x_line == b.x_line && a.e0 == b.e0 && a.v0 == b.v0 && a.omega0 == b.omega0;
}

inline bool same_events(const std::vector<Event>& a, const std::vector<Event>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].time != b[i].time || a[i].kind != b[i].kind ||
        a[i].magnitude_w != b[i].magnitude_w)
      return false;
  return true;
}

inline ComparisonRow run_one_comparison(const Scenario& sc, const MetricConfig& mc) {
  ComparisonRow row;
  row.strategy = sc.strategy;
  row.trace = run_scenario(sc);
  row.metrics = scenario_metrics(sc, row.trace, mc);
  row.rocof_pass = row.metrics.max_rocof <= mc.rocof_limit_hz_s + 1e-12;
  return row;
}

}  // namespace detail

// Run several strategies through the identical disturbance and report their
// step metrics side by side. Scenarios must agree on everything except the
// control law. threads > 1 runs scenarios concurrently; results are ordered
// and bit-identical either way.
inline std::vector<ComparisonRow> run_comparison(const std::vector<Scenario>& scenarios,
                                                 const MetricConfig& mc = {},
                                                 unsigned threads = 1) {
  if (scenarios.empty()) throw Error("comparison requires at least one scenario");
  const Scenario& ref = scenarios.front();
  for (const Scenario& sc : scenarios) {
    if (sc.mode != ref.mode || sc.t_end != ref.t_end || sc.dt != ref.dt ||
        sc.linear_plant != ref.linear_plant || sc.p_load != ref.p_load ||
        !detail::same_plant(sc.plant, ref.plant) || !detail::same_events(sc.events, ref.events))
      throw Error("comparison scenarios must differ only in the control law");
  }
  std::vector<ComparisonRow> rows;
  rows.reserve(scenarios.size());
  if (threads <= 1 || scenarios.size() < 2) {
    for (const Scenario& sc : scenarios) rows.push_back(detail::run_one_comparison(sc, mc));
    return rows;
  }
  std::vector<std::future<ComparisonRow>> futures;
  futures.reserve(scenarios.size());
  for (const Scenario& sc : scenarios)
    futures.push_back(std::async(std::launch::async,
                                 [sc, mc] { return detail::run_one_comparison(sc, mc); }));
  for (auto& f : futures) rows.push_back(f.get());
  return rows;
}

struct ParallelUnit {
  Strategy strategy = Strategy::droop;
  DroopParams droop;
  VsgParams vsg;
  UdcParams udc;
  PlantParams plant;
};

struct ParallelScenario {
  ParallelUnit unit1, unit2;
  double p_load = 0.0;  // W, shared islanded load
  std::vector<Event> events;  // load_step only
  double t_end = 10.0;
  double dt = 1e-4;
};

struct SharingReport {
  double p1_steady = 0.0;      // W
  double p2_steady = 0.0;      // W
  double ratio = 0.0;          // p1_steady / p2_steady
  double max_theta_diff = 0.0; // rad, largest inter-unit angle spread
  double omega_steady = 0.0;   // rad/s, settled shared frequency
};

// Two units feeding one islanded bus through their line reactances, using the
// tangent power flow P_i = K_i*(delta_i - delta_bus) and instantaneous bus
// balance sum_i P_i = P_load.
inline SharingReport run_parallel_sharing(const ParallelScenario& ps) {
  if (ps.dt <= 0.0) throw Error("parallel scenario: dt must be > 0");
  if (ps.t_end <= ps.dt) throw Error("parallel scenario: t_end must exceed dt");
  detail::validate_events(ps.events, ps.t_end);
  for (const Event& ev : ps.events)
    if (ev.kind != EventKind::load_step)
      throw Error("parallel sharing supports load_step events only");

  auto make_unit = [](const ParallelUnit& u) {
    detail::UnitDynamics dyn;
    dyn.strategy = u.strategy;
    dyn.droop = u.droop;
    dyn.vsg = u.vsg;
    dyn.udc = u.udc;
    dyn.plant = u.plant;
    dyn.mode = Mode::is;
    return dyn;
  };
  detail::UnitDynamics u1 = make_unit(ps.unit1);
  detail::UnitDynamics u2 = make_unit(ps.unit2);
  detail::validate_plant(u1.plant);
  detail::validate_plant(u2.plant);
  if (u1.plant.omega0 != u2.plant.omega0)
    throw Error("parallel units must share the rotating-frame frequency");
  if (ps.dt > u1.active_tau() / 10.0 || ps.dt > u2.active_tau() / 10.0)
    throw Error("parallel scenario: dt must be at most one tenth of the filter time constant");

  const double k1 = linearized_gain(u1.plant);
  const double k2 = linearized_gain(u2.plant);
  const double omega0 = u1.plant.omega0;

  // Shared settled frequency: both outputs equal omega and the delivered
  // powers sum to the load.
  auto total_at = [&](double w) {
    return detail::settled_power_at(u1, w) + detail::settled_power_at(u2, w) - ps.p_load;
  };
  double lo = 0.5 * omega0, hi = 1.5 * omega0;
  double glo = total_at(lo), ghi = total_at(hi);
  if (glo * ghi > 0.0)
    throw UnstableEquilibrium("no shared operating frequency in the physical range");
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double gm = total_at(mid);
    if (glo * gm <= 0.0) {
      hi = mid;
      ghi = gm;
    } else {
      lo = mid;
      glo = gm;
    }
  }
  const double omega_star = 0.5 * (lo + hi);
  const double p1_0 = detail::settled_power_at(u1, omega_star);
  const double p2_0 = detail::settled_power_at(u2, omega_star);

  auto init_unit = [&](const detail::UnitDynamics& dyn, double p_init, double k_gain) {
    detail::SimState y{0.0, 0.0, p_init / k_gain, omega_star};
    switch (dyn.strategy) {
      case Strategy::droop:
        y[0] = p_init - dyn.droop.p_ref;
        y[1] = -dyn.droop.q_ref;
        break;
      case Strategy::udc: {
        const UdcParams& p = dyn.udc;
        const double v = p.v_ref + p.kd_droop * p.q_ref - p.n * (p.omega_ref - omega_star);
        y[0] = (omega_star - p.omega0 - p.m * (p.v_ref - v)) / p.kp_droop;
        y[1] = -p.q_ref;
        break;
      }
      case Strategy::vsg:
        y[0] = dyn.vsg.k_omega * (dyn.vsg.omega_ref - omega_star);
        y[1] = 0.0;
        break;
    }
    return y;
  };
  detail::SimState y1 = init_unit(u1, p1_0, k1);
  detail::SimState y2 = init_unit(u2, p2_0, k2);

  double p_load_eff = ps.p_load;
  auto bus_angle = [&](const detail::SimState& a, const detail::SimState& b) {
    return (k1 * a[2] + k2 * b[2] - p_load_eff) / (k1 + k2);
  };
  auto unit_measure = [](double k_gain, double delta, double delta_bus) {
    PowerFlow pf;
    pf.p = k_gain * (delta - delta_bus);
    pf.q = 0.0;
    return pf;
  };
  auto coupled_step = [&](detail::SimState& a, detail::SimState& b, double dt) {
    // RK4 on the concatenated 8-state system; the bus angle is algebraic.
    std::array<detail::SimState, 2> y{a, b};
    std::array<std::array<detail::SimState, 2>, 4> k;
    auto eval = [&](const std::array<detail::SimState, 2>& s) {
      const double db = bus_angle(s[0], s[1]);
      std::array<detail::SimState, 2> d;
      d[0] = u1.deriv_with_measure(s[0], unit_measure(k1, s[0][2], db));
      d[1] = u2.deriv_with_measure(s[1], unit_measure(k2, s[1][2], db));
      return d;
    };
    auto shift = [&](const std::array<detail::SimState, 2>& s,
                     const std::array<detail::SimState, 2>& d, double h) {
      std::array<detail::SimState, 2> out;
      out[0] = detail::sim_axpy(s[0], h, d[0]);
      out[1] = detail::sim_axpy(s[1], h, d[1]);
      return out;
    };
    k[0] = eval(y);
    k[1] = eval(shift(y, k[0], 0.5 * dt));
    k[2] = eval(shift(y, k[1], 0.5 * dt));
    k[3] = eval(shift(y, k[2], dt));
    for (int u = 0; u < 2; ++u)
      for (int i = 0; i < 4; ++i)
        y[u][i] += (dt / 6.0) *
                   (k[0][u][i] + 2.0 * k[1][u][i] + 2.0 * k[2][u][i] + k[3][u][i]);
    a = y[0];
    b = y[1];
  };

  const long long steps = std::llround(ps.t_end / ps.dt);
  std::vector<double> p1_series, p2_series, w1_series;
  p1_series.reserve(static_cast<std::size_t>(steps) + 1);
  p2_series.reserve(static_cast<std::size_t>(steps) + 1);
  w1_series.reserve(static_cast<std::size_t>(steps) + 1);
  double max_theta_diff = 0.0;

  std::size_t next_event = 0;
  auto apply_events_at = [&](double t) {
    while (next_event < ps.events.size() && ps.events[next_event].time <= t + 1e-12) {
      p_load_eff += ps.events[next_event].magnitude_w;
      ++next_event;
    }
  };
  auto record = [&]() {
    const double db = bus_angle(y1, y2);
    p1_series.push_back(k1 * (y1[2] - db));
    p2_series.push_back(k2 * (y2[2] - db));
    w1_series.push_back(u1.outputs(y1).omega);
    max_theta_diff = std::max(max_theta_diff, std::abs(y1[2] - y2[2]));
  };

  apply_events_at(0.0);
  record();
  for (long long k = 1; k <= steps; ++k) {
    coupled_step(y1, y2, ps.dt);
    for (double c : y1)
      if (!std::isfinite(c)) throw NumericalBlowup("parallel simulation state is not finite");
    for (double c : y2)
      if (!std::isfinite(c)) throw NumericalBlowup("parallel simulation state is not finite");
    apply_events_at(static_cast<double>(k) * ps.dt);
    record();
  }

  auto tail_mean = [](const std::vector<double>& s) {
    const std::size_t n = s.size();
    const std::size_t tail_len =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(0.05 * n)));
    double sum = 0.0;
    for (std::size_t k = n - tail_len; k < n; ++k) sum += s[k];
    return sum / static_cast<double>(tail_len);
  };
  SharingReport rep;
  rep.p1_steady = tail_mean(p1_series);
  rep.p2_steady = tail_mean(p2_series);
  rep.ratio = (rep.p2_steady != 0.0) ? rep.p1_steady / rep.p2_steady
                                     : std::numeric_limits<double>::infinity();
  rep.max_theta_diff = max_theta_diff;
  rep.omega_steady = tail_mean(w1_series);
  return rep;
}

struct CrossValidation {
  double step_w = 0.0;             // applied step magnitude, W
  double max_rel_deviation = 0.0;  // worst |simulation - model| / scale
};

// Compare the nonlinear time-domain response against the small-signal
// prediction: grid-connected scenarios against the design-model step
// response on delivered power, islanded scenarios against the load-to-
// frequency closed loop on omega.
inline CrossValidation cross_validate_small_signal(const Scenario& sc, const DesignParams& dp) {
  const Trace tr = run_scenario(sc);
  const Event* step_ev = nullptr;
  for (const Event& ev : sc.events) {
    if (ev.kind == EventKind::reference_step || ev.kind == EventKind::load_step) {
      step_ev = &ev;
      break;
    }
  }
  if (step_ev == nullptr || step_ev->magnitude_w == 0.0)
    throw Error("cross-validation requires a nonzero step event");
  const double mag = step_ev->magnitude_w;
  const std::size_t i0 = detail::sample_index_at(step_ev->time, sc.dt, tr.size());
  const std::size_t m = tr.size() - i0;
  if (m < 3) throw Error("cross-validation requires samples after the step");

  CrossValidation cv;
  cv.step_w = mag;
  const double horizon = static_cast<double>(m - 1) * sc.dt;
  if (sc.mode == Mode::gc) {
    const TransferFunction model = build_gc_design_model(dp, sc.plant);
    const std::vector<double> ym = step_response(model, horizon, sc.dt);
    const double base = tr.p[i0];
    const std::size_t count = std::min(m, ym.size());
    double worst = 0.0;
    for (std::size_t j = 0; j < count; ++j)
      worst = std::max(worst, std::abs(tr.p[i0 + j] - (base + mag * ym[j])));
    cv.max_rel_deviation = worst / std::abs(mag);
  } else {
    const LoopFunctions lf = scenario_loop_functions(sc);
    const TransferFunction model = build_is_closed_loop(lf);
    const std::vector<double> ym = step_response(model, horizon, sc.dt);
    const double base = tr.omega[i0];
    const double scale = std::abs(model.dc_gain() * mag);
    if (scale == 0.0) throw Error("islanded small-signal model has zero dc gain");
    const std::size_t count = std::min(m, ym.size());
    double worst = 0.0;
    for (std::size_t j = 0; j < count; ++j)
      worst = std::max(worst, std::abs(tr.omega[i0 + j] - (base + mag * ym[j])));
    cv.max_rel_deviation = worst / scale;
  }
  return cv;
}

}  // namespace gfm
