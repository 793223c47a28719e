#pragma once
// Lossless-line phasor power flow between the inverter EMF and the stiff bus,
// its small-signal gain, and the islanded load schedule.
#include <cmath>
#include <vector>

#include "gfm/constants.hpp"
#include "gfm/errors.hpp"
#include "gfm/transfer_function.hpp"

namespace gfm {

struct PlantParams {
  double x_line = 0.003 * nominal_omega;  // ohm (3 mH at 50 Hz)
  double e0 = 380.0;                      // V, inverter EMF magnitude
  double v0 = 380.0;                      // V, bus voltage magnitude
  double omega0 = nominal_omega;          // rad/s
};

enum class Mode { gc, is };  // grid-connected / islanded

struct LoadStep {
  double time = 0.0;         // s
  double magnitude_w = 0.0;  // added load, W
};

struct GridState {
  Mode mode = Mode::gc;
  double p_load = 0.0;              // W, islanded base load
  std::vector<LoadStep> load_steps; // islanded load schedule
  double theta_grid = 0.0;          // rad, stiff-bus phase (gc)
};

struct PowerFlow {
  double p = 0.0;  // W
  double q = 0.0;  // var
};

// P = E*V*sin(theta)/X, Q = (E^2 - E*V*cos(theta))/X with theta the angle of
// the EMF ahead of the bus.
inline PowerFlow power_flow(double e, double v, double theta, double x) {
  if (x <= 0.0) throw Error("power flow requires line reactance x > 0");
  PowerFlow pf;
  pf.p = e * v * std::sin(theta) / x;
  pf.q = (e * e - e * v * std::cos(theta)) / x;
  return pf;
}

// Small-signal angle-to-power gain dP/dtheta at theta = 0: E0*V0/X.
inline double linearized_gain(const PlantParams& p) {
  if (p.x_line <= 0.0) throw Error("linearized gain requires line reactance x > 0");
  return p.e0 * p.v0 / p.x_line;
}

// Angle-to-power plant K_theta/s seen by the frequency loop.
inline TransferFunction linearized_plant_tf(const PlantParams& p) {
  return tf_integrator(linearized_gain(p));
}

// Total islanded load at time t; steps apply from their event time onward.
inline double islanded_bus_power(const GridState& gs, double t) {
  if (gs.mode != Mode::is)
    throw WrongMode("islanded bus power is only defined in islanded mode");
  double total = gs.p_load;
  for (const LoadStep& ls : gs.load_steps)
    if (t >= ls.time) total += ls.magnitude_w;
  return total;
}

}  // namespace gfm
