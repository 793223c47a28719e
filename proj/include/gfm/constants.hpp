#pragma once
// Nominal 50 Hz grid quantities shared by the plant model and the
// controller parameter defaults.
#include <numbers>

namespace gfm {

inline constexpr double nominal_omega = 100.0 * std::numbers::pi;  // rad/s, 50 Hz

// Active-power low-pass time constant used by every control law: 1/(10*pi) s,
// i.e. a 5 Hz corner on the measured power.
inline constexpr double default_tau = 1.0 / (10.0 * std::numbers::pi);

// Frequency-droop slope: pi/12000 (rad/s)/W, so 12 kW moves omega by pi rad/s.
inline constexpr double default_kp_droop = std::numbers::pi / 12000.0;

}  // namespace gfm
