#pragma once
// Single-input single-output state-space realizations, the controllable
// canonical form of a transfer function, and a fixed-step RK4 step response.
#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "gfm/errors.hpp"
#include "gfm/transfer_function.hpp"

namespace gfm {

struct StateSpace {
  Eigen::MatrixXd A;
  Eigen::VectorXd B;
  Eigen::RowVectorXd C;
  double D = 0.0;

  Eigen::Index order() const { return A.rows(); }

  std::complex<double> freq_response(std::complex<double> s) const {
    const Eigen::Index n = order();
    if (n == 0) return D;
    Eigen::MatrixXcd m = -A.cast<std::complex<double>>();
    m.diagonal().array() += s;
    const Eigen::VectorXcd x = m.partialPivLu().solve(B.cast<std::complex<double>>());
    return (C.cast<std::complex<double>>() * x).value() + D;
  }
};

// Controllable canonical form. Requires deg(num) <= deg(den); the denominator
// is already monic after TransferFunction canonicalization.
inline StateSpace tf_to_statespace(const TransferFunction& g) {
  if (!g.proper())
    throw ImproperTransferFunction("numerator degree exceeds denominator degree");
  const std::size_t n = g.den.degree();
  std::vector<double> b(n + 1, 0.0);
  for (std::size_t i = 0; i < g.num.coeffs.size(); ++i) b[i] = g.num.coeffs[i];

  StateSpace ss;
  ss.A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  ss.B = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  ss.C = Eigen::RowVectorXd::Zero(static_cast<Eigen::Index>(n));
  ss.D = b[n];
  if (n == 0) return ss;
  for (std::size_t i = 0; i + 1 < n; ++i)
    ss.A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i + 1)) = 1.0;
  for (std::size_t j = 0; j < n; ++j)
    ss.A(static_cast<Eigen::Index>(n - 1), static_cast<Eigen::Index>(j)) = -g.den.coeffs[j];
  ss.B(static_cast<Eigen::Index>(n - 1)) = 1.0;
  for (std::size_t i = 0; i < n; ++i)
    ss.C(static_cast<Eigen::Index>(i)) = b[i] - ss.D * g.den.coeffs[i];
  return ss;
}

// Unit-step response y(k*dt), k = 0..round(t_end/dt), integrated with
// classical fixed-step RK4 so repeated runs are bit-identical.
inline std::vector<double> step_response(const TransferFunction& g, double t_end, double dt) {
  if (dt <= 0.0) throw Error("step response requires dt > 0");
  if (t_end <= dt) throw Error("step response requires t_end > dt");
  const StateSpace ss = tf_to_statespace(g);
  const long long steps = std::llround(t_end / dt);
  std::vector<double> y;
  y.reserve(static_cast<std::size_t>(steps) + 1);

  Eigen::VectorXd x = Eigen::VectorXd::Zero(ss.order());
  auto deriv = [&](const Eigen::VectorXd& xi) -> Eigen::VectorXd { return ss.A * xi + ss.B; };
  y.push_back(ss.D);
  for (long long k = 1; k <= steps; ++k) {
    const Eigen::VectorXd k1 = deriv(x);
    const Eigen::VectorXd k2 = deriv(x + 0.5 * dt * k1);
    const Eigen::VectorXd k3 = deriv(x + 0.5 * dt * k2);
    const Eigen::VectorXd k4 = deriv(x + dt * k3);
    x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    const double yk = (ss.order() == 0) ? ss.D : (ss.C * x).value() + ss.D;
    if (!std::isfinite(yk)) throw NumericalBlowup("step response diverged");
    y.push_back(yk);
  }
  return y;
}

}  // namespace gfm
