#pragma once
// Rational transfer functions G(s) = num(s)/den(s) with a monic denominator,
// plus series/parallel/feedback composition and root finding via a balanced
// companion matrix.
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <string>
#include <vector>

#include "gfm/errors.hpp"
#include "gfm/polynomial.hpp"

namespace gfm {

struct TransferFunction {
  Polynomial num{};
  Polynomial den{{1.0}};

  TransferFunction() = default;
  TransferFunction(Polynomial n, Polynomial d) : num(std::move(n)), den(std::move(d)) {
    canonicalize();
  }

  // Monic-denominator normal form. A vanishing denominator has no meaning as
  // a dynamical system, so it is rejected here once and for all.
  void canonicalize() {
    num.normalize();
    den.normalize();
    if (den.is_zero()) throw DegenerateLoop("transfer function denominator is identically zero");
    const double lead = den.coeffs.back();
    for (double& c : num.coeffs) c /= lead;
    for (double& c : den.coeffs) c /= lead;
    num.normalize();
    den.normalize();
  }

  bool proper() const { return num.is_zero() || num.degree() <= den.degree(); }

  double dc_gain() const {
    if (den.coeffs[0] == 0.0)
      throw NumericalFailure("dc gain undefined: pole at s = 0");
    return num.coeffs[0] / den.coeffs[0];
  }

  std::complex<double> eval(std::complex<double> s) const {
    const std::complex<double> d = den.eval(s);
    if (std::abs(d) == 0.0) throw NumericalFailure("transfer function evaluated at a pole");
    return num.eval(s) / d;
  }
};

inline TransferFunction tf_constant(double k) {
  return TransferFunction(Polynomial{k}, Polynomial{1.0});
}

inline TransferFunction tf_integrator(double k) {
  return TransferFunction(Polynomial{k}, Polynomial{0.0, 1.0});
}

inline TransferFunction tf_first_order(double gain, double tau) {
  if (tau <= 0.0) throw Error("first-order lag requires tau > 0");
  return TransferFunction(Polynomial{gain}, Polynomial{1.0, tau});
}

inline TransferFunction tf_series(const TransferFunction& a, const TransferFunction& b) {
  return TransferFunction(poly_mul(a.num, b.num), poly_mul(a.den, b.den));
}

inline TransferFunction tf_add(const TransferFunction& a, const TransferFunction& b) {
  return TransferFunction(
      poly_add(poly_mul(a.num, b.den), poly_mul(b.num, a.den)),
      poly_mul(a.den, b.den));
}

inline TransferFunction tf_scale(const TransferFunction& a, double k) {
  return TransferFunction(poly_scale(a.num, k), a.den);
}

// Negative feedback: forward / (1 + forward*back).
inline TransferFunction tf_feedback(const TransferFunction& fwd, const TransferFunction& back) {
  Polynomial den = poly_add(poly_mul(fwd.den, back.den), poly_mul(fwd.num, back.num));
  den.normalize();
  if (den.is_zero())
    throw DegenerateLoop("feedback loop: 1 + forward*back vanishes identically");
  return TransferFunction(poly_mul(fwd.num, back.den), std::move(den));
}

namespace detail {

// Parlett-Reinsch balancing (radix-2 diagonal similarity). Companion matrices
// of physical polynomials mix coefficient scales across ~10 orders of
// magnitude; without balancing the QR eigensolver loses most of its accuracy.
inline void balance(Eigen::MatrixXd& a) {
  const Eigen::Index n = a.rows();
  const double radix = 2.0;
  const double radix2 = radix * radix;
  bool converged = false;
  while (!converged) {
    converged = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      double r = 0.0, c = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i) continue;
        c += std::abs(a(j, i));
        r += std::abs(a(i, j));
      }
      if (c == 0.0 || r == 0.0) continue;
      double f = 1.0;
      const double s = c + r;
      while (c < r / radix) {
        c *= radix2;
        r /= radix2;
        f *= radix;
      }
      while (c > r * radix) {
        c /= radix2;
        r *= radix2;
        f /= radix;
      }
      if ((c + r) / f < 0.95 * s) {
        converged = false;
        a.row(i) /= f;
        a.col(i) *= f;
      }
    }
  }
}

}  // namespace detail

// All roots of p via the eigenvalues of its companion matrix, sorted by
// descending real part (ties by descending imaginary part).
inline std::vector<std::complex<double>> poly_roots(Polynomial p) {
  p.normalize();
  if (p.is_zero()) throw NumericalFailure("roots of the zero polynomial are undefined");
  const std::size_t n = p.degree();
  if (n == 0) return {};
  const double lead = p.coeffs.back();
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                            static_cast<Eigen::Index>(n));
  for (std::size_t i = 1; i < n; ++i)
    c(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i - 1)) = 1.0;
  for (std::size_t i = 0; i < n; ++i)
    c(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(n - 1)) = -p.coeffs[i] / lead;
  detail::balance(c);
  Eigen::EigenSolver<Eigen::MatrixXd> solver(c, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i)
      worst = std::max(worst, std::abs(p.eval(solver.eigenvalues()[i])));
    char buf[96];
    std::snprintf(buf, sizeof buf, "eigen solve for polynomial roots failed (residual %.3e)",
                  worst);
    throw NumericalFailure(buf);
  }
  std::vector<std::complex<double>> roots(solver.eigenvalues().data(),
                                          solver.eigenvalues().data() + n);
  std::sort(roots.begin(), roots.end(), [](const auto& a, const auto& b) {
    if (a.real() != b.real()) return a.real() > b.real();
    return a.imag() > b.imag();
  });
  return roots;
}

inline std::vector<std::complex<double>> tf_poles(const TransferFunction& g) {
  return poly_roots(g.den);
}

inline std::vector<std::complex<double>> tf_zeros(const TransferFunction& g) {
  if (g.num.is_zero()) return {};
  return poly_roots(g.num);
}

}  // namespace gfm
