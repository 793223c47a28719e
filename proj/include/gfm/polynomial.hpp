#pragma once
// Real polynomials in the Laplace variable s, stored ascending:
// coeffs[k] multiplies s^k. The zero polynomial is {0}.
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <utility>
#include <vector>

namespace gfm {

struct Polynomial {
  std::vector<double> coeffs{0.0};

  Polynomial() = default;
  Polynomial(std::initializer_list<double> c) : coeffs(c) { normalize(); }
  explicit Polynomial(std::vector<double> c) : coeffs(std::move(c)) { normalize(); }

  // Strip high-order coefficients with |c| <= 1e-12 * max|c| so numerical
  // debris cannot inflate the degree. Always keeps at least one coefficient.
  void normalize() {
    if (coeffs.empty()) coeffs.assign(1, 0.0);
    double amax = 0.0;
    for (double c : coeffs) amax = std::max(amax, std::abs(c));
    const double tol = 1e-12 * amax;
    while (coeffs.size() > 1 && std::abs(coeffs.back()) <= tol) coeffs.pop_back();
  }

  std::size_t degree() const { return coeffs.size() - 1; }
  bool is_zero() const { return coeffs.size() == 1 && coeffs[0] == 0.0; }

  double eval(double s) const {
    double acc = 0.0;
    for (std::size_t i = coeffs.size(); i-- > 0;) acc = acc * s + coeffs[i];
    return acc;
  }
  std::complex<double> eval(std::complex<double> s) const {
    std::complex<double> acc = 0.0;
    for (std::size_t i = coeffs.size(); i-- > 0;) acc = acc * s + coeffs[i];
    return acc;
  }
};

// Discrete convolution; deg(out) = deg(a) + deg(b) unless a factor is zero.
inline Polynomial poly_mul(const Polynomial& a, const Polynomial& b) {
  if (a.is_zero() || b.is_zero()) return Polynomial{};
  std::vector<double> out(a.coeffs.size() + b.coeffs.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.coeffs.size(); ++i)
    for (std::size_t j = 0; j < b.coeffs.size(); ++j)
      out[i + j] += a.coeffs[i] * b.coeffs[j];
  return Polynomial(std::move(out));
}

inline Polynomial poly_add(const Polynomial& a, const Polynomial& b) {
  std::vector<double> out(std::max(a.coeffs.size(), b.coeffs.size()), 0.0);
  for (std::size_t i = 0; i < a.coeffs.size(); ++i) out[i] += a.coeffs[i];
  for (std::size_t i = 0; i < b.coeffs.size(); ++i) out[i] += b.coeffs[i];
  return Polynomial(std::move(out));
}

inline Polynomial poly_scale(const Polynomial& a, double k) {
  std::vector<double> out = a.coeffs;
  for (double& c : out) c *= k;
  return Polynomial(std::move(out));
}

inline Polynomial poly_sub(const Polynomial& a, const Polynomial& b) {
  return poly_add(a, poly_scale(b, -1.0));
}

}  // namespace gfm
