#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <complex>

#include "gfm/errors.hpp"
#include "gfm/transfer_function.hpp"

using gfm::Polynomial;
using gfm::TransferFunction;

TEST_CASE("canonical form has a monic denominator") {
  TransferFunction g{Polynomial{2.0, 4.0}, Polynomial{4.0, 2.0}};
  REQUIRE(g.den.coeffs.back() == 1.0);
  REQUIRE_THAT(g.num.coeffs[0], Catch::Matchers::WithinRel(1.0, 1e-15));
  REQUIRE_THAT(g.num.coeffs[1], Catch::Matchers::WithinRel(2.0, 1e-15));
}

TEST_CASE("identically zero denominator is rejected") {
  REQUIRE_THROWS_AS((TransferFunction{Polynomial{1.0}, Polynomial{0.0}}),
                    gfm::DegenerateLoop);
}

TEST_CASE("dc gain and evaluation") {
  TransferFunction g = gfm::tf_first_order(1.0, 0.5);  // 1/(0.5 s + 1)
  REQUIRE_THAT(g.dc_gain(), Catch::Matchers::WithinRel(1.0, 1e-15));
  const std::complex<double> jw(0.0, 2.0);  // |G(j2)| = 1/sqrt(2)
  REQUIRE_THAT(std::abs(g.eval(jw)),
               Catch::Matchers::WithinRel(1.0 / std::sqrt(2.0), 1e-12));

  TransferFunction integrator = gfm::tf_integrator(3.0);
  REQUIRE_THROWS_AS(integrator.dc_gain(), gfm::NumericalFailure);
  REQUIRE_THROWS_AS(integrator.eval(std::complex<double>(0.0, 0.0)),
                    gfm::NumericalFailure);
}

TEST_CASE("first-order factory rejects nonpositive time constants") {
  REQUIRE_THROWS_AS(gfm::tf_first_order(1.0, 0.0), gfm::Error);
  REQUIRE_THROWS_AS(gfm::tf_first_order(1.0, -2.0), gfm::Error);
}

TEST_CASE("series, addition, and feedback algebra") {
  TransferFunction a = gfm::tf_first_order(2.0, 1.0);   // 2/(s+1)
  TransferFunction b = gfm::tf_integrator(1.0);          // 1/s

  TransferFunction ab = gfm::tf_series(a, b);            // 2/(s(s+1))
  REQUIRE(ab.den.degree() == 2);
  REQUIRE_THAT(std::abs(ab.eval({0.0, 1.0})),
               Catch::Matchers::WithinRel(2.0 / std::sqrt(2.0), 1e-12));

  TransferFunction sum = gfm::tf_add(a, gfm::tf_constant(1.0));  // (s+3)/(s+1)
  REQUIRE_THAT(sum.dc_gain(), Catch::Matchers::WithinRel(3.0, 1e-12));

  // Unity feedback around 1/s is 1/(s+1).
  TransferFunction cl = gfm::tf_feedback(b, gfm::tf_constant(1.0));
  REQUIRE_THAT(cl.dc_gain(), Catch::Matchers::WithinRel(1.0, 1e-12));
  auto poles = gfm::tf_poles(cl);
  REQUIRE(poles.size() == 1);
  REQUIRE_THAT(poles[0].real(), Catch::Matchers::WithinRel(-1.0, 1e-12));
}

TEST_CASE("feedback with identically vanishing return difference is degenerate") {
  TransferFunction fwd = gfm::tf_constant(1.0);
  REQUIRE_THROWS_AS(gfm::tf_feedback(fwd, gfm::tf_constant(-1.0)),
                    gfm::DegenerateLoop);
}

TEST_CASE("polynomial roots of a factored cubic") {
  // (s+1)(s+2)(s+5) = s^3 + 8 s^2 + 17 s + 10
  Polynomial p{10.0, 17.0, 8.0, 1.0};
  auto roots = gfm::poly_roots(p);
  REQUIRE(roots.size() == 3);
  std::vector<double> re;
  for (auto r : roots) {
    REQUIRE(std::abs(r.imag()) < 1e-10);
    re.push_back(r.real());
  }
  std::sort(re.begin(), re.end());
  REQUIRE_THAT(re[0], Catch::Matchers::WithinRel(-5.0, 1e-10));
  REQUIRE_THAT(re[1], Catch::Matchers::WithinRel(-2.0, 1e-10));
  REQUIRE_THAT(re[2], Catch::Matchers::WithinRel(-1.0, 1e-10));
}

TEST_CASE("root ordering is deterministic") {
  Polynomial p{2.0, 0.0, 1.0};  // s^2 + 2: roots +/- j sqrt(2)
  auto roots = gfm::poly_roots(p);
  REQUIRE(roots.size() == 2);
  // Sorted by real part, then by imaginary part, descending.
  REQUIRE(roots[0].imag() > roots[1].imag());
}

TEST_CASE("balancing keeps widely scaled roots accurate") {
  // (s + 1e-3)(s + 1e3) = s^2 + 1000.001 s + 1 spans six decades.
  Polynomial p{1.0, 1000.001, 1.0};
  auto roots = gfm::poly_roots(p);
  std::vector<double> re{roots[0].real(), roots[1].real()};
  std::sort(re.begin(), re.end());
  REQUIRE_THAT(re[0], Catch::Matchers::WithinRel(-1000.0, 1e-6));
  REQUIRE_THAT(re[1], Catch::Matchers::WithinRel(-1e-3, 1e-6));
}

TEST_CASE("poles and zeros of a biproper function") {
  // (s+2)/((s+1)(s+3))
  TransferFunction g{Polynomial{2.0, 1.0}, Polynomial{3.0, 4.0, 1.0}};
  auto zeros = gfm::tf_zeros(g);
  auto poles = gfm::tf_poles(g);
  REQUIRE(zeros.size() == 1);
  REQUIRE_THAT(zeros[0].real(), Catch::Matchers::WithinRel(-2.0, 1e-12));
  REQUIRE(poles.size() == 2);
  std::vector<double> re{poles[0].real(), poles[1].real()};
  std::sort(re.begin(), re.end());
  REQUIRE_THAT(re[0], Catch::Matchers::WithinRel(-3.0, 1e-10));
  REQUIRE_THAT(re[1], Catch::Matchers::WithinRel(-1.0, 1e-10));
}

TEST_CASE("constant transfer function has no poles or zeros") {
  TransferFunction g = gfm::tf_constant(5.0);
  REQUIRE(gfm::tf_poles(g).empty());
  REQUIRE(gfm::tf_zeros(g).empty());
  REQUIRE(g.dc_gain() == 5.0);
}
