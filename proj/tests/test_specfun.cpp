#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <boost/math/special_functions/bessel.hpp>

#include "rmt/error.hpp"
#include "rmt/quadrature.hpp"
#include "rmt/specfun.hpp"

using namespace rmt;
using namespace rmt::specfun;

namespace {
constexpr double kEuler = 0.57721566490153286061;

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }
}  // namespace

TEST(LnGamma, Values) {
  EXPECT_NEAR(ln_gamma(1.0), 0.0, 1e-15);
  EXPECT_LT(rel(ln_gamma(5.0), std::log(24.0)), 1e-13);
  EXPECT_LT(rel(ln_gamma(0.5), 0.5 * std::log(std::numbers::pi)), 1e-13);
  EXPECT_NEAR(ln_gamma(5.0), 3.17805383, 1e-8);
  EXPECT_NEAR(ln_gamma(0.5), 0.57236494, 1e-8);
}

TEST(LnGamma, AgreesWithLgammaOnGrid) {
  for (double x = 0.05; x < 300.0; x *= 1.37) EXPECT_LT(rel(ln_gamma(x), std::lgamma(x)), 1e-13) << x;
}

TEST(LnGamma, RejectsNonPositive) {
  EXPECT_THROW(ln_gamma(0.0), DomainError);
  EXPECT_THROW(ln_gamma(-1.5), DomainError);
}

TEST(LnGamma, ComplexMatchesRealAxisAndRecurrence) {
  for (double x : {0.3, 1.0, 2.5, 17.0}) {
    cplx v = ln_gamma(cplx(x, 0.0));
    EXPECT_NEAR(v.real(), std::lgamma(x), 1e-12);
  }
  // Gamma(z + 1) = z Gamma(z) up to 2 pi i.
  cplx z(0.7, 3.2);
  cplx d = ln_gamma(z + 1.0) - ln_gamma(z) - std::log(z);
  EXPECT_NEAR(d.real(), 0.0, 1e-12);
  double k = d.imag() / (2.0 * std::numbers::pi);
  EXPECT_NEAR(k, std::round(k), 1e-12);
}

TEST(Digamma, Values) {
  EXPECT_NEAR(digamma(1.0), -kEuler, 1e-12);
  EXPECT_NEAR(digamma(2.0), 1.0 - kEuler, 1e-12);
  EXPECT_NEAR(digamma(2.0), 0.4227843351, 1e-10);
  EXPECT_NEAR(trigamma(1.0), std::numbers::pi * std::numbers::pi / 6.0, 1e-12);
  EXPECT_NEAR(trigamma(1.0), 1.6449340668, 1e-10);
  EXPECT_THROW(digamma(0.0), DomainError);
  EXPECT_THROW(trigamma(-2.0), DomainError);
}

TEST(Digamma, RecurrenceProperty) {
  for (double x = 0.01; x < 100.0; x *= 1.9) {
    EXPECT_NEAR(digamma(x + 1.0) - digamma(x), 1.0 / x, 1e-12 * std::max(1.0, 1.0 / x));
    EXPECT_NEAR(trigamma(x) - trigamma(x + 1.0), 1.0 / (x * x), 1e-12 * std::max(1.0, 1.0 / (x * x)));
  }
}

TEST(Pfq, Examples) {
  EXPECT_NEAR(std::abs(pfq({{}, {}}, 1.0) - std::exp(1.0)), 0.0, 1e-15);
  for (double x : {-3.0, 0.25, 7.0}) {
    cplx v = pfq({{-1.0}, {1.0}}, x);
    EXPECT_NEAR(v.real(), 1.0 - x, 1e-15);
  }
  EXPECT_NEAR(pfq({{}, {1.0}}, -1.0).real(), 0.2238907791, 1e-10);
  EXPECT_NEAR(pfq({{}, {1.0}}, -1.0).real(), bessel_j(0.0, 2.0), 1e-14);
}

TEST(Pfq, TerminatingEqualsFiniteSum) {
  // 2F1(-4, 2.5; 1.5; z) = sum_k (-4)_k (2.5)_k / ((1.5)_k k!) z^k.
  for (double z : {-2.0, 0.3, 5.0}) {
    double s = 0.0, t = 1.0;
    for (int k = 0; k <= 4; ++k) {
      s += t;
      t *= (-4.0 + k) * (2.5 + k) / ((1.5 + k) * (k + 1.0)) * z;
    }
    EXPECT_NEAR(pfq({{-4.0, 2.5}, {1.5}}, z).real(), s, 1e-14 * std::max(1.0, std::abs(s)));
  }
}

TEST(Pfq, Errors) {
  EXPECT_THROW(pfq({{}, {-2.0}}, 0.5), DomainError);
  EXPECT_THROW(pfq({{1.0, 1.0, 1.0}, {1.0}}, 0.5), ConvergenceError);
  EXPECT_THROW(pfq({{1.5, 1.0}, {2.5}}, 1.2), ConvergenceError);
}

TEST(Meijer, Examples) {
  EXPECT_NEAR(meijer_g({1, 0, {}, {0.0}}, 1.0), std::exp(-1.0), 1e-9);
  EXPECT_NEAR(meijer_g({2, 0, {1.0, 1.0}, {0.0, 0.0}}, 0.5), 0.6931471806, 1e-9);
  // 2 K_0(2); K_0(2) = 0.11389387274953344.
  EXPECT_NEAR(meijer_g({2, 0, {}, {0.0, 0.0}}, 1.0), 0.22778774549906688, 1e-9);
}

TEST(Meijer, BesselKIdentity) {
  // G^{2,0}_{0,2}(-; 0, 0 | x) = 2 K_0(2 sqrt x); G^{2,0}_{0,2}(-; a, b | x) = 2 x^{(a+b)/2} K_{a-b}(2 sqrt x).
  for (double x : {0.01, 0.3, 1.0, 4.0, 20.0}) {
    double k0 = 2.0 * boost::math::cyl_bessel_k(0.0, 2.0 * std::sqrt(x));
    EXPECT_LT(rel(meijer_g({2, 0, {}, {0.0, 0.0}}, x), k0), 1e-9) << x;
    double k2 = 2.0 * std::pow(x, 1.5) * boost::math::cyl_bessel_k(1.0, 2.0 * std::sqrt(x));
    EXPECT_LT(rel(meijer_g({2, 0, {}, {1.0, 2.0}}, x), k2), 1e-9) << x;
  }
}

TEST(Meijer, ExponentialAndStep) {
  for (double x = 0.05; x < 30.0; x *= 1.7) EXPECT_LT(rel(meijer_g({1, 0, {}, {0.0}}, x), std::exp(-x)), 1e-9);
  for (double x : {0.05, 0.3, 0.6, 0.9}) EXPECT_NEAR(meijer_g({1, 0, {1.0}, {0.0}}, x), 1.0, 1e-9) << x;
  for (double x : {1.1, 1.5, 3.0}) EXPECT_NEAR(meijer_g({1, 0, {1.0}, {0.0}}, x), 0.0, 1e-9) << x;
}

TEST(Meijer, LogarithmicCase) {
  // G^{2,0}_{2,2}(1, 1; 0, 0 | x) = -log x on (0, 1), 0 beyond.
  for (double x : {0.02, 0.2, 0.5, 0.8}) EXPECT_NEAR(meijer_g({2, 0, {1.0, 1.0}, {0.0, 0.0}}, x), -std::log(x), 1e-9);
  EXPECT_NEAR(meijer_g({2, 0, {1.0, 1.0}, {0.0, 0.0}}, 2.0), 0.0, 1e-9);
}

TEST(Meijer, AgreesWithResidueSeriesOnRandomGrid) {
  std::mt19937_64 gen(20260101);
  std::uniform_real_distribution<double> U(0.0, 3.0);
  int checked = 0;
  for (int trial = 0; trial < 40; ++trial) {
    int M = 1 + trial % 3;
    MeijerParams P;
    P.m = M;
    for (int j = 0; j < M; ++j) P.b.push_back(U(gen));
    bool simple = true;
    for (int j = 0; j < M; ++j)
      for (int k = j + 1; k < M; ++k) {
        double d = std::abs(P.b[j] - P.b[k]);
        if (std::abs(d - std::round(d)) < 0.05) simple = false;
      }
    if (!simple) continue;
    // Add one upper parameter (G^{M,0}_{1,M}) or a trailing lower parameter
    // (G^{M,0}_{0,M+1}).
    if (M > 1 && trial % 2) P.a.push_back(P.b[0] + 0.5 + U(gen));
    else P.b.push_back(U(gen) - 1.0);
    for (double x : {0.2, 0.7, 1.6}) {
      double g = meijer_g(P, x);
      double s = meijer_g_series(P, x);
      EXPECT_LT(std::abs(g - s), 1e-8 * std::max(std::abs(s), 1e-3)) << "trial " << trial << " x " << x;
      ++checked;
    }
  }
  EXPECT_GT(checked, 60);
}

TEST(Meijer, MellinTransform) {
  const std::vector<std::vector<double>> lists = {{0.0}, {0.0, 1.0}, {0.0, 0.5, 2.0}};
  for (const auto& b : lists) {
    MeijerParams P{static_cast<int>(b.size()), 0, {}, b};
    for (double s : {0.5, 1.0, 1.7}) {
      auto f = [&](double t) {
        double x = std::exp(t);
        return std::pow(x, s) * meijer_g(P, x);
      };
      double I = quad::adaptive(f, -40.0, 6.0 + 2.0 * b.size(), 1e-9).value;
      double expect = 0.0;
      for (double bj : b) expect += std::lgamma(bj + s);
      EXPECT_LT(rel(I, std::exp(expect)), 1e-6) << "M=" << b.size() << " s=" << s;
    }
  }
}

TEST(Meijer, Errors) {
  EXPECT_THROW(meijer_g({1, 0, {}, {0.0}}, 0.0), DomainError);
  EXPECT_THROW(meijer_g({2, 0, {}, {0.0}}, 1.0), DomainError);
}

TEST(Bessel, AgainstBoost) {
  EXPECT_EQ(bessel_j(0.0, 0.0), 1.0);
  for (double nu : {0.0, 1.0, 2.5, 7.0})
    for (double x : {0.1, 1.0, 5.5, 20.0, 49.0}) {
      double ref = boost::math::cyl_bessel_j(nu, x);
      EXPECT_NEAR(bessel_j(nu, x), ref, 1e-10 * std::max(1.0, std::abs(ref))) << nu << " " << x;
    }
}

TEST(Bessel, DerivativeIdentity) {
  // J_nu' = (J_{nu-1} - J_{nu+1}) / 2.
  for (double nu : {1.0, 3.0})
    for (double x : {0.5, 4.0, 12.0})
      EXPECT_NEAR(bessel_j_prime(nu, x), 0.5 * (bessel_j(nu - 1, x) - bessel_j(nu + 1, x)), 1e-12);
}

TEST(Airy, Values) {
  double ai0 = std::pow(3.0, -2.0 / 3.0) / std::tgamma(2.0 / 3.0);
  EXPECT_NEAR(airy_ai(0.0), ai0, 1e-14);
  EXPECT_NEAR(airy_ai(0.0), 0.3550280539, 1e-10);
  // 30-digit reference values (Ai, Ai').
  const double tab[][3] = {
      {1.0, 0.135292416312881415524, -0.159147441296793212788},
      {-1.0, 0.535560883292352118800, -0.0101605671166452093950},
      {-5.0, 0.350761009024114319788, 0.327192818554443136795},
      {3.0, 0.00659113935746071914426, -0.0119129767059513184738},
      {10.0, 1.10475325528986859336e-10, -3.52063367673892363662e-10},
      {-30.0, -0.0879681884568421628326, 1.22862060263748513470},
  };
  for (const auto& r : tab) {
    EXPECT_LT(rel(airy_ai(r[0]), r[1]), 1e-10) << r[0];
    EXPECT_LT(rel(airy_ai_prime(r[0]), r[2]), 1e-10) << r[0];
  }
}

TEST(Erfc, ComplexArgument) {
  EXPECT_NEAR(std::abs(erfc_complex(0.0) - 1.0), 0.0, 1e-15);
  for (double x : {-3.0, -0.4, 0.5, 2.0, 6.0})
    EXPECT_LT(std::abs(erfc_complex(x) - std::erfc(x)), 1e-8 * std::max(std::erfc(x), 1e-12)) << x;
  // erfc(z*) = erfc(z)*, erfc(-z) = 2 - erfc(z).
  for (cplx z : {cplx(0.3, 1.2), cplx(2.0, -3.0), cplx(-4.0, 5.0), cplx(6.0, 6.0)}) {
    cplx a = erfc_complex(z);
    EXPECT_LT(std::abs(erfc_complex(std::conj(z)) - std::conj(a)), 1e-8 * std::max(1.0, std::abs(a)));
    EXPECT_LT(std::abs(erfc_complex(-z) - (2.0 - a)), 1e-8 * std::max(1.0, std::abs(a)));
  }
  // Purely imaginary: erfc(iy) = 1 - (2i/sqrt(pi)) int_0^y e^{t^2} dt.
  double y = 1.5;
  double I = quad::adaptive([](double t) { return std::exp(t * t); }, 0.0, y, 1e-13).value;
  cplx expect(1.0, -2.0 / std::sqrt(std::numbers::pi) * I);
  EXPECT_LT(std::abs(erfc_complex(cplx(0.0, y)) - expect), 1e-8 * std::abs(expect));
}
