#include <gtest/gtest.h>

#include <cmath>

#include <nlohmann/json.hpp>

#include "rmt/ensembles.hpp"
#include "rmt/error.hpp"
#include "rmt/exact_sv.hpp"
#include "rmt/quadrature.hpp"
#include "rmt/stats.hpp"

using namespace rmt;

namespace {
double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }
}  // namespace

TEST(System, LaguerreCase) {
  BiorthogonalSystem S = build_system(ProductSpec::ginibre(2, 3, {0}));
  EXPECT_EQ(S.family, SvFamily::Ginibre);
  for (double x : {0.2, 1.0, 3.5}) {
    EXPECT_NEAR(S.p(1, x), x - 1.0, 1e-15);
    EXPECT_LT(rel(S.psi(0, x), std::exp(-x)), 1e-9);
  }
  double I = quad::adaptive([&](double x) { return S.psi(0, x); }, 0.0, HUGE_VAL, 1e-10).value;
  EXPECT_NEAR(I, 1.0, 1e-9);
}

TEST(System, NormsClosedForm) {
  BiorthogonalSystem S = build_system(ProductSpec::ginibre(2, 4, {0, 0}));
  EXPECT_NEAR(S.h(3), 216.0, 1e-10);
}

TEST(System, MonicPolynomials) {
  for (const ProductSpec& spec : {ProductSpec::ginibre(2, 8, {0, 1, 2}), ProductSpec::mixed_inverse(2, 6, {0}, {2}),
                                  ProductSpec::truncated(2, 6, {0, 1}, {7, 9})}) {
    BiorthogonalSystem S = build_system(spec);
    for (int n = 0; n < spec.N; ++n) EXPECT_EQ(S.coefficient(n, n), 1.0);
  }
}

TEST(System, FamiliesAndFlags) {
  EXPECT_EQ(build_system(ProductSpec::mixed_inverse(2, 3, {0}, {1})).family, SvFamily::InverseMixed);
  BiorthogonalSystem T = build_system(ProductSpec::truncated(2, 4, {0}, {2}));
  EXPECT_EQ(T.family, SvFamily::Truncated);
  EXPECT_NE(std::find(T.flags.begin(), T.flags.end(), "kappa_below_N"), T.flags.end());
  EXPECT_TRUE(build_system(ProductSpec::truncated(2, 3, {0}, {5})).flags.empty());
  EXPECT_THROW(build_system(ProductSpec::ginibre(1, 3, {0})), UnsupportedError);
  EXPECT_THROW(build_system(ProductSpec::ginibre(4, 3, {0})), UnsupportedError);
}

TEST(System, JsonSnapshot) {
  auto j = nlohmann::json::parse(to_json(build_system(ProductSpec::ginibre(2, 3, {0, 1}))));
  EXPECT_EQ(j.at("family"), "ginibre");
  EXPECT_EQ(j.at("N"), 3);
  EXPECT_TRUE(j.contains("norms"));
}

TEST(Kernel, SingleTerm) {
  BiorthogonalSystem S = build_system(ProductSpec::ginibre(2, 1, {0}));
  for (double y : {0.3, 1.0, 4.0}) EXPECT_LT(rel(sv_kernel(S, 2.0, y), std::exp(-y)), 1e-9);
}

TEST(Kernel, SumAgreesWithContour) {
  BiorthogonalSystem S = build_system(ProductSpec::ginibre(2, 4, {0, 0}));
  ContourValue c = sv_kernel_contour(S, 0.7, 1.3);
  EXPECT_FALSE(c.used_fallback);
  EXPECT_LT(rel(c.value, sv_kernel_sum(S, 0.7, 1.3)), 1e-7);
  BiorthogonalSystem I = build_system(ProductSpec::mixed_inverse(2, 4, {1}, {2}));
  EXPECT_LT(rel(sv_kernel_contour(I, 0.4, 0.9).value, sv_kernel_sum(I, 0.4, 0.9)), 1e-7);
  BiorthogonalSystem T = build_system(ProductSpec::truncated(2, 3, {0, 0}, {4, 5}));
  ContourValue t = sv_kernel_contour(T, 0.05, 0.2);
  EXPECT_FALSE(t.used_fallback);
  EXPECT_LT(rel(t.value, sv_kernel_sum(T, 0.05, 0.2)), 1e-7);
}

TEST(Kernel, ContourFallsBackWithoutDecay) {
  // sum(kappa - nu) = 2 <= N: the vertical-line integrand does not decay.
  BiorthogonalSystem T = build_system(ProductSpec::truncated(2, 3, {0}, {2}));
  ContourValue c = sv_kernel_contour(T, 0.3, 0.4);
  EXPECT_TRUE(c.used_fallback);
  EXPECT_FALSE(c.warning.empty());
  EXPECT_LT(rel(c.value, sv_kernel_sum(T, 0.3, 0.4)), 1e-12);
}

TEST(Kernel, TraceSumRule) {
  BiorthogonalSystem S = build_system(ProductSpec::ginibre(2, 4, {0, 0}));
  LogGrid g = make_log_grid(S, 4);
  double I = 0.0;
  for (std::size_t i = 0; i < g.x.size(); ++i) I += g.w[i] * sv_kernel_sum(S, g.x[i], g.x[i]);
  EXPECT_NEAR(I, 4.0, 1e-6);
}

TEST(Correlation, TwoPointLaguerre) {
  // N = 2 Laguerre ensemble: R_1(x) = e^{-x} (x^2 - 2x + 2).
  BiorthogonalSystem S = build_system(ProductSpec::ginibre(2, 2, {0}));
  for (double x : {0.1, 0.9, 2.5, 6.0})
    EXPECT_LT(rel(sv_correlation_k(S, {x}), std::exp(-x) * (x * x - 2.0 * x + 2.0)), 1e-9);
  EXPECT_NEAR(sv_correlation_k(S, {0.8, 0.8}), 0.0, 1e-12);
  // R_2 = 2! P with P = (x - y)^2 e^{-x-y} / 2.
  EXPECT_LT(rel(sv_correlation_k(S, {0.5, 2.0}), 2.25 * std::exp(-2.5)), 1e-9);
  EXPECT_THROW(sv_correlation_k(S, {0.1, 0.2, 0.3}), DomainError);
}

TEST(Correlation, NormalizationAtNTwo) {
  // int int det[p_i(x_j)] det[psi_i(x_j)] / (2! h_0 h_1) = 1.
  BiorthogonalSystem S = build_system(ProductSpec::ginibre(2, 2, {0, 1}));
  LogGrid g = make_log_grid(S, 2);
  const std::size_t n = g.x.size();
  std::vector<double> p0(n), p1(n), q0(n), q1(n);
  for (std::size_t i = 0; i < n; ++i) {
    p0[i] = S.p(0, g.x[i]);
    p1[i] = S.p(1, g.x[i]);
    q0[i] = S.psi(0, g.x[i]);
    q1[i] = S.psi(1, g.x[i]);
  }
  double I = 0.0;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      I += g.w[a] * g.w[b] * (p0[a] * p1[b] - p1[a] * p0[b]) * (q0[a] * q1[b] - q1[a] * q0[b]);
  EXPECT_NEAR(I / (2.0 * S.h(0) * S.h(1)), 1.0, 1e-4);
}

TEST(Correlation, DensityAgainstMonteCarlo) {
  ProductSpec spec = ProductSpec::ginibre(2, 4, {0, 0});
  BiorthogonalSystem S = build_system(spec);
  SampleBatch b = sample_spectra(spec, 100000, 500, {false, true});
  std::vector<double> x;
  for (const auto& s : b.samples) x.insert(x.end(), s.squared_singular_values.begin(), s.squared_singular_values.end());
  Histogram h = histogram(x, 0.0, 40.0, 40);
  auto prob = [&](double lo, double hi) {
    auto f = [&](double t) { return t > 0.0 ? sv_kernel_sum(S, t, t) / spec.N : 0.0; };
    return quad::adaptive(f, lo, hi, 1e-9).value;
  };
  ComparisonReport rep = compare_histogram(h, prob);
  EXPECT_TRUE(rep.pass) << "max|z| " << rep.max_abs_z;
}

TEST(Gram, ThreeFamilies) {
  for (const ProductSpec& spec : {ProductSpec::ginibre(2, 6, {0, 1}), ProductSpec::mixed_inverse(2, 6, {0}, {8}),
                                  ProductSpec::truncated(2, 6, {0, 1}, {7, 9})}) {
    GramReport g = gram_matrix(build_system(spec), 6);
    EXPECT_TRUE(g.pass) << to_string(build_system(spec).family) << " " << g.max_deviation;
    EXPECT_LT(g.max_deviation, 1e-8);
  }
}

TEST(MultipleOrthogonality, SingleWeightIsOrdinary) {
  MultipleOrthogonalityReport r = check_multiple_orthogonality(build_system(ProductSpec::ginibre(2, 9, {0})), 8);
  EXPECT_TRUE(r.holds);
  // M = 1: every l < n vanishes.
  int count = 0;
  for (const auto& e : r.entries)
    if (e.n == 5) ++count;
  EXPECT_EQ(count, 5);
}

TEST(MultipleOrthogonality, TwoWeights) {
  MultipleOrthogonalityReport r = check_multiple_orthogonality(build_system(ProductSpec::ginibre(2, 9, {0, 1})), 8);
  EXPECT_TRUE(r.holds) << r.max_relative;
  EXPECT_LT(r.max_relative, 1e-8);
  std::set<std::pair<int, int>> at2;
  for (const auto& e : r.entries)
    if (e.n == 2) at2.insert({e.k, e.l});
  EXPECT_EQ(at2, (std::set<std::pair<int, int>>{{0, 0}, {1, 0}}));
}

TEST(MultipleOrthogonality, InverseFamilyViolates) {
  MultipleOrthogonalityReport r =
      check_multiple_orthogonality(build_system(ProductSpec::mixed_inverse(2, 9, {0}, {9})), 8);
  EXPECT_FALSE(r.holds);
  EXPECT_FALSE(r.violations.empty());
  EXPECT_THROW(check_multiple_orthogonality(build_system(ProductSpec::truncated(2, 3, {0}, {4}))), UnsupportedError);
}

TEST(Recurrence, LaguerreThreeTerm) {
  // x L_n = L_{n+1} + (2n + 1) L_n + n^2 L_{n-1} for monic Laguerre polynomials.
  RecurrenceReport r = check_recurrence(build_system(ProductSpec::ginibre(2, 8, {0})), 4);
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.participating_terms, 3);
  EXPECT_NEAR(r.a[0], 9.0, 1e-8);
  EXPECT_NEAR(r.a[1], 16.0, 1e-8);
  EXPECT_NEAR(r.a[2], 0.0, 1e-8);
}

TEST(Recurrence, TwoFactors) {
  RecurrenceReport r = check_recurrence(build_system(ProductSpec::ginibre(2, 8, {0, 1})), 3);
  EXPECT_TRUE(r.pass);
  EXPECT_LE(r.p_residual, 1e-7);
  EXPECT_LE(r.psi_residual, 1e-7);
  EXPECT_EQ(r.participating_terms, 4);
  EXPECT_THROW(check_recurrence(build_system(ProductSpec::mixed_inverse(2, 4, {0}, {1})), 2), UnsupportedError);
}

TEST(Reduction, TruncatedApproachesGinibre) {
  // K_T(x / kappa^M, y / kappa^M) / kappa^M -> K_G(x, y), with an O(1 / kappa) gap.
  for (int M : {1, 2}) {
    std::vector<int> nu(M, 0);
    BiorthogonalSystem G = build_system(ProductSpec::ginibre(2, 3, nu));
    auto deviation = [&](int kappa, double x, double y) {
      BiorthogonalSystem T = build_system(ProductSpec::truncated(2, 3, nu, std::vector<int>(M, kappa)));
      const double s = std::pow(static_cast<double>(kappa), M);
      double b = sv_kernel(G, x, y);
      return (sv_kernel(T, x / s, y / s) / s - b) / b;
    };
    for (double x : {0.25, 0.5, 1.0}) EXPECT_LT(std::abs(deviation(200, x, x)), 1e-2) << "M=" << M << " x=" << x;
    for (double x : {0.5, 1.0, 2.0})
      for (double y : {0.5, 1.0, 2.0}) {
        double d200 = deviation(200, x, y), d400 = deviation(400, x, y);
        EXPECT_NEAR(d200 / d400, 2.0, 0.05) << "M=" << M << " (" << x << "," << y << ")";
      }
  }
}
