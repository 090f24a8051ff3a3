#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "rmt/asymptotics.hpp"
#include "rmt/error.hpp"
#include "rmt/exact_ev.hpp"
#include "rmt/linalg.hpp"
#include "rmt/specfun.hpp"

using namespace rmt;

namespace {
constexpr double kPi = std::numbers::pi;

LimitKernel origin(std::vector<int> nu) {
  LimitKernel k;
  k.kind = LimitKind::OriginHypergeometric;
  k.nu = std::move(nu);
  return k;
}

LimitKernel hard(std::vector<int> nu) {
  LimitKernel k;
  k.kind = LimitKind::MeijerHardEdge;
  k.nu = std::move(nu);
  return k;
}

LimitKernel bessel(int nu) {
  LimitKernel k;
  k.kind = LimitKind::Bessel;
  k.nu = {nu};
  return k;
}

// (1/pi) sum_n (u v*)^n / prod Gamma(nu + n + 1), 200 terms.
cplx origin_series(const std::vector<int>& nu, cplx u, cplx v) {
  const cplx z = u * std::conj(v);
  cplx s = 0.0;
  for (int n = 0; n < 200; ++n) {
    double lg = 0.0;
    for (int a : nu) lg += std::lgamma(a + n + 1.0);
    s += std::pow(z, n) * std::exp(-lg);
  }
  return s / kPi;
}

const std::vector<cplx> kPts = {{0.3, 0.1}, {-0.5, 0.4}, {0.8, -0.6}, {0.0, 1.1}, {1.3, 0.2}};
}  // namespace

TEST(OriginKernel, SingleFactorIsExponential) {
  LimitKernel k = origin({0});
  for (cplx u : kPts)
    for (cplx v : kPts) {
      cplx ref = std::exp(u * std::conj(v)) / kPi;
      EXPECT_LT(std::abs(eval_limit_kernel(k, u, v) - ref), 1e-13 * std::abs(ref));
    }
}

TEST(OriginKernel, MatchesExplicitSeries) {
  for (const auto& nu : {std::vector<int>{0, 1}, std::vector<int>{0, 1, 2}, std::vector<int>{2, 0}}) {
    LimitKernel k = origin(nu);
    for (cplx u : kPts)
      for (cplx v : kPts) {
        cplx ref = origin_series(nu, u, v);
        EXPECT_LT(std::abs(eval_limit_kernel(k, u, v) - ref), 1e-12 * std::abs(ref));
      }
  }
}

TEST(OriginKernel, HermitianAndPositiveGram) {
  LimitKernel k = origin({0, 1});
  const int n = static_cast<int>(kPts.size());
  linalg::CMatrix G(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) G(i, j) = eval_limit_kernel(k, kPts[i], kPts[j]);
  EXPECT_LT((G - G.adjoint()).norm(), 1e-13 * G.norm());
  Eigen::SelfAdjointEigenSolver<linalg::CMatrix> es(G);
  EXPECT_GT(es.eigenvalues().minCoeff(), 0.0);
}

TEST(OriginKernel, TruncatedSeriesDomain) {
  LimitKernel k;
  k.kind = LimitKind::OriginTruncated;
  k.nu = {0};
  k.kappa = {2};
  // Weight 1 - t on the unit disc: h_n = pi / ((n + 1)(n + 2)), so the kernel is 2 (1 - z)^-3 / pi.
  cplx u(0.3, 0.2), v(0.4, -0.1);
  cplx ref = 2.0 * std::pow(1.0 - u * std::conj(v), -3.0) / kPi;
  EXPECT_LT(std::abs(eval_limit_kernel(k, u, v) - ref), 1e-12 * std::abs(ref));
  EXPECT_THROW(eval_limit_kernel(k, cplx(1.2), cplx(1.0)), DomainError);
}

TEST(OriginWeight, SingleFactorAndZero) {
  LimitKernel k = origin({0});
  EXPECT_NEAR(origin_weight(k, cplx(0.6, 0.8)), std::exp(-1.0), 1e-12);
  EXPECT_THROW(origin_weight(k, cplx(0.0)), DomainError);
  LimitKernel k2 = origin({0, 0});
  EXPECT_NEAR(origin_weight(k2, cplx(1.0)), 0.22778774549906688, 1e-10);
}

TEST(OriginConvergence, GinibreWithinTailBound) {
  for (const auto& nu : {std::vector<int>{0}, std::vector<int>{0, 1}, std::vector<int>{0, 1, 2}}) {
    ConvergenceReport r = converge_origin(ProductSpec::ginibre(2, 1, nu), {5, 10, 20});
    ASSERT_EQ(r.deviation.size(), 3u);
    EXPECT_TRUE(r.within_bound) << nu.size();
    EXPECT_TRUE(r.decreasing) << nu.size();
    EXPECT_LE(r.deviation[2], r.bound[2]);
    EXPECT_LE(r.deviation[2], 1e-6);
  }
  ConvergenceReport r2 = converge_origin(ProductSpec::ginibre(2, 1, {0, 1}), {3, 6, 12});
  EXPECT_LT(r2.deviation[1], r2.deviation[0]);
  EXPECT_LT(r2.deviation[2], r2.deviation[1]);
}

TEST(OriginConvergence, InverseMixedDecreasesAtRateOneOverN) {
  ConvergenceReport r = converge_origin(ProductSpec::mixed_inverse(2, 1, {0}, {1}), {10, 20, 40});
  ASSERT_EQ(r.deviation.size(), 3u);
  EXPECT_TRUE(r.decreasing);
  // N dev stays near a constant for an O(1/N) approach.
  for (int i = 1; i < 3; ++i) {
    double ratio = r.deviation[i - 1] / r.deviation[i];
    EXPECT_GT(ratio, 1.6) << i;
    EXPECT_LT(ratio, 2.4) << i;
  }
}

TEST(OriginConvergence, InverseMixedRichardsonLimit) {
  // 2 F_{2N} - F_N removes the 1/N term of the rescaled weighted kernel.
  const ProductSpec base = ProductSpec::mixed_inverse(2, 1, {0}, {1});
  LimitKernel lim = origin({0});
  const std::vector<cplx> g = {{0.3, 0.0}, {-0.3, 0.3}, {0.6, -0.3}, {0.0, 0.6}, {0.6, 0.6}};
  auto F = [&](int N, cplx a, cplx b) {
    ProductSpec s = base;
    s.N = N;
    KernelModel K(s);
    const double sc = std::sqrt(static_cast<double>(N));
    return std::sqrt(weight_eval(K.weight(), a / sc) * weight_eval(K.weight(), b / sc)) *
           K.kernel(a / sc, b / sc) / static_cast<double>(N);
  };
  double raw = 0.0, rich = 0.0;
  for (cplx a : g)
    for (cplx b : g) {
      cplx ki = std::sqrt(origin_weight(lim, a) * origin_weight(lim, b)) * eval_limit_kernel(lim, a, b);
      cplx f30 = F(30, a, b), f60 = F(60, a, b);
      raw = std::max(raw, std::abs(f60 - ki));
      rich = std::max(rich, std::abs(2.0 * f60 - f30 - ki));
    }
  EXPECT_LE(rich, 1e-3) << "raw " << raw;
  EXPECT_LT(rich, 0.5 * raw);
}

TEST(OriginConvergence, RejectsUnsupported) {
  EXPECT_THROW(converge_origin(ProductSpec::ginibre(1, 2, {0}), {4}), UnsupportedError);
  EXPECT_THROW(converge_origin(ProductSpec::truncated(2, 2, {0}, {3}), {4}), UnsupportedError);
}

TEST(BulkAndEdge, GinibreBulkReproducesDensity) {
  LimitKernel k;
  k.kind = LimitKind::BulkGinibre;
  for (cplx u : kPts) EXPECT_NEAR(eval_limit_kernel(k, u, u).real(), 1.0 / kPi, 1e-15);
  cplx u(0.2, 0.1), v(-0.3, 0.5);
  EXPECT_NEAR(std::abs(eval_limit_kernel(k, u, v)), std::exp(-0.5 * std::norm(u - v)) / kPi, 1e-14);
}

TEST(BulkAndEdge, SoftEdgeDensityProfile) {
  // On the outward normal z = z0 t the density is erfc(sqrt(2) t) / (2 pi).
  LimitKernel k;
  k.kind = LimitKind::SoftEdgeErfc;
  k.z0 = std::polar(1.0, 0.7);
  for (double t : {-2.0, -0.5, 0.0, 0.4, 1.5}) {
    cplx z = k.z0 * t;
    EXPECT_NEAR(eval_limit_kernel(k, z, z).real(), std::erfc(std::sqrt(2.0) * t) / (2.0 * kPi), 1e-12) << t;
  }
}

TEST(HardEdge, SingleFactorIsBesselKernel) {
  LimitKernel m1 = hard({0});
  for (double x : {0.5, 1.0, 2.0})
    for (double y : {0.5, 1.0, 2.0}) {
      double ref = 4.0 * eval_limit_kernel(bessel(0), 4.0 * x, 4.0 * y);
      EXPECT_LT(std::abs(meijer_hard_edge(m1, x, y) - ref), 1e-8 * std::abs(ref)) << x << " " << y;
    }
  // Nonzero order: the Meijer form is the Bessel form times (y/x)^(nu/2).
  LimitKernel m2 = hard({2});
  const double x = 0.7, y = 1.6;
  double ref = 4.0 * eval_limit_kernel(bessel(2), 4.0 * x, 4.0 * y) * std::pow(y / x, 1.0);
  EXPECT_LT(std::abs(meijer_hard_edge(m2, x, y) - ref), 1e-8 * std::abs(ref));
}

TEST(HardEdge, BothFormsAgree) {
  for (const auto& nu : {std::vector<int>{0}, std::vector<int>{0, 1}}) {
    LimitKernel k = hard(nu);
    for (auto [x, y] : {std::pair{0.5, 1.0}, std::pair{2.0, 2.0}}) {
      double a = meijer_hard_edge(k, x, y, HardEdgeForm::Hypergeometric);
      double b = meijer_hard_edge(k, x, y, HardEdgeForm::MeijerProduct);
      EXPECT_LT(std::abs(a - b), 1e-8 * std::abs(a)) << nu.size() << " " << x << " " << y;
    }
  }
}

TEST(HardEdge, ThreePointDeterminantMatchesBessel) {
  const double xs[3] = {0.4, 1.1, 2.3};
  linalg::RMatrix A(3, 3), B(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      A(i, j) = meijer_hard_edge(hard({0}), xs[i], xs[j]);
      B(i, j) = 4.0 * eval_limit_kernel(bessel(0), 4.0 * xs[i], 4.0 * xs[j]);
    }
  EXPECT_LT(std::abs(A.determinant() - B.determinant()), 1e-9 * std::abs(B.determinant()));
}

TEST(HardEdge, ReductionDropsLargeIndexFactor) {
  // A factor with a large index nu acts on the scale nu; off the diagonal the correction is O(1/nu).
  LimitKernel one = hard({0});
  auto dev = [&](int nu, double x, double y) {
    double b = meijer_hard_edge(one, x, y);
    return std::abs(meijer_hard_edge(hard({0, nu}), nu * x, nu * y) * nu - b) / std::abs(b);
  };
  EXPECT_LE(dev(300, 0.5, 0.5), 1e-2);
  const double d300 = dev(300, 1.0, 2.0), d100 = dev(100, 1.0, 2.0);
  EXPECT_LE(d300, 1e-2);
  EXPECT_NEAR(d100 / d300, 3.0, 0.3);
}

TEST(HardEdge, RejectsNonPositive) {
  EXPECT_THROW(meijer_hard_edge(hard({0}), 0.0, 1.0), DomainError);
  EXPECT_THROW(meijer_hard_edge(hard({0}), 1.0, -1.0), DomainError);
}

TEST(HardEdgeConvergence, SingleFactorImproves) {
  ConvergenceReport r = converge_hard_edge(ProductSpec::ginibre(2, 1, {0}), {16, 64});
  ASSERT_EQ(r.deviation.size(), 2u);
  EXPECT_LT(r.deviation[1], r.deviation[0]);
  EXPECT_TRUE(r.decreasing);
  EXPECT_LE(r.deviation[1], 2e-2);
}

TEST(WeakKernel, UnitIndexLimits) {
  // M kappa = 1: density 1/(2 pi) as x -> 0+, 1/(4 pi x^2) far from the edge.
  EXPECT_NEAR(weak_kernel_density(1, 1, {cplx(1e-6, 0.0)}), 1.0 / (2.0 * kPi), 1e-6);
  for (double x : {30.0, 60.0, 120.0}) {
    double d = weak_kernel_density(1, 1, {cplx(x, 0.3)});
    EXPECT_NEAR(d * 4.0 * kPi * x * x, 1.0, 1e-10) << x;
  }
  EXPECT_EQ(weak_kernel_density(1, 1, {cplx(-0.5, 0.0)}), 0.0);
}

TEST(WeakKernel, HigherIndexVanishesAtEdge) {
  double prev = weak_kernel_density(2, 2, {cplx(1e-2, 0.0)});
  EXPECT_LT(prev, 1e-3);
  EXPECT_LT(weak_kernel_density(2, 2, {cplx(1e-4, 0.0)}), prev);
  EXPECT_LT(weak_kernel_density(3, 1, {cplx(1e-4, 0.0)}), 1e-6);
}

TEST(WeakKernel, CoincidentPointsAndDomain) {
  EXPECT_NEAR(weak_kernel_density(2, 1, {cplx(0.5, 0.1), cplx(0.5, 0.1)}), 0.0, 1e-14);
  double two = weak_kernel_density(2, 1, {cplx(0.5, 0.1), cplx(0.9, -0.4)});
  double a = weak_kernel_density(2, 1, {cplx(0.5, 0.1)}), b = weak_kernel_density(2, 1, {cplx(0.9, -0.4)});
  EXPECT_GT(two, 0.0);
  EXPECT_LT(two, a * b);
  EXPECT_THROW(weak_kernel_density(0, 1, {cplx(1.0)}), DomainError);
  LimitKernel k;
  k.kind = LimitKind::WeakNonUnitarity;
  k.M_weak = 1;
  k.kappa_weak = 0;
  EXPECT_THROW(eval_limit_kernel(k, cplx(1.0), cplx(1.0)), DomainError);
}

TEST(ClassicalKernels, DiagonalsAndSymmetry) {
  LimitKernel s;
  s.kind = LimitKind::Sine;
  EXPECT_NEAR(eval_limit_kernel(s, 0.3, 0.3), kPi, 1e-15);
  EXPECT_NEAR(eval_limit_kernel(s, 0.0, 0.5), 2.0, 1e-15);
  LimitKernel a;
  a.kind = LimitKind::Airy;
  const double aip0 = -0.25881940379280679840;
  EXPECT_NEAR(eval_limit_kernel(a, 0.0, 0.0), aip0 * aip0, 1e-14);
  for (auto [x, y] : {std::pair{-1.0, 0.5}, std::pair{0.2, 2.0}}) {
    EXPECT_NEAR(eval_limit_kernel(a, x, y), eval_limit_kernel(a, y, x), 1e-15);
    EXPECT_NEAR(eval_limit_kernel(bessel(1), x + 2.0, y + 2.0), eval_limit_kernel(bessel(1), y + 2.0, x + 2.0), 1e-15);
  }
  // Diagonal branch is continuous with the off-diagonal formula.
  EXPECT_NEAR(eval_limit_kernel(a, 0.0, 1e-5), aip0 * aip0, 1e-5);
  EXPECT_NEAR(eval_limit_kernel(bessel(0), 1.0, 1.0 + 1e-5), eval_limit_kernel(bessel(0), 1.0, 1.0), 1e-6);
}

TEST(ClassicalKernels, SemidefiniteGram) {
  const std::vector<double> xs = {0.3, 0.9, 1.7, 2.6, 4.0};
  for (LimitKind kind : {LimitKind::Sine, LimitKind::Airy, LimitKind::Bessel}) {
    LimitKernel k;
    k.kind = kind;
    k.nu = {1};
    linalg::RMatrix G(5, 5);
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) G(i, j) = eval_limit_kernel(k, xs[i], xs[j]);
    // Projection kernels: semidefinite, with eigenvalues near zero at rounding level.
    Eigen::SelfAdjointEigenSolver<linalg::RMatrix> es(G);
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-14 * es.eigenvalues().maxCoeff()) << to_string(kind);
  }
}

TEST(LimitKind, StringRoundTrip) {
  for (LimitKind k : {LimitKind::OriginHypergeometric, LimitKind::WeakNonUnitarity, LimitKind::Airy})
    EXPECT_EQ(limit_kind_from_string(to_string(k)), k);
  EXPECT_THROW(limit_kind_from_string("nope"), DomainError);
}
