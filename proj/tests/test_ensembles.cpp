#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include <boost/math/special_functions/gamma.hpp>

#include "rmt/ensembles.hpp"
#include "rmt/error.hpp"
#include "rmt/stats.hpp"

using namespace rmt;

namespace {

std::vector<double> radii(const SampleBatch& b) {
  std::vector<double> r;
  for (const auto& s : b.samples)
    for (cplx z : s.eigenvalues) r.push_back(std::abs(z));
  return r;
}

}  // namespace

TEST(Rng, DeterministicAndSplit) {
  Rng a(42), b(42), c(43);
  bool differ = false;
  for (int i = 0; i < 100; ++i) {
    auto x = a(), y = b(), z = c();
    EXPECT_EQ(x, y);
    differ |= x != z;
  }
  EXPECT_TRUE(differ);
  Rng s1 = Rng(42).split(1), s1b = Rng(42).split(1), s2 = Rng(42).split(2);
  EXPECT_EQ(s1.uniform(), s1b.uniform());
  EXPECT_NE(Rng(42).split(1).uniform(), s2.uniform());
}

TEST(Rng, UniformAndNormalMoments) {
  Rng r(7);
  const int n = 200000;
  double su = 0.0, sn = 0.0, sn2 = 0.0, sc = 0.0;
  for (int i = 0; i < n; ++i) {
    double u = r.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    su += u;
    double g = r.normal();
    sn += g;
    sn2 += g * g;
    sc += std::norm(r.complex_normal(2.0));
  }
  EXPECT_NEAR(su / n, 0.5, 4.0 * std::sqrt(1.0 / 12.0 / n));
  EXPECT_NEAR(sn / n, 0.0, 4.0 / std::sqrt(n));
  EXPECT_NEAR(sn2 / n, 1.0, 4.0 * std::sqrt(2.0 / n));
  EXPECT_NEAR(sc / n, 2.0, 4.0 * 2.0 / std::sqrt(n));
}

TEST(Ginibre, SecondMomentBeta2) {
  Rng r(101);
  const int n = 1000000;
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = std::norm(sample_ginibre(2, 1, 1, r)(0, 0));
  MeanSe m = mean_se(v);
  EXPECT_LT(std::abs(m.mean - 1.0), 4.0 * m.se);
}

TEST(Ginibre, RealAndQuaternionStructure) {
  Rng r(102);
  CMatrix X = sample_ginibre(1, 3, 3, r);
  EXPECT_EQ(X.imag().norm(), 0.0);
  CMatrix Q = sample_ginibre(4, 2, 2, r);
  ASSERT_EQ(Q.rows(), 4);
  ASSERT_EQ(Q.cols(), 4);
  EXPECT_EQ(quaternion_defect(Q), 0.0);
  CMatrix Q2 = sample_ginibre(4, 2, 3, r);
  EXPECT_EQ(Q2.rows(), 4);
  EXPECT_EQ(Q2.cols(), 6);
}

TEST(Induced, ZeroOffsetIsSquareGinibreShape) {
  Rng r(103);
  CMatrix X = sample_induced_ginibre(2, 3, 0, r);
  EXPECT_EQ(X.rows(), 3);
  EXPECT_EQ(X.cols(), 3);
  EXPECT_THROW(sample_induced_ginibre(2, 3, -1, r), DomainError);
}

TEST(Induced, ScalarIsGammaThree) {
  Rng r(104);
  std::vector<double> v(20000);
  for (auto& x : v) x = std::norm(sample_induced_ginibre(2, 1, 2, r)(0, 0));
  KsResult ks = ks_one_sample(v, [](double t) { return boost::math::gamma_p(3.0, t); });
  EXPECT_GT(ks.p_value, 1e-3) << "D=" << ks.D;
  MeanSe m = mean_se(v);
  EXPECT_LT(std::abs(m.mean - 3.0), 4.0 * m.se);
}

TEST(Induced, MatchesRectangularChain) {
  // Induced square factors (nu = (1, 0)) against the literal 2x3 * 3x2 chain.
  ProductSpec spec = ProductSpec::ginibre(2, 2, {1, 0});
  SampleBatch b = sample_spectra(spec, 20000, 105);
  Rng r(106);
  std::vector<double> chain;
  for (int i = 0; i < 20000; ++i)
    for (cplx z : rectangular_chain_eigenvalues(2, {2, 3, 2}, r)) chain.push_back(std::abs(z));
  KsResult ks = ks_two_sample(radii(b), chain);
  EXPECT_GT(ks.p_value, 0.01) << "D=" << ks.D;
}

TEST(Haar, Unitarity) {
  Rng r(107);
  CMatrix U = sample_haar_unitary(2, 8, r);
  EXPECT_LT((U.adjoint() * U - CMatrix::Identity(8, 8)).norm(), 1e-12);
  CMatrix O = sample_haar_unitary(1, 5, r);
  EXPECT_EQ(O.imag().norm(), 0.0);
  EXPECT_LT((O.transpose() * O - CMatrix::Identity(5, 5)).norm(), 1e-12);
  CMatrix S = sample_haar_unitary(4, 3, r);
  EXPECT_LT((S.adjoint() * S - CMatrix::Identity(6, 6)).norm(), 1e-12);
  EXPECT_LT(quaternion_defect(S), 1e-14);
}

TEST(Haar, OneByOneHasUnitModulus) {
  Rng r(108);
  for (int i = 0; i < 100; ++i) EXPECT_NEAR(std::abs(sample_haar_unitary(2, 1, r)(0, 0)), 1.0, 1e-15);
}

TEST(Haar, TruncationOfTwoIsUniform) {
  Rng r(109);
  std::vector<double> v(100000);
  for (auto& x : v) x = std::norm(sample_truncated_unitary(2, 2, 1, 1, r)(0, 0));
  KsResult ks = ks_one_sample(v, [](double t) { return std::clamp(t, 0.0, 1.0); });
  EXPECT_GT(ks.p_value, 1e-3) << "D=" << ks.D;
}

TEST(Haar, DimensionError) {
  Rng r(110);
  EXPECT_THROW(sample_truncated_unitary(2, 3, 4, 2, r), DimensionError);
}

TEST(Haar, InvarianceUnderFixedRotation) {
  // E Tr U = 0 and E |Tr U|^2 = 1 hold for V U when U is Haar.
  Rng r(111);
  const int K = 4, n = 40000;
  CMatrix V = sample_haar_unitary(2, K, r);
  std::vector<double> re, sq;
  for (int i = 0; i < n; ++i) {
    cplx t = (V * sample_haar_unitary(2, K, r)).trace();
    re.push_back(t.real());
    sq.push_back(std::norm(t));
  }
  MeanSe a = mean_se(re), b = mean_se(sq);
  EXPECT_LT(std::abs(a.mean), 4.0 * a.se);
  EXPECT_LT(std::abs(b.mean - 1.0), 4.0 * b.se);
}

TEST(Truncated, SingularValuesBelowOne) {
  Rng r(112);
  for (int i = 0; i < 50; ++i) {
    CMatrix T = sample_truncated_unitary(2, 7, 3, 3, r);
    Eigen::JacobiSVD<CMatrix> svd(T);
    EXPECT_LE(svd.singularValues().maxCoeff(), 1.0 + 1e-12);
  }
}

TEST(ProductSpec, Validation) {
  EXPECT_THROW(ProductSpec::truncated(2, 3, {2}, {2}).validate(), DomainError);
  EXPECT_NO_THROW(ProductSpec::truncated(2, 3, {0}, {1}).validate());
  ProductSpec bad = ProductSpec::ginibre(3, 2, {0});
  EXPECT_THROW(bad.validate(), DomainError);
  EXPECT_EQ(ProductSpec::ginibre(4, 2, {0}).gamma(), 2);
  EXPECT_EQ(ProductSpec::ginibre(1, 2, {0}).gamma(), 1);
  ProductSpec mixed = ProductSpec::mixed_inverse(2, 3, {0, 1}, {2});
  EXPECT_EQ(mixed.M(), 2);
  EXPECT_EQ(mixed.L(), 1);
}

TEST(Realize, EigenvalueSumRule) {
  // E sum |z|^2 = N (N + 1) / 2 for a single complex Ginibre matrix.
  ProductSpec spec = ProductSpec::ginibre(2, 2, {0});
  SampleBatch b = sample_spectra(spec, 100000, 113);
  std::vector<double> v;
  for (const auto& s : b.samples) {
    double t = 0.0;
    for (cplx z : s.eigenvalues) t += std::norm(z);
    v.push_back(t);
  }
  MeanSe m = mean_se(v);
  EXPECT_LT(std::abs(m.mean - 3.0), 4.0 * m.se) << m.mean;
}

TEST(Realize, TraceSumRule) {
  // E Tr X X^dagger = N^2, read off the squared singular values.
  ProductSpec spec = ProductSpec::ginibre(2, 2, {0});
  SampleBatch b = sample_spectra(spec, 50000, 114, {false, true});
  std::vector<double> v;
  for (const auto& s : b.samples) {
    double t = 0.0;
    for (double x : s.squared_singular_values) t += x;
    v.push_back(t);
  }
  MeanSe m = mean_se(v);
  EXPECT_LT(std::abs(m.mean - 4.0), 4.0 * m.se) << m.mean;
}

TEST(Realize, QuaternionConjugationClosed) {
  ProductSpec spec = ProductSpec::ginibre(4, 3, {0, 1});
  Rng r(115);
  for (int i = 0; i < 200; ++i) {
    auto s = realize_product(spec, r);
    ASSERT_TRUE(s);
    EXPECT_EQ(s->eigenvalues.size(), 3u);
    EXPECT_LT(s->conjugation_defect, 1e-10);
    for (cplx z : s->eigenvalues) EXPECT_GE(z.imag(), 0.0);
  }
}

TEST(Realize, CountsAndSingularValueOrder) {
  const std::vector<ProductSpec> specs = {
      ProductSpec::ginibre(2, 4, {0, 1}),        ProductSpec::ginibre(1, 4, {0, 2, 0}),
      ProductSpec::truncated(2, 3, {0, 0}, {2, 3}), ProductSpec::mixed_inverse(2, 3, {0}, {1}),
      ProductSpec::ginibre(4, 2, {0}),
  };
  Rng r(116);
  for (const auto& spec : specs) {
    for (int i = 0; i < 20; ++i) {
      auto s = realize_product(spec, r, {true, true});
      if (!s) continue;
      EXPECT_EQ(static_cast<int>(s->eigenvalues.size()), spec.N);
      ASSERT_EQ(static_cast<int>(s->squared_singular_values.size()), spec.N);
      for (int k = 0; k < spec.N; ++k) {
        EXPECT_GE(s->squared_singular_values[k], 0.0);
        if (k) EXPECT_LE(s->squared_singular_values[k - 1], s->squared_singular_values[k]);
      }
    }
  }
}

TEST(Realize, TruncatedProductInsideUnitDisc) {
  ProductSpec spec = ProductSpec::truncated(2, 3, {0, 0}, {2, 3});
  SampleBatch b = sample_spectra(spec, 500, 117);
  for (double r : radii(b)) EXPECT_LT(r, 1.0);
}

TEST(Realize, SerialAndParallelIdentical) {
  ProductSpec spec = ProductSpec::ginibre(2, 3, {0, 1});
  SampleBatch a = sample_spectra(spec, 300, 118, {true, true});
  SampleBatch b = sample_spectra_serial(spec, 300, 118, {true, true});
  ASSERT_EQ(a.samples.size(), b.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    EXPECT_EQ(a.samples[i].eigenvalues, b.samples[i].eigenvalues);
    EXPECT_EQ(a.samples[i].squared_singular_values, b.samples[i].squared_singular_values);
    EXPECT_EQ(a.samples[i].seed, 118u);
  }
}

TEST(Realize, OrderingInvariance) {
  SampleBatch a = sample_spectra(ProductSpec::ginibre(2, 3, {0, 2}), 20000, 119, {true, true});
  SampleBatch b = sample_spectra(ProductSpec::ginibre(2, 3, {2, 0}), 20000, 120, {true, true});
  EXPECT_GT(ks_two_sample(radii(a), radii(b)).p_value, 0.01);
  std::vector<double> sa, sb;
  for (const auto& s : a.samples) sa.insert(sa.end(), s.squared_singular_values.begin(), s.squared_singular_values.end());
  for (const auto& s : b.samples) sb.insert(sb.end(), s.squared_singular_values.begin(), s.squared_singular_values.end());
  EXPECT_GT(ks_two_sample(sa, sb).p_value, 0.01);
}

TEST(QrPositive, Factorization) {
  Rng r(121);
  for (int beta : {1, 2, 4}) {
    CMatrix A = sample_ginibre(beta, 4, 4, r);
    CMatrix R;
    CMatrix Q = qr_positive(beta, A, &R);
    EXPECT_LT((Q * R - A).norm(), 1e-12 * A.norm()) << beta;
    EXPECT_LT((Q.adjoint() * Q - CMatrix::Identity(Q.cols(), Q.cols())).norm(), 1e-12);
    for (int i = 0; i < R.rows(); ++i) {
      EXPECT_GT(R(i, i).real(), 0.0);
      EXPECT_EQ(R(i, i).imag(), 0.0);
    }
    if (beta == 4) EXPECT_LT(quaternion_defect(Q), 1e-12);
  }
}
