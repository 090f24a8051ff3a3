#include "rmt/linalg.hpp"

#include <cmath>
#include <limits>

#include "rmt/error.hpp"

namespace rmt::linalg {

SkewMatrix::SkewMatrix(const CMatrix& upper) : a_(CMatrix::Zero(upper.rows(), upper.cols())) {
  if (upper.rows() != upper.cols()) throw DimensionError("SkewMatrix: matrix must be square");
  if (upper.rows() % 2 != 0) throw DomainError("SkewMatrix: odd dimension");
  const int n = static_cast<int>(upper.rows());
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      a_(i, j) = upper(i, j);
      a_(j, i) = -upper(i, j);
    }
  }
}

SkewMatrix SkewMatrix::zero(int dim) { return SkewMatrix(CMatrix::Zero(dim, dim)); }

void SkewMatrix::set(int i, int j, cplx v) {
  if (i == j) {
    if (v != 0.0) throw DomainError("SkewMatrix: diagonal must vanish");
    return;
  }
  a_(i, j) = v;
  a_(j, i) = -v;
}

cplx pfaffian(const SkewMatrix& S) {
  CMatrix A = S.matrix();
  const int n = static_cast<int>(A.rows());
  if (n % 2 != 0) throw DomainError("pfaffian: odd dimension");
  cplx pf = 1.0;
  for (int k = 0; k + 1 < n; k += 2) {
    int kp = k + 1;
    double best = std::abs(A(k + 1, k));
    for (int i = k + 2; i < n; ++i) {
      if (std::abs(A(i, k)) > best) {
        best = std::abs(A(i, k));
        kp = i;
      }
    }
    if (kp != k + 1) {
      A.row(k + 1).swap(A.row(kp));
      A.col(k + 1).swap(A.col(kp));
      pf = -pf;
    }
    if (A(k + 1, k) == 0.0) return 0.0;
    pf *= A(k, k + 1);
    if (k + 2 < n) {
      const int r = n - k - 2;
      Eigen::VectorXcd tau = A.row(k).tail(r).transpose() / A(k, k + 1);
      Eigen::VectorXcd col = A.col(k + 1).tail(r);
      A.bottomRightCorner(r, r) += tau * col.transpose() - col * tau.transpose();
    }
  }
  return pf;
}

double permanent(const RMatrix& B) {
  const int n = static_cast<int>(B.rows());
  if (B.cols() != n) throw DimensionError("permanent: matrix must be square");
  if (n > 14) throw SizeError("permanent: dimension above 14");
  if (n == 0) return 1.0;
  std::vector<double> rowsum(n, 0.0);
  double total = 0.0;
  unsigned gray = 0;
  const unsigned limit = 1u << n;
  for (unsigned k = 1; k < limit; ++k) {
    unsigned next = k ^ (k >> 1);
    unsigned diff = next ^ gray;
    int j = __builtin_ctz(diff);
    double sgn = (next & diff) ? 1.0 : -1.0;
    for (int i = 0; i < n; ++i) rowsum[i] += sgn * B(i, j);
    gray = next;
    double prod = 1.0;
    for (int i = 0; i < n; ++i) prod *= rowsum[i];
    int bits = __builtin_popcount(gray);
    total += ((n - bits) % 2 == 0) ? prod : -prod;
  }
  return total;
}

LogDet logdet_scaled(const CMatrix& A) {
  if (A.rows() != A.cols()) throw DimensionError("logdet_scaled: matrix must be square");
  const int n = static_cast<int>(A.rows());
  if (n == 0) return {0.0, 1.0};
  Eigen::FullPivLU<CMatrix> lu(A);
  const CMatrix& U = lu.matrixLU();
  double logmag = 0.0;
  cplx phase = 1.0;
  for (int i = 0; i < n; ++i) {
    cplx d = U(i, i);
    double ad = std::abs(d);
    if (ad == 0.0) return {-std::numeric_limits<double>::infinity(), 0.0};
    logmag += std::log(ad);
    phase *= d / ad;
  }
  phase *= static_cast<double>(lu.permutationP().determinant() * lu.permutationQ().determinant());
  return {logmag, phase};
}

}  // namespace rmt::linalg
