#pragma once

#include <Eigen/Dense>
#include <complex>

namespace rmt::linalg {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using RMatrix = Eigen::MatrixXd;

// Antisymmetric complex matrix of even dimension. Construction from a general
// matrix keeps the strict upper triangle and mirrors it, so A = -A^T holds
// exactly.
class SkewMatrix {
 public:
  explicit SkewMatrix(const CMatrix& upper);
  static SkewMatrix zero(int dim);
  int dim() const { return static_cast<int>(a_.rows()); }
  void set(int i, int j, cplx v);  // also sets (j, i) = -v
  const CMatrix& matrix() const { return a_; }

 private:
  CMatrix a_;
};

// Pfaffian by skew-symmetric Gaussian elimination with row/column pivoting.
// Pf([[0,1],[-1,0]]) = 1.
cplx pfaffian(const SkewMatrix& A);

// Permanent by Ryser's inclusion-exclusion with Gray-code updates; n <= 14.
double permanent(const RMatrix& B);

struct LogDet {
  double log_magnitude;  // -inf for an exactly singular matrix
  cplx phase;            // unit modulus, 0 when singular
};

LogDet logdet_scaled(const CMatrix& A);

}  // namespace rmt::linalg
