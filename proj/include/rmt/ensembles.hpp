#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rmt/rng.hpp"

namespace rmt {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;

enum class FactorKind { Ginibre, InverseGinibre, TruncatedUnitary, InverseTruncatedUnitary };

std::string to_string(FactorKind k);
FactorKind factor_kind_from_string(const std::string& s);

struct FactorSpec {
  FactorKind kind = FactorKind::Ginibre;
  int offset = 0;      // nu for direct factors, mu for inverse factors
  int truncation = 0;  // kappa or tau, truncated kinds only

  bool inverse() const {
    return kind == FactorKind::InverseGinibre || kind == FactorKind::InverseTruncatedUnitary;
  }
  bool truncated() const {
    return kind == FactorKind::TruncatedUnitary || kind == FactorKind::InverseTruncatedUnitary;
  }
};

struct ProductSpec {
  int beta = 2;
  int N = 1;
  std::vector<FactorSpec> factors;

  int gamma() const { return beta == 4 ? 2 : 1; }
  // Throws DomainError on an invalid spec.
  void validate() const;

  std::vector<FactorSpec> direct() const;
  std::vector<FactorSpec> inverse() const;
  int M() const { return static_cast<int>(direct().size()); }
  int L() const { return static_cast<int>(inverse().size()); }

  static ProductSpec ginibre(int beta, int N, std::vector<int> nu);
  static ProductSpec truncated(int beta, int N, std::vector<int> nu, std::vector<int> kappa);
  static ProductSpec mixed_inverse(int beta, int N, std::vector<int> nu, std::vector<int> mu);
};

struct SpectrumSample {
  // N eigenvalues; for beta = 4 the N representatives with Im >= 0.
  std::vector<cplx> eigenvalues;
  // Ascending; empty unless requested.
  std::vector<double> squared_singular_values;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  // beta = 4 only: distance between the discarded half and the conjugates of
  // the kept half.
  double conjugation_defect = 0.0;
};

// Dense samplers. Quaternionic (beta = 4) matrices of quaternion size r x c
// are returned as 2r x 2c complex matrices built from blocks [[a, b], [-b*, a*]].
CMatrix sample_ginibre(int beta, int rows, int cols, Rng& rng);
CMatrix sample_induced_ginibre(int beta, int N, int nu, Rng& rng);
CMatrix sample_haar_unitary(int beta, int K, Rng& rng);
CMatrix sample_truncated_unitary(int beta, int K, int rows, int cols, Rng& rng);

// Thin QR with a positive real diagonal of R. For beta = 4 the factorization
// respects the quaternion structure (Q and R are quaternionic).
CMatrix qr_positive(int beta, const CMatrix& A, CMatrix* R = nullptr);

// J-symmetry residual max |X - J X* J^T| of a quaternionic representation.
double quaternion_defect(const CMatrix& X);

// One reduced square factor (N x N, or 2N x 2N for beta = 4) of an isotropic
// ensemble: the rectangular block is replaced by V R with R from its QR and
// V Haar.
CMatrix sample_factor(int beta, int N, const FactorSpec& f, Rng& rng);

struct RealizeOptions {
  bool eigenvalues = true;
  bool singular_values = false;
};

// Realizes one product. Returns nullopt when the inverse chain is numerically
// singular (the caller counts it as a rejection).
std::optional<SpectrumSample> realize_product(const ProductSpec& spec, Rng& rng,
                                              const RealizeOptions& opts = {});

// Eigenvalues of the literal rectangular Ginibre chain X_M ... X_1 with
// X_j of size dims[j] x dims[j-1]; requires dims.front() == dims.back() ==
// min(dims).
std::vector<cplx> rectangular_chain_eigenvalues(int beta, const std::vector<int>& dims, Rng& rng);

struct SampleBatch {
  std::vector<SpectrumSample> samples;
  long rejected = 0;
};

// Replica i uses the stream Rng(seed).split(i), so both variants produce
// identical batches. The parallel variant honours RMT_THREADS.
SampleBatch sample_spectra_serial(const ProductSpec& spec, long count, std::uint64_t seed,
                                  const RealizeOptions& opts = {});
SampleBatch sample_spectra(const ProductSpec& spec, long count, std::uint64_t seed,
                           const RealizeOptions& opts = {});

// Worker count: RMT_THREADS if set and positive, else the OpenMP default.
int worker_count();

}  // namespace rmt
