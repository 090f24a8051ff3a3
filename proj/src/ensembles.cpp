#include "rmt/ensembles.hpp"

#include <complex>
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>
#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>

#include "rmt/error.hpp"

namespace rmt {

std::string to_string(FactorKind k) {
  switch (k) {
    case FactorKind::Ginibre: return "ginibre";
    case FactorKind::InverseGinibre: return "inverse_ginibre";
    case FactorKind::TruncatedUnitary: return "truncated_unitary";
    case FactorKind::InverseTruncatedUnitary: return "inverse_truncated_unitary";
  }
  return "?";
}

FactorKind factor_kind_from_string(const std::string& s) {
  if (s == "ginibre") return FactorKind::Ginibre;
  if (s == "inverse_ginibre") return FactorKind::InverseGinibre;
  if (s == "truncated_unitary") return FactorKind::TruncatedUnitary;
  if (s == "inverse_truncated_unitary") return FactorKind::InverseTruncatedUnitary;
  throw DomainError("unknown factor kind '" + s + "'");
}

void ProductSpec::validate() const {
  if (beta != 1 && beta != 2 && beta != 4) throw DomainError("ProductSpec: beta must be 1, 2 or 4");
  if (N < 1) throw DomainError("ProductSpec: N must be positive");
  if (factors.empty()) throw DomainError("ProductSpec: no factors");
  for (const FactorSpec& f : factors) {
    if (f.offset < 0) throw DomainError("ProductSpec: negative dimension offset");
    if (f.truncated()) {
      if (f.truncation <= 0) throw DomainError("ProductSpec: truncation must be positive");
      if (f.truncation - f.offset <= 0) {
        throw DomainError("ProductSpec: truncated factor needs truncation > offset");
      }
    } else if (f.truncation != 0) {
      throw DomainError("ProductSpec: truncation given for a non-truncated factor");
    }
  }
}

std::vector<FactorSpec> ProductSpec::direct() const {
  std::vector<FactorSpec> out;
  for (const FactorSpec& f : factors) {
    if (!f.inverse()) out.push_back(f);
  }
  return out;
}

std::vector<FactorSpec> ProductSpec::inverse() const {
  std::vector<FactorSpec> out;
  for (const FactorSpec& f : factors) {
    if (f.inverse()) out.push_back(f);
  }
  return out;
}

ProductSpec ProductSpec::ginibre(int beta, int N, std::vector<int> nu) {
  ProductSpec s{beta, N, {}};
  for (int v : nu) s.factors.push_back({FactorKind::Ginibre, v, 0});
  return s;
}

ProductSpec ProductSpec::truncated(int beta, int N, std::vector<int> nu, std::vector<int> kappa) {
  if (nu.size() != kappa.size()) throw DimensionError("ProductSpec::truncated: nu and kappa lengths differ");
  ProductSpec s{beta, N, {}};
  for (std::size_t i = 0; i < nu.size(); ++i) s.factors.push_back({FactorKind::TruncatedUnitary, nu[i], kappa[i]});
  return s;
}

ProductSpec ProductSpec::mixed_inverse(int beta, int N, std::vector<int> nu, std::vector<int> mu) {
  ProductSpec s = ginibre(beta, N, std::move(nu));
  for (int v : mu) s.factors.push_back({FactorKind::InverseGinibre, v, 0});
  return s;
}

CMatrix sample_ginibre(int beta, int rows, int cols, Rng& rng) {
  if (rows < 1 || cols < 1) throw DimensionError("sample_ginibre: dimensions must be positive");
  if (beta == 1) {
    CMatrix X(rows, cols);
    for (int j = 0; j < cols; ++j) {
      for (int i = 0; i < rows; ++i) X(i, j) = rng.normal();
    }
    return X;
  }
  if (beta == 2) {
    CMatrix X(rows, cols);
    for (int j = 0; j < cols; ++j) {
      for (int i = 0; i < rows; ++i) X(i, j) = rng.complex_normal(1.0);
    }
    return X;
  }
  if (beta != 4) throw DomainError("sample_ginibre: beta must be 1, 2 or 4");
  CMatrix X(2 * rows, 2 * cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) {
      cplx a = rng.complex_normal(0.5), b = rng.complex_normal(0.5);
      X(2 * i, 2 * j) = a;
      X(2 * i, 2 * j + 1) = b;
      X(2 * i + 1, 2 * j) = -std::conj(b);
      X(2 * i + 1, 2 * j + 1) = std::conj(a);
    }
  }
  return X;
}

namespace {

Eigen::VectorXcd quaternion_partner(const Eigen::VectorXcd& v) {
  Eigen::VectorXcd w(v.size());
  for (Eigen::Index i = 0; i + 1 < v.size(); i += 2) {
    w(i) = -std::conj(v(i + 1));
    w(i + 1) = std::conj(v(i));
  }
  return w;
}

CMatrix qr_quaternion(const CMatrix& A, CMatrix* Rout) {
  const Eigen::Index rows = A.rows(), cols = A.cols();
  if (rows % 2 || cols % 2) throw DimensionError("qr_positive: quaternionic matrix needs even dimensions");
  CMatrix Q = CMatrix::Zero(rows, cols), R = CMatrix::Zero(cols, cols);
  for (Eigen::Index k = 0; k < cols; k += 2) {
    Eigen::VectorXcd v = A.col(k);
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index j = 0; j < k; ++j) {
        cplx c = Q.col(j).dot(v);
        R(j, k) += c;
        v -= c * Q.col(j);
      }
    }
    double nrm = v.norm();
    if (nrm == 0.0) throw DomainError("qr_positive: rank-deficient input");
    R(k, k) = nrm;
    Q.col(k) = v / nrm;
    Q.col(k + 1) = quaternion_partner(Q.col(k));
  }
  for (Eigen::Index i = 0; i < cols; i += 2) {
    for (Eigen::Index k = i; k < cols; k += 2) {
      R(i, k + 1) = -std::conj(R(i + 1, k));
      R(i + 1, k + 1) = std::conj(R(i, k));
    }
  }
  if (Rout) *Rout = R;
  return Q;
}

}  // namespace

CMatrix qr_positive(int beta, const CMatrix& A, CMatrix* Rout) {
  if (A.rows() < A.cols()) throw DimensionError("qr_positive: more columns than rows");
  if (beta == 4) return qr_quaternion(A, Rout);
  const Eigen::Index rows = A.rows(), cols = A.cols();
  Eigen::HouseholderQR<CMatrix> qr(A);
  CMatrix Q = qr.householderQ() * CMatrix::Identity(rows, cols);
  CMatrix R = qr.matrixQR().topRows(cols).triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < cols; ++i) {
    cplx d = R(i, i);
    double ad = std::abs(d);
    cplx ph = ad > 0.0 ? d / ad : cplx(1.0);
    Q.col(i) *= ph;
    R.row(i) *= std::conj(ph);
    R(i, i) = ad;
  }
  if (Rout) *Rout = R;
  return Q;
}

double quaternion_defect(const CMatrix& X) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i + 1 < X.rows(); i += 2) {
    for (Eigen::Index j = 0; j + 1 < X.cols(); j += 2) {
      worst = std::max(worst, std::abs(X(i, j) - std::conj(X(i + 1, j + 1))));
      worst = std::max(worst, std::abs(X(i, j + 1) + std::conj(X(i + 1, j))));
    }
  }
  return worst;
}

CMatrix sample_haar_unitary(int beta, int K, Rng& rng) {
  if (K < 1) throw DimensionError("sample_haar_unitary: K must be positive");
  return qr_positive(beta, sample_ginibre(beta, K, K, rng));
}

CMatrix sample_truncated_unitary(int beta, int K, int rows, int cols, Rng& rng) {
  if (rows < 1 || cols < 1 || K < std::max(rows, cols)) {
    throw DimensionError("sample_truncated_unitary: K must be at least max(rows, cols)");
  }
  const int s = beta == 4 ? 2 : 1;
  return sample_haar_unitary(beta, K, rng).topLeftCorner(s * rows, s * cols);
}

namespace {

CMatrix isotropic_square(int beta, int N, const CMatrix& block, Rng& rng) {
  CMatrix R;
  qr_positive(beta, block, &R);
  return sample_haar_unitary(beta, N, rng) * R;
}

}  // namespace

CMatrix sample_induced_ginibre(int beta, int N, int nu, Rng& rng) {
  if (nu < 0) throw DomainError("sample_induced_ginibre: negative offset");
  if (nu == 0) return sample_ginibre(beta, N, N, rng);
  return isotropic_square(beta, N, sample_ginibre(beta, N + nu, N, rng), rng);
}

CMatrix sample_factor(int beta, int N, const FactorSpec& f, Rng& rng) {
  if (!f.truncated()) return sample_induced_ginibre(beta, N, f.offset, rng);
  CMatrix block = sample_truncated_unitary(beta, N + f.truncation, N + f.offset, N, rng);
  if (f.offset == 0) return block;
  return isotropic_square(beta, N, block, rng);
}

namespace {

struct ScaledProduct {
  CMatrix P;
  double log_scale = 0.0;
};

ScaledProduct chain_product(const ProductSpec& spec, const std::vector<FactorSpec>& fs, Rng& rng) {
  const int dim = spec.beta == 4 ? 2 * spec.N : spec.N;
  ScaledProduct out{CMatrix::Identity(dim, dim), 0.0};
  for (const FactorSpec& f : fs) {
    out.P = sample_factor(spec.beta, spec.N, f, rng) * out.P;
    double s = out.P.cwiseAbs().maxCoeff();
    if (!(s > 0.0) || !std::isfinite(s)) return {CMatrix(), std::nan("")};
    out.P /= s;
    out.log_scale += std::log(s);
  }
  return out;
}

bool generalized_eigenvalues(CMatrix A, CMatrix B, std::vector<cplx>& out) {
  const lapack_int n = static_cast<lapack_int>(A.rows());
  std::vector<cplx> alpha(n), beta(n);
  cplx dummy;
  lapack_int info = LAPACKE_zggev(LAPACK_COL_MAJOR, 'N', 'N', n, A.data(), n, B.data(), n, alpha.data(),
                                  beta.data(), &dummy, 1, &dummy, 1);
  if (info != 0) return false;
  out.resize(n);
  for (lapack_int i = 0; i < n; ++i) {
    if (std::abs(beta[i]) == 0.0) return false;
    out[i] = alpha[i] / beta[i];
    if (!std::isfinite(out[i].real()) || !std::isfinite(out[i].imag())) return false;
  }
  return true;
}

std::vector<cplx> standard_eigenvalues(int beta, const CMatrix& P) {
  std::vector<cplx> ev;
  if (beta == 1) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(P.real(), false);
    for (Eigen::Index i = 0; i < P.rows(); ++i) ev.push_back(es.eigenvalues()(i));
  } else {
    Eigen::ComplexEigenSolver<CMatrix> es(P, false);
    for (Eigen::Index i = 0; i < P.rows(); ++i) ev.push_back(es.eigenvalues()(i));
  }
  return ev;
}

// Keeps the N eigenvalues with the largest imaginary parts and records how far
// the rest are from their conjugates.
void reduce_conjugate_pairs(std::vector<cplx>& ev, double& defect) {
  std::sort(ev.begin(), ev.end(), [](cplx a, cplx b) { return a.imag() > b.imag(); });
  const std::size_t n = ev.size() / 2;
  std::vector<cplx> kept(ev.begin(), ev.begin() + n);
  defect = 0.0;
  for (std::size_t i = n; i < ev.size(); ++i) {
    double best = HUGE_VAL;
    for (cplx k : kept) best = std::min(best, std::abs(std::conj(ev[i]) - k));
    defect = std::max(defect, best / std::max(1.0, std::abs(ev[i])));
  }
  for (cplx& k : kept) {
    if (k.imag() < 0.0) k = std::conj(k);
  }
  ev = std::move(kept);
}

}  // namespace

std::optional<SpectrumSample> realize_product(const ProductSpec& spec, Rng& rng, const RealizeOptions& opts) {
  const std::vector<FactorSpec> dir = spec.direct(), inv = spec.inverse();
  ScaledProduct X = chain_product(spec, dir, rng);
  if (!std::isfinite(X.log_scale)) return std::nullopt;
  ScaledProduct Y;
  if (!inv.empty()) {
    Y = chain_product(spec, inv, rng);
    if (!std::isfinite(Y.log_scale)) return std::nullopt;
  }
  SpectrumSample s;
  s.seed = rng.seed();
  s.stream = rng.stream();
  const double shift = X.log_scale - Y.log_scale;
  if (opts.eigenvalues) {
    std::vector<cplx> ev;
    if (inv.empty()) {
      ev = standard_eigenvalues(spec.beta, X.P);
    } else if (!generalized_eigenvalues(X.P, Y.P, ev)) {
      return std::nullopt;
    }
    const double f = std::exp(shift);
    for (cplx& z : ev) z *= f;
    if (spec.beta == 4) reduce_conjugate_pairs(ev, s.conjugation_defect);
    s.eigenvalues = std::move(ev);
  }
  if (opts.singular_values) {
    CMatrix Z = X.P;
    if (!inv.empty()) {
      Eigen::ColPivHouseholderQR<CMatrix> qr(Y.P);
      if (qr.rank() < Y.P.rows()) return std::nullopt;
      Z = qr.solve(X.P);
    }
    Eigen::JacobiSVD<CMatrix> svd(Z);
    Eigen::VectorXd sv = svd.singularValues();
    std::vector<double> x;
    const double f = std::exp(2.0 * shift);
    for (Eigen::Index i = 0; i < sv.size(); ++i) x.push_back(sv(i) * sv(i) * f);
    std::sort(x.begin(), x.end());
    if (spec.beta == 4) {
      std::vector<double> half;
      for (std::size_t i = 0; i < x.size(); i += 2) half.push_back(x[i]);
      x = std::move(half);
    }
    for (double v : x) {
      if (!std::isfinite(v)) return std::nullopt;
    }
    s.squared_singular_values = std::move(x);
  }
  return s;
}

std::vector<cplx> rectangular_chain_eigenvalues(int beta, const std::vector<int>& dims, Rng& rng) {
  if (dims.size() < 2) throw DimensionError("rectangular_chain_eigenvalues: need at least one factor");
  const int n = *std::min_element(dims.begin(), dims.end());
  if (dims.front() != n || dims.back() != n) {
    throw DimensionError("rectangular_chain_eigenvalues: outer dimensions must be the minimum");
  }
  CMatrix P = sample_ginibre(beta, dims[1], dims[0], rng);
  for (std::size_t j = 2; j < dims.size(); ++j) P = sample_ginibre(beta, dims[j], dims[j - 1], rng) * P;
  std::vector<cplx> ev = standard_eigenvalues(beta, P);
  if (beta == 4) {
    double defect = 0.0;
    reduce_conjugate_pairs(ev, defect);
  }
  return ev;
}

int worker_count() {
  if (const char* env = std::getenv("RMT_THREADS")) {
    int v = std::atoi(env);
    if (v > 0) return v;
  }
  return omp_get_max_threads();
}

namespace {

SampleBatch compact(std::vector<std::optional<SpectrumSample>>& slots) {
  SampleBatch b;
  for (auto& s : slots) {
    if (s) {
      b.samples.push_back(std::move(*s));
    } else {
      ++b.rejected;
    }
  }
  return b;
}

}  // namespace

SampleBatch sample_spectra_serial(const ProductSpec& spec, long count, std::uint64_t seed,
                                  const RealizeOptions& opts) {
  spec.validate();
  Rng root(seed);
  std::vector<std::optional<SpectrumSample>> slots(count);
  for (long i = 0; i < count; ++i) {
    Rng rng = root.split(static_cast<std::uint64_t>(i));
    slots[i] = realize_product(spec, rng, opts);
  }
  return compact(slots);
}

SampleBatch sample_spectra(const ProductSpec& spec, long count, std::uint64_t seed, const RealizeOptions& opts) {
  spec.validate();
  Rng root(seed);
  std::vector<std::optional<SpectrumSample>> slots(count);
  std::exception_ptr err;
#pragma omp parallel for schedule(dynamic, 256) num_threads(worker_count())
  for (long i = 0; i < count; ++i) {
    try {
      Rng rng = root.split(static_cast<std::uint64_t>(i));
      slots[i] = realize_product(spec, rng, opts);
    } catch (...) {
#pragma omp critical
      if (!err) err = std::current_exception();
    }
  }
  if (err) std::rethrow_exception(err);
  return compact(slots);
}

}  // namespace rmt
