#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rmt/ensembles.hpp"
#include "rmt/specfun.hpp"

namespace rmt {

enum class SvFamily { Ginibre, InverseMixed, Truncated };

std::string to_string(SvFamily f);

// Biorthogonal system (p_n, psi_n, h_n) of the squared singular values of a
// beta = 2 product. p_n is monic; coefficients are stored as log-magnitude
// and sign so that N up to a few hundred stays in range.
class BiorthogonalSystem {
 public:
  SvFamily family = SvFamily::Ginibre;
  int N = 0;
  std::vector<int> nu, mu, kappa;
  std::vector<std::string> flags;  // e.g. "kappa_below_N"

  int M() const { return static_cast<int>(nu.size()); }
  int L() const { return static_cast<int>(mu.size()); }

  double log_h(int n) const;
  double h(int n) const { return std::exp(log_h(n)); }
  // Coefficient of x^k in p_n.
  double coefficient(int n, int k) const;
  double p(int n, double x) const;
  specfun::MeijerParams psi_params(int n) const;
  double psi(int n, double x, const specfun::MeijerOptions& opts = {}) const;
  // psi_n / h_n without forming either factor (both underflow for large kappa).
  double psi_over_h(int n, double x, specfun::MeijerOptions opts = {}) const;
  // log of int_0^inf x^(s-1) psi_n(x) dx; the sign is returned separately.
  double log_abs_psi_mellin(int n, double s, int* sign) const;
  // Largest x where psi can be nonzero (1 for the truncated family).
  double support_end() const { return family == SvFamily::Truncated ? 1.0 : HUGE_VAL; }

  // Building blocks of the kernel: coefficient of x^k in p_n / h_n and the
  // gamma factor F(u) of the contour representation.
  double log_abs_kernel_coefficient(int k) const;  // n-independent part
  cplx log_contour_factor(cplx u) const;
  // True when the contour integrand decays absolutely.
  bool contour_convergent() const;

 private:
  long double coefficient_ratio(int n, int k) const;
};

// Throws UnsupportedError for beta != 2 or factor mixes outside the three
// families.
BiorthogonalSystem build_system(const ProductSpec& spec);

double sv_kernel_sum(const BiorthogonalSystem& S, double x, double y);

struct ContourValue {
  double value = 0.0;
  double error = 0.0;
  bool used_fallback = false;
  std::string warning;
};

// Vertical-line representation; the residues of the second contour are
// summed in closed form. Falls back to the sum form when the integrand does
// not decay absolutely.
ContourValue sv_kernel_contour(const BiorthogonalSystem& S, double x, double y, double rel_tol = 1e-11);

// Sum form for N <= 24, contour form above unless its error estimate
// exceeds 1e-8 relative.
double sv_kernel(const BiorthogonalSystem& S, double x, double y);

double sv_correlation_k(const BiorthogonalSystem& S, const std::vector<double>& points);

// Shared quadrature nodes in t = log x used by the Gram and recurrence checks.
struct LogGrid {
  std::vector<double> x, w;  // w includes the Jacobian dx = x dt
};
LogGrid make_log_grid(const BiorthogonalSystem& S, int nmax);

struct GramReport {
  Eigen::MatrixXd G;          // G(k, l) = int p_k psi_l
  Eigen::MatrixXd L1;         // int |p_k psi_l|
  // |G_kk - h_k| / h_k on the diagonal, |G_kl| / L1_kl off it.
  double max_deviation = 0.0;
  // max |G_kl - h_k delta_kl| / sqrt(h_k h_l); dominated by rounding in
  // the large-x tail for M >= 3, reported for information only.
  double max_norm_scaled = 0.0;
  bool pass = false;
  double tolerance = 1e-8;
};
GramReport gram_matrix(const BiorthogonalSystem& S, int nmax, double tolerance = 1e-8);

struct MomentEntry {
  int n, k, l;
  double value;
  double relative;  // |value| / |first nonzero moment|
};

struct MultipleOrthogonalityReport {
  std::vector<MomentEntry> entries;
  std::vector<MomentEntry> violations;
  double max_relative = 0.0;
  bool holds = false;
  double tolerance = 1e-8;
};

// int x^l p_n w_k = 0 for k < M, l < ceil((n - k) / M), evaluated from the
// exact Mellin moments of the weights. Ginibre and inverse-mixed families.
MultipleOrthogonalityReport check_multiple_orthogonality(const BiorthogonalSystem& S, int nmax = 8,
                                                         double tolerance = 1e-8);

struct RecurrenceReport {
  int n = 0;
  std::vector<double> a;  // a_{m,n}, m = 0..M+1 (the last must vanish)
  std::vector<double> b;  // b_{m,n}, m = 0..M+1
  double p_residual = 0.0;
  double psi_residual = 0.0;
  int participating_terms = 0;
  bool pass = false;
  double tolerance = 1e-7;
};
RecurrenceReport check_recurrence(const BiorthogonalSystem& S, int n, double tolerance = 1e-7);

std::string to_json(const BiorthogonalSystem& S);

}  // namespace rmt
