#pragma once

#include <complex>
#include <vector>

namespace rmt::specfun {

using cplx = std::complex<double>;

double ln_gamma(double x);
double digamma(double x);
double trigamma(double x);

// log Gamma(z) on the principal sheet up to an additive multiple of 2*pi*i,
// which is all that exp() of a sum of these needs.
cplx ln_gamma(cplx z);

// log|Gamma(x)| and sign for any real x that is not a pole.
double ln_abs_gamma(double x, int* sign);

struct HypergeometricParams {
  std::vector<double> upper;
  std::vector<double> lower;
};

struct SeriesOptions {
  double tol = 1e-16;
  int max_terms = 200000;
};

cplx pfq(const HypergeometricParams& params, cplx z,
         const SeriesOptions& opts = {});

struct MeijerParams {
  int m = 0;
  int n = 0;
  std::vector<double> a;  // p upper parameters, first n enter as Gamma(1-a+s)
  std::vector<double> b;  // q lower parameters, first m enter as Gamma(b-s)
  int p() const { return static_cast<int>(a.size()); }
  int q() const { return static_cast<int>(b.size()); }
};

struct MeijerOptions {
  double rel_tol = 1e-9;
  bool throw_on_precision = true;
  // The result is multiplied by exp(log_prefactor) before leaving log space,
  // so G / c can be formed when G and c alone under- or overflow.
  double log_prefactor = 0.0;
};

struct MeijerResult {
  double value = 0.0;
  double abs_error = 0.0;
  double l1 = 0.0;        // integral of |integrand| along the contour
  double c = 0.0;         // real point where the contour crosses the axis
  int evaluations = 0;
};

MeijerResult meijer_g_detail(const MeijerParams& params, double x,
                             const MeijerOptions& opts = {});
double meijer_g(const MeijerParams& params, double x,
                const MeijerOptions& opts = {});

// Residue-sum expansion over the poles of the first m lower parameters.
// Only valid when those poles are simple (b_j - b_k not an integer) and
// p < q, or p == q with x < 1.
double meijer_g_series(const MeijerParams& params, double x);

double bessel_j(double nu, double x);
double bessel_j_prime(double nu, double x);
double airy_ai(double x);
double airy_ai_prime(double x);
cplx erfc_complex(cplx z);

}  // namespace rmt::specfun
