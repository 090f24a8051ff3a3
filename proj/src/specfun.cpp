#include "rmt/specfun.hpp"

#include <boost/math/special_functions/airy.hpp>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>
#include <cmath>
#include <numbers>
#include <string>

#include "rmt/error.hpp"

namespace rmt::specfun {

namespace {

constexpr double kPi = std::numbers::pi;
const cplx kI(0.0, 1.0);

// B_{2k} / (2k (2k-1)) for k = 1..10.
constexpr double kStirling[] = {
    1.0 / 12.0,          -1.0 / 360.0,        1.0 / 1260.0,
    -1.0 / 1680.0,       1.0 / 1188.0,        -691.0 / 360360.0,
    1.0 / 156.0,         -3617.0 / 122400.0,  43867.0 / 244188.0,
    -174611.0 / 125400.0};

// Neumaier compensated complex sum.
struct CompensatedSum {
  cplx sum = 0.0, comp = 0.0;
  void add(cplx v) {
    double sr = sum.real() + v.real();
    double cr = std::abs(sum.real()) >= std::abs(v.real())
                    ? (sum.real() - sr) + v.real()
                    : (v.real() - sr) + sum.real();
    double si = sum.imag() + v.imag();
    double ci = std::abs(sum.imag()) >= std::abs(v.imag())
                    ? (sum.imag() - si) + v.imag()
                    : (v.imag() - si) + sum.imag();
    sum = cplx(sr, si);
    comp += cplx(cr, ci);
  }
  cplx value() const { return sum + comp; }
};

bool is_nonpositive_integer(double x) {
  return x <= 0.0 && x == std::floor(x);
}

// log sin(pi z) for Im z > 0, without overflow for large Im z.
cplx log_sin_pi_upper(cplx z) {
  if (z.imag() < 5.0) return std::log(std::sin(kPi * z));
  cplx e = std::exp(2.0 * kPi * kI * z);
  return -kI * kPi * z + std::log(e - 1.0) - std::log(2.0 * kI);
}

cplx ln_gamma_stirling(cplx z) {
  cplx zi = 1.0 / z, zi2 = zi * zi, t = zi, s = 0.0;
  for (double c : kStirling) {
    s += c * t;
    t *= zi2;
  }
  return (z - 0.5) * std::log(z) - z + 0.5 * std::log(2.0 * kPi) + s;
}

}  // namespace

double ln_abs_gamma(double x, int* sign) {
  if (is_nonpositive_integer(x)) throw DomainError("ln_abs_gamma: pole at " + std::to_string(x));
  int sg = 1;
  double v = ::lgamma_r(x, &sg);
  if (sign) *sign = sg;
  return v;
}

double ln_gamma(double x) {
  if (!(x > 0.0)) throw DomainError("ln_gamma: argument must be positive");
  int sg = 1;
  return ::lgamma_r(x, &sg);
}

double digamma(double x) {
  if (!(x > 0.0)) throw DomainError("digamma: argument must be positive");
  return boost::math::digamma(x);
}

double trigamma(double x) {
  if (!(x > 0.0)) throw DomainError("trigamma: argument must be positive");
  return boost::math::trigamma(x);
}

cplx ln_gamma(cplx z) {
  if (z.imag() < 0.0) return std::conj(ln_gamma(std::conj(z)));
  if (z.imag() == 0.0) {
    if (is_nonpositive_integer(z.real())) return cplx(HUGE_VAL, 0.0);
    int sg = 1;
    double v = ::lgamma_r(z.real(), &sg);
    return cplx(v, sg < 0 ? kPi : 0.0);
  }
  if (z.real() < 0.5) {
    return std::log(kPi) - log_sin_pi_upper(z) - ln_gamma(1.0 - z);
  }
  cplx prod = 1.0;
  bool shifted = false;
  while (std::abs(z) < 10.0) {
    prod *= z;
    z += 1.0;
    shifted = true;
  }
  return shifted ? ln_gamma_stirling(z) - std::log(prod) : ln_gamma_stirling(z);
}

cplx pfq(const HypergeometricParams& params, cplx z, const SeriesOptions& opts) {
  for (double b : params.lower) {
    if (is_nonpositive_integer(b)) throw DomainError("pfq: lower parameter is a non-positive integer");
  }
  bool terminating = false;
  for (double a : params.upper) {
    if (is_nonpositive_integer(a)) terminating = true;
  }
  const std::size_t p = params.upper.size(), q = params.lower.size();
  if (!terminating && z != 0.0) {
    if (p > q + 1) throw ConvergenceError("pfq: series diverges (p > q + 1)");
    if (p == q + 1 && std::abs(z) >= 1.0) throw ConvergenceError("pfq: series diverges for |z| >= 1");
  }
  CompensatedSum sum;
  cplx term = 1.0;
  sum.add(term);
  int small_run = 0;
  for (int k = 0; k < opts.max_terms; ++k) {
    cplx ratio = z / (k + 1.0);
    for (double a : params.upper) ratio *= (a + k);
    for (double b : params.lower) ratio /= (b + k);
    term *= ratio;
    if (term == 0.0) return sum.value();
    sum.add(term);
    if (std::abs(term) < opts.tol * std::abs(sum.value())) {
      if (++small_run >= 3) return sum.value();
    } else {
      small_run = 0;
    }
  }
  throw ConvergenceError("pfq: series did not converge within max_terms");
}

double bessel_j(double nu, double x) {
  if (x < 0.0) {
    if (nu != std::floor(nu)) throw DomainError("bessel_j: negative argument needs integer order");
    double v = bessel_j(nu, -x);
    return (static_cast<long>(nu) % 2 == 0) ? v : -v;
  }
  if (nu < 0.0) {
    if (nu == std::floor(nu)) {
      double v = bessel_j(-nu, x);
      return (static_cast<long>(-nu) % 2 == 0) ? v : -v;
    }
    throw DomainError("bessel_j: negative non-integer order not supported");
  }
  double v = std::cyl_bessel_j(nu, x);
  if (!std::isfinite(v)) throw RangeError("bessel_j: result out of range");
  return v;
}

double bessel_j_prime(double nu, double x) {
  if (nu == 0.0) return -bessel_j(1.0, x);
  return 0.5 * (bessel_j(nu - 1.0, x) - bessel_j(nu + 1.0, x));
}

double airy_ai(double x) {
  double v = boost::math::airy_ai(x);
  if (!std::isfinite(v)) throw RangeError("airy_ai: result out of range");
  return v;
}

double airy_ai_prime(double x) {
  double v = boost::math::airy_ai_prime(x);
  if (!std::isfinite(v)) throw RangeError("airy_ai_prime: result out of range");
  return v;
}

cplx erfc_complex(cplx z) {
  if (z.real() < 0.0) return 2.0 - erfc_complex(-z);
  const double loss = 2.0 * z.real() * z.real() + std::log1p(std::abs(z));
  if (loss < 6.0 || std::abs(z) < 0.5) {
    // erf Taylor series; large terms only when Re z is large, excluded above.
    CompensatedSum sum;
    cplx z2 = z * z, term = z;
    sum.add(term);
    int small_run = 0;
    for (int k = 1; k < 5000; ++k) {
      term *= -z2 / static_cast<double>(k);
      cplx c = term / (2.0 * k + 1.0);
      sum.add(c);
      if (std::abs(c) < 1e-17 * std::abs(sum.value())) {
        if (++small_run >= 3) break;
      } else {
        small_run = 0;
      }
    }
    cplx v = 1.0 - 2.0 / std::sqrt(kPi) * sum.value();
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw RangeError("erfc_complex: overflow");
    return v;
  }
  // Continued fraction erfc(z) = exp(-z^2)/sqrt(pi) * 1/(z + (1/2)/(z + 1/(z + ...))),
  // evaluated by the modified Lentz method.
  const double tiny = 1e-300;
  cplx f = z, c = z, d = 0.0;
  for (int k = 1; k < 20000; ++k) {
    double ak = 0.5 * k;
    d = z + ak * d;
    if (std::abs(d) < tiny) d = tiny;
    c = z + ak / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    cplx delta = c * d;
    f *= delta;
    if (std::abs(delta - 1.0) < 1e-16) {
      cplx v = std::exp(-z * z) / (std::sqrt(kPi) * f);
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw RangeError("erfc_complex: overflow");
      return v;
    }
  }
  throw ConvergenceError("erfc_complex: continued fraction did not converge");
}

}  // namespace rmt::specfun
