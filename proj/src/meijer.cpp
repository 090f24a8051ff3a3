// Meijer G-function of real positive argument by Mellin-Barnes quadrature.
//
// The contour crosses the real axis at the minimum c of a smoothed log|f| in
// the strip separating the two pole families, then runs upward (vertically,
// or vertically for a short stretch and then along a ray at angle theta).
// Real parameters and argument make the integrand conjugate-symmetric, so
// G = (1/pi) Im int_0^inf f(s(t)) s'(t) dt.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "rmt/error.hpp"
#include "rmt/quadrature.hpp"
#include "rmt/specfun.hpp"

namespace rmt::specfun {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

bool is_nonpositive_integer(double x) { return x <= 0.0 && x == std::floor(x); }

bool supported_shape(int m, int n, int p, int q) {
  if (m < 1 || p > q) return false;
  if (m == q && (n == 0 || n == p - 1 || n == p)) return true;
  if (p == q && m + n == p) return true;
  if (n == 0 && (p == 0 || m == q - 1)) return true;
  if (m == 1 && n == p) return true;
  return false;
}

// log|1/Gamma(w)| with the oscillating |sin(pi w)| factor replaced by 1 for
// w < 1/2; continuous at w = 1/2 and free of the -inf spikes at the zeros.
double reciprocal_gamma_envelope(double w) {
  if (w >= 0.5) return -ln_gamma(w);
  return ln_gamma(1.0 - w) - std::log(kPi);
}

struct Integrand {
  const MeijerParams& P;
  double logx;

  cplx log_f(cplx s) const {
    cplx L = s * logx;
    for (int j = 0; j < P.m; ++j) L += ln_gamma(P.b[j] - s);
    for (int j = 0; j < P.n; ++j) L += ln_gamma(1.0 - P.a[j] + s);
    for (int j = P.m; j < P.q(); ++j) L -= ln_gamma(1.0 - P.b[j] + s);
    for (int j = P.n; j < P.p(); ++j) L -= ln_gamma(P.a[j] - s);
    return L;
  }

  double smoothed(double c) const {
    double v = c * logx;
    for (int j = 0; j < P.m; ++j) v += ln_gamma(P.b[j] - c);
    for (int j = 0; j < P.n; ++j) v += ln_gamma(1.0 - P.a[j] + c);
    for (int j = P.m; j < P.q(); ++j) v += reciprocal_gamma_envelope(1.0 - P.b[j] + c);
    for (int j = P.n; j < P.p(); ++j) v += reciprocal_gamma_envelope(P.a[j] - c);
    return v;
  }
};

double golden_min(const Integrand& F, double lo, double hi) {
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - r * (hi - lo), x2 = lo + r * (hi - lo);
  double f1 = F.smoothed(x1), f2 = F.smoothed(x2);
  for (int it = 0; it < 80 && hi - lo > 1e-10 * (1.0 + std::abs(lo)); ++it) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - r * (hi - lo);
      f1 = F.smoothed(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + r * (hi - lo);
      f2 = F.smoothed(x2);
    }
  }
  return 0.5 * (lo + hi);
}

// Crossing point: minimum of the smoothed log|f| over the pole-free strip.
double choose_crossing(const Integrand& F, double lo, double hi) {
  std::vector<double> grid;
  if (std::isfinite(lo)) {
    const double w = hi - lo;
    for (int i = 1; i < 64; ++i) grid.push_back(lo + w * i / 64.0);
  } else {
    for (double d = 1e-3; d < 2e4; d *= 1.25) grid.push_back(hi - d);
    std::reverse(grid.begin(), grid.end());
  }
  int best = 0;
  double fbest = kInf;
  for (int i = 0; i < static_cast<int>(grid.size()); ++i) {
    double v = F.smoothed(grid[i]);
    if (v < fbest) {
      fbest = v;
      best = i;
    }
  }
  double a = best > 0 ? grid[best - 1] : (std::isfinite(lo) ? lo + 1e-9 * (hi - lo) : grid[0] - 1.0);
  double b = best + 1 < static_cast<int>(grid.size()) ? grid[best + 1]
                                                      : hi - 1e-9 * std::max(1.0, hi - a);
  return golden_min(F, a, b);
}

struct Path {
  double c, h, theta;
  cplx point(double t) const {
    if (t <= h) return cplx(c, t);
    return cplx(c, h) + (t - h) * std::polar(1.0, theta);
  }
  cplx tangent(double t) const {
    if (t <= h) return cplx(0.0, 1.0);
    return std::polar(1.0, theta);
  }
};

}  // namespace

MeijerResult meijer_g_detail(const MeijerParams& P, double x, const MeijerOptions& opts) {
  const int m = P.m, n = P.n, p = P.p(), q = P.q();
  if (m < 0 || n < 0 || m > q || n > p) throw DomainError("meijer_g: inconsistent index counts");
  if (!(x > 0.0)) throw DomainError("meijer_g: argument must be positive");
  if (!supported_shape(m, n, p, q)) {
    throw UnsupportedError("meijer_g: unsupported parameter class G^{" + std::to_string(m) + "," +
                           std::to_string(n) + "}_{" + std::to_string(p) + "," + std::to_string(q) +
                           "}");
  }
  const double delta = m + n - 0.5 * (p + q);
  MeijerResult res;

  double sum_a = 0.0, sum_b = 0.0;
  for (double v : P.a) sum_a += v;
  for (double v : P.b) sum_b += v;

  if (p == q && delta == 0.0) {
    if (n == 0 && x > 1.0) return res;  // no poles on the left: closes to zero
    if (x == 1.0 && !(sum_a - sum_b > 1.5)) {
      throw ContourError("meijer_g: argument 1 is on the boundary of convergence for this class");
    }
  }

  double lo = -kInf, hi = kInf;
  for (int j = 0; j < n; ++j) lo = std::max(lo, P.a[j] - 1.0);
  for (int j = 0; j < m; ++j) hi = std::min(hi, P.b[j]);
  if (!(lo < hi)) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < m; ++k) {
        double d = P.a[j] - P.b[k];
        if (d > 0.0 && d == std::floor(d)) throw ContourError("meijer_g: pole families pinch the contour");
      }
    }
    throw ContourError("meijer_g: no straight contour separates the pole families");
  }

  Integrand F{P, std::log(x)};
  const double c = choose_crossing(F, lo, hi);
  const double scale = F.smoothed(c);
  if (scale + opts.log_prefactor > 700.0) throw RangeError("meijer_g: result overflows double");

  Path path{c, 0.0, kPi / 2};
  if (p < q) {
    if (delta <= 0.0) path = {c, 1.0, kPi / 4};
  } else if (delta > 0.0) {
    double th = std::atan2(kPi * delta, -std::log(x));
    path = {c, 1.0, std::clamp(th, kPi / 8, 7 * kPi / 8)};
  } else if (x < 1.0) {
    path = {c, 1.0, kPi / 4};
  } else if (x > 1.0) {
    path = {c, 1.0, 3 * kPi / 4};
  }

  auto log_abs = [&](double t) { return F.log_f(path.point(t)).real() - scale; };

  // Truncation: walk outward until |f| * t stays negligible against the peak.
  const double log_tol = std::log(opts.rel_tol) - 14.0;
  double peak = log_abs(0.0), t = 0.0, T = -1.0;
  int quiet = 0;
  while (t < 1e7) {
    double step = std::max(0.25, 0.05 * t);
    t += step;
    double v = log_abs(t);
    peak = std::max(peak, v);
    if (v + std::log(1.0 + t) < peak + log_tol) {
      if (++quiet >= 8) {
        T = t;
        break;
      }
    } else {
      quiet = 0;
    }
  }
  if (T < 0.0) throw PrecisionError("meijer_g: contour integrand does not decay", kInf);

  int evals = 0;
  auto g = [&](double tt) {
    ++evals;
    cplx s = path.point(tt);
    cplx L = F.log_f(s) - scale;
    if (!std::isfinite(L.real())) return 0.0;
    return (std::exp(L) * path.tangent(tt)).imag();
  };

  std::vector<double> cuts{0.0};
  if (path.h > 0.0 && path.h < T) cuts.push_back(path.h);
  double tc = cuts.back();
  while (tc < T) {
    tc = std::min(T, tc + std::max(2.0, 0.15 * tc));
    cuts.push_back(tc);
  }
  double value = 0.0, err = 0.0, l1 = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    quad::Result r = quad::adaptive(g, cuts[i], cuts[i + 1], opts.rel_tol * 1e-2, 14);
    value += r.value;
    err += r.error;
    l1 += r.l1;
  }
  err += 64.0 * std::numeric_limits<double>::epsilon() * l1;
  const double factor = std::exp(scale + opts.log_prefactor) / kPi;
  res.value = value * factor;
  res.abs_error = err * factor;
  res.l1 = l1 * factor;
  res.c = c;
  res.evaluations = evals;
  if (!std::isfinite(res.value)) throw RangeError("meijer_g: non-finite result");
  const double ref = std::max(std::abs(res.value), 1e-4 * res.l1);
  if (opts.throw_on_precision && res.abs_error > opts.rel_tol * ref) {
    throw PrecisionError("meijer_g: quadrature error " + std::to_string(res.abs_error) +
                             " exceeds tolerance",
                         res.abs_error);
  }
  return res;
}

double meijer_g(const MeijerParams& params, double x, const MeijerOptions& opts) {
  return meijer_g_detail(params, x, opts).value;
}

double meijer_g_series(const MeijerParams& P, double x) {
  const int m = P.m, n = P.n, p = P.p(), q = P.q();
  if (!(x > 0.0)) throw DomainError("meijer_g_series: argument must be positive");
  if (p > q || (p == q && x >= 1.0)) throw ConvergenceError("meijer_g_series: residue sum diverges");
  for (int h = 0; h < m; ++h) {
    for (int j = 0; j < m; ++j) {
      double d = P.b[j] - P.b[h];
      if (j != h && d == std::floor(d)) throw DomainError("meijer_g_series: poles are not simple");
    }
  }
  double total = 0.0;
  for (int h = 0; h < m; ++h) {
    const double bh = P.b[h];
    double logc = bh * std::log(x);
    int sign = 1;
    bool zero = false;
    auto mul = [&](double arg) {
      int s = 1;
      logc += ln_abs_gamma(arg, &s);
      sign *= s;
    };
    auto div = [&](double arg) {
      if (is_nonpositive_integer(arg)) {
        zero = true;
        return;
      }
      int s = 1;
      logc -= ln_abs_gamma(arg, &s);
      sign *= s;
    };
    for (int j = 0; j < m; ++j) {
      if (j != h) mul(P.b[j] - bh);
    }
    for (int j = 0; j < n; ++j) mul(1.0 + bh - P.a[j]);
    for (int j = m; j < q; ++j) div(1.0 + bh - P.b[j]);
    for (int j = n; j < p; ++j) div(P.a[j] - bh);
    if (zero) continue;
    HypergeometricParams hp;
    for (int j = 0; j < p; ++j) hp.upper.push_back(1.0 + bh - P.a[j]);
    for (int j = 0; j < q; ++j) {
      if (j != h) hp.lower.push_back(1.0 + bh - P.b[j]);
    }
    const double zs = ((p - m - n) % 2 == 0) ? x : -x;
    total += sign * std::exp(logc) * pfq(hp, zs).real();
  }
  return total;
}

}  // namespace rmt::specfun
