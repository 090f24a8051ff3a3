#include "rmt/exact_sv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <nlohmann/json.hpp>

#include "rmt/error.hpp"
#include "rmt/linalg.hpp"
#include "rmt/quadrature.hpp"

namespace rmt {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double lg(double x) { return specfun::ln_gamma(x); }

}  // namespace

std::string to_string(SvFamily f) {
  switch (f) {
    case SvFamily::Ginibre: return "ginibre";
    case SvFamily::InverseMixed: return "inverse_mixed";
    case SvFamily::Truncated: return "truncated";
  }
  return "unknown";
}

BiorthogonalSystem build_system(const ProductSpec& spec) {
  spec.validate();
  if (spec.beta != 2) throw UnsupportedError("build_system: singular-value systems exist for beta = 2 only");
  BiorthogonalSystem S;
  S.N = spec.N;
  int n_gin = 0, n_inv = 0, n_tr = 0;
  for (const FactorSpec& f : spec.factors) {
    switch (f.kind) {
      case FactorKind::Ginibre:
        S.nu.push_back(f.offset);
        ++n_gin;
        break;
      case FactorKind::InverseGinibre:
        S.mu.push_back(f.offset);
        ++n_inv;
        break;
      case FactorKind::TruncatedUnitary:
        S.nu.push_back(f.offset);
        S.kappa.push_back(f.truncation);
        ++n_tr;
        break;
      case FactorKind::InverseTruncatedUnitary:
        throw UnsupportedError("build_system: inverse truncated factors");
    }
  }
  if (n_tr > 0 && (n_gin > 0 || n_inv > 0)) throw UnsupportedError("build_system: truncated factors mixed with Ginibre factors");
  if (S.nu.empty()) throw UnsupportedError("build_system: at least one direct factor is required");
  S.family = n_tr > 0 ? SvFamily::Truncated : (n_inv > 0 ? SvFamily::InverseMixed : SvFamily::Ginibre);
  if (S.family == SvFamily::Truncated) {
    if (*std::min_element(S.kappa.begin(), S.kappa.end()) < S.N) S.flags.push_back("kappa_below_N");
  }
  return S;
}

double BiorthogonalSystem::log_h(int n) const {
  double v = lg(n + 1.0);
  for (int a : nu) v += lg(a + n + 1.0);
  for (int m : mu) {
    if (N + m - n <= 0) throw DomainError("BiorthogonalSystem: index beyond N + mu");
    v += lg(static_cast<double>(N + m - n));
  }
  for (int k : kappa) v -= lg(k + n + 1.0);
  return v;
}

double BiorthogonalSystem::log_abs_kernel_coefficient(int k) const {
  double v = -lg(k + 1.0);
  for (int a : nu) v -= lg(a + k + 1.0);
  for (int m : mu) v -= lg(static_cast<double>(N + m - k));
  for (int c : kappa) v += lg(c + k + 1.0);
  return v;
}

// c_{n,k} / c_{n,k+1}, a rational number.
long double BiorthogonalSystem::coefficient_ratio(int n, int k) const {
  long double r = -static_cast<long double>(k + 1) / (n - k);
  for (int a : nu) r *= a + k + 1;
  for (int m : mu) r /= N + m - k - 1;
  for (int c : kappa) r /= c + k + 1;
  return r;
}

double BiorthogonalSystem::coefficient(int n, int k) const {
  if (k < 0 || k > n) return 0.0;
  long double c = 1.0L;
  for (int j = n - 1; j >= k; --j) c *= coefficient_ratio(n, j);
  return static_cast<double>(c);
}

// Horner in long double; the monomial form loses digits to cancellation
// (about 1e-9 relative for n = 10 in the truncated family).
double BiorthogonalSystem::p(int n, double x) const {
  if (!mu.empty() && n >= N + *std::min_element(mu.begin(), mu.end())) throw DomainError("p: index beyond N + mu");
  long double s = 1.0L, c = 1.0L;
  for (int k = n - 1; k >= 0; --k) {
    c *= coefficient_ratio(n, k);
    s = s * x + c;
  }
  return static_cast<double>(s);
}

specfun::MeijerParams BiorthogonalSystem::psi_params(int n) const {
  specfun::MeijerParams P;
  P.m = M() + 1;
  P.b.push_back(0.0);
  for (int a : nu) P.b.push_back(a);
  switch (family) {
    case SvFamily::Ginibre:
      P.n = 0;
      P.a = {static_cast<double>(-n)};
      break;
    case SvFamily::InverseMixed:
      P.n = L();
      for (int m : mu) P.a.push_back(-static_cast<double>(N) - m);
      P.a.push_back(-n);
      break;
    case SvFamily::Truncated:
      P.n = 0;
      P.a.push_back(-n);
      for (int c : kappa) P.a.push_back(c);
      break;
  }
  return P;
}

double BiorthogonalSystem::psi(int n, double x, const specfun::MeijerOptions& opts) const {
  if (!(x > 0.0)) throw DomainError("psi: argument must be positive");
  if (x >= support_end()) return 0.0;
  return specfun::meijer_g(psi_params(n), x, opts);
}

double BiorthogonalSystem::psi_over_h(int n, double x, specfun::MeijerOptions opts) const {
  opts.log_prefactor -= log_h(n);
  return psi(n, x, opts);
}

double BiorthogonalSystem::log_abs_psi_mellin(int n, double s, int* sign) const {
  int sg = 1, t;
  double v = specfun::ln_abs_gamma(s, &t);
  sg *= t;
  for (int a : nu) {
    v += specfun::ln_abs_gamma(a + s, &t);
    sg *= t;
  }
  for (int m : mu) {
    v += specfun::ln_abs_gamma(1.0 + N + m - s, &t);
    sg *= t;
  }
  for (int c : kappa) {
    v -= specfun::ln_abs_gamma(c + s, &t);
    sg *= t;
  }
  const double d = s - n;
  if (d <= 0.0 && d == std::floor(d)) {
    *sign = 0;
    return kNegInf;
  }
  v -= specfun::ln_abs_gamma(d, &t);
  sg *= t;
  *sign = sg;
  return v;
}

cplx BiorthogonalSystem::log_contour_factor(cplx u) const {
  cplx v = specfun::ln_gamma(u + 1.0) - specfun::ln_gamma(u - static_cast<double>(N) + 1.0);
  for (int a : nu) v += specfun::ln_gamma(u + static_cast<double>(a) + 1.0);
  for (int m : mu) v += specfun::ln_gamma(static_cast<double>(N + m) - u);
  for (int c : kappa) v -= specfun::ln_gamma(u + static_cast<double>(c) + 1.0);
  return v;
}

bool BiorthogonalSystem::contour_convergent() const {
  if (family != SvFamily::Truncated) return true;
  int gap = 0;
  for (int m = 0; m < M(); ++m) gap += kappa[m] - nu[m];
  return gap > N;
}

// ---------------------------------------------------------------- kernels

double sv_kernel_sum(const BiorthogonalSystem& S, double x, double y) {
  specfun::MeijerOptions opts;
  opts.rel_tol = 1e-12;
  opts.throw_on_precision = false;
  double s = 0.0;
  for (int n = 0; n < S.N; ++n) s += S.p(n, x) * S.psi_over_h(n, y, opts);
  return s;
}

ContourValue sv_kernel_contour(const BiorthogonalSystem& S, double x, double y, double rel_tol) {
  ContourValue out;
  if (!(x > 0.0) || !(y > 0.0)) throw DomainError("sv_kernel_contour: arguments must be positive");
  if (!S.contour_convergent()) {
    out.used_fallback = true;
    out.warning = "contour integrand does not decay absolutely; sum form used";
    out.value = sv_kernel_sum(S, x, y);
    return out;
  }
  const int N = S.N;
  std::vector<double> lt(N);
  for (int k = 0; k < N; ++k) lt[k] = S.log_abs_kernel_coefficient(k) - lg(static_cast<double>(N - k)) + k * std::log(x);
  const double ly = std::log(y);
  auto f = [&](double t) {
    const cplx u(-0.5, t);
    const cplx base = S.log_contour_factor(u) - (u + 1.0) * ly;
    cplx s = 0.0;
    for (int k = 0; k < N; ++k) {
      cplx term = std::exp(base + lt[k]) / (u - static_cast<double>(k));
      s += ((N - 1 - k) % 2 == 0) ? term : -term;
    }
    return s.real();
  };
  quad::Result r = quad::adaptive(f, 0.0, std::numeric_limits<double>::infinity(), rel_tol, 24);
  out.value = r.value / kPi;
  out.error = r.error / kPi;
  return out;
}

double sv_kernel(const BiorthogonalSystem& S, double x, double y) {
  if (S.N <= 24) return sv_kernel_sum(S, x, y);
  ContourValue c = sv_kernel_contour(S, x, y);
  // Away from the hard edge the contour integrand cancels heavily (worst in
  // the inverse family); the sum is slower but stable there.
  if (c.used_fallback || c.error <= 1e-8 * std::max(1.0, std::abs(c.value))) return c.value;
  return sv_kernel_sum(S, x, y);
}

double sv_correlation_k(const BiorthogonalSystem& S, const std::vector<double>& points) {
  const int k = static_cast<int>(points.size());
  if (k > S.N) throw DomainError("sv_correlation_k: more points than singular values");
  if (k == 0) return 1.0;
  linalg::CMatrix A(k, k);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) A(i, j) = sv_kernel(S, points[i], points[j]);
  }
  linalg::LogDet d = linalg::logdet_scaled(A);
  if (!std::isfinite(d.log_magnitude)) return 0.0;
  return std::exp(d.log_magnitude) * d.phase.real();
}

// ---------------------------------------------------------------- grids

LogGrid make_log_grid(const BiorthogonalSystem& S, int nmax) {
  const quad::Rule& rule = quad::gauss_legendre(16);
  specfun::MeijerOptions opts;
  opts.rel_tol = 1e-10;
  opts.throw_on_precision = false;
  const double t_lo = -10.0;
  std::vector<double> cuts{t_lo, -8.0};
  std::vector<double> x_cuts;  // panels in x itself, truncated family only
  double tail_start = 0.0, tail_rate = 0.0;
  if (S.family == SvFamily::Truncated) {
    // Near x = 1 the integrands are polynomials of high degree in x, so the
    // top of the range is covered by panels in x rather than in log x.
    for (double t = -6.0; t <= -2.0; t += 1.0) cuts.push_back(t);
    const double x0 = std::exp(-2.0);
    const int panels = std::max(4, (nmax + 2 * S.N + 31) / 16);
    for (int i = 0; i <= panels; ++i) x_cuts.push_back(x0 + (1.0 - x0) * i / panels);
  } else {
    // Walk outward until x^(nmax+1) psi_l(x) is negligible against h. The
    // inverse family decays only like a power of x; past t = 8 its tail is
    // handed to a Gauss-Laguerre rule at the slowest decay rate.
    const double lh = 0.5 * (S.log_h(0) + S.log_h(nmax));
    double t = -6.0;
    for (;;) {
      cuts.push_back(t);
      if (S.family == SvFamily::InverseMixed && t >= 8.0) {
        tail_start = t;
        tail_rate = S.N + *std::min_element(S.mu.begin(), S.mu.end()) - nmax;
        break;
      }
      if (t > 1.0) {
        const double x = std::exp(t);
        double g = 0.0;
        for (int l : {0, nmax}) g = std::max(g, std::abs(S.psi(l, x, opts)));
        if (g == 0.0 || std::log(g) + (nmax + 1) * t - lh < std::log(1e-18)) break;
        if (t > 200.0) throw ConvergenceError("make_log_grid: psi does not decay");
      }
      t += 1.0;
    }
  }
  LogGrid g;
  // Below t_lo the integrands are e^t times a slowly varying function of t
  // (powers of t from the logarithmic terms) plus corrections of relative
  // size e^(j t_lo), which Gauss-Laguerre in t_lo - t integrates with few
  // nodes.
  const quad::Rule& lag = quad::gauss_laguerre(24);
  for (std::size_t j = 0; j < lag.x.size(); ++j) {
    const double t = t_lo - lag.x[j];
    const double x = std::exp(t);
    g.x.push_back(x);
    g.w.push_back(lag.w[j] * std::exp(t_lo));
  }
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double half = 0.5 * (cuts[i + 1] - cuts[i]), mid = 0.5 * (cuts[i + 1] + cuts[i]);
    for (int j = 0; j < 16; ++j) {
      const double t = mid + half * rule.x[j];
      const double x = std::exp(t);
      g.x.push_back(x);
      g.w.push_back(half * rule.w[j] * x);
    }
  }
  if (tail_rate > 0.0) {
    // t = tail_start + tau / tail_rate; the integrand behaves like
    // e^(-tau) times powers of tau.
    for (std::size_t j = 0; j < lag.x.size(); ++j) {
      const double t = tail_start + lag.x[j] / tail_rate;
      const double x = std::exp(t);
      g.x.push_back(x);
      g.w.push_back(lag.w[j] * std::exp(lag.x[j]) / tail_rate * x);
    }
  }
  for (std::size_t i = 0; i + 1 < x_cuts.size(); ++i) {
    const double half = 0.5 * (x_cuts[i + 1] - x_cuts[i]), mid = 0.5 * (x_cuts[i + 1] + x_cuts[i]);
    for (int j = 0; j < 16; ++j) {
      g.x.push_back(mid + half * rule.x[j]);
      g.w.push_back(half * rule.w[j]);
    }
  }
  return g;
}

namespace {

// psi_l at every grid node, l = 0..nmax.
std::vector<std::vector<double>> psi_table(const BiorthogonalSystem& S, const LogGrid& g, int nmax) {
  specfun::MeijerOptions opts;
  opts.rel_tol = 1e-10;
  opts.throw_on_precision = false;
  const int nodes = static_cast<int>(g.x.size());
  std::vector<std::vector<double>> tab(nmax + 1, std::vector<double>(nodes));
#pragma omp parallel for collapse(2) schedule(dynamic, 8)
  for (int l = 0; l <= nmax; ++l) {
    for (int i = 0; i < nodes; ++i) tab[l][i] = S.psi(l, g.x[i], opts);
  }
  return tab;
}

}  // namespace

GramReport gram_matrix(const BiorthogonalSystem& S, int nmax, double tolerance) {
  LogGrid g = make_log_grid(S, nmax);
  auto psi = psi_table(S, g, nmax);
  GramReport rep;
  rep.tolerance = tolerance;
  rep.G = Eigen::MatrixXd::Zero(nmax + 1, nmax + 1);
  rep.L1 = Eigen::MatrixXd::Zero(nmax + 1, nmax + 1);
  for (std::size_t i = 0; i < g.x.size(); ++i) {
    for (int k = 0; k <= nmax; ++k) {
      const double pk = S.p(k, g.x[i]) * g.w[i];
      for (int l = 0; l <= nmax; ++l) {
        rep.G(k, l) += pk * psi[l][i];
        rep.L1(k, l) += std::abs(pk * psi[l][i]);
      }
    }
  }
  for (int k = 0; k <= nmax; ++k) {
    for (int l = 0; l <= nmax; ++l) {
      const double target = k == l ? S.h(k) : 0.0;
      const double diff = std::abs(rep.G(k, l) - target);
      rep.max_deviation = std::max(rep.max_deviation, diff / (k == l ? S.h(k) : rep.L1(k, l)));
      rep.max_norm_scaled = std::max(rep.max_norm_scaled, diff / std::exp(0.5 * (S.log_h(k) + S.log_h(l))));
    }
  }
  rep.pass = rep.max_deviation <= tolerance;
  return rep;
}

// ---------------------------------------------------------------- multiple orthogonality

MultipleOrthogonalityReport check_multiple_orthogonality(const BiorthogonalSystem& S, int nmax,
                                                         double tolerance) {
  if (S.family == SvFamily::Truncated) throw UnsupportedError("check_multiple_orthogonality: truncated family");
  MultipleOrthogonalityReport rep;
  rep.tolerance = tolerance;
  const int M = S.M();
  // log of int x^(s-1) w_k(x) dx.
  auto log_moment = [&](int k, double s) -> long double {
    long double v = 0.0L;
    for (int m = 0; m < M; ++m) v += std::lgamma(static_cast<long double>(S.nu[m] + (m == M - 1 ? k : 0) + s));
    for (int mu : S.mu) {
      const double a = 1.0 + S.N + mu - s;
      if (!(a > 0.0)) return std::numeric_limits<long double>::quiet_NaN();
      v += std::lgamma(static_cast<long double>(a));
    }
    return v;
  };
  // int x^l p_n w_k with compensated long double summation; NaN if a
  // moment diverges. abs_sum receives the sum of |terms|.
  auto moment = [&](int n, int k, int l, long double* abs_sum) -> long double {
    long double sum = 0.0L, comp = 0.0L, as = 0.0L;
    for (int j = 0; j <= n; ++j) {
      long double lm = log_moment(k, l + j + 1.0);
      if (std::isnan(lm)) return lm;
      long double term = static_cast<long double>(S.coefficient(n, j)) * std::exp(lm);
      as += std::abs(term);
      long double y = term - comp, t = sum + y;
      comp = (t - sum) - y;
      sum = t;
    }
    if (abs_sum) *abs_sum = as;
    return sum;
  };
  for (int n = 1; n <= nmax; ++n) {
    if (S.family == SvFamily::InverseMixed && n >= S.N) break;
    for (int k = 0; k < M; ++k) {
      const int lmax = (n - k + M - 1) / M;  // ceil((n - k) / M)
      if (lmax <= 0) continue;
      long double ref = std::abs(moment(n, k, lmax, nullptr));
      for (int l = 0; l < lmax; ++l) {
        long double as = 0.0L;
        long double v = moment(n, k, l, &as);
        if (std::isnan(v)) continue;
        const long double scale = (std::isnan(ref) || ref == 0.0L) ? as : ref;
        MomentEntry e{n, k, l, static_cast<double>(v), static_cast<double>(std::abs(v) / scale)};
        rep.entries.push_back(e);
        rep.max_relative = std::max(rep.max_relative, e.relative);
        if (e.relative > tolerance) rep.violations.push_back(e);
      }
    }
  }
  rep.holds = rep.violations.empty();
  return rep;
}

// ---------------------------------------------------------------- recurrence

RecurrenceReport check_recurrence(const BiorthogonalSystem& S, int n, double tolerance) {
  if (S.family != SvFamily::Ginibre) throw UnsupportedError("check_recurrence: Ginibre family only");
  if (n < 0) throw DomainError("check_recurrence: negative index");
  const int M = S.M();
  const int top = n + M + 1;
  LogGrid g = make_log_grid(S, top);
  auto psi = psi_table(S, g, top);
  auto moment = [&](int i, int l) {
    double s = 0.0;
    for (std::size_t q = 0; q < g.x.size(); ++q) s += g.w[q] * g.x[q] * S.p(i, g.x[q]) * psi[l][q];
    return s;
  };
  RecurrenceReport rep;
  rep.n = n;
  rep.tolerance = tolerance;
  for (int m = 0; m <= M + 1; ++m) {
    rep.a.push_back(n - m >= 0 ? moment(n, n - m) / S.h(n - m) : 0.0);
    rep.b.push_back(moment(n + m, n) / S.h(n));
  }
  double amax = 0.0;
  for (double a : rep.a) amax = std::max(amax, std::abs(a));
  rep.participating_terms = 1;
  for (int m = 0; m <= M + 1; ++m) {
    if (std::abs(rep.a[m]) > 1e-8 * amax) ++rep.participating_terms;
  }
  specfun::MeijerOptions opts;
  opts.rel_tol = 1e-12;
  opts.throw_on_precision = false;
  for (double x : {0.1, 0.5, 1.0, 2.0, 3.0, 4.0, 5.0}) {
    double lhs = x * S.p(n, x), rhs = S.p(n + 1, x), scale = std::abs(lhs) + std::abs(rhs);
    for (int m = 0; m <= M && n - m >= 0; ++m) {
      const double t = rep.a[m] * S.p(n - m, x);
      rhs += t;
      scale += std::abs(t);
    }
    rep.p_residual = std::max(rep.p_residual, std::abs(lhs - rhs) / scale);

    double plhs = x * S.psi(n, x, opts) / S.h(n);
    double prhs = n > 0 ? S.psi(n - 1, x, opts) / S.h(n - 1) : 0.0;
    double pscale = std::abs(plhs) + std::abs(prhs);
    for (int m = 0; m <= M; ++m) {
      const double t = rep.b[m] * S.psi(n + m, x, opts) / S.h(n + m);
      prhs += t;
      pscale += std::abs(t);
    }
    rep.psi_residual = std::max(rep.psi_residual, std::abs(plhs - prhs) / pscale);
  }
  rep.pass = rep.p_residual <= tolerance && rep.psi_residual <= tolerance;
  return rep;
}

// ---------------------------------------------------------------- JSON

std::string to_json(const BiorthogonalSystem& S) {
  nlohmann::ordered_json j;
  j["family"] = to_string(S.family);
  j["N"] = S.N;
  j["nu"] = S.nu;
  j["mu"] = S.mu;
  j["kappa"] = S.kappa;
  j["flags"] = S.flags;
  std::vector<std::vector<double>> coeffs;
  std::vector<double> h;
  for (int n = 0; n < S.N; ++n) {
    std::vector<double> c;
    for (int k = 0; k <= n; ++k) c.push_back(S.coefficient(n, k));
    coeffs.push_back(std::move(c));
    h.push_back(S.h(n));
  }
  j["coefficients"] = coeffs;
  j["norms"] = h;
  return j.dump(2);
}

}  // namespace rmt
