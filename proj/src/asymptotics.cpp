#include "rmt/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "rmt/error.hpp"
#include "rmt/exact_ev.hpp"
#include "rmt/exact_sv.hpp"
#include "rmt/linalg.hpp"
#include "rmt/quadrature.hpp"
#include "rmt/spec_json.hpp"
#include "rmt/specfun.hpp"

namespace rmt {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kEps = std::numeric_limits<double>::epsilon();

double log_prod_gamma(const std::vector<int>& p, double shift) {
  double s = 0.0;
  for (int v : p) s += specfun::ln_gamma(v + shift);
  return s;
}

// D_m(t) = (-d/dt)^m (1 - e^-t) / t = int_0^1 s^m e^(-t s) ds.
cplx weak_derivative(int m, cplx t) {
  const double a = std::abs(t);
  if (a <= 1.0) {
    // sum_j (-t)^j / (j! (j + m + 1)); terms fall at least geometrically.
    cplx term = 1.0, s = 1.0 / (m + 1.0);
    for (int j = 1; j < 200; ++j) {
      term *= -t / static_cast<double>(j);
      const cplx add = term / (j + m + 1.0);
      s += add;
      if (std::abs(add) < 1e-17 * std::abs(s)) break;
    }
    return s;
  }
  if (a >= 2.0 * (m + 1) + 40.0) {
    // m! / t^(m+1) (1 - e^-t sum_{k<=m} t^k / k!)
    cplx e = 1.0, term = 1.0;
    for (int k = 1; k <= m; ++k) {
      term *= t / static_cast<double>(k);
      e += term;
    }
    return std::exp(specfun::ln_gamma(m + 1.0) - (m + 1.0) * std::log(t)) * (1.0 - std::exp(-t) * e);
  }
  // Intermediate |t|: the integrand is entire and tame on [0, 1].
  const int n = std::min(512, 64 + 2 * static_cast<int>(a) + 2 * m);
  const quad::Rule& r = quad::gauss_legendre(n);
  cplx s = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = 0.5 * (1.0 + r.x[i]);
    s += 0.5 * r.w[i] * std::pow(u, m) * std::exp(-t * u);
  }
  return s;
}

// Bessel kernel on the diagonal: (J_nu^2 - J_{nu+1} J_{nu-1}) / 4 at sqrt(x).
double bessel_diag(double nu, double x) {
  const double r = std::sqrt(x);
  const double j = specfun::bessel_j(nu, r);
  return 0.25 * (j * j - specfun::bessel_j(nu + 1.0, r) * specfun::bessel_j(nu - 1.0, r));
}

double bessel_kernel(double nu, double x, double y) {
  if (!(x > 0.0) || !(y > 0.0)) throw DomainError("Bessel kernel: arguments must be positive");
  if (std::abs(x - y) < 1e-6 * std::max(1.0, std::abs(x))) return bessel_diag(nu, 0.5 * (x + y));
  const double sx = std::sqrt(x), sy = std::sqrt(y);
  const double num = sy * specfun::bessel_j(nu, sx) * specfun::bessel_j_prime(nu, sy) -
                     sx * specfun::bessel_j_prime(nu, sx) * specfun::bessel_j(nu, sy);
  return num / (2.0 * (x - y));
}

double sine_kernel(double x, double y) {
  const double d = x - y;
  if (std::abs(d) < 1e-6) return kPi * (1.0 - (kPi * d) * (kPi * d) / 6.0);
  return std::sin(kPi * d) / d;
}

double airy_kernel(double x, double y) {
  if (std::abs(x - y) < 1e-6 * std::max(1.0, std::abs(x))) {
    const double m = 0.5 * (x + y), a = specfun::airy_ai(m), ap = specfun::airy_ai_prime(m);
    return ap * ap - m * a * a;
  }
  return (specfun::airy_ai(x) * specfun::airy_ai_prime(y) - specfun::airy_ai_prime(x) * specfun::airy_ai(y)) / (x - y);
}

}  // namespace

std::string to_string(LimitKind k) {
  switch (k) {
    case LimitKind::OriginHypergeometric: return "origin_hypergeometric";
    case LimitKind::OriginTruncated: return "origin_truncated";
    case LimitKind::BulkGinibre: return "bulk_ginibre";
    case LimitKind::SoftEdgeErfc: return "soft_edge_erfc";
    case LimitKind::WeakNonUnitarity: return "weak_non_unitarity";
    case LimitKind::MeijerHardEdge: return "meijer_hard_edge";
    case LimitKind::MeijerHardEdgeTruncated: return "meijer_hard_edge_truncated";
    case LimitKind::Bessel: return "bessel";
    case LimitKind::Sine: return "sine";
    case LimitKind::Airy: return "airy";
  }
  return "?";
}

LimitKind limit_kind_from_string(const std::string& s) {
  for (LimitKind k : {LimitKind::OriginHypergeometric, LimitKind::OriginTruncated, LimitKind::BulkGinibre,
                      LimitKind::SoftEdgeErfc, LimitKind::WeakNonUnitarity, LimitKind::MeijerHardEdge,
                      LimitKind::MeijerHardEdgeTruncated, LimitKind::Bessel, LimitKind::Sine, LimitKind::Airy}) {
    if (to_string(k) == s) return k;
  }
  throw DomainError("unknown limit kernel '" + s + "'");
}

double meijer_hard_edge(const LimitKernel& k, double x, double y, HardEdgeForm form) {
  if (!(x > 0.0) || !(y > 0.0)) throw DomainError("meijer_hard_edge: arguments must be positive");
  const int M = k.M();
  const int J = k.kind == LimitKind::MeijerHardEdgeTruncated ? k.J() : 0;
  if (M < 1) throw DomainError("meijer_hard_edge: need at least one nu");
  if (J > M) throw DomainError("meijer_hard_edge: more fixed truncations than factors");

  specfun::HypergeometricParams hp;
  specfun::MeijerParams first, second;
  double log_pref = -log_prod_gamma(k.nu, 1.0);
  for (int v : k.nu) hp.lower.push_back(v + 1.0);
  first.m = 1;
  first.n = J;
  first.b.push_back(0.0);
  for (int v : k.nu) first.b.push_back(-v);
  second.m = M;
  second.n = 0;
  for (int v : k.nu) second.b.push_back(v);
  second.b.push_back(0.0);
  for (int j = 0; j < J; ++j) {
    hp.upper.push_back(k.kappa[j] + 1.0);
    log_pref += specfun::ln_gamma(k.kappa[j] + 1.0);
    first.a.push_back(-k.kappa[j]);
    second.a.push_back(k.kappa[j]);
  }
  specfun::MeijerOptions opts;
  opts.rel_tol = 1e-12;
  opts.throw_on_precision = false;
  // The Gamma prefactor moves onto the second factor; large nu would overflow it otherwise.
  specfun::MeijerOptions first_opts = opts, second_opts = opts;
  first_opts.log_prefactor = -log_pref;
  second_opts.log_prefactor = log_pref;

  auto integrand = [&](double s) {
    const double a = form == HardEdgeForm::Hypergeometric ? specfun::pfq(hp, -s * x).real()
                                                          : specfun::meijer_g(first, s * x, first_opts);
    return a * specfun::meijer_g(second, s * y, second_opts);
  };
  // s = w^4 removes the logarithmic endpoint behaviour at s = 0.
  auto rule = [&](int n) {
    const quad::Rule& r = quad::gauss_legendre(n);
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      const double w = 0.5 * (1.0 + r.x[i]);
      const double w3 = w * w * w;
      acc += 0.5 * r.w[i] * 4.0 * w3 * integrand(w3 * w);
    }
    return acc;
  };
  double prev = rule(64);
  for (int n = 128; n <= 1024; n *= 2) {
    const double cur = rule(n);
    if (std::abs(cur - prev) <= 1e-9 * std::abs(cur)) return cur;
    prev = cur;
  }
  throw ConvergenceError("meijer_hard_edge: s-integral did not settle");
}

cplx eval_limit_kernel(const LimitKernel& k, cplx u, cplx v) {
  switch (k.kind) {
    case LimitKind::OriginHypergeometric:
    case LimitKind::OriginTruncated: {
      specfun::HypergeometricParams hp;
      hp.upper.push_back(1.0);
      double lp = -log_prod_gamma(k.nu, 1.0);
      if (k.kind == LimitKind::OriginTruncated) {
        for (int c : k.kappa) {
          hp.upper.push_back(c + 1.0);
          lp += specfun::ln_gamma(c + 1.0);
        }
      }
      for (int n : k.nu) hp.lower.push_back(n + 1.0);
      const cplx z = u * std::conj(v);
      if (hp.upper.size() > hp.lower.size() + 1 ||
          (hp.upper.size() == hp.lower.size() + 1 && std::abs(z) >= 1.0)) {
        throw DomainError("origin kernel: series diverges for these parameters");
      }
      return std::exp(lp) * specfun::pfq(hp, z) / kPi;
    }
    case LimitKind::BulkGinibre:
      return std::exp(-0.5 * std::norm(u) - 0.5 * std::norm(v) + u * std::conj(v)) / kPi;
    case LimitKind::SoftEdgeErfc:
      return std::exp(-0.5 * std::norm(u) - 0.5 * std::norm(v) + u * std::conj(v)) *
             specfun::erfc_complex((std::conj(k.z0) * u + std::conj(v) * k.z0) / std::sqrt(2.0)) / (2.0 * kPi);
    case LimitKind::WeakNonUnitarity: {
      const int m = k.M_weak * k.kappa_weak;
      if (m < 1) throw DomainError("weak kernel: M kappa must be positive");
      const double xj = u.real(), xl = v.real();
      if (xj <= 0.0 || xl <= 0.0) return 0.0;
      const cplx t = cplx(xj + xl, u.imag() - v.imag()) / static_cast<double>(k.M_weak);
      const double lp = 0.5 * (m - 1) * std::log(4.0 * xj * xl) - specfun::ln_gamma(static_cast<double>(m));
      return std::exp(lp) * weak_derivative(m, t) / kPi;
    }
    case LimitKind::MeijerHardEdge:
    case LimitKind::MeijerHardEdgeTruncated:
    case LimitKind::Bessel:
    case LimitKind::Sine:
    case LimitKind::Airy:
      if (u.imag() != 0.0 || v.imag() != 0.0) throw DomainError("eval_limit_kernel: real arguments required");
      return eval_limit_kernel(k, u.real(), v.real());
  }
  throw DomainError("eval_limit_kernel: unknown kind");
}

double eval_limit_kernel(const LimitKernel& k, double x, double y) {
  switch (k.kind) {
    case LimitKind::MeijerHardEdge:
    case LimitKind::MeijerHardEdgeTruncated:
      return meijer_hard_edge(k, x, y);
    case LimitKind::Bessel:
      return bessel_kernel(k.nu.empty() ? 0.0 : k.nu[0], x, y);
    case LimitKind::Sine:
      return sine_kernel(x, y);
    case LimitKind::Airy:
      return airy_kernel(x, y);
    default:
      return eval_limit_kernel(k, cplx(x), cplx(y)).real();
  }
}

double origin_weight(const LimitKernel& k, cplx z) {
  specfun::MeijerParams p;
  p.m = k.M();
  p.n = 0;
  for (int v : k.nu) p.b.push_back(v);
  if (k.kind == LimitKind::OriginTruncated) {
    for (int c : k.kappa) p.a.push_back(c);
  }
  const double t = std::norm(z);
  if (t == 0.0) throw DomainError("origin_weight: z = 0");
  if (k.kind == LimitKind::OriginTruncated && static_cast<int>(p.a.size()) == p.m && t >= 1.0) return 0.0;
  return specfun::meijer_g(p, t);
}

// ---------------------------------------------------------------- convergence

std::string ConvergenceReport::to_json() const {
  ojson j;
  j["kind"] = kind;
  j["spec"] = spec_to_json(spec);
  j["N"] = N;
  ojson g = ojson::array();
  for (cplx z : grid) g.push_back({z.real(), z.imag()});
  j["grid"] = g;
  j["deviations"] = deviation;
  if (!bound.empty()) j["bounds"] = bound;
  j["scaling"] = scaling;
  j["decreasing"] = decreasing;
  j["within_bound"] = within_bound;
  return j.dump(2);
}

ConvergenceReport converge_origin(const ProductSpec& spec, const std::vector<int>& Ns) {
  spec.validate();
  if (spec.beta != 2) throw UnsupportedError("converge_origin: beta = 2 only");
  std::vector<int> nu, mu;
  for (const FactorSpec& f : spec.factors) {
    if (f.kind == FactorKind::Ginibre) nu.push_back(f.offset);
    else if (f.kind == FactorKind::InverseGinibre) mu.push_back(f.offset);
    else throw UnsupportedError("converge_origin: Ginibre and inverse Ginibre factors only");
  }
  if (nu.empty()) throw UnsupportedError("converge_origin: needs a direct factor");
  const int L = static_cast<int>(mu.size());

  ConvergenceReport rep;
  rep.kind = "origin";
  rep.spec = spec;
  rep.N = Ns;
  rep.scaling = L == 0 ? "none" : "z / N^(L/2), R / N^(kL)";
  const double g[5] = {-0.6, -0.3, 0.0, 0.3, 0.6};
  for (double a : g) {
    for (double b : g) rep.grid.emplace_back(a, b);
  }
  LimitKernel lim;
  lim.kind = LimitKind::OriginHypergeometric;
  lim.nu = nu;
  const double norm = kPi * std::exp(log_prod_gamma(nu, 1.0));
  const std::size_t P = rep.grid.size();

  std::vector<cplx> Kinf(P * P);
  for (std::size_t i = 0; i < P; ++i) {
    for (std::size_t j = 0; j < P; ++j) Kinf[i * P + j] = eval_limit_kernel(lim, rep.grid[i], rep.grid[j]);
  }
  std::vector<double> w_inf;
  if (L > 0) {
    for (cplx z : rep.grid) w_inf.push_back(z == 0.0 ? 0.0 : origin_weight(lim, z));
  }

  double q = 0.0;  // max |u v*| on the grid
  for (cplx z : rep.grid) q = std::max(q, std::norm(z));
  // Rounding floor: sum of |terms| of the limit series at |u v*| = q.
  double abs_series = 0.0;
  for (int n = 0; n < 400; ++n) abs_series += std::exp(n * std::log(std::max(q, 1e-300)) + log_prod_gamma(nu, 1.0) - log_prod_gamma(nu, n + 1.0));
  const double floor = 16.0 * kEps * abs_series;

  for (int N : Ns) {
    ProductSpec s = spec;
    s.N = N;
    KernelModel K(s);
    double dev = 0.0;
    if (L == 0) {
      for (std::size_t i = 0; i < P; ++i) {
        for (std::size_t j = 0; j < P; ++j) {
          dev = std::max(dev, std::abs(K.kernel(rep.grid[i], rep.grid[j]) - Kinf[i * P + j]) * norm);
        }
      }
      // First omitted term times the geometric factor of the ratio bound.
      const double lt = N * std::log(q) + log_prod_gamma(nu, 1.0) - log_prod_gamma(nu, N + 1.0);
      double ratio = q;
      for (int v : nu) ratio /= (v + N + 1.0);
      rep.bound.push_back(std::exp(lt) / (1.0 - ratio) + floor);
    } else {
      const double sc = std::pow(static_cast<double>(N), 0.5 * L);
      const double kscale = std::pow(static_cast<double>(N), static_cast<double>(L));
      std::vector<double> wn;
      for (cplx z : rep.grid) wn.push_back(z == 0.0 ? 0.0 : weight_eval(K.weight(), z / sc));
      for (std::size_t i = 0; i < P; ++i) {
        for (std::size_t j = 0; j < P; ++j) {
          if (rep.grid[i] == 0.0 || rep.grid[j] == 0.0) continue;  // w has a log singularity there
          const cplx kn = std::sqrt(wn[i] * wn[j]) * K.kernel(rep.grid[i] / sc, rep.grid[j] / sc) / kscale;
          const cplx ki = std::sqrt(w_inf[i] * w_inf[j]) * Kinf[i * P + j];
          dev = std::max(dev, std::abs(kn - ki));
        }
      }
    }
    rep.deviation.push_back(dev);
  }
  rep.decreasing = true;
  for (std::size_t i = 1; i < rep.deviation.size(); ++i) {
    if (rep.deviation[i] > rep.deviation[i - 1] + floor) rep.decreasing = false;
  }
  if (!rep.bound.empty()) {
    for (std::size_t i = 0; i < rep.deviation.size(); ++i) {
      if (rep.deviation[i] > rep.bound[i]) rep.within_bound = false;
    }
  }
  return rep;
}

ConvergenceReport converge_hard_edge(const ProductSpec& spec, const std::vector<int>& Ns) {
  spec.validate();
  if (spec.beta != 2) throw UnsupportedError("converge_hard_edge: beta = 2 only");
  std::vector<int> nu;
  int L = 0, T = 0;
  for (const FactorSpec& f : spec.factors) {
    if (f.kind == FactorKind::InverseGinibre) ++L;
    else nu.push_back(f.offset);
    if (f.kind == FactorKind::TruncatedUnitary) ++T;
  }
  // Growing truncations count towards L in the scaling exponent.
  const int Lscale = L + T;
  ConvergenceReport rep;
  rep.kind = "hard_edge";
  rep.spec = spec;
  rep.N = Ns;
  rep.scaling = Lscale == 0 ? "K_N(x/N, y/N) / N" : "K_N(x/N^(L+1), y/N^(L+1)) / N^(L+1)";
  const double xs[3] = {0.5, 1.0, 2.0};
  for (double x : xs) rep.grid.emplace_back(x, 0.0);

  LimitKernel lim;
  lim.kind = LimitKind::MeijerHardEdge;
  lim.nu = nu;
  double Klim[3][3];
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) Klim[i][j] = meijer_hard_edge(lim, xs[i], xs[j]);
  }
  for (int N : Ns) {
    ProductSpec s = spec;
    s.N = N;
    for (FactorSpec& f : s.factors) {
      if (f.kind == FactorKind::TruncatedUnitary) f.truncation += N;
    }
    BiorthogonalSystem S = build_system(s);
    const double sc = std::pow(static_cast<double>(N), Lscale + 1.0);
    double dev = 0.0;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) dev = std::max(dev, std::abs(sv_kernel(S, xs[i] / sc, xs[j] / sc) / sc - Klim[i][j]));
    }
    rep.deviation.push_back(dev);
  }
  rep.decreasing = true;
  for (std::size_t i = 1; i < rep.deviation.size(); ++i) {
    if (!(rep.deviation[i] < rep.deviation[i - 1])) rep.decreasing = false;
  }
  return rep;
}

double weak_kernel_density(int M, int kappa, const std::vector<cplx>& points) {
  if (M < 1 || kappa < 1) throw DomainError("weak_kernel_density: M kappa must be positive");
  LimitKernel k;
  k.kind = LimitKind::WeakNonUnitarity;
  k.M_weak = M;
  k.kappa_weak = kappa;
  const int n = static_cast<int>(points.size());
  if (n == 0) return 1.0;
  linalg::CMatrix A(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) A(i, j) = eval_limit_kernel(k, points[i], points[j]);
  }
  linalg::LogDet d = linalg::logdet_scaled(A);
  if (!std::isfinite(d.log_magnitude)) return 0.0;
  return std::exp(d.log_magnitude) * d.phase.real();
}

}  // namespace rmt
