#include "rmt/exact_ev.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "rmt/error.hpp"
#include "rmt/linalg.hpp"
#include "rmt/quadrature.hpp"

namespace rmt {

namespace {

constexpr double kPi = std::numbers::pi;

double checked_ln_gamma(double x, const char* what) {
  if (!(x > 0.0)) throw DomainError(std::string(what) + ": gamma argument is not positive");
  return specfun::ln_gamma(x);
}

// x^k for complex x and integer k >= 0 without going through log.
cplx ipow(cplx x, int k) {
  cplx r = 1.0, b = x;
  while (k > 0) {
    if (k & 1) r *= b;
    b *= b;
    k >>= 1;
  }
  return r;
}

}  // namespace

WeightModel WeightModel::from_spec(const ProductSpec& spec) {
  spec.validate();
  if (spec.beta == 1) throw UnsupportedError("WeightModel: complex-eigenvalue weight for beta = 1");
  if (spec.M() == 0) throw UnsupportedError("WeightModel: at least one direct factor is required");
  WeightModel w;
  w.spec = spec;
  const int N = spec.N;
  const bool quat = spec.beta == 4;
  std::vector<double> b_head, b_tail, a_head, a_tail;
  bool any_ginibre = false;
  for (const FactorSpec& f : spec.factors) {
    switch (f.kind) {
      case FactorKind::Ginibre:
        b_head.push_back(quat ? 2.0 * f.offset : f.offset);
        if (quat) w.arg_scale *= 2.0;
        any_ginibre = true;
        break;
      case FactorKind::TruncatedUnitary:
        b_head.push_back(quat ? 2.0 * f.offset : f.offset);
        a_tail.push_back(quat ? 2.0 * f.truncation - 1.0 : f.truncation);
        break;
      case FactorKind::InverseGinibre:
        a_head.push_back(quat ? -2.0 * N - 2.0 * f.offset - 1.0 : -static_cast<double>(N) - f.offset);
        if (quat) w.arg_scale *= 0.5;
        break;
      case FactorKind::InverseTruncatedUnitary:
        if (quat) throw UnsupportedError("WeightModel: inverse truncated factors for beta = 4");
        a_head.push_back(-static_cast<double>(N) - f.offset);
        b_tail.push_back(-static_cast<double>(N) - f.truncation);
        break;
    }
  }
  for (auto* v : {&b_head, &b_tail, &a_head, &a_tail}) std::sort(v->begin(), v->end());
  w.meijer.m = static_cast<int>(b_head.size());
  w.meijer.n = static_cast<int>(a_head.size());
  w.meijer.b = b_head;
  w.meijer.b.insert(w.meijer.b.end(), b_tail.begin(), b_tail.end());
  w.meijer.a = a_head;
  w.meijer.a.insert(w.meijer.a.end(), a_tail.begin(), a_tail.end());
  w.compact = !any_ginibre && spec.L() == 0;
  return w;
}

double WeightModel::eval(double t) const {
  if (!(t > 0.0)) throw DomainError("WeightModel::eval: |z|^2 must be positive");
  if (compact && t > 1.0) return 0.0;
  return specfun::meijer_g(meijer, arg_scale * t, options);
}

double WeightModel::log_mellin(double s) const {
  const auto& P = meijer;
  double v = 0.0;
  for (int j = 0; j < P.m; ++j) v += checked_ln_gamma(P.b[j] + s, "log_mellin");
  for (int j = 0; j < P.n; ++j) v += checked_ln_gamma(1.0 - P.a[j] - s, "log_mellin");
  for (int j = P.m; j < P.q(); ++j) v -= checked_ln_gamma(1.0 - P.b[j] - s, "log_mellin");
  for (int j = P.n; j < P.p(); ++j) v -= checked_ln_gamma(P.a[j] + s, "log_mellin");
  return v;
}

double WeightModel::log_radial_moment(int k) const {
  return -(k + 1.0) * std::log(arg_scale) + log_mellin(k + 1.0);
}

double weight_eval(const WeightModel& w, cplx z) { return w.eval(std::norm(z)); }

std::vector<double> norms(const ProductSpec& spec) {
  if (spec.beta != 2) throw UnsupportedError("norms: beta = 2 only");
  WeightModel w = WeightModel::from_spec(spec);
  std::vector<double> h(spec.N);
  for (int n = 0; n < spec.N; ++n) h[n] = kPi * std::exp(w.log_radial_moment(n));
  return h;
}

// ---------------------------------------------------------------- beta = 2

KernelModel::KernelModel(const ProductSpec& spec) : weight_(WeightModel::from_spec(spec)) {
  if (spec.beta != 2) throw UnsupportedError("KernelModel: beta = 2 only");
  log_h_.resize(spec.N);
  for (int n = 0; n < spec.N; ++n) log_h_[n] = std::log(kPi) + weight_.log_radial_moment(n);
}

cplx KernelModel::kernel(cplx z, cplx u) const {
  const cplx x = z * std::conj(u);
  if (x == 0.0) return std::exp(-log_h_[0]);
  const cplx lx = std::log(x);
  cplx s = 0.0;
  for (int n = 0; n < N(); ++n) s += std::exp(static_cast<double>(n) * lx - log_h_[n]);
  return s;
}

double KernelModel::density(cplx z) const {
  return weight_eval(weight_, z) * kernel(z, z).real();
}

double correlation_k(const KernelModel& K, const std::vector<cplx>& points) {
  const int k = static_cast<int>(points.size());
  if (k > K.N()) throw DomainError("correlation_k: more points than eigenvalues");
  if (k == 0) return 1.0;
  linalg::CMatrix A(k, k);
  double wprod = 1.0;
  for (int i = 0; i < k; ++i) {
    wprod *= weight_eval(K.weight(), points[i]);
    for (int j = 0; j < k; ++j) A(i, j) = K.kernel(points[i], points[j]);
  }
  linalg::LogDet d = linalg::logdet_scaled(A);
  if (!std::isfinite(d.log_magnitude)) return 0.0;
  return wprod * std::exp(d.log_magnitude) * d.phase.real();
}

// ---------------------------------------------------------------- beta = 4

SkewOPSystem::SkewOPSystem(const ProductSpec& spec)
    : weight_(WeightModel::from_spec(spec)), N_(spec.N) {
  if (spec.beta != 4) throw UnsupportedError("SkewOPSystem: beta = 4 only");
  log_s_.resize(2 * N_ + 1);
  for (int k = 0; k <= 2 * N_; ++k) log_s_[k] = std::log(0.5 * kPi) + weight_.log_radial_moment(k);
  log_c_.resize(N_);
  for (int n = 0; n < N_; ++n) {
    log_c_[n].assign(n + 1, 0.0);
    for (int k = n - 1; k >= 0; --k) log_c_[n][k] = log_c_[n][k + 1] + log_s_[2 * k + 2] - log_s_[2 * k + 1];
  }
}

double SkewOPSystem::h(int n) const { return 2.0 * std::exp(log_s_[2 * n + 1]); }

cplx SkewOPSystem::p(int k, cplx z) const {
  if (k % 2 == 1) return ipow(z, k);
  const int n = k / 2;
  if (n >= N_) throw DomainError("SkewOPSystem::p: degree beyond the system");
  cplx s = 0.0, z2 = z * z, zp = 1.0;
  for (int j = 0; j <= n; ++j) {
    s += std::exp(log_c_[n][j]) * zp;
    zp *= z2;
  }
  return s;
}

cplx SkewOPSystem::kernel(cplx z, cplx u) const {
  cplx s = 0.0;
  const cplx z2 = z * z, u2 = u * u;
  for (int n = 0; n < N_; ++n) {
    const double lh = std::log(2.0) + log_s_[2 * n + 1];
    cplx zo = ipow(z, 2 * n + 1), uo = ipow(u, 2 * n + 1);
    cplx ze = 1.0, ue = 1.0;
    for (int k = 0; k <= n; ++k) {
      s += std::exp(log_c_[n][k] - lh) * (zo * ue - uo * ze);
      ze *= z2;
      ue *= u2;
    }
  }
  return s;
}

double SkewOPSystem::density(cplx z) const {
  if (z.imag() == 0.0) return 0.0;
  const cplx v = (std::conj(z) - z) * kernel(z, std::conj(z));
  return weight_eval(weight_, z) * v.real();
}

cplx SkewOPSystem::skew_product(const std::function<cplx(cplx)>& f, const std::function<cplx(cplx)>& g,
                                double rel_tol) const {
  auto integrand = [&](cplx z) {
    cplx zc = std::conj(z);
    return (zc - z) * (f(z) * g(zc) - f(zc) * g(z));
  };
  auto w = [&](double r) { return weight_.eval(r * r); };
  const double R = weight_.compact ? 1.0 : HUGE_VAL;
  double re = integrate_plane([&](cplx z) { return integrand(z).real(); }, R, true, w, 64, rel_tol);
  double im = integrate_plane([&](cplx z) { return integrand(z).imag(); }, R, true, w, 64, rel_tol);
  return {re, im};
}

double correlation_k_beta4(const SkewOPSystem& S, const std::vector<cplx>& points) {
  const int k = static_cast<int>(points.size());
  if (k > S.N()) throw DomainError("correlation_k_beta4: more points than eigenvalue pairs");
  if (k == 0) return 1.0;
  for (cplx z : points) {
    if (z.imag() < 0.0) throw DomainError("correlation_k_beta4: points must lie in the upper half plane");
  }
  linalg::CMatrix A(2 * k, 2 * k);
  cplx pre = 1.0;
  for (int i = 0; i < k; ++i) {
    const cplx zi = points[i], zic = std::conj(zi);
    pre *= weight_eval(S.weight(), zi) * (zic - zi);
    for (int j = 0; j < k; ++j) {
      const cplx zj = points[j], zjc = std::conj(zj);
      A(2 * i, 2 * j) = S.kernel(zi, zj);
      A(2 * i, 2 * j + 1) = S.kernel(zi, zjc);
      A(2 * i + 1, 2 * j) = S.kernel(zic, zj);
      A(2 * i + 1, 2 * j + 1) = S.kernel(zic, zjc);
    }
  }
  return (pre * linalg::pfaffian(linalg::SkewMatrix(A))).real();
}

// ---------------------------------------------------------------- radii

RadialMarginals::RadialMarginals(const ProductSpec& spec)
    : weight_(WeightModel::from_spec(spec)), N_(spec.N), beta_(spec.beta) {
  log_m_.resize(N_ + 1);
  for (int n = 1; n <= N_; ++n) log_m_[n] = weight_.log_radial_moment(power(n));
}

double RadialMarginals::density(int n, double r) const {
  if (n < 1 || n > N_) throw DomainError("RadialMarginals: index out of range");
  if (!(r > 0.0)) return 0.0;
  const double t = r * r;
  if (weight_.compact && t >= 1.0) return 0.0;
  return 2.0 * r * std::exp(power(n) * std::log(t) - log_m_[n]) * weight_.eval(t);
}

double RadialMarginals::cdf(int n, double r, double rel_tol) const {
  if (n < 1 || n > N_) throw DomainError("RadialMarginals: index out of range");
  if (!(r > 0.0)) return 0.0;
  double T = r * r;
  if (weight_.compact && T >= 1.0) return 1.0;
  const int k = power(n);
  // Beyond the mean the survival integral is the better-conditioned one.
  const double mean = std::exp(weight_.log_radial_moment(k + 1) - log_m_[n]);
  auto f = [&](double t) { return std::exp(k * std::log(t) - log_m_[n]) * weight_.eval(t); };
  if (T <= mean) {
    // t = T s^2 tames the logarithmic behaviour of w at the origin.
    auto g = [&](double s) { return 2.0 * T * s * f(T * s * s); };
    quad::Result res = quad::adaptive(g, 0.0, 1.0, rel_tol, 20);
    return res.value;
  }
  const double upper = weight_.compact ? 1.0 : std::numeric_limits<double>::infinity();
  quad::Result res = quad::adaptive(f, T, upper, rel_tol, 20);
  return 1.0 - res.value;
}

double RadialMarginals::pooled_density(double r) const {
  double s = 0.0;
  for (int n = 1; n <= N_; ++n) s += density(n, r);
  return s / N_;
}

double RadialMarginals::joint_density_permanent(const std::vector<double>& r) const {
  if (static_cast<int>(r.size()) != N_) throw DimensionError("joint_density_permanent: need N radii");
  linalg::RMatrix B(N_, N_);
  double pre = 1.0;
  for (int j = 0; j < N_; ++j) {
    pre *= 2.0 * r[j] * weight_.eval(r[j] * r[j]);
    for (int l = 1; l <= N_; ++l) B(j, l - 1) = std::exp(power(l) * std::log(r[j] * r[j]) - log_m_[l]);
  }
  double fact = std::tgamma(N_ + 1.0);
  return pre * linalg::permanent(B) / fact;
}

// ---------------------------------------------------------------- hole

HoleProbability hole_probability(const ProductSpec& spec, double r) {
  if (!(r > 0.0)) throw DomainError("hole_probability: radius must be positive");
  RadialMarginals rm(spec);
  HoleProbability out;
  out.marginal_product = 1.0;
  for (int n = 1; n <= spec.N; ++n) out.marginal_product *= 1.0 - rm.cdf(n, r);

  const double nan = std::numeric_limits<double>::quiet_NaN();
  out.closed_form = nan;
  out.closed_form_printed = nan;
  bool ginibre_only = true;
  for (const FactorSpec& f : spec.factors) {
    if (f.kind != FactorKind::Ginibre && f.kind != FactorKind::InverseGinibre) ginibre_only = false;
  }
  if (!ginibre_only) return out;
  const std::vector<FactorSpec> dir = spec.direct(), inv = spec.inverse();
  if (spec.beta == 4 && !inv.empty()) return out;
  const double g = spec.beta == 4 ? 2.0 : 1.0;
  const double x = std::pow(g, static_cast<double>(dir.size())) * r * r;
  double closed = 1.0, printed = 1.0;
  for (int n = 1; n <= spec.N; ++n) {
    specfun::MeijerParams P;
    P.m = static_cast<int>(dir.size()) + 1;
    P.n = static_cast<int>(inv.size());
    for (const FactorSpec& f : inv) P.a.push_back(n - spec.N - f.offset);
    P.a.push_back(1.0);
    P.b.push_back(0.0);
    double log_den = 0.0, log_den_printed = 0.0;
    for (const FactorSpec& f : dir) {
      P.b.push_back(g * (n + f.offset));
      log_den += specfun::ln_gamma(g * (n + f.offset));
      log_den_printed += specfun::ln_gamma(n + f.offset + 1.0);
    }
    for (const FactorSpec& f : inv) {
      log_den += specfun::ln_gamma(spec.N + f.offset - n + 1.0);
      log_den_printed += specfun::ln_gamma(static_cast<double>(spec.N + f.offset - n));
    }
    double G = specfun::meijer_g(P, x);
    closed *= G * std::exp(-log_den);
    printed *= G * std::exp(-log_den_printed);
  }
  out.closed_form = closed;
  if (!inv.empty()) out.closed_form_printed = printed;
  return out;
}

// ---------------------------------------------------------------- beta = 1

AllRealProbability prob_all_real(int N, const std::vector<int>& nu) {
  if (N < 2 || N % 2 != 0) throw DomainError("prob_all_real: N must be even and positive");
  if (nu.empty()) throw DomainError("prob_all_real: at least one factor is required");
  const int M = static_cast<int>(nu.size());
  const int h = N / 2;
  specfun::MeijerOptions opts;
  opts.throw_on_precision = false;
  Eigen::MatrixXd A(h, h);
  double max_rel = 0.0;
  for (int k = 1; k <= h; ++k) {
    for (int l = 1; l <= h; ++l) {
      specfun::MeijerParams P;
      P.m = M + 1;
      P.n = M;
      for (int m = 0; m < M; ++m) P.a.push_back(1.5 - 0.5 * nu[m] - l);
      P.a.push_back(1.0);
      P.b.push_back(0.0);
      for (int m = 0; m < M; ++m) P.b.push_back(0.5 * nu[m] + k);
      specfun::MeijerResult r = specfun::meijer_g_detail(P, 1.0, opts);
      A(k - 1, l - 1) = r.value;
      max_rel = std::max(max_rel, r.abs_error / std::max(std::abs(r.value), 1e-300));
    }
  }
  double log_den = 0.0;
  for (int n = 1; n <= N; ++n) {
    for (int m = 0; m < M; ++m) log_den += specfun::ln_gamma(0.5 * nu[m] + 0.5 * n);
  }
  AllRealProbability out;
  out.value = A.determinant() * std::exp(-log_den);
  // First-order propagation of the entry errors through the determinant.
  out.error_estimate = h * max_rel * std::abs(out.value);
  out.low_precision = out.error_estimate > 1e-4;
  return out;
}

// ---------------------------------------------------------------- quadrature

double integrate_plane(const std::function<double(cplx)>& f, double R, bool upper_half,
                       const std::function<double(double)>& radial, int angular_nodes, double rel_tol) {
  const quad::Rule& rule = quad::gauss_legendre(angular_nodes);
  const double span = upper_half ? kPi : 2.0 * kPi;
  auto ring = [&](double r) {
    double s = 0.0;
    for (int i = 0; i < angular_nodes; ++i) {
      double th = 0.5 * span * (rule.x[i] + 1.0);
      s += rule.w[i] * f(std::polar(r, th));
    }
    return 0.5 * span * s * r * (radial ? radial(r) : 1.0);
  };
  if (std::isfinite(R)) return quad::adaptive(ring, 0.0, R, rel_tol, 20).value;
  // r = u / (1 - u) keeps algebraic tails integrable on a finite interval.
  auto mapped = [&](double u) {
    const double d = 1.0 - u;
    return ring(u / d) / (d * d);
  };
  return quad::adaptive(mapped, 0.0, 1.0, rel_tol, 20).value;
}

}  // namespace rmt
