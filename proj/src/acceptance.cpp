#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "rmt/asymptotics.hpp"
#include "rmt/error.hpp"
#include "rmt/exact_ev.hpp"
#include "rmt/exact_sv.hpp"
#include "rmt/exponents.hpp"
#include "rmt/harness.hpp"
#include "rmt/quadrature.hpp"
#include "rmt/specfun.hpp"
#include "rmt/stats.hpp"

namespace rmt {

namespace {

constexpr double kPi = 3.141592653589793238;

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

std::vector<double> all_radii(const SampleBatch& batch) {
  std::vector<double> r;
  for (const auto& s : batch.samples) {
    for (cplx z : s.eigenvalues) r.push_back(std::abs(z));
  }
  return r;
}

// Radius beyond which the pooled radial density is negligible, capped for
// heavy-tailed ensembles.
double radial_cutoff(const std::function<double(double)>& rho, double cap) {
  double peak = 0.0;
  for (double r = 0.05; r < cap; r += 0.05) {
    double v = rho(r);
    peak = std::max(peak, v);
    if (r > 0.5 && v < 1e-7 * peak) return r;
  }
  return cap;
}

// MC radial histogram against the exact pooled radial density rho (integral 1).
bool radial_comparison(const ProductSpec& spec, long samples, std::uint64_t seed,
                       const std::function<double(double)>& rho, double cap, std::string& detail) {
  SampleBatch batch = sample_spectra(spec, samples, seed);
  std::vector<double> r = all_radii(batch);
  double rmax = radial_cutoff(rho, cap);
  Histogram h = histogram(r, 0.0, rmax, 40);
  auto prob = [&](double a, double b) { return quad::adaptive(rho, a, b, 1e-10).value; };
  ComparisonReport rep = compare_histogram(h, prob);
  detail += "max|z|=" + fmt("%.3f", rep.max_abs_z) + " bins=" + std::to_string(rep.exact.size()) +
            " rejected=" + std::to_string(batch.rejected) + "; ";
  return rep.pass && batch.rejected == 0;
}

using Clock = std::chrono::steady_clock;

CriterionResult c1() {
  CriterionResult c{1, "M=1 reductions", true, false, 0, 1.0, ""};
  double we = 0.0, ke = 0.0, te = 0.0;
  const int N = 6;
  KernelModel K(ProductSpec::ginibre(2, N, {0}));
  auto tr = WeightModel::from_spec(ProductSpec::truncated(2, N, {0}, {1}));
  // Grid offset from z = 0, where the weight evaluator requires |z| > 0.
  for (double a = -1.4; a <= 1.5; a += 0.25) {
    for (double b = -1.4; b <= 1.5; b += 0.25) {
      cplx z(a, b), u(0.6 * b, -0.4 * a);
      we = std::max(we, rel_err(weight_eval(K.weight(), z), std::exp(-std::norm(z))));
      cplx s = 0.0, t = 1.0;
      for (int n = 0; n < N; ++n) {
        s += t;
        t *= z * std::conj(u) / double(n + 1);
      }
      ke = std::max(ke, std::abs(K.kernel(z, u) - s / kPi) / std::abs(s / kPi));
      double expect = std::norm(z) < 1.0 ? 1.0 : 0.0;
      if (std::abs(std::norm(z) - 1.0) > 1e-12) te = std::max(te, std::abs(weight_eval(tr, z) - expect));
    }
  }
  c.pass = we <= 1e-9 && ke <= 1e-9 && te <= 1e-9;
  c.detail = "weight " + fmt("%.2e", we) + ", kernel " + fmt("%.2e", ke) + ", truncated " + fmt("%.2e", te);
  return c;
}

CriterionResult c2(std::uint64_t seed) {
  CriterionResult c{2, "beta=2 density, Ginibre product", true, true, 0, 120.0, ""};
  auto spec = ProductSpec::ginibre(2, 4, {0, 1});
  KernelModel K(spec);
  auto rho = [&](double r) { return 2.0 * kPi * r * K.density(cplx(r, 0.0)) / spec.N; };
  c.pass = radial_comparison(spec, 200000, seed, rho, 12.0, c.detail);
  return c;
}

CriterionResult c3(std::uint64_t seed) {
  CriterionResult c{3, "beta=2 density, truncated and inverse-mixed", true, true, 0, 360.0, ""};
  auto t = ProductSpec::truncated(2, 3, {0, 0}, {2, 3});
  auto m = ProductSpec::mixed_inverse(2, 3, {0}, {1});
  bool ok = true;
  const std::vector<std::pair<ProductSpec, std::string>> cases = {{t, "truncated"}, {m, "inverse-mixed"}};
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const ProductSpec& spec = cases[i].first;
    KernelModel K(spec);
    auto rho = [&](double r) { return 2.0 * kPi * r * K.density(cplx(r, 0.0)) / spec.N; };
    c.detail += cases[i].second + ": ";
    ok = radial_comparison(spec, 200000, seed + 7 * i, rho, 8.0, c.detail) && ok;
  }
  c.pass = ok;
  return c;
}

CriterionResult c4(std::uint64_t seed) {
  CriterionResult c{4, "beta=4 Pfaffian density", true, true, 0, 180.0, ""};
  auto spec = ProductSpec::ginibre(4, 3, {0, 0});
  SkewOPSystem S(spec);
  // Angle-integrated upper-half-plane density of one eigenvalue, per unit r.
  const auto& ga = quad::gauss_legendre(32);
  auto rho = [&](double r) {
    double s = 0.0;
    for (std::size_t i = 0; i < ga.x.size(); ++i) {
      double th = 0.5 * kPi * (ga.x[i] + 1.0);
      s += 0.5 * kPi * ga.w[i] * S.density(std::polar(r, th));
    }
    return r * s / spec.N;
  };
  SampleBatch batch = sample_spectra(spec, 100000, seed);
  std::vector<double> r = all_radii(batch);
  double rmax = radial_cutoff(rho, 10.0);
  Histogram h = histogram(r, 0.0, rmax, 40);
  auto prob = [&](double a, double b) { return quad::fixed(rho, a, b, 12); };
  ComparisonReport rep = compare_histogram(h, prob);
  double axis = 0.0;
  for (double x : {0.2, 0.7, 1.3, 2.5}) axis = std::max(axis, std::abs(S.density(cplx(x, 0.0))));
  c.pass = rep.pass && axis < 1e-8 && batch.rejected == 0;
  c.detail = "max|z|=" + fmt("%.3f", rep.max_abs_z) + " bins=" + std::to_string(rep.exact.size()) +
             ", real-axis density " + fmt("%.1e", axis);
  return c;
}

CriterionResult c5(std::uint64_t seed) {
  CriterionResult c{5, "hole probability triple check", true, true, 0, 120.0, ""};
  auto spec = ProductSpec::ginibre(2, 4, {0, 0});
  const long S = 100000;
  SampleBatch batch = sample_spectra(spec, S, seed);
  bool ok = batch.rejected == 0;
  for (double r : {0.3, 0.5, 0.8}) {
    HoleProbability hp = hole_probability(spec, r);
    long empty = 0;
    for (const auto& s : batch.samples) {
      bool any = false;
      for (cplx z : s.eigenvalues) any = any || std::abs(z) < r;
      if (!any) ++empty;
    }
    MeanSe mc = proportion(empty, static_cast<long>(batch.samples.size()));
    double tol = std::max(1e-4, 3.0 * mc.se);
    bool a = std::abs(hp.marginal_product - hp.closed_form) <= tol;
    bool b = std::abs(hp.marginal_product - mc.mean) <= tol;
    bool d = std::abs(hp.closed_form - mc.mean) <= tol;
    ok = ok && a && b && d;
    c.detail += "r=" + fmt("%.1f", r) + ": quad " + fmt("%.6f", hp.marginal_product) + " closed " +
                fmt("%.6f", hp.closed_form) + " mc " + fmt("%.6f", mc.mean) + "; ";
  }
  c.pass = ok;
  return c;
}

CriterionResult c6() {
  CriterionResult c{6, "biorthogonality, multiple orthogonality, recurrence", true, false, 0, 60.0, ""};
  const int N = 11, nmax = 10;
  std::vector<ProductSpec> specs = {
      ProductSpec::ginibre(2, N, {0}),          ProductSpec::ginibre(2, N, {0, 1}),
      ProductSpec::ginibre(2, N, {0, 1, 2}),    ProductSpec::mixed_inverse(2, N, {0}, {1}),
      ProductSpec::mixed_inverse(2, N, {0, 1}, {2}), ProductSpec::truncated(2, N, {0}, {13}),
      ProductSpec::truncated(2, N, {0, 1}, {13, 14}), ProductSpec::truncated(2, N, {0, 1, 2}, {13, 14, 13}),
  };
  bool ok = true;
  double gmax = 0.0;
  for (const auto& spec : specs) {
    BiorthogonalSystem S = build_system(spec);
    GramReport g = gram_matrix(S, nmax, 1e-8);
    gmax = std::max(gmax, g.max_deviation);
    ok = ok && g.pass;
  }
  c.detail = "gram " + fmt("%.1e", gmax);
  double mo = 0.0;
  for (const auto& spec : {specs[1], specs[2]}) {
    MultipleOrthogonalityReport m = check_multiple_orthogonality(build_system(spec), 8, 1e-8);
    mo = std::max(mo, m.max_relative);
    ok = ok && m.holds;
  }
  std::size_t viol = check_multiple_orthogonality(build_system(specs[3]), 8, 1e-8).violations.size();
  ok = ok && viol > 0;
  double rr = 0.0;
  for (auto [spec, n] : {std::pair{specs[1], 3}, std::pair{specs[2], 4}}) {
    RecurrenceReport r = check_recurrence(build_system(spec), n, 1e-7);
    rr = std::max({rr, r.p_residual, r.psi_residual});
    ok = ok && r.pass;
  }
  c.detail += ", multiple-orth " + fmt("%.1e", mo) + ", inverse violations " + std::to_string(viol) +
              ", recurrence " + fmt("%.1e", rr);
  c.pass = ok;
  return c;
}

CriterionResult c7() {
  CriterionResult c{7, "sum vs contour kernel", true, false, 0, 30.0, ""};
  BiorthogonalSystem S = build_system(ProductSpec::ginibre(2, 4, {0, 0}));
  double mx = 0.0;
  bool fallback = false;
  for (double x : {0.5, 1.0, 2.0}) {
    for (double y : {0.5, 1.0, 2.0}) {
      ContourValue cv = sv_kernel_contour(S, x, y);
      fallback = fallback || cv.used_fallback;
      mx = std::max(mx, rel_err(cv.value, sv_kernel_sum(S, x, y)));
    }
  }
  c.pass = mx <= 1e-7 && !fallback;
  c.detail = "max relative " + fmt("%.2e", mx);
  return c;
}

CriterionResult c8() {
  CriterionResult c{8, "hard-edge convergence", true, false, 0, 60.0, ""};
  bool ok = true;
  for (const auto& spec : {ProductSpec::ginibre(2, 1, {0}), ProductSpec::ginibre(2, 1, {0, 1})}) {
    ConvergenceReport r = converge_hard_edge(spec, {16, 64});
    ok = ok && r.deviation[1] < r.deviation[0];
    c.detail += "M=" + std::to_string(spec.factors.size()) + ": " + fmt("%.3e", r.deviation[0]) + " -> " +
                fmt("%.3e", r.deviation[1]) + "; ";
  }
  LimitKernel m1, b;
  m1.kind = LimitKind::MeijerHardEdge;
  m1.nu = {0};
  b.kind = LimitKind::Bessel;
  b.nu = {0};
  double mx = 0.0;
  for (double x : {0.5, 1.0, 2.0}) {
    for (double y : {0.5, 1.0, 2.0}) {
      mx = std::max(mx, rel_err(meijer_hard_edge(m1, x, y), 4.0 * eval_limit_kernel(b, 4.0 * x, 4.0 * y)));
    }
  }
  c.detail += "Bessel form " + fmt("%.1e", mx);
  c.pass = ok && mx <= 1e-8;
  return c;
}

CriterionResult c9() {
  CriterionResult c{9, "origin-kernel convergence", true, false, 0, 10.0, ""};
  bool ok = true;
  for (const auto& nu : {std::vector<int>{0}, std::vector<int>{0, 1}, std::vector<int>{0, 1, 2}}) {
    ConvergenceReport r = converge_origin(ProductSpec::ginibre(2, 1, nu), {10, 20, 40, 60});
    ok = ok && r.within_bound && r.decreasing && r.deviation.back() <= 1e-6;
    c.detail += "M=" + std::to_string(nu.size()) + ": " + fmt("%.1e", r.deviation.back()) + (r.within_bound ? " (bound ok) " : " (bound violated) ");
  }
  c.pass = ok;
  return c;
}

CriterionResult c10(std::uint64_t seed) {
  CriterionResult c{10, "Lyapunov and stability exponents", true, true, 0, 300.0, ""};
  auto spec = ProductSpec::ginibre(2, 4, {0});
  ReplicaEstimate ly = mc_lyapunov(spec, 10000, 200, seed);
  bool ok = ly.pass && ly.rejected == 0;
  double zmax = 0.0, rlo = HUGE_VAL, rhi = 0.0;
  for (int n = 0; n < spec.N; ++n) {
    zmax = std::max(zmax, std::abs(ly.z[n]));
    double ratio = ly.variance[n] * ly.M / (ly.exact.sigmas[n] * ly.exact.sigmas[n]);
    rlo = std::min(rlo, ratio);
    rhi = std::max(rhi, ratio);
  }
  ok = ok && rlo >= 0.8 && rhi <= 1.25;
  StabilityEstimate st = mc_stability(spec, 500, 400, seed + 1);
  double zs = 0.0;
  for (double z : st.z) zs = std::max(zs, std::abs(z));
  ok = ok && st.pass && st.rejected == 0;
  c.detail = "lyapunov max|z| " + fmt("%.2f", zmax) + ", M*Var/sigma^2 in [" + fmt("%.3f", rlo) + ", " +
             fmt("%.3f", rhi) + "], stability max|z| " + fmt("%.2f", zs);
  c.pass = ok;
  return c;
}

CriterionResult c11(std::uint64_t seed) {
  CriterionResult c{11, "truncated Lyapunov", true, true, 0, 120.0, ""};
  ReplicaEstimate ly = mc_lyapunov(ProductSpec::truncated(2, 3, {0}, {1}), 10000, 200, seed);
  double z = (ly.means[0] + 0.5) / ly.se[0];
  c.pass = std::abs(z) <= 4.0 && ly.rejected == 0;
  c.detail = "lambda_1 " + fmt("%.5f", ly.means[0]) + " +- " + fmt("%.1e", ly.se[0]) + " (z " + fmt("%.2f", z) + ")";
  return c;
}

CriterionResult c12(std::uint64_t seed) {
  CriterionResult c{12, "beta=1 all-real probability", true, true, 0, 240.0, ""};
  const long S = 1000000;
  std::vector<MeanSe> mc;
  bool ok = true;
  for (int M = 1; M <= 2; ++M) {
    auto spec = ProductSpec::ginibre(1, 2, std::vector<int>(M, 0));
    SampleBatch batch = sample_spectra(spec, S, seed + M);
    long real = 0;
    for (const auto& s : batch.samples) {
      bool all = std::all_of(s.eigenvalues.begin(), s.eigenvalues.end(), [](cplx z) { return z.imag() == 0.0; });
      if (all) ++real;
    }
    mc.push_back(proportion(real, static_cast<long>(batch.samples.size())));
    AllRealProbability det = prob_all_real(2, std::vector<int>(M, 0));
    if (!det.low_precision) ok = ok && std::abs(det.value - mc.back().mean) <= std::max(1e-3, 3.0 * mc.back().se);
    c.detail += "M=" + std::to_string(M) + ": mc " + fmt("%.5f", mc.back().mean) + " det " + fmt("%.5f", det.value) + "; ";
  }
  ok = ok && std::abs(mc[0].mean - 1.0 / std::sqrt(2.0)) <= 3.0 * mc[0].se && mc[1].mean > mc[0].mean;
  c.pass = ok;
  return c;
}

CriterionResult c13(std::uint64_t seed) {
  CriterionResult c{13, "ordering invariance", true, true, 0, 120.0, ""};
  auto a = ProductSpec::ginibre(2, 4, {0, 1, 2});
  auto b = ProductSpec::ginibre(2, 4, {2, 0, 1});
  std::vector<double> na = norms(a), nb = norms(b);
  bool identical = na == nb;
  auto ra = all_radii(sample_spectra(a, 20000, seed));
  auto rb = all_radii(sample_spectra(b, 20000, seed + 0x9e3779b9ULL));
  KsResult ks = ks_two_sample(ra, rb);
  c.pass = identical && ks.p_value > 0.01;
  c.detail = std::string("norms ") + (identical ? "bit-identical" : "differ") + ", KS D " + fmt("%.4f", ks.D) +
             " p " + fmt("%.3f", ks.p_value);
  return c;
}

}  // namespace

std::vector<CriterionResult> run_acceptance(std::uint64_t seed, const std::vector<int>& which,
                                            const std::function<void(const CriterionResult&)>& progress) {
  std::vector<CriterionResult> out;
  auto want = [&](int id) { return which.empty() || std::find(which.begin(), which.end(), id) != which.end(); };
  for (int id = 1; id <= 13; ++id) {
    if (!want(id)) continue;
    auto t0 = Clock::now();
    CriterionResult r;
    try {
      switch (id) {
        case 1: r = c1(); break;
        case 2: r = c2(seed + 2); break;
        case 3: r = c3(seed + 3); break;
        case 4: r = c4(seed + 4); break;
        case 5: r = c5(seed + 5); break;
        case 6: r = c6(); break;
        case 7: r = c7(); break;
        case 8: r = c8(); break;
        case 9: r = c9(); break;
        case 10: r = c10(seed + 10); break;
        case 11: r = c11(seed + 11); break;
        case 12: r = c12(seed + 12); break;
        default: r = c13(seed + 13); break;
      }
    } catch (const std::exception& e) {
      r.id = id;
      r.name = "criterion " + std::to_string(id);
      r.pass = false;
      r.detail = std::string("exception: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    if (r.time_limit > 0.0 && r.seconds > r.time_limit) {
      r.pass = false;
      r.detail += " [runtime " + fmt("%.1f", r.seconds) + " s over limit]";
    }
    if (progress) progress(r);
    out.push_back(r);
  }
  return out;
}

}  // namespace rmt
