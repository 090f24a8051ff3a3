#include "rmt/exponents.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "rmt/error.hpp"
#include "rmt/linalg.hpp"
#include "rmt/spec_json.hpp"
#include "rmt/specfun.hpp"

namespace rmt {

namespace {

using specfun::digamma;
using specfun::trigamma;

// Contribution of one direct factor to exponent n (1-based, ascending).
void direct_contribution(int beta, int n, const FactorSpec& f, double& mean, double& var) {
  const double b = 0.5 * beta;
  const double a = b * (n + f.offset);
  if (f.truncated()) {
    const double c = b * (n + f.truncation);
    mean = 0.5 * digamma(a) - 0.5 * digamma(c);
    var = 0.25 * trigamma(a) - 0.25 * trigamma(c);
  } else {
    mean = 0.5 * std::log(2.0 / beta) + 0.5 * digamma(a);
    var = 0.25 * trigamma(a);
  }
}

int rep_dim(const ProductSpec& spec) { return spec.beta == 4 ? 2 * spec.N : spec.N; }

void check_steps(const ProductSpec& spec, long M, long replicas, const char* who) {
  spec.validate();
  const long F = static_cast<long>(spec.factors.size());
  if (M < 1 || M % F != 0) {
    throw DomainError(std::string(who) + ": step count must be a positive multiple of the factor count");
  }
  if (replicas < 1) throw DomainError(std::string(who) + ": replicas must be positive");
}

// Operator applied at step m: the sampled factor, or its inverse.
bool draw_operator(const ProductSpec& spec, const FactorSpec& f, Rng& rng, CMatrix& op) {
  CMatrix X = sample_factor(spec.beta, spec.N, f, rng);
  if (!f.inverse()) {
    op = std::move(X);
    return true;
  }
  Eigen::PartialPivLU<CMatrix> lu(X);
  op = lu.inverse();
  return op.allFinite();
}

// In-place thin QR with positive diagonal for beta = 1, 2 (two Gram-Schmidt
// passes); quaternion-structured QR for beta = 4.
bool qr_step(int beta, CMatrix& Y, CMatrix& R) {
  if (beta == 4) {
    CMatrix Q = qr_positive(4, Y, &R);
    Y = std::move(Q);
    return R.allFinite() && Y.allFinite();
  }
  const Eigen::Index n = Y.cols();
  R.setZero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index i = 0; i < j; ++i) {
        cplx c = Y.col(i).dot(Y.col(j));
        R(i, j) += c;
        Y.col(j) -= c * Y.col(i);
      }
    }
    double nrm = Y.col(j).norm();
    if (!(nrm > 0.0) || !std::isfinite(nrm)) return false;
    R(j, j) = nrm;
    Y.col(j) /= nrm;
  }
  return true;
}

void summarize(ReplicaEstimate& est) {
  const int N = est.spec.N;
  const double R = static_cast<double>(est.samples.size());
  est.means.assign(N, 0.0);
  est.variance.assign(N, 0.0);
  est.se.assign(N, 0.0);
  est.z.assign(N, 0.0);
  if (est.samples.size() < 2) {
    est.pass = false;
    return;
  }
  for (const auto& s : est.samples) {
    for (int n = 0; n < N; ++n) est.means[n] += s[n];
  }
  for (double& m : est.means) m /= R;
  for (const auto& s : est.samples) {
    for (int n = 0; n < N; ++n) est.variance[n] += (s[n] - est.means[n]) * (s[n] - est.means[n]);
  }
  est.pass = true;
  for (int n = 0; n < N; ++n) {
    est.variance[n] /= R - 1.0;
    est.se[n] = std::sqrt(est.variance[n] / R);
    est.z[n] = (est.means[n] - est.exact.means[n]) / est.se[n];
    if (!(std::abs(est.z[n]) <= est.tolerance_se)) est.pass = false;
  }
}

template <class Body>
void for_replicas(long replicas, bool parallel, Body&& body) {
  std::exception_ptr err;
  if (parallel) {
#pragma omp parallel for schedule(dynamic) num_threads(worker_count())
    for (long r = 0; r < replicas; ++r) {
      try {
        body(r);
      } catch (...) {
#pragma omp critical
        if (!err) err = std::current_exception();
      }
    }
  } else {
    for (long r = 0; r < replicas; ++r) body(r);
  }
  if (err) std::rethrow_exception(err);
}

// One Lyapunov replica; false when rejected.
bool lyapunov_replica(const ProductSpec& spec, long M, Rng rng, std::vector<double>& out) {
  const int N = spec.N, d = rep_dim(spec), s = spec.beta == 4 ? 2 : 1;
  const long F = static_cast<long>(spec.factors.size());
  CMatrix Q = CMatrix::Identity(d, d), Y(d, d), R(d, d), op;
  std::vector<long double> acc(N, 0.0L);
  for (long m = 0; m < M; ++m) {
    if (!draw_operator(spec, spec.factors[m % F], rng, op)) return false;
    Y.noalias() = op * Q;
    if (!qr_step(spec.beta, Y, R)) return false;
    Q.swap(Y);
    for (int j = 0; j < N; ++j) acc[j] += std::log(R(s * j, s * j).real());
  }
  out.resize(N);
  // Column j carries the (j+1)-th largest exponent.
  for (int j = 0; j < N; ++j) out[N - 1 - j] = static_cast<double>(acc[j] / M);
  return std::all_of(out.begin(), out.end(), [](double v) { return std::isfinite(v); });
}

ReplicaEstimate run_lyapunov(const ProductSpec& spec, long M, long replicas, std::uint64_t seed,
                             bool parallel) {
  check_steps(spec, M, replicas, "mc_lyapunov");
  if (M < 1000) throw DomainError("mc_lyapunov: needs at least 1000 steps");
  ReplicaEstimate est;
  est.spec = spec;
  est.M = M;
  est.replicas = replicas;
  est.seed = seed;
  est.exact = exact_exponents(spec);
  std::vector<std::vector<double>> rows(replicas);
  std::vector<char> ok(replicas, 0);
  const Rng base(seed);
  for_replicas(replicas, parallel, [&](long r) { ok[r] = lyapunov_replica(spec, M, base.split(r), rows[r]); });
  for (long r = 0; r < replicas; ++r) {
    if (ok[r]) est.samples.push_back(std::move(rows[r]));
    else ++est.rejected;
  }
  summarize(est);
  return est;
}

// Upper-triangular product T stored as T(i, :) = exp(s_i) Tn(i, :) with
// max |Tn(i, :)| = 1.
struct GradedTriangular {
  CMatrix Tn;
  std::vector<double> s;

  explicit GradedTriangular(int d) : Tn(CMatrix::Identity(d, d)), s(d, 0.0) {}

  // T <- R T for upper-triangular R.
  bool left_multiply(const CMatrix& R) {
    const int d = static_cast<int>(Tn.rows());
    for (int i = 0; i < d; ++i) {
      double mx = -HUGE_VAL;
      for (int k = i; k < d; ++k) {
        if (R(i, k) != 0.0) mx = std::max(mx, s[k]);
      }
      Eigen::RowVectorXcd row = Eigen::RowVectorXcd::Zero(d);
      for (int k = i; k < d; ++k) {
        if (R(i, k) == 0.0) continue;
        double e = s[k] - mx;
        if (e < -745.0) continue;
        row += R(i, k) * std::exp(e) * Tn.row(k);
      }
      double a = row.cwiseAbs().maxCoeff();
      if (!(a > 0.0) || !std::isfinite(a)) return false;
      Tn.row(i) = row / a;
      s[i] = mx + std::log(a);
    }
    return true;
  }
};

struct EigenLogs {
  std::vector<double> log_modulus;
  std::vector<double> arg;
  bool all_real = true;
};

// Eigenvalues of W T = Q_start^* P Q_start in log form. At convergence W is
// block diagonal up to rounding, with blocks only where moduli coincide; the
// rounding-level entries of W outside the blocks must not be combined with
// the large upper entries of T, so each block is solved from W_bb T_bb.
bool compressed_eigenvalues(int beta, const CMatrix& W, const GradedTriangular& T, EigenLogs& out) {
  const int d = static_cast<int>(W.rows());
  std::vector<int> reach(d);
  std::iota(reach.begin(), reach.end(), 0);
  for (int p = 0; p < d; ++p) {
    for (int q = 0; q < p; ++q) {
      if (std::abs(W(p, q)) > 1e-8 || std::abs(W(q, p)) > 1e-8) reach[q] = std::max(reach[q], p);
    }
  }
  out.log_modulus.clear();
  out.arg.clear();
  out.all_real = true;
  int a = 0;
  while (a < d) {
    int b = reach[a];
    for (int i = a; i <= b; ++i) b = std::max(b, reach[i]);
    const int n = b - a + 1;
    double ref = -HUGE_VAL;
    for (int k = a; k <= b; ++k) ref = std::max(ref, T.s[k]);
    CMatrix B = CMatrix::Zero(n, n);
    for (int p = 0; p < n; ++p) {
      for (int q = 0; q < n; ++q) {
        for (int k = 0; k <= q; ++k) {
          double e = T.s[a + k] - ref;
          if (e > -745.0) B(p, q) += W(a + p, a + k) * T.Tn(a + k, a + q) * std::exp(e);
        }
      }
    }
    std::vector<cplx> ev;
    if (beta == 1 && n == 2) {
      double tr = (B(0, 0) + B(1, 1)).real();
      double det = (B(0, 0) * B(1, 1) - B(0, 1) * B(1, 0)).real();
      double disc = tr * tr - 4.0 * det;
      if (disc >= 0.0) {
        double r = std::sqrt(disc);
        double z1 = 0.5 * (tr + (tr >= 0 ? r : -r));
        ev = {cplx(z1), cplx(z1 != 0.0 ? det / z1 : 0.0)};
      } else {
        ev = {cplx(0.5 * tr, 0.5 * std::sqrt(-disc)), cplx(0.5 * tr, -0.5 * std::sqrt(-disc))};
      }
    } else if (n == 1) {
      ev = {B(0, 0)};
    } else {
      Eigen::ComplexEigenSolver<CMatrix> es(B, false);
      if (es.info() != Eigen::Success) return false;
      for (int i = 0; i < n; ++i) ev.push_back(es.eigenvalues()(i));
    }
    for (const cplx& z : ev) {
      double az = std::abs(z);
      if (!(az > 0.0) || !std::isfinite(az)) return false;
      out.log_modulus.push_back(ref + std::log(az));
      out.arg.push_back(std::arg(z));
      if (beta == 1 && !(std::abs(z.imag()) <= 1e-12 * az)) out.all_real = false;
    }
    a = b + 1;
  }
  return true;
}

struct StabilityReplica {
  std::vector<double> xi, theta;
  bool all_real = true;
};

bool stability_replica(const ProductSpec& spec, long M, Rng rng, StabilityReplica& out) {
  const int N = spec.N, d = rep_dim(spec);
  const long F = static_cast<long>(spec.factors.size());
  std::vector<CMatrix> ops(M);
  for (long m = 0; m < M; ++m) {
    if (!draw_operator(spec, spec.factors[m % F], rng, ops[m])) return false;
  }
  constexpr int kMinCycles = 3, kMaxCycles = 16;
  CMatrix Q = CMatrix::Identity(d, d), Y(d, d), R(d, d);
  std::vector<double> previous;
  EigenLogs ev;
  bool converged = false;
  for (int cycle = 0; cycle < kMaxCycles && !converged; ++cycle) {
    CMatrix Qs = Q;
    GradedTriangular T(d);
    for (long m = 0; m < M; ++m) {
      Y.noalias() = ops[m] * Q;
      if (!qr_step(spec.beta, Y, R)) return false;
      Q.swap(Y);
      if (!T.left_multiply(R)) return false;
    }
    if (cycle + 1 < kMinCycles) continue;
    CMatrix W = Qs.adjoint() * Q;
    if (!compressed_eigenvalues(spec.beta, W, T, ev)) return false;
    std::vector<double> sorted = ev.log_modulus;
    std::sort(sorted.begin(), sorted.end());
    if (previous.size() == sorted.size()) {
      converged = true;
      for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (!(std::abs(sorted[i] - previous[i]) <= 1e-8 * (1.0 + std::abs(sorted[i])))) converged = false;
      }
    }
    previous = std::move(sorted);
  }
  if (!converged) return false;

  std::vector<int> idx(ev.log_modulus.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int i, int j) { return ev.log_modulus[i] < ev.log_modulus[j]; });
  out.xi.assign(N, 0.0);
  out.theta.assign(N, 0.0);
  out.all_real = ev.all_real;
  if (spec.beta == 4) {
    // Conjugate pairs are adjacent in modulus order.
    for (int n = 0; n < N; ++n) {
      int i = idx[2 * n], j = idx[2 * n + 1];
      out.xi[n] = 0.5 * (ev.log_modulus[i] + ev.log_modulus[j]) / M;
      out.theta[n] = std::sin(ev.arg[i]) >= std::sin(ev.arg[j]) ? ev.arg[i] : ev.arg[j];
    }
  } else {
    for (int n = 0; n < N; ++n) {
      out.xi[n] = ev.log_modulus[idx[n]] / M;
      out.theta[n] = ev.arg[idx[n]];
    }
  }
  return std::all_of(out.xi.begin(), out.xi.end(), [](double v) { return std::isfinite(v); });
}

bool newman_replica(const ProductSpec& spec, int k, long M, Rng rng, double& lam, double& qr_sum) {
  const int d = rep_dim(spec), s = spec.beta == 4 ? 2 : 1, kk = s * k;
  const long F = static_cast<long>(spec.factors.size());
  CMatrix Q = CMatrix::Identity(d, d), Y(d, d), R(d, d), op, G(kk, kk);
  long double acc = 0.0L, acc_qr = 0.0L;
  for (long m = 0; m < M; ++m) {
    if (!draw_operator(spec, spec.factors[m % F], rng, op)) return false;
    Y.noalias() = op * Q;
    // log det(A^* X^* X A) / det(A^* A) with A = Q.leftCols(kk), A^* A = 1.
    G.noalias() = Y.leftCols(kk).adjoint() * Y.leftCols(kk);
    Eigen::LLT<CMatrix> llt(G);
    if (llt.info() != Eigen::Success) return false;
    double ld = 0.0;
    for (int i = 0; i < kk; ++i) ld += 2.0 * std::log(llt.matrixL()(i, i).real());
    acc += ld / s;
    if (!qr_step(spec.beta, Y, R)) return false;
    Q.swap(Y);
    for (int j = 0; j < k; ++j) acc_qr += std::log(R(s * j, s * j).real());
  }
  lam = static_cast<double>(acc / (2.0L * M));
  qr_sum = static_cast<double>(acc_qr / M);
  return std::isfinite(lam) && std::isfinite(qr_sum);
}

nlohmann::ordered_json vec_json(const std::vector<double>& v) { return nlohmann::ordered_json(v); }

}  // namespace

ExponentStatistics exact_exponents(const ProductSpec& spec) {
  spec.validate();
  const int N = spec.N, beta = spec.beta;
  ExponentStatistics st;
  st.beta = beta;
  bool all_ginibre = true, all_truncated = true;
  for (const auto& f : spec.factors) {
    if (f.inverse() || f.truncated()) all_ginibre = false;
    if (f.inverse() || !f.truncated()) all_truncated = false;
  }
  st.family = all_ginibre ? "Ginibre" : all_truncated ? "TruncatedUnitary" : "Mixed";
  bool any_truncated = std::any_of(spec.factors.begin(), spec.factors.end(),
                                   [](const FactorSpec& f) { return f.truncated(); });
  if (any_truncated && beta != 2) st.flags.push_back("formula_extrapolated");
  st.means.assign(N, 0.0);
  std::vector<double> var(N, 0.0);
  const double F = static_cast<double>(spec.factors.size());
  for (const auto& f : spec.factors) {
    for (int n = 1; n <= N; ++n) {
      double m = 0.0, v = 0.0;
      if (f.inverse()) {
        direct_contribution(beta, N + 1 - n, f, m, v);
        m = -m;
      } else {
        direct_contribution(beta, n, f, m, v);
      }
      st.means[n - 1] += m / F;
      var[n - 1] += v / F;
    }
  }
  st.sigmas.resize(N);
  for (int n = 0; n < N; ++n) st.sigmas[n] = std::sqrt(var[n]);
  return st;
}

std::string ExponentStatistics::to_json() const {
  nlohmann::ordered_json j;
  j["family"] = family;
  j["beta"] = beta;
  j["means"] = vec_json(means);
  j["sigmas"] = vec_json(sigmas);
  j["flags"] = flags;
  return j.dump(2);
}

std::string ReplicaEstimate::to_json(const std::string& kind) const {
  nlohmann::ordered_json j;
  j["kind"] = kind;
  j["spec"] = spec_to_json(spec);
  j["M"] = M;
  j["replicas"] = replicas;
  j["rejected"] = rejected;
  j["seed"] = seed;
  j["formulas"] = exact.family == "TruncatedUnitary" ? "truncated digamma differences"
                                                     : "digamma means, trigamma variances";
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (std::size_t n = 0; n < means.size(); ++n) {
    rows.push_back({{"n", n + 1},
                    {"mean", means[n]},
                    {"se", se[n]},
                    {"exact_mean", exact.means[n]},
                    {"exact_sigma", exact.sigmas[n]},
                    {"M_times_variance", variance[n] * static_cast<double>(M)},
                    {"z", z[n]}});
  }
  j["exponents"] = rows;
  j["tolerance_se"] = tolerance_se;
  j["pass"] = pass;
  return j.dump(2);
}

ReplicaEstimate mc_lyapunov(const ProductSpec& spec, long M, long replicas, std::uint64_t seed) {
  return run_lyapunov(spec, M, replicas, seed, true);
}

ReplicaEstimate mc_lyapunov_serial(const ProductSpec& spec, long M, long replicas, std::uint64_t seed) {
  return run_lyapunov(spec, M, replicas, seed, false);
}

StabilityEstimate mc_stability(const ProductSpec& spec, long M, long replicas, std::uint64_t seed) {
  check_steps(spec, M, replicas, "mc_stability");
  if (M > 1000) throw DomainError("mc_stability: at most 1000 steps");
  StabilityEstimate est;
  est.spec = spec;
  est.M = M;
  est.replicas = replicas;
  est.seed = seed;
  est.exact = exact_exponents(spec);
  std::vector<StabilityReplica> rows(replicas);
  std::vector<char> ok(replicas, 0);
  const Rng base(seed);
  for_replicas(replicas, true, [&](long r) { ok[r] = stability_replica(spec, M, base.split(r), rows[r]); });
  long real_count = 0;
  for (long r = 0; r < replicas; ++r) {
    if (!ok[r]) {
      ++est.rejected;
      continue;
    }
    if (rows[r].all_real) ++real_count;
    est.samples.push_back(std::move(rows[r].xi));
    est.theta.push_back(std::move(rows[r].theta));
  }
  if (!est.samples.empty()) est.fraction_all_real = static_cast<double>(real_count) / est.samples.size();
  summarize(est);
  return est;
}

double permanental_jpdf(const ExponentStatistics& stats, long M, const std::vector<double>& xi) {
  const int N = static_cast<int>(stats.means.size());
  if (N > 14) throw SizeError("permanental_jpdf: N > 14");
  if (static_cast<int>(xi.size()) != N) throw DimensionError("permanental_jpdf: need N points");
  if (M < 1) throw DomainError("permanental_jpdf: M must be positive");
  constexpr double kTwoPi = 6.283185307179586477;
  linalg::RMatrix G(N, N);
  for (int i = 0; i < N; ++i) {
    const double s2 = stats.sigmas[i] * stats.sigmas[i];
    if (!(s2 > 0.0)) throw DomainError("permanental_jpdf: nonpositive variance");
    for (int j = 0; j < N; ++j) {
      double d = xi[j] - stats.means[i];
      G(i, j) = std::sqrt(M / (kTwoPi * s2)) * std::exp(-static_cast<double>(M) * d * d / (2.0 * s2));
    }
  }
  return std::exp(specfun::ln_gamma(N + 1.0)) * linalg::permanent(G);
}

NewmanEstimate newman_partial_sum(const ProductSpec& spec, int k, long M, long replicas,
                                  std::uint64_t seed) {
  check_steps(spec, M, replicas, "newman_partial_sum");
  if (k < 1 || k > spec.N) throw DomainError("newman_partial_sum: need 1 <= k <= N");
  NewmanEstimate est;
  est.k = k;
  est.M = M;
  est.replicas = replicas;
  const ExponentStatistics ex = exact_exponents(spec);
  for (int n = spec.N - k; n < spec.N; ++n) {
    est.predicted_mean += ex.means[n];
    est.predicted_variance += ex.sigmas[n] * ex.sigmas[n] / static_cast<double>(M);
  }
  std::vector<double> lam(replicas), qr(replicas);
  std::vector<char> ok(replicas, 0);
  const Rng base(seed);
  for_replicas(replicas, true, [&](long r) { ok[r] = newman_replica(spec, k, M, base.split(r), lam[r], qr[r]); });
  std::vector<double> a, b;
  for (long r = 0; r < replicas; ++r) {
    if (ok[r]) {
      a.push_back(lam[r]);
      b.push_back(qr[r]);
    } else {
      ++est.rejected;
    }
  }
  const double n = static_cast<double>(a.size());
  if (a.size() < 2) return est;
  auto stats = [n](const std::vector<double>& v, double& mean, double& var) {
    mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    var /= n - 1.0;
  };
  double vb = 0.0;
  stats(a, est.mean, est.variance);
  stats(b, est.qr_sum_mean, vb);
  est.se = std::sqrt(est.variance / n);
  est.qr_sum_se = std::sqrt(vb / n);
  est.pass = std::abs(est.mean - est.predicted_mean) <= 4.0 * est.se;
  return est;
}

std::string NewmanEstimate::to_json() const {
  nlohmann::ordered_json j;
  j["k"] = k;
  j["M"] = M;
  j["replicas"] = replicas;
  j["rejected"] = rejected;
  j["mean"] = mean;
  j["se"] = se;
  j["variance"] = variance;
  j["predicted_mean"] = predicted_mean;
  j["predicted_variance"] = predicted_variance;
  j["qr_sum_mean"] = qr_sum_mean;
  j["qr_sum_se"] = qr_sum_se;
  j["pass"] = pass;
  return j.dump(2);
}

}  // namespace rmt
