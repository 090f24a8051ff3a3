#include "rmt/quadrature.hpp"

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <queue>
#include <numbers>

namespace rmt::quad {

namespace {

Rule build_rule(int n) {
  Rule r;
  r.x.resize(n);
  r.w.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1.0);
      }
      pp = n * (z * p1 - p2) / (z * z - 1.0);
      double dz = p1 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    r.x[i] = -z;
    r.x[n - 1 - i] = z;
    r.w[i] = r.w[n - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
  }
  return r;
}

// Golub-Welsch on the Laguerre Jacobi matrix.
Rule build_laguerre(int n) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    J(i, i) = 2.0 * i + 1.0;
    if (i + 1 < n) J(i, i + 1) = J(i + 1, i) = i + 1.0;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  Rule r;
  for (int i = 0; i < n; ++i) {
    r.x.push_back(es.eigenvalues()(i));
    r.w.push_back(es.eigenvectors()(0, i) * es.eigenvectors()(0, i));
  }
  return r;
}

}  // namespace

const Rule& gauss_laguerre(int n) {
  static std::mutex mu;
  static std::map<int, std::unique_ptr<Rule>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, std::make_unique<Rule>(build_laguerre(n))).first;
  return *it->second;
}

const Rule& gauss_legendre(int n) {
  static std::mutex mu;
  static std::map<int, std::unique_ptr<Rule>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) {
    it = cache.emplace(n, std::make_unique<Rule>(build_rule(n))).first;
  }
  return *it->second;
}

double fixed(const std::function<double(double)>& f, double a, double b, int n) {
  const Rule& r = gauss_legendre(n);
  double half = 0.5 * (b - a), mid = 0.5 * (a + b), s = 0.0;
  for (int i = 0; i < n; ++i) s += r.w[i] * f(mid + half * r.x[i]);
  return s * half;
}

Result adaptive(const std::function<double(double)>& f, double a, double b,
                double rel_tol, int max_depth) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  if (std::isinf(b)) {
    // t = a + u / (1 - u) on [0, 1).
    auto g = [&](double u) {
      const double d = 1.0 - u;
      return f(a + u / d) / (d * d);
    };
    return adaptive(g, 0.0, 1.0, rel_tol, max_depth);
  }
  struct Panel {
    double lo, hi, value, error, l1;
    int depth;
    bool operator<(const Panel& o) const { return error < o.error; }
  };
  auto eval = [&](double lo, double hi, int depth) {
    Panel p{lo, hi, 0.0, 0.0, 0.0, depth};
    p.value = GK::integrate(f, lo, hi, 0, 0.0, &p.error, &p.l1);
    return p;
  };
  // Global subdivision of the worst panel. The stopping rule is relative to
  // max(|I|, 1e-3 L1) so integrals that cancel to ~0 still terminate.
  std::priority_queue<Panel> heap;
  heap.push(eval(a, b, 0));
  Result r;
  r.value = heap.top().value;
  r.error = heap.top().error;
  r.l1 = heap.top().l1;
  const int max_panels = 4000;
  for (int it = 0; it < max_panels; ++it) {
    const double target = rel_tol * std::max(std::abs(r.value), 1e-3 * r.l1);
    if (r.error <= target) break;
    Panel worst = heap.top();
    if (worst.depth >= max_depth) break;
    heap.pop();
    const double mid = 0.5 * (worst.lo + worst.hi);
    Panel left = eval(worst.lo, mid, worst.depth + 1), right = eval(mid, worst.hi, worst.depth + 1);
    r.value += left.value + right.value - worst.value;
    r.error += left.error + right.error - worst.error;
    r.l1 += left.l1 + right.l1 - worst.l1;
    heap.push(left);
    heap.push(right);
  }
  // Resum to shed the drift of the running updates.
  r.value = r.error = r.l1 = 0.0;
  while (!heap.empty()) {
    r.value += heap.top().value;
    r.error += heap.top().error;
    r.l1 += heap.top().l1;
    heap.pop();
  }
  return r;
}

Result semi_infinite(const std::function<double(double)>& f, double a,
                     double first_width, double rel_tol) {
  Result total;
  double lo = a, width = first_width;
  int quiet = 0;
  for (int panel = 0; panel < 200; ++panel) {
    Result p = adaptive(f, lo, lo + width, rel_tol * 0.1);
    total.value += p.value;
    total.error += p.error;
    total.l1 += p.l1;
    if (std::abs(p.value) <= rel_tol * std::abs(total.value) &&
        p.l1 <= rel_tol * total.l1) {
      if (++quiet >= 3) return total;
    } else {
      quiet = 0;
    }
    lo += width;
    width *= 1.5;
  }
  total.error = std::numeric_limits<double>::infinity();
  return total;
}

}  // namespace rmt::quad
