#pragma once

#include <functional>
#include <vector>

namespace rmt::quad {

struct Rule {
  std::vector<double> x;  // nodes on [-1, 1]
  std::vector<double> w;
};

// Gauss-Legendre rule with n nodes. Rules are cached; the reference stays
// valid for the lifetime of the process.
const Rule& gauss_legendre(int n);

// Gauss-Laguerre rule for int_0^inf e^(-x) f(x) dx (nodes on [0, inf)).
const Rule& gauss_laguerre(int n);

// Fixed-order Gauss-Legendre on [a, b].
double fixed(const std::function<double(double)>& f, double a, double b, int n);

struct Result {
  double value = 0.0;
  double error = 0.0;
  double l1 = 0.0;
};

// Globally adaptive Gauss-Kronrod (31 points) on [a, b]; b may be +infinity.
// Stops when the error estimate is below rel_tol * max(|I|, 1e-3 * L1).
Result adaptive(const std::function<double(double)>& f, double a, double b,
                double rel_tol = 1e-10, int max_depth = 18);

// Adaptive integration on [a, inf) for integrands with a decaying tail:
// consecutive panels of growing width until a panel contributes less than
// rel_tol of the running total three times in a row.
Result semi_infinite(const std::function<double(double)>& f, double a,
                     double first_width, double rel_tol = 1e-10);

}  // namespace rmt::quad
