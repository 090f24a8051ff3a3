#pragma once

#include <complex>
#include <functional>
#include <vector>

#include "rmt/ensembles.hpp"
#include "rmt/specfun.hpp"

namespace rmt {

// Rotation-invariant eigenvalue weight w(z) = G(arg_scale * |z|^2) of a
// product ensemble. Parameter lists are stored in sorted order so that any
// permutation of the factors yields the identical model.
struct WeightModel {
  ProductSpec spec;
  specfun::MeijerParams meijer;
  double arg_scale = 1.0;
  // True when w vanishes for |z| > 1 (only truncated direct factors).
  bool compact = false;
  specfun::MeijerOptions options;

  static WeightModel from_spec(const ProductSpec& spec);

  // w as a function of t = |z|^2.
  double eval(double t) const;
  // log of int_0^inf t^(s-1) G(t) dt; DomainError if a gamma argument is <= 0.
  double log_mellin(double s) const;
  // log of int_0^inf t^k w(t) dt.
  double log_radial_moment(int k) const;
};

double weight_eval(const WeightModel& w, cplx z);

// Squared norms h_0..h_{N-1} of the beta = 2 planar orthogonal polynomials.
std::vector<double> norms(const ProductSpec& spec);

// beta = 2 kernel K_N(z, u) = sum_n (z u*)^n / h_n.
class KernelModel {
 public:
  explicit KernelModel(const ProductSpec& spec);
  const WeightModel& weight() const { return weight_; }
  int N() const { return static_cast<int>(log_h_.size()); }
  const std::vector<double>& log_norms() const { return log_h_; }
  cplx kernel(cplx z, cplx u) const;
  // R_1(z) = w(|z|^2) K(z, z).
  double density(cplx z) const;

 private:
  WeightModel weight_;
  std::vector<double> log_h_;
};

double correlation_k(const KernelModel& K, const std::vector<cplx>& points);

// beta = 4 skew-orthogonal system built from the rotational moments s_k.
class SkewOPSystem {
 public:
  explicit SkewOPSystem(const ProductSpec& spec);
  const WeightModel& weight() const { return weight_; }
  int N() const { return N_; }
  double log_s(int k) const { return log_s_[k]; }
  double h(int n) const;
  cplx p(int k, cplx z) const;
  cplx kernel(cplx z, cplx u) const;
  // R_1(z) = w(z) (z* - z) K(z, z*), real for z in the upper half plane.
  double density(cplx z) const;

  // <f, g>_s over the upper half plane by polar quadrature.
  cplx skew_product(const std::function<cplx(cplx)>& f, const std::function<cplx(cplx)>& g,
                    double rel_tol = 1e-9) const;

 private:
  WeightModel weight_;
  int N_;
  std::vector<double> log_s_;                 // k = 0 .. 2N
  std::vector<std::vector<double>> log_c_;    // log coefficient of z^(2k) in p_(2n)
};

double correlation_k_beta4(const SkewOPSystem& S, const std::vector<cplx>& points);

// Independent radii. Marginal n (1-based) has t = r^2 density
// t^k(n) w(t) / m_k(n) with k(n) = n - 1 for beta = 2 and 2n - 1 for beta = 4.
class RadialMarginals {
 public:
  explicit RadialMarginals(const ProductSpec& spec);
  int N() const { return N_; }
  int power(int n) const { return beta_ == 4 ? 2 * n - 1 : n - 1; }
  // Density of r_n in r.
  double density(int n, double r) const;
  // P(r_n <= r) by adaptive quadrature.
  double cdf(int n, double r, double rel_tol = 1e-12) const;
  // Density of the radius of a uniformly chosen eigenvalue: (1/N) sum_n f_n.
  double pooled_density(double r) const;
  // Joint density of unordered radii via the permanent (N <= 14).
  double joint_density_permanent(const std::vector<double>& r) const;
  const WeightModel& weight() const { return weight_; }

 private:
  WeightModel weight_;
  int N_, beta_;
  std::vector<double> log_m_;
};

struct HoleProbability {
  double marginal_product = 0.0;  // defining value
  double closed_form = 0.0;       // Meijer-G product, NaN when not available
  double closed_form_printed = 0.0;  // mixed inverse case: printed denominator
};

// P(no eigenvalue in |z| < r).
HoleProbability hole_probability(const ProductSpec& spec, double r);

struct AllRealProbability {
  double value = 0.0;
  double error_estimate = 0.0;
  bool low_precision = false;
};

// beta = 1 probability that every eigenvalue is real, N even.
AllRealProbability prob_all_real(int N, const std::vector<int>& nu);

// Polar quadrature of radial(|z|) f(z) over the disc |z| < R (or the plane
// for R = inf), optionally restricted to the upper half plane. The radial
// factor is evaluated once per ring; pass an expensive weight there.
double integrate_plane(const std::function<double(cplx)>& f, double R, bool upper_half,
                       const std::function<double(double)>& radial = {}, int angular_nodes = 64,
                       double rel_tol = 1e-9);

}  // namespace rmt
