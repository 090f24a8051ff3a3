#pragma once

#include <string>
#include <vector>

#include "rmt/ensembles.hpp"

namespace rmt {

enum class LimitKind {
  OriginHypergeometric,
  OriginTruncated,
  BulkGinibre,
  SoftEdgeErfc,
  WeakNonUnitarity,
  MeijerHardEdge,
  MeijerHardEdgeTruncated,
  Bessel,
  Sine,
  Airy,
};

std::string to_string(LimitKind k);
LimitKind limit_kind_from_string(const std::string& s);

struct LimitKernel {
  LimitKind kind = LimitKind::OriginHypergeometric;
  std::vector<int> nu;     // M entries (Bessel: nu[0] is the order)
  std::vector<int> kappa;  // J fixed truncations
  int M_weak = 1;          // weak kernel: number of factors
  int kappa_weak = 1;      // weak kernel: common truncation
  cplx z0 = 1.0;           // soft edge point, |z0| = 1

  int M() const { return static_cast<int>(nu.size()); }
  int J() const { return static_cast<int>(kappa.size()); }
};

// Kernel value. Real-valued kinds return a zero imaginary part; hard-edge
// kinds need real positive u, v; the weak kind takes u = x + iy with x > 0
// (and is zero for x <= 0).
cplx eval_limit_kernel(const LimitKernel& k, cplx u, cplx v);
double eval_limit_kernel(const LimitKernel& k, double x, double y);

// Origin weights G^{M,0}_{0,M}(nu | |z|^2) and G^{M,0}_{J,M}(kappa; nu | |z|^2).
double origin_weight(const LimitKernel& k, cplx z);

enum class HardEdgeForm { Hypergeometric, MeijerProduct };

// Meijer G-kernel by the s-integral with either form of the first factor
// (0F_M / prod Gamma, or G^{1,0}_{0,M+1}); used to cross-check the two.
double meijer_hard_edge(const LimitKernel& k, double x, double y,
                        HardEdgeForm form = HardEdgeForm::Hypergeometric);

struct ConvergenceReport {
  std::string kind;
  ProductSpec spec;
  std::vector<int> N;
  std::vector<cplx> grid;               // origin: points; hard edge: x on the real axis
  std::vector<double> deviation;        // sup over grid pairs, per N
  std::vector<double> bound;            // origin only: tail bound per N
  bool decreasing = false;
  bool within_bound = true;
  std::string scaling;
  std::string to_json() const;
};

// Finite-N kernel against the origin limit on a fixed 5 x 5 grid. Ginibre
// specs compare |K_N - K_origin| pi prod Gamma(nu + 1) with the tail bound
// of the series; inverse-mixed specs compare sqrt(w(u) w(v)) K at z / N^(L/2)
// (divided by N^L) with the L = 0 limit.
ConvergenceReport converge_origin(const ProductSpec& spec, const std::vector<int>& Ns);

// (1/N^(L+1)) K_N(x / N^(L+1), y / N^(L+1)) against the Meijer G-kernel on
// x, y in {0.5, 1, 2}. Truncated factors are re-sized with N as
// kappa = N + truncation, so every kappa grows (J = 0).
ConvergenceReport converge_hard_edge(const ProductSpec& spec, const std::vector<int>& Ns);

// det over the k x k weak-kernel matrix at points x_j + i y_j.
double weak_kernel_density(int M, int kappa, const std::vector<cplx>& points);

}  // namespace rmt
