#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rmt/ensembles.hpp"

namespace rmt {

// Means and per-step scales of the exponents, indexed n = 1..N from the
// smallest exponent upwards (stored 0-based). A step is one factor of the
// spec; means and variances are averaged over the factor list.
struct ExponentStatistics {
  std::vector<double> means;
  std::vector<double> sigmas;
  int beta = 2;
  std::string family;               // "Ginibre", "TruncatedUnitary" or "Mixed"
  std::vector<std::string> flags;   // "formula_extrapolated" for truncated beta != 2
  std::string to_json() const;
};

ExponentStatistics exact_exponents(const ProductSpec& spec);

struct ReplicaEstimate {
  ProductSpec spec;
  long M = 0;
  long replicas = 0;
  long rejected = 0;
  std::uint64_t seed = 0;
  std::vector<std::vector<double>> samples;  // accepted replicas x N
  std::vector<double> means, se, variance;   // across accepted replicas
  ExponentStatistics exact;
  std::vector<double> z;                     // (mean - exact) / se
  double tolerance_se = 4.0;
  bool pass = false;
  std::string to_json(const std::string& kind) const;
};

// QR exponents of a product of M steps (M a multiple of the factor count,
// M >= 1000). Replica r draws from Rng(seed).split(r).
ReplicaEstimate mc_lyapunov(const ProductSpec& spec, long M, long replicas, std::uint64_t seed);
ReplicaEstimate mc_lyapunov_serial(const ProductSpec& spec, long M, long replicas, std::uint64_t seed);

struct StabilityEstimate : ReplicaEstimate {
  // Eigenvalue arguments per accepted replica, paired with samples (for
  // beta = 4 the representative with Im >= 0).
  std::vector<std::vector<double>> theta;
  // beta = 1: fraction of accepted replicas whose spectrum is entirely real.
  double fraction_all_real = 0.0;
};

// Stability exponents xi_n = log|z_n| / M of the eigenvalues of the product
// (M <= 1000). The eigenvalues are obtained by simultaneous iteration over
// the stored factor sequence, which never forms the product; groups of
// eigenvalues with nearly equal moduli are resolved from the compressed
// block. Non-convergence or non-finite growth rejects the replica.
StabilityEstimate mc_stability(const ProductSpec& spec, long M, long replicas, std::uint64_t seed);

// The permanental approximation N! per[g_i(xi_j)] with Gaussian g_i of mean
// lambda_i and variance sigma_i^2 / M. Its integral over R^N is (N!)^2; over
// the ordered sector xi_1 < ... < xi_N it is N!. Throws SizeError for N > 14.
double permanental_jpdf(const ExponentStatistics& stats, long M, const std::vector<double>& xi);

struct NewmanEstimate {
  int k = 0;
  long M = 0;
  long replicas = 0;
  long rejected = 0;
  double mean = 0.0, se = 0.0;
  double variance = 0.0;             // across replicas
  double predicted_mean = 0.0;       // sum of the k largest exact means
  double predicted_variance = 0.0;   // sum of their sigma^2 / M, covariances dropped
  double qr_sum_mean = 0.0;          // sum of the k largest QR exponents, same replicas
  double qr_sum_se = 0.0;
  bool pass = false;                 // |mean - predicted_mean| <= 4 se
  std::string to_json() const;
};

// Partial sum of the k largest exponents from log det(A^* X^* X A) with A the
// running top-k orthonormal frame.
NewmanEstimate newman_partial_sum(const ProductSpec& spec, int k, long M, long replicas,
                                  std::uint64_t seed);

}  // namespace rmt
