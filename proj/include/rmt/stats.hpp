#pragma once

#include <functional>
#include <string>
#include <vector>

namespace rmt {

struct Histogram {
  std::vector<double> edges;    // bins + 1
  std::vector<long> counts;
  std::vector<double> density;  // counts / (n * width)
  std::vector<double> se;       // sqrt(p (1 - p) / n) / width, p = counts / n
  long n = 0;                   // all samples, including those out of range
  long n_in_range = 0;

  int bins() const { return static_cast<int>(counts.size()); }
  double width(int i) const { return edges[i + 1] - edges[i]; }
  // sum density * width; equals n_in_range / n.
  double integral() const;
};

// Uniform bins on [lo, hi). Needs at least 1000 samples; DomainError for an
// empty range.
Histogram histogram(const std::vector<double>& samples, double lo, double hi, int bins);

struct ComparisonReport {
  std::vector<double> edges;      // after merging
  std::vector<double> exact;      // bin-averaged exact density
  std::vector<double> empirical;
  std::vector<double> se;
  std::vector<double> z;
  std::vector<double> expected;   // expected counts
  double sup_norm = 0.0;          // max |empirical - exact|
  double max_abs_z = 0.0;
  double z_tolerance = 3.0;
  double min_expected = 30.0;
  bool pass = false;

  std::string to_json() const;
  std::string to_csv() const;
};

// Merges adjacent bins until each holds at least min_expected expected
// counts, then scores z = (empirical - exact) / se. bin_probability(a, b) is
// the exact probability of [a, b).
ComparisonReport compare_histogram(const Histogram& h,
                                   const std::function<double(double, double)>& bin_probability,
                                   double z_tolerance = 3.0, double min_expected = 30.0);

struct KsResult {
  double D = 0.0;
  double p_value = 1.0;
};

// Kolmogorov distribution tail Q(lambda) = 2 sum (-1)^(k-1) exp(-2 k^2 lambda^2).
double kolmogorov_tail(double lambda);

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);
KsResult ks_one_sample(std::vector<double> a, const std::function<double(double)>& cdf);

struct MeanSe {
  double mean = 0.0, se = 0.0, variance = 0.0;
};
MeanSe mean_se(const std::vector<double>& v);

// Binomial proportion with its standard error.
MeanSe proportion(long successes, long trials);

}  // namespace rmt
