#include "rmt/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <nlohmann/json.hpp>

#include "rmt/error.hpp"

namespace rmt {

double Histogram::integral() const {
  double s = 0.0;
  for (int i = 0; i < bins(); ++i) s += density[i] * width(i);
  return s;
}

Histogram histogram(const std::vector<double>& samples, double lo, double hi, int bins) {
  if (!(hi > lo) || bins < 1) throw DomainError("histogram: empty range");
  if (samples.size() < 1000) throw DomainError("histogram: needs at least 1000 samples");
  Histogram h;
  h.edges.resize(bins + 1);
  for (int i = 0; i <= bins; ++i) h.edges[i] = lo + (hi - lo) * i / bins;
  h.counts.assign(bins, 0);
  const double w = (hi - lo) / bins;
  for (double x : samples) {
    if (!(x >= lo && x < hi)) continue;
    int i = std::min(bins - 1, static_cast<int>((x - lo) / w));
    // Guard the floating-point bin boundary.
    while (i > 0 && x < h.edges[i]) --i;
    while (i < bins - 1 && x >= h.edges[i + 1]) ++i;
    ++h.counts[i];
  }
  h.n = static_cast<long>(samples.size());
  const double n = static_cast<double>(h.n);
  h.density.resize(bins);
  h.se.resize(bins);
  for (int i = 0; i < bins; ++i) {
    h.n_in_range += h.counts[i];
    double p = h.counts[i] / n;
    h.density[i] = p / h.width(i);
    h.se[i] = std::sqrt(p * (1.0 - p) / n) / h.width(i);
  }
  return h;
}

ComparisonReport compare_histogram(const Histogram& h,
                                   const std::function<double(double, double)>& bin_probability,
                                   double z_tolerance, double min_expected) {
  ComparisonReport rep;
  rep.z_tolerance = z_tolerance;
  rep.min_expected = min_expected;
  const double n = static_cast<double>(h.n);
  struct Group {
    double a, b, p;
    long count;
  };
  std::vector<Group> groups;
  Group cur{h.edges[0], h.edges[0], 0.0, 0};
  for (int i = 0; i < h.bins(); ++i) {
    cur.b = h.edges[i + 1];
    cur.p += bin_probability(h.edges[i], h.edges[i + 1]);
    cur.count += h.counts[i];
    if (cur.p * n >= min_expected) {
      groups.push_back(cur);
      cur = Group{cur.b, cur.b, 0.0, 0};
    }
  }
  if (cur.b > cur.a) {
    if (groups.empty()) {
      groups.push_back(cur);
    } else {
      groups.back().b = cur.b;
      groups.back().p += cur.p;
      groups.back().count += cur.count;
    }
  }
  rep.edges.push_back(groups.front().a);
  bool enough = true;
  for (const auto& g : groups) {
    const double w = g.b - g.a;
    const double ph = g.count / n;
    // Empirical SE; the exact probability stands in for an empty bin.
    const double pse = g.count > 0 ? ph : g.p;
    const double se = std::sqrt(pse * (1.0 - pse) / n) / w;
    const double ex = g.p / w, em = ph / w;
    rep.edges.push_back(g.b);
    rep.exact.push_back(ex);
    rep.empirical.push_back(em);
    rep.se.push_back(se);
    rep.expected.push_back(g.p * n);
    double z = se > 0.0 ? (em - ex) / se : (em == ex ? 0.0 : HUGE_VAL);
    rep.z.push_back(z);
    rep.sup_norm = std::max(rep.sup_norm, std::abs(em - ex));
    rep.max_abs_z = std::max(rep.max_abs_z, std::abs(z));
    if (g.p * n < min_expected) enough = false;
  }
  rep.pass = enough && rep.max_abs_z <= z_tolerance;
  return rep;
}

std::string ComparisonReport::to_json() const {
  nlohmann::ordered_json j;
  j["edges"] = edges;
  j["exact"] = exact;
  j["empirical"] = empirical;
  j["se"] = se;
  j["z"] = z;
  j["expected_counts"] = expected;
  j["sup_norm"] = sup_norm;
  j["max_abs_z"] = max_abs_z;
  j["z_tolerance"] = z_tolerance;
  j["min_expected"] = min_expected;
  j["verdict"] = pass ? "pass" : "fail";
  return j.dump(2);
}

std::string ComparisonReport::to_csv() const {
  std::ostringstream os;
  os << "lo,hi,exact,empirical,se,z,expected\n";
  char buf[512];
  for (std::size_t i = 0; i < exact.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", edges[i], edges[i + 1],
                  exact[i], empirical[i], se[i], z[i], expected[i]);
    os << buf;
  }
  return os.str();
}

double kolmogorov_tail(double lambda) {
  if (lambda < 0.2) return 1.0;
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) {
    double t = std::exp(-2.0 * k * k * lambda * lambda);
    s += (k % 2 ? 2.0 : -2.0) * t;
    if (t < 1e-17) break;
  }
  return std::clamp(s, 0.0, 1.0);
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw DomainError("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double D = 0.0;
  while (i < a.size() && j < b.size()) {
    double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    D = std::max(D, std::abs(i / na - j / nb));
  }
  const double ne = na * nb / (na + nb), sq = std::sqrt(ne);
  return {D, kolmogorov_tail((sq + 0.12 + 0.11 / sq) * D)};
}

KsResult ks_one_sample(std::vector<double> a, const std::function<double(double)>& cdf) {
  if (a.empty()) throw DomainError("ks_one_sample: empty sample");
  std::sort(a.begin(), a.end());
  const double n = static_cast<double>(a.size());
  double D = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double F = cdf(a[i]);
    D = std::max({D, std::abs((i + 1) / n - F), std::abs(F - i / n)});
  }
  const double sq = std::sqrt(n);
  return {D, kolmogorov_tail((sq + 0.12 + 0.11 / sq) * D)};
}

MeanSe mean_se(const std::vector<double>& v) {
  MeanSe r;
  if (v.empty()) return r;
  const double n = static_cast<double>(v.size());
  for (double x : v) r.mean += x;
  r.mean /= n;
  if (v.size() > 1) {
    for (double x : v) r.variance += (x - r.mean) * (x - r.mean);
    r.variance /= n - 1.0;
  }
  r.se = std::sqrt(r.variance / n);
  return r;
}

MeanSe proportion(long successes, long trials) {
  MeanSe r;
  if (trials <= 0) return r;
  r.mean = static_cast<double>(successes) / trials;
  r.variance = r.mean * (1.0 - r.mean);
  r.se = std::sqrt(r.variance / trials);
  return r;
}

}  // namespace rmt
