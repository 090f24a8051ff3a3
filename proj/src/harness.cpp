#include "rmt/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "rmt/asymptotics.hpp"
#include "rmt/error.hpp"
#include "rmt/exact_ev.hpp"
#include "rmt/exact_sv.hpp"
#include "rmt/exponents.hpp"
#include "rmt/quadrature.hpp"
#include "rmt/spec_json.hpp"
#include "rmt/stats.hpp"

namespace rmt {

namespace {

constexpr double kPi = 3.141592653589793238;

const std::vector<std::pair<Mode, std::string>>& mode_names() {
  static const std::vector<std::pair<Mode, std::string>> names = {
      {Mode::Sample, "sample"},       {Mode::ExactDensity, "exact-density"}, {Mode::Hole, "hole"},
      {Mode::SvDensity, "sv-density"}, {Mode::Kernel, "kernel"},             {Mode::Converge, "converge"},
      {Mode::Lyapunov, "lyapunov"},   {Mode::Stability, "stability"},       {Mode::Verify, "verify"},
  };
  return names;
}

const ProductSpec& need_spec(const ExperimentConfig& c) {
  if (!c.spec) throw UsageError("mode " + to_string(c.mode) + " needs a spec");
  return *c.spec;
}

std::uint64_t need_seed(const ExperimentConfig& c) {
  if (!c.seed) throw UsageError("mode " + to_string(c.mode) + " needs a seed");
  return *c.seed;
}

std::vector<double> linear_grid(double a, double b, int n) {
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) g[i] = n == 1 ? a : a + (b - a) * i / (n - 1);
  return g;
}

// Pooled radial density of one eigenvalue (integral 1) for beta = 2 or 4.
std::function<double(double)> radial_density(const ProductSpec& spec) {
  if (spec.beta == 2) {
    auto K = std::make_shared<KernelModel>(spec);
    return [K, N = spec.N](double r) { return 2.0 * kPi * r * K->density(cplx(r, 0.0)) / N; };
  }
  if (spec.beta == 4) {
    auto S = std::make_shared<SkewOPSystem>(spec);
    return [S, N = spec.N](double r) {
      const auto& g = quad::gauss_legendre(32);
      double s = 0.0;
      for (std::size_t i = 0; i < g.x.size(); ++i) {
        s += 0.5 * kPi * g.w[i] * S->density(std::polar(r, 0.5 * kPi * (g.x[i] + 1.0)));
      }
      return r * s / N;
    };
  }
  throw UnsupportedError("no exact complex-eigenvalue density for beta = 1");
}

double default_rmax(const std::function<double(double)>& rho) {
  double peak = 0.0;
  for (double r = 0.05; r < 10.0; r += 0.05) {
    double v = rho(r);
    peak = std::max(peak, v);
    if (r > 0.5 && v < 1e-7 * peak) return r;
  }
  return 10.0;
}

struct ModeOutput {
  std::string csv;
  nlohmann::ordered_json report;
  bool pass = true;
  int fail_code = 1;
};

nlohmann::ordered_json base_report(const ExperimentConfig& c) {
  nlohmann::ordered_json j;
  j["mode"] = to_string(c.mode);
  if (c.spec) j["spec"] = spec_to_json(*c.spec);
  if (c.seed) j["seed"] = *c.seed;
  return j;
}

ModeOutput run_sample(const ExperimentConfig& c) {
  const ProductSpec& spec = need_spec(c);
  const std::uint64_t seed = need_seed(c);
  if (c.samples < 1) throw UsageError("sample mode needs samples >= 1");
  SampleBatch batch = sample_spectra(spec, c.samples, seed);
  ModeOutput out;
  std::ostringstream os;
  os << "sample,index,re,im\n";
  std::vector<double> radii;
  for (std::size_t s = 0; s < batch.samples.size(); ++s) {
    const auto& ev = batch.samples[s].eigenvalues;
    for (std::size_t i = 0; i < ev.size(); ++i) {
      os << s << ',' << i << ',' << csv_number(ev[i].real()) << ',' << csv_number(ev[i].imag()) << '\n';
      radii.push_back(std::abs(ev[i]));
    }
  }
  out.csv = os.str();
  out.report = base_report(c);
  out.report["samples"] = c.samples;
  out.report["rejected"] = batch.rejected;
  if (spec.beta != 1 && radii.size() >= 1000) {
    auto rho = radial_density(spec);
    double rmax = c.r_max > 0.0 ? c.r_max : default_rmax(rho);
    Histogram h = histogram(radii, 0.0, rmax, c.bins);
    ComparisonReport rep = compare_histogram(
        h, [&](double a, double b) { return quad::adaptive(rho, a, b, 1e-10).value; },
        c.tolerance("z", 3.0), c.tolerance("min_expected", 30.0));
    out.report["formulas"] = spec.beta == 2 ? "kernel sum density with Meijer-G weight"
                                            : "skew-orthogonal Pfaffian one-point function";
    out.report["comparison"] = nlohmann::ordered_json::parse(rep.to_json());
    out.pass = rep.pass;
    out.fail_code = 3;
  }
  return out;
}

ModeOutput run_exact_density(const ExperimentConfig& c) {
  const ProductSpec& spec = need_spec(c);
  auto rho = radial_density(spec);
  double rmax = c.r_max > 0.0 ? c.r_max : default_rmax(rho);
  ModeOutput out;
  std::ostringstream os;
  os << "r,R1,radial_density\n";
  std::function<double(cplx)> R1;
  if (spec.beta == 2) {
    auto K = std::make_shared<KernelModel>(spec);
    R1 = [K](cplx z) { return K->density(z); };
  } else {
    auto S = std::make_shared<SkewOPSystem>(spec);
    R1 = [S](cplx z) { return S->density(z); };
  }
  // Cell midpoints: the weight is singular at the origin once M >= 2.
  const double dr = rmax / c.points;
  for (double r : linear_grid(0.5 * dr, rmax - 0.5 * dr, c.points)) {
    cplx z = spec.beta == 4 ? cplx(0.0, r) : cplx(r, 0.0);
    os << csv_number(r) << ',' << csv_number(R1(z)) << ',' << csv_number(spec.N * rho(r)) << '\n';
  }
  out.csv = os.str();
  const double integral = integrate_plane(R1, HUGE_VAL, spec.beta == 4);
  const double tol = c.tolerance("integral", 1e-6);
  out.report = base_report(c);
  out.report["formulas"] = spec.beta == 2 ? "kernel sum density with Meijer-G weight"
                                          : "skew-orthogonal Pfaffian one-point function";
  out.report["integral"] = integral;
  out.report["expected_integral"] = spec.N;
  out.report["tolerances"] = {{"integral", tol}};
  out.pass = std::abs(integral - spec.N) <= tol;
  return out;
}

ModeOutput run_hole(const ExperimentConfig& c) {
  const ProductSpec& spec = need_spec(c);
  if (c.radii.empty()) throw UsageError("hole mode needs radii");
  SampleBatch batch;
  if (c.samples > 0) batch = sample_spectra(spec, c.samples, need_seed(c));
  const double floor_tol = c.tolerance("absolute", 1e-4), zt = c.tolerance("z", 3.0);
  ModeOutput out;
  out.report = base_report(c);
  out.report["formulas"] = "radial marginal product; Meijer-G closed form";
  std::ostringstream os;
  os << "r,marginal_product,closed_form,mc,mc_se\n";
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  bool numeric_ok = true, stat_ok = true;
  for (double r : c.radii) {
    HoleProbability hp = hole_probability(spec, r);
    MeanSe mc;
    mc.mean = std::nan("");
    if (!batch.samples.empty()) {
      long empty = 0;
      for (const auto& s : batch.samples) {
        if (std::none_of(s.eigenvalues.begin(), s.eigenvalues.end(), [r](cplx z) { return std::abs(z) < r; })) {
          ++empty;
        }
      }
      mc = proportion(empty, static_cast<long>(batch.samples.size()));
    }
    double tol = std::max(floor_tol, zt * (std::isnan(mc.mean) ? 0.0 : mc.se));
    if (!std::isnan(hp.closed_form) && std::abs(hp.closed_form - hp.marginal_product) > tol) numeric_ok = false;
    if (!std::isnan(mc.mean)) {
      if (std::abs(mc.mean - hp.marginal_product) > tol) stat_ok = false;
      if (!std::isnan(hp.closed_form) && std::abs(mc.mean - hp.closed_form) > tol) stat_ok = false;
    }
    os << csv_number(r) << ',' << csv_number(hp.marginal_product) << ',' << csv_number(hp.closed_form) << ','
       << csv_number(mc.mean) << ',' << csv_number(mc.se) << '\n';
    rows.push_back({{"r", r}, {"marginal_product", hp.marginal_product}, {"closed_form", hp.closed_form},
                    {"mc", mc.mean}, {"mc_se", mc.se}});
  }
  out.csv = os.str();
  out.report["rows"] = rows;
  out.report["tolerances"] = {{"absolute", floor_tol}, {"z", zt}};
  out.pass = numeric_ok && stat_ok;
  out.fail_code = numeric_ok ? 3 : 1;
  return out;
}

ModeOutput run_sv_density(const ExperimentConfig& c) {
  const ProductSpec& spec = need_spec(c);
  BiorthogonalSystem S = build_system(spec);
  std::vector<double> xs = c.x;
  double xmax = c.r_max > 0.0 ? c.r_max : 4.0 * spec.N * spec.factors.size();
  if (xs.empty()) xs = linear_grid(xmax / c.points, xmax, c.points);
  ModeOutput out;
  std::ostringstream os;
  os << "x,density\n";
  for (double x : xs) os << csv_number(x) << ',' << csv_number(sv_kernel(S, x, x)) << '\n';
  out.csv = os.str();
  out.report = base_report(c);
  out.report["formulas"] = "biorthogonal kernel, sum form or contour form";
  out.report["system"] = nlohmann::ordered_json::parse(to_json(S));
  if (c.samples > 0) {
    RealizeOptions opt;
    opt.eigenvalues = false;
    opt.singular_values = true;
    SampleBatch batch = sample_spectra(spec, c.samples, need_seed(c), opt);
    std::vector<double> sv;
    for (const auto& s : batch.samples) sv.insert(sv.end(), s.squared_singular_values.begin(), s.squared_singular_values.end());
    Histogram h = histogram(sv, 0.0, xmax, c.bins);
    auto dens = [&](double x) { return sv_kernel(S, x, x) / spec.N; };
    ComparisonReport rep = compare_histogram(
        h, [&](double a, double b) { return quad::fixed(dens, a, b, 16); }, c.tolerance("z", 3.0),
        c.tolerance("min_expected", 30.0));
    out.report["comparison"] = nlohmann::ordered_json::parse(rep.to_json());
    out.pass = rep.pass;
    out.fail_code = 3;
  }
  return out;
}

ModeOutput run_kernel(const ExperimentConfig& c) {
  const ProductSpec& spec = need_spec(c);
  BiorthogonalSystem S = build_system(spec);
  std::vector<double> xs = c.x.empty() ? std::vector<double>{0.5, 1.0, 2.0} : c.x;
  const double tol = c.tolerance("kernel_agreement", 1e-7);
  ModeOutput out;
  std::ostringstream os;
  os << "x,y,sum,contour,relative\n";
  double worst = 0.0;
  for (double x : xs) {
    for (double y : xs) {
      double a = sv_kernel_sum(S, x, y);
      ContourValue b = sv_kernel_contour(S, x, y);
      double rel = std::abs(a - b.value) / std::max(std::abs(a), 1e-300);
      worst = std::max(worst, rel);
      os << csv_number(x) << ',' << csv_number(y) << ',' << csv_number(a) << ',' << csv_number(b.value) << ','
         << csv_number(rel) << '\n';
    }
  }
  out.csv = os.str();
  out.report = base_report(c);
  out.report["formulas"] = "biorthogonal kernel: finite sum vs double-contour integral";
  out.report["max_relative"] = worst;
  out.report["tolerances"] = {{"kernel_agreement", tol}};
  out.pass = worst <= tol;
  return out;
}

ModeOutput run_converge(const ExperimentConfig& c) {
  const ProductSpec& spec = need_spec(c);
  std::vector<int> Ns = c.N_list.empty() ? std::vector<int>{16, 64} : c.N_list;
  ConvergenceReport r;
  if (c.limit == "origin") r = converge_origin(spec, Ns);
  else if (c.limit == "hard_edge") r = converge_hard_edge(spec, Ns);
  else throw UsageError("limit must be origin or hard_edge");
  ModeOutput out;
  std::ostringstream os;
  os << "N,deviation,bound\n";
  for (std::size_t i = 0; i < r.N.size(); ++i) {
    os << r.N[i] << ',' << csv_number(r.deviation[i]) << ','
       << csv_number(i < r.bound.size() ? r.bound[i] : std::nan("")) << '\n';
  }
  out.csv = os.str();
  out.report = base_report(c);
  out.report["convergence"] = nlohmann::ordered_json::parse(r.to_json());
  out.pass = r.decreasing && r.within_bound;
  return out;
}

ModeOutput exponents_output(const ExperimentConfig& c, const ReplicaEstimate& e, const std::string& kind) {
  ModeOutput out;
  std::ostringstream os;
  os << "n,exact_mean,exact_sigma,mean,se,z\n";
  for (std::size_t n = 0; n < e.means.size(); ++n) {
    os << n + 1 << ',' << csv_number(e.exact.means[n]) << ',' << csv_number(e.exact.sigmas[n]) << ','
       << csv_number(e.means[n]) << ',' << csv_number(e.se[n]) << ',' << csv_number(e.z[n]) << '\n';
  }
  out.csv = os.str();
  out.report = base_report(c);
  out.report["estimate"] = nlohmann::ordered_json::parse(e.to_json(kind));
  out.pass = e.pass;
  out.fail_code = 3;
  return out;
}

ModeOutput run_verify(const ExperimentConfig& c) {
  const std::uint64_t seed = c.seed.value_or(20260101ULL);
  auto results = run_acceptance(seed, c.criteria, [](const CriterionResult& r) {
    std::fprintf(stderr, "[%s] %2d %s (%.1f s)\n", r.pass ? "PASS" : "FAIL", r.id, r.name.c_str(), r.seconds);
  });
  ModeOutput out;
  std::ostringstream os;
  os << "id,name,pass,statistical,seconds,time_limit\n";
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  bool det_ok = true, stat_ok = true;
  for (const auto& r : results) {
    os << r.id << ",\"" << r.name << "\"," << (r.pass ? 1 : 0) << ',' << (r.statistical ? 1 : 0) << ','
       << csv_number(r.seconds) << ',' << csv_number(r.time_limit) << '\n';
    rows.push_back({{"id", r.id}, {"name", r.name}, {"pass", r.pass}, {"statistical", r.statistical},
                    {"seconds", r.seconds}, {"detail", r.detail}});
    if (!r.pass) (r.statistical ? stat_ok : det_ok) = false;
  }
  out.csv = os.str();
  out.report = base_report(c);
  out.report["seed"] = seed;
  out.report["criteria"] = rows;
  out.pass = det_ok && stat_ok;
  out.fail_code = det_ok ? 3 : 1;
  return out;
}

// Type-checked field access.
template <class T>
T field(const nlohmann::json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("config field '") + key + "': " + e.what());
  }
}

}  // namespace

std::string to_string(Mode m) {
  for (const auto& [k, v] : mode_names()) {
    if (k == m) return v;
  }
  return "?";
}

Mode mode_from_string(const std::string& s) {
  for (const auto& [k, v] : mode_names()) {
    if (v == s) return k;
  }
  throw UsageError("unknown mode '" + s + "'");
}

bool is_sampling(Mode m) {
  return m == Mode::Sample || m == Mode::Lyapunov || m == Mode::Stability;
}

double ExperimentConfig::tolerance(const std::string& key, double fallback) const {
  auto it = tolerances.find(key);
  return it == tolerances.end() ? fallback : it->second;
}

nlohmann::ordered_json ExperimentConfig::to_json() const {
  nlohmann::ordered_json j;
  j["mode"] = to_string(mode);
  if (spec) j["spec"] = spec_to_json(*spec);
  if (seed) j["seed"] = *seed;
  j["samples"] = samples;
  j["out"] = out;
  j["r_max"] = r_max;
  j["bins"] = bins;
  j["points"] = points;
  j["radii"] = radii;
  j["x"] = x;
  j["N_list"] = N_list;
  j["limit"] = limit;
  j["steps"] = steps;
  j["replicas"] = replicas;
  j["criteria"] = criteria;
  j["tolerances"] = tolerances;
  return j;
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw UsageError("config must be a JSON object");
  static const std::set<std::string> known = {"mode",  "spec",    "seed",   "samples", "out",
                                              "r_max", "bins",    "points", "radii",   "x",
                                              "N_list", "limit",  "steps",  "replicas", "criteria",
                                              "tolerances"};
  for (const auto& [k, v] : j.items()) {
    if (!known.count(k)) throw UsageError("unknown config field '" + k + "'");
  }
  ExperimentConfig c;
  if (j.contains("mode")) c.mode = mode_from_string(field<std::string>(j, "mode"));
  if (j.contains("spec")) c.spec = spec_from_json(j.at("spec"));
  if (j.contains("seed")) {
    const nlohmann::json& s = j.at("seed");
    if (!s.is_number_integer() || (!s.is_number_unsigned() && s.get<std::int64_t>() < 0)) {
      throw UsageError("config field 'seed' must be a non-negative integer");
    }
    c.seed = s.get<std::uint64_t>();
  }
  if (j.contains("samples")) c.samples = field<long>(j, "samples");
  if (j.contains("out")) c.out = field<std::string>(j, "out");
  if (j.contains("r_max")) c.r_max = field<double>(j, "r_max");
  if (j.contains("bins")) c.bins = field<int>(j, "bins");
  if (j.contains("points")) c.points = field<int>(j, "points");
  if (j.contains("radii")) c.radii = field<std::vector<double>>(j, "radii");
  if (j.contains("x")) c.x = field<std::vector<double>>(j, "x");
  if (j.contains("N_list")) c.N_list = field<std::vector<int>>(j, "N_list");
  if (j.contains("limit")) c.limit = field<std::string>(j, "limit");
  if (j.contains("steps")) c.steps = field<long>(j, "steps");
  if (j.contains("replicas")) c.replicas = field<long>(j, "replicas");
  if (j.contains("criteria")) c.criteria = field<std::vector<int>>(j, "criteria");
  if (j.contains("tolerances")) c.tolerances = field<std::map<std::string, double>>(j, "tolerances");
  return c;
}

void validate_config(const ExperimentConfig& c) {
  const bool sampling = is_sampling(c.mode) || (c.samples > 0 && (c.mode == Mode::Hole || c.mode == Mode::SvDensity));
  if (sampling && !c.seed) throw UsageError("mode " + to_string(c.mode) + " samples and needs a seed");
  if (c.mode != Mode::Verify && !c.spec) throw UsageError("mode " + to_string(c.mode) + " needs a spec");
  if (c.bins < 1 || c.points < 1) throw UsageError("bins and points must be positive");
  if (c.samples < 0 || c.steps < 1 || c.replicas < 1) throw UsageError("counts must be positive");
  for (int id : c.criteria) {
    if (id < 1 || id > 13) throw UsageError("criteria ids are 1..13");
  }
}

std::string csv_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot write " + tmp);
    f << content;
    if (!f) throw Error("write failed for " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

RunResult run(const ExperimentConfig& config) {
  validate_config(config);
  std::filesystem::create_directories(config.out);
  RunResult res;
  ModeOutput mo;
  try {
    switch (config.mode) {
      case Mode::Sample: mo = run_sample(config); break;
      case Mode::ExactDensity: mo = run_exact_density(config); break;
      case Mode::Hole: mo = run_hole(config); break;
      case Mode::SvDensity: mo = run_sv_density(config); break;
      case Mode::Kernel: mo = run_kernel(config); break;
      case Mode::Converge: mo = run_converge(config); break;
      case Mode::Lyapunov:
        mo = exponents_output(config, mc_lyapunov(need_spec(config), config.steps, config.replicas, need_seed(config)),
                              "lyapunov");
        break;
      case Mode::Stability:
        mo = exponents_output(config, mc_stability(need_spec(config), config.steps, config.replicas, need_seed(config)),
                              "stability");
        break;
      case Mode::Verify: mo = run_verify(config); break;
    }
  } catch (const UsageError&) {
    throw;
  } catch (const std::exception& e) {
    mo = ModeOutput{};
    mo.report = base_report(config);
    mo.report["error"] = e.what();
    mo.pass = false;
    mo.fail_code = 1;
  }
  const std::string stem = (std::filesystem::path(config.out) / to_string(config.mode)).string();
  mo.report["config"] = config.to_json();
  mo.report["verdict"] = mo.pass ? "pass" : "fail";
  if (!mo.csv.empty()) {
    write_atomic(stem + ".csv", mo.csv);
    res.files.push_back(stem + ".csv");
  }
  write_atomic(stem + ".json", mo.report.dump(2) + "\n");
  res.files.push_back(stem + ".json");
  res.pass = mo.pass;
  res.exit_code = mo.pass ? 0 : mo.fail_code;
  nlohmann::ordered_json summary;
  summary["mode"] = to_string(config.mode);
  summary["pass"] = res.pass;
  summary["exit_code"] = res.exit_code;
  summary["files"] = res.files;
  const std::string sp = (std::filesystem::path(config.out) / "summary.json").string();
  write_atomic(sp, summary.dump(2) + "\n");
  res.files.push_back(sp);
  res.report = std::move(mo.report);
  return res;
}

}  // namespace rmt
