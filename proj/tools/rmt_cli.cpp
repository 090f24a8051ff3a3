// rmt: command-line front end. Exit codes: 0 ok, 1 numerical failure,
// 2 usage error, 3 statistical failure.
#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "rmt/error.hpp"
#include "rmt/harness.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Spectral statistics of products of random matrices"};
  std::string config_path, out, mode;
  std::uint64_t seed = 0;
  long samples = 0;
  auto* o_config = app.add_option("--config", config_path, "experiment configuration (JSON)");
  auto* o_seed = app.add_option("--seed", seed, "RNG seed (u64)");
  auto* o_out = app.add_option("--out", out, "output directory");
  auto* o_mode = app.add_option("--mode", mode,
                                "sample | exact-density | hole | sv-density | kernel | converge | lyapunov | "
                                "stability | verify");
  auto* o_samples = app.add_option("--samples", samples, "Monte Carlo sample count");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    rmt::ExperimentConfig cfg;
    if (*o_config) {
      std::ifstream f(config_path);
      if (!f) throw rmt::UsageError("cannot open config " + config_path);
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(f);
      } catch (const nlohmann::json::parse_error& e) {
        throw rmt::UsageError(std::string("config is not valid JSON: ") + e.what());
      }
      cfg = rmt::config_from_json(j);
    }
    if (*o_mode) cfg.mode = rmt::mode_from_string(mode);
    if (*o_seed) cfg.seed = seed;
    if (*o_out) cfg.out = out;
    if (*o_samples) cfg.samples = samples;
    rmt::RunResult r = rmt::run(cfg);
    std::printf("%s: %s (exit %d)\n", rmt::to_string(cfg.mode).c_str(), r.pass ? "pass" : "fail", r.exit_code);
    for (const auto& f : r.files) std::printf("  wrote %s\n", f.c_str());
    return r.exit_code;
  } catch (const rmt::UsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
