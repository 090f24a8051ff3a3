#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <limits>

namespace rmt {

// Philox4x32-10 counter-based generator. The key is the user seed, the upper
// half of the counter is the stream id, so (seed, stream) pairs give
// independent, reproducible sequences regardless of thread scheduling.
class Rng {
 public:
  using result_type = std::uint32_t;
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  explicit Rng(std::uint64_t seed = 0, std::uint64_t stream = 0);

  result_type operator()() {
    if (pos_ == 4) refill();
    return out_[pos_++];
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  // Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform();
  // Standard normal by Box-Muller; the second variate is cached.
  double normal();
  // Complex normal with E|z|^2 = var.
  std::complex<double> complex_normal(double var = 1.0);

  // Deterministic child stream for replica `index` of this generator.
  Rng split(std::uint64_t index) const;

 private:
  void refill();

  std::uint64_t seed_, stream_;
  std::uint64_t counter_ = 0;
  std::array<std::uint32_t, 4> out_{};
  int pos_ = 4;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace rmt
