#pragma once

#include <complex>
#include <cstdint>
#include <random>

namespace ambc {

/// Seeded pseudo-random source. Distribution sampling is done here rather than with
/// the <random> distributions so that sequences are identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  /// Independent generator for trial `index` under master seed `seed`.
  static Rng stream(std::uint64_t seed, std::uint64_t index) { return Rng(seed, index + 1); }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on the open interval (0, 1).
  double uniform();

  double normal();

  /// Circularly symmetric complex Gaussian with E|z|^2 = variance.
  std::complex<double> cscg(double variance);

  /// Gamma(shape, scale) via Marsaglia-Tsang, boosted for shape < 1.
  double gamma(double shape, double scale);

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace ambc
