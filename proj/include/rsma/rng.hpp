#pragma once

#include <complex>
#include <cstdint>
#include <random>

namespace rsma {

/// SplitMix64 finalizer applied to (seed, index, stream). Used to derive
/// independent engine seeds for realizations and slots.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index, std::uint64_t stream);

/// Named stream identifiers so that channel draws and process draws of the
/// same realization never share an engine.
enum class Stream : std::uint64_t {
  kChannel = 0,
  kProcess = 1,
  kAge = 2,
};

/// Reproducible random source: std::mt19937_64 seeded through mix_seed,
/// uniforms from the top 53 bits of each output, Gaussians via Box-Muller.
/// No std distributions are used, so draws are identical on every standard
/// library.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed, std::uint64_t index = 0,
                        Stream stream = Stream::kChannel);

  /// Uniform on the open interval (0, 1).
  double uniform();
  double standard_normal();
  /// Circularly-symmetric CN(0, 1): variance 1/2 per real dimension.
  std::complex<double> complex_normal();
  /// Uniform integer in [lo, hi] (inclusive) by rejection sampling.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace rsma
