#pragma once

#include <cstdint>
#include <random>

namespace aisbn {

/// Reproducible random stream keyed by (seed, stream id). Identical keys give
/// identical sequences; distinct stream ids give independent sequences.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                      0x41495342u};
    engine_.seed(seq);
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  std::mt19937_64& engine() noexcept { return engine_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
};

/// Worker configuration. threads == 1 runs the serial reference kernels;
/// threads > 1 runs the OpenMP kernels (0 = OpenMP default). Both paths
/// split work into the same fixed chunks and merge in chunk order, so their
/// results are bit-identical.
struct Execution {
  int threads = 1;

  bool parallel() const noexcept { return threads != 1; }
};

}  // namespace aisbn
