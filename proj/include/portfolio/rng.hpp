#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace portfolio {

/// Seedable generator with portable draws.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. The distributions from <random> are implementation-defined, so
/// every draw below is derived from raw engine output directly; results are
/// identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform01();
  /// Uniform on [lo, hi).
  double uniform(double lo, double hi);
  /// Uniform integer on the closed range [lo, hi]. Unbiased (rejection).
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
  /// Uniform random permutation of 0..n-1 (Fisher-Yates).
  std::vector<std::size_t> permutation(std::size_t n);

  std::uint64_t next_u64() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

/// Seed for the stream at `index` derived from a base seed (splitmix64 mix).
/// Frontier sweeps give every point its own stream so points are
/// independent of evaluation order.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) noexcept;

}  // namespace portfolio
