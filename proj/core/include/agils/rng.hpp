#pragma once

#include <cstdint>

namespace agils {

/// Counter-based generator: the i-th draw of stream (seed, stream) is a
/// SplitMix64 finalizer applied to a key derived from (seed, stream) plus i
/// times the golden-ratio increment. Same seed, same stream -> same sequence on
/// every platform (the normal draws additionally depend on libm).
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Standard normal via Box-Muller; the second variate of each pair is cached.
  double normal();

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace agils
