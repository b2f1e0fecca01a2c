#pragma once

#include <cstdint>
#include <random>

namespace fregls {

/// Derives the seed of an independent stream (replica, cell, ...) from a
/// master seed. splitmix64 mixing keeps nearby indices uncorrelated.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

/// Deterministic Gaussian source. std::normal_distribution is
/// implementation-defined, so draws go through an explicit Box-Muller
/// transform on top of mt19937_64: identical seeds give identical streams
/// on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Standard normal.
  double normal();

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace fregls
