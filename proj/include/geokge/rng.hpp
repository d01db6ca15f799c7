#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace geokge {

/// Deterministic engine with portable integer/real draws (std distributions are
/// implementation-defined, so they are avoided).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  /// Uniform in [0, n).
  std::uint64_t below(std::uint64_t n) { return engine_() % n; }
  /// Uniform in [0, 1).
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }
  bool coin() { return (engine_() >> 63) != 0; }
  /// FNV-1a of the serialized engine state.
  std::string digest() const;

 private:
  std::mt19937_64 engine_;
};

}  // namespace geokge
