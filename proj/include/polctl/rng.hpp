#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace polctl {

/// Derive an independent child seed from a master seed and a salt
/// (splitmix64 finalizer; stable across platforms).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t salt) {
  std::uint64_t z = master + salt * 0x9e3779b97f4a7c15ULL + 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seeded random stream. The uniform/normal mappings are implemented
/// explicitly on top of mt19937_64 so that a given seed produces the
/// same sequence everywhere (std::*_distribution is implementation
/// defined). One stream has exactly one owner; streams are never shared
/// across threads.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  /// Uniform double in (0, 1].
  double u01() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller (second variate discarded: keeps the
  /// draw count per call fixed at two).
  double normal() {
    double u1 = u01();
    double u2 = u01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

 private:
  std::mt19937_64 eng_;
};

}  // namespace polctl
