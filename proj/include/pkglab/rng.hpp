#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "pkglab/numerics.hpp"

namespace pkglab {

/// Seedable, splittable random source. A stream is identified by a root seed
/// plus a path of (name, index) splits; the same path always yields the same
/// sequence, independent of how many other streams were created.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  /// Child stream keyed by name and index. Does not advance this stream.
  [[nodiscard]] Rng split(std::string_view name, std::uint64_t index = 0) const;

  [[nodiscard]] std::uint64_t key() const { return key_; }

  double uniform(double lo = 0.0, double hi = 1.0);
  double normal();
  /// Circularly symmetric complex Gaussian with E|z|^2 = variance.
  Complex complex_normal(double variance = 1.0);
  ComplexMatrix complex_normal_matrix(Eigen::Index rows, Eigen::Index cols,
                                      double variance = 1.0);
  std::uint64_t next_u64();
  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t key_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> gauss_;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace pkglab
