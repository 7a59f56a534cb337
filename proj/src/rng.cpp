#include "pkglab/rng.hpp"

#include <cmath>

namespace pkglab {

namespace {

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (const char c : text) {
    hash ^= static_cast<unsigned char>(c);
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Rng::Rng(std::uint64_t seed) : key_(splitmix64(seed)), engine_(key_) {}

Rng Rng::split(std::string_view name, std::uint64_t index) const {
  const std::uint64_t child =
      splitmix64(key_ ^ splitmix64(fnv1a(name) + splitmix64(index)));
  Rng out(0);
  out.key_ = child;
  out.engine_.seed(child);
  return out;
}

double Rng::uniform(double lo, double hi) {
  // 53 random bits mapped to [0, 1).
  const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

double Rng::normal() { return gauss_(engine_); }

Complex Rng::complex_normal(double variance) {
  const double s = std::sqrt(0.5 * variance);
  const double re = gauss_(engine_);
  const double im = gauss_(engine_);
  return {s * re, s * im};
}

ComplexMatrix Rng::complex_normal_matrix(Eigen::Index rows, Eigen::Index cols,
                                         double variance) {
  ComplexMatrix out(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) out(i, j) = complex_normal(variance);
  }
  return out;
}

std::uint64_t Rng::next_u64() { return engine_(); }

}  // namespace pkglab
