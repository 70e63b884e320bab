// leowb/random.hpp
//
// Seedable random source. Every stochastic operation draws from an instance
// passed in by the caller; nothing in the library owns a global generator.

#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "leowb/types.hpp"

namespace leowb {

class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return uniform_(engine_); }
  double normal() { return normal_(engine_); }

  /// Circularly symmetric CN(0, 1): real and imaginary parts each N(0, 1/2).
  Complex complex_normal() {
    constexpr double kInvSqrt2 = 0.70710678118654752440;
    const double re = normal_(engine_);
    const double im = normal_(engine_);
    return {re * kInvSqrt2, im * kInvSqrt2};
  }

  ComplexMatrix complex_normal_matrix(Eigen::Index rows, Eigen::Index cols);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// SplitMix64 finalizer; used to derive independent stream seeds.
std::uint64_t mix_seed(std::uint64_t x);

/// Deterministic seed for (parent, index).
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index);

/// Deterministic seed for (parent, label); FNV-1a over the label bytes.
std::uint64_t derive_seed(std::uint64_t parent, std::string_view label);

}  // namespace leowb
