#include "leowb/random.hpp"

namespace leowb {

ComplexMatrix RandomSource::complex_normal_matrix(Eigen::Index rows, Eigen::Index cols) {
  ComplexMatrix m(rows, cols);
  // column-major fill order is part of the reproducibility contract
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = complex_normal();
  return m;
}

std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index) {
  return mix_seed(mix_seed(parent) ^ mix_seed(index + 0x632be59bd9b4e019ULL));
}

std::uint64_t derive_seed(std::uint64_t parent, std::string_view label) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return derive_seed(parent, h);
}

}  // namespace leowb
