#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace enot {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// An n x d sample matrix, one row per sample.
using Dataset = Eigen::MatrixXd;

/// Thrown when training or an inner solve produces non-finite values.
struct numerical_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

/// splitmix64; used to derive independent child seeds from one master seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::mt19937_64 make_rng(std::uint64_t seed) { return std::mt19937_64(seed); }

}  // namespace enot
