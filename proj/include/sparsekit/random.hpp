#pragma once

// Counter-based deterministic random stream (splitmix64). Every draw is a
// pure function of (key, counter), so results are identical across
// platforms and independent of call interleaving.

#include <cmath>
#include <cstdint>

#include <Eigen/Dense>

namespace sparsekit {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

class RandomStream {
 public:
  explicit RandomStream(std::uint64_t key) : key_(key) {}

  // Derives an independent stream; used to key (seed, sparsity, trial).
  RandomStream derive(std::uint64_t salt) const {
    return RandomStream(splitmix64(key_ ^ splitmix64(salt + 0x632BE59BD9B4E019ULL)));
  }

  std::uint64_t next_u64() { return splitmix64(key_ + 0x9E3779B97F4A7C15ULL * (++counter_)); }

  // Uniform in (0, 1]; never returns 0 so log() below is safe.
  double next_uniform() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }

  // Box-Muller, one normal per call (spare is discarded for determinism
  // independent of call pattern).
  double next_gaussian() {
    const double u1 = next_uniform();
    const double u2 = next_uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  Eigen::VectorXd gaussian_vector(int n) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = next_gaussian();
    return v;
  }

  Eigen::MatrixXd gaussian_matrix(int rows, int cols) {
    // Row-major fill so the stream layout matches the serialized format.
    Eigen::MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) m(i, j) = next_gaussian();
    return m;
  }

  // Uniform integer in [0, bound) by rejection.
  std::uint64_t next_below(std::uint64_t bound) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % bound;
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace sparsekit
