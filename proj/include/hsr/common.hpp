#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace hsr {

// Feature matrices are stored row-major in float32; reductions that feed
// decisions (distances, losses) accumulate in double.
using MatrixF = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixD = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using VectorF = Eigen::VectorXf;
using VectorD = Eigen::VectorXd;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ZeroVectorError : Error { using Error::Error; };
struct NonFiniteError : Error { using Error::Error; };
struct TooFewSamplesError : Error { using Error::Error; };
struct SingleClusterError : Error { using Error::Error; };
struct EmptyInputError : Error { using Error::Error; };
struct DegenerateBatchError : Error { using Error::Error; };
struct TooFewClustersError : Error { using Error::Error; };
struct NoRelevantError : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

inline bool all_finite(const MatrixF& m) {
  return m.allFinite();
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Derives an independent stream seed from a base seed and a stream tag, so
// parallel or per-cluster consumers get order-independent randomness.
inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t tag) {
  return splitmix64(base ^ splitmix64(tag));
}

inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
  return mix_seed(mix_seed(base, a), b);
}

// Deterministic RNG wrapper. All sampling goes through these helpers instead
// of std distributions, which are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t raw() { return gen_(); }

  // Uniform double in [0, 1).
  double u01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Uniform index in [0, n).
  std::size_t index(std::size_t n) {
    if (n == 0) throw EmptyInputError("Rng::index: empty range");
    std::size_t i = static_cast<std::size_t>(u01() * static_cast<double>(n));
    return i < n ? i : n - 1;
  }

  // Standard normal via Marsaglia's polar method.
  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * u01() - 1.0;
      v = 2.0 * u01() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

 private:
  std::mt19937_64 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace hsr
