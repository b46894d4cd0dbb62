#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace tensoropt {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UnsupportedOrder : Error {
  using Error::Error;
};
struct NonFinite : Error {
  using Error::Error;
};
struct InnerFailure : Error {
  using Error::Error;
};
struct LineSearchExhausted : Error {
  using Error::Error;
};
struct TheoryViolation : Error {
  using Error::Error;
};
struct StageRegression : Error {
  using Error::Error;
};
struct NonConvexWitness : Error {
  using Error::Error;
};
struct ParseError : Error {
  using Error::Error;
};
struct LabelDomainError : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};
struct NotConverged : Error {
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Deterministic random generation
// ---------------------------------------------------------------------------

/// SplitMix64 generator. Used for every sampled quantity in the library so
/// that seeded runs are bit-stable across platforms and standard-library
/// versions (std::uniform_real_distribution is implementation-defined).
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1), 53-bit resolution.
  double next_unit() { return double(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform in [-1, 1).
  double next_symmetric() { return 2.0 * next_unit() - 1.0; }

  Vector vector_symmetric(Eigen::Index n) {
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = next_symmetric();
    return v;
  }

 private:
  std::uint64_t state_;
};

// ---------------------------------------------------------------------------
// Hashing
// ---------------------------------------------------------------------------

/// SHA-256 of a byte string, lowercase hex.
std::string sha256_hex(const std::string& data);

/// SHA-256 of a file's contents, lowercase hex. Throws Error on IO failure.
std::string sha256_file(const std::string& path);

/// Round-trip-safe decimal formatting ("%.17g") used for all persisted
/// floating-point values.
std::string format_double(double v);

}  // namespace tensoropt
