#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace vidprint {

/// Ordered real-valued series: binned packet counts, segment bytes or
/// normalized features depending on where it sits in the pipeline.
using Vec1D = std::vector<double>;

/// Encoder output vector.
using Embedding = std::vector<double>;

using Rng = std::mt19937_64;

// Error taxonomy. Every failure surfaced by the library is one of these.

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

double squared_distance(std::span<const double> a, std::span<const double> b);

/// sqrt(sum (a_i - b_i)^2). Throws DimensionError on length mismatch.
double euclidean_distance(std::span<const double> a, std::span<const double> b);

/// Endpoint-preserving linear interpolation onto `new_len` evenly spaced
/// points of the normalized index axis [0, 1].
Vec1D resample_linear(std::span<const double> v, std::size_t new_len);

/// (v - min) / (max - min). A constant input maps to all zeros.
Vec1D minmax_normalize(std::span<const double> v);

bool all_finite(std::span<const double> v) noexcept;

// Seeding. Every stochastic stage draws from an Rng seeded by mixing the
// master seed with tags that identify the stage, so results do not depend on
// call order or scheduling.

std::uint64_t mix_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> tags) noexcept;
std::uint64_t hash_tag(std::string_view tag) noexcept;

inline Rng make_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> tags) {
  return Rng(mix_seed(seed, tags));
}

}  // namespace vidprint
