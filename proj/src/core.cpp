#include "vidprint/core.hpp"

#include <algorithm>
#include <cmath>

namespace vidprint {

namespace {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

double squared_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw DimensionError("distance between vectors of length " + std::to_string(a.size()) +
                         " and " + std::to_string(b.size()));
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

double euclidean_distance(std::span<const double> a, std::span<const double> b) {
  return std::sqrt(squared_distance(a, b));
}

Vec1D resample_linear(std::span<const double> v, std::size_t new_len) {
  if (v.empty()) throw ArgumentError("resample_linear: empty input");
  if (new_len == 0) throw ArgumentError("resample_linear: new_len must be >= 1");
  if (new_len == v.size()) return Vec1D(v.begin(), v.end());
  if (new_len == 1 || v.size() == 1) {
    if (v.size() == 1) return Vec1D(new_len, v[0]);
    return Vec1D{v.front()};
  }
  Vec1D out(new_len);
  const double scale = static_cast<double>(v.size() - 1) / static_cast<double>(new_len - 1);
  for (std::size_t i = 0; i < new_len; ++i) {
    if (i == new_len - 1) {
      out[i] = v.back();
      continue;
    }
    const double x = static_cast<double>(i) * scale;
    const auto lo = static_cast<std::size_t>(std::floor(x));
    const double frac = x - static_cast<double>(lo);
    if (frac == 0.0 || lo + 1 >= v.size()) {
      out[i] = v[lo];
    } else {
      out[i] = v[lo] + frac * (v[lo + 1] - v[lo]);
    }
  }
  return out;
}

Vec1D minmax_normalize(std::span<const double> v) {
  if (v.empty()) throw ArgumentError("minmax_normalize: empty input");
  const auto [lo_it, hi_it] = std::minmax_element(v.begin(), v.end());
  const double lo = *lo_it;
  const double range = *hi_it - lo;
  Vec1D out(v.size(), 0.0);
  if (range <= 0.0) return out;
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = (v[i] - lo) / range;
  return out;
}

bool all_finite(std::span<const double> v) noexcept {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

std::uint64_t mix_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> tags) noexcept {
  std::uint64_t h = splitmix64(seed);
  for (auto t : tags) h = splitmix64(h ^ splitmix64(t + 0x632be59bd9b4e019ULL));
  return h;
}

std::uint64_t hash_tag(std::string_view tag) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : tag) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace vidprint
