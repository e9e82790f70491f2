#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "vidprint/core.hpp"

namespace testutil {

inline vidprint::Vec1D random_vec(std::mt19937_64& rng, std::size_t n, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  vidprint::Vec1D v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("vidprint_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testutil
