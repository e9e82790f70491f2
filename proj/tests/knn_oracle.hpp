#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <vector>

#include "vidprint/core.hpp"

namespace testutil {

/// Exhaustive k-NN: rank by (distance, label), vote, break ties by summed
/// distance then by label.
inline int brute_force_knn(const std::vector<vidprint::Vec1D>& points, const std::vector<int>& labels,
                           const vidprint::Vec1D& q, std::size_t k) {
  std::vector<std::pair<double, int>> ranked;
  for (std::size_t i = 0; i < points.size(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < q.size(); ++j) s += (points[i][j] - q[j]) * (points[i][j] - q[j]);
    ranked.emplace_back(std::sqrt(s), labels[i]);
  }
  std::sort(ranked.begin(), ranked.end());
  std::map<int, std::pair<int, double>> votes;
  for (std::size_t i = 0; i < k; ++i) {
    votes[ranked[i].second].first += 1;
    votes[ranked[i].second].second += ranked[i].first;
  }
  int best = votes.begin()->first;
  for (const auto& [label, v] : votes) {
    const auto& b = votes[best];
    if (v.first > b.first || (v.first == b.first && v.second < b.second)) best = label;
  }
  return best;
}

}  // namespace testutil
