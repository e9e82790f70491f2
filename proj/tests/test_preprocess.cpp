#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "helpers.hpp"
#include "vidprint/preprocess.hpp"

using namespace vidprint;

namespace {

RawTrace trace_with(std::vector<std::pair<double, Direction>> packets) {
  RawTrace t{{"P", "v", 0}, {}};
  for (auto [time, dir] : packets) t.packets.push_back({time, 1500, dir});
  return t;
}

// Independent linear interpolation on the normalized index axis.
Vec1D interp_oracle(const Vec1D& v, std::size_t n) {
  Vec1D out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double pos = n == 1 ? 0.0 : static_cast<double>(i) * static_cast<double>(v.size() - 1) / static_cast<double>(n - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    out[i] = v[lo] + (v[hi] - v[lo]) * (pos - static_cast<double>(lo));
  }
  return out;
}

Vec1D normalize_oracle(const Vec1D& v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  Vec1D out(v.size(), 0.0);
  if (*hi == *lo) return out;
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = (v[i] - *lo) / (*hi - *lo);
  return out;
}

}  // namespace

TEST_CASE("binning uses half-open bins") {
  const auto t = trace_with({{1, Direction::Downlink}, {9.9, Direction::Downlink}, {10.0, Direction::Downlink},
                             {25, Direction::Downlink}, {26, Direction::Uplink}, {30, Direction::Downlink}});
  CHECK(bin_downlink_packets(t, 10, 30) == Vec1D{2, 1, 1});
  CHECK(bin_downlink_packets(t, 10, 60) == Vec1D{2, 1, 1, 1, 0, 0});
  const auto up = trace_with({{1, Direction::Uplink}, {12, Direction::Uplink}});
  CHECK(bin_downlink_packets(up, 10, 30) == Vec1D{0, 0, 0});
}

TEST_CASE("binning is mass preserving over the covered span") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 100.0);
  for (int i = 0; i < 50; ++i) {
    std::vector<double> times(1 + rng() % 300);
    for (auto& x : times) x = u(rng);
    std::sort(times.begin(), times.end());
    std::vector<std::pair<double, Direction>> pk;
    for (double x : times) pk.emplace_back(x, rng() % 4 == 0 ? Direction::Uplink : Direction::Downlink);
    const auto t = trace_with(pk);
    const auto bins = bin_downlink_packets(t, 5, 60);
    const auto expected = std::count_if(pk.begin(), pk.end(),
                                        [](auto& p) { return p.second == Direction::Downlink && p.first < 60; });
    CHECK(std::accumulate(bins.begin(), bins.end(), 0.0) == static_cast<double>(expected));
  }
}

TEST_CASE("initial burst extension") {
  CHECK(extend_initial_burst(Vec1D{4, 4, 2, 2}, {20, 40, 0.5}, 10) == Vec1D{2, 2, 2, 2});
  const Vec1D v{3, 1, 4, 1, 5};
  CHECK(extend_initial_burst(v, {20, 20, 1.0}, 10) == v);
  const auto yt = BurstExtensionRule::youtube();
  CHECK(yt.src_span_s == 100.0);
  CHECK(yt.dst_span_s == 200.0);
  CHECK(yt.amplitude_factor == 0.5);
  CHECK_THROWS_AS(extend_initial_burst(v, {15, 40, 0.5}, 10), ArgumentError);

  std::mt19937_64 rng(6);
  for (int i = 0; i < 50; ++i) {
    const auto x = testutil::random_vec(rng, 60, 0, 100);
    CHECK(extend_initial_burst(x, yt, 10).size() == x.size());
    CHECK(extend_initial_burst(x, BurstExtensionRule::rumble(), 10).size() == x.size());
  }
}

TEST_CASE("truncate_or_pad") {
  CHECK(truncate_or_pad(Vec1D{1, 2, 3}, 2) == Vec1D{1, 2});
  CHECK(truncate_or_pad(Vec1D{1, 2}, 4) == Vec1D{1, 2, 0, 0});
  CHECK(truncate_or_pad(Vec1D{1, 2}, 2) == Vec1D{1, 2});
  CHECK_THROWS_AS(truncate_or_pad(Vec1D{1}, 0), ArgumentError);
}

TEST_CASE("gaussian augmentation") {
  auto rng = make_rng(9, {});
  const Vec1D v{0, 100, 7};
  CHECK(augment_gaussian(v, 0.0, rng) == v);
  double sum = 0, sq = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const auto a = augment_gaussian(v, 0.05, rng);
    CHECK(a[0] == 0.0);
    CHECK(a[2] >= 0.0);
    sum += a[1];
    sq += a[1] * a[1];
  }
  const double mean = sum / n, sd = std::sqrt(sq / n - mean * mean);
  CHECK(std::abs(mean - 100.0) <= 1.0);
  CHECK(std::abs(sd - 5.0) <= 0.5);
  CHECK_THROWS_AS(augment_gaussian(v, -0.1, rng), ArgumentError);
}

TEST_CASE("pipeline composes the stages in order") {
  PreprocessConfig cfg;
  std::mt19937_64 rng(7);
  const auto counts = testutil::random_vec(rng, 70, 0, 400);
  const BinnedTrace plain{{"P", "v", 0}, 10.0, counts};
  const auto expected_plain = normalize_oracle(Vec1D(counts.begin(), counts.begin() + 60));
  const auto out = preprocess_pipeline(plain, cfg).values;
  REQUIRE(out.size() == 60);
  for (std::size_t i = 0; i < 60; ++i) CHECK(out[i] == doctest::Approx(expected_plain[i]).epsilon(1e-14));

  cfg.platform_rules["YT"] = BurstExtensionRule::youtube();
  const BinnedTrace yt{{"YT", "v", 0}, 10.0, counts};
  auto staged = interp_oracle(Vec1D(counts.begin(), counts.begin() + 10), 20);
  for (auto& x : staged) x *= 0.5;
  staged.insert(staged.end(), counts.begin() + 10, counts.end());
  staged.resize(60);
  const auto expected_yt = normalize_oracle(staged);
  const auto got = preprocess_pipeline(yt, cfg).values;
  REQUIRE(got.size() == 60);
  for (std::size_t i = 0; i < 60; ++i) CHECK(got[i] == doctest::Approx(expected_yt[i]).epsilon(1e-12));

  const BinnedTrace zeros{{"P", "v", 0}, 10.0, Vec1D(60, 0.0)};
  CHECK(preprocess_pipeline(zeros, cfg).values == Vec1D(60, 0.0));
}

TEST_CASE("pipeline output length and range over random inputs") {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 60; ++i) {
    PreprocessConfig cfg;
    cfg.bin_s = std::vector<double>{5, 10, 20, 30}[rng() % 4];
    cfg.duration_s = cfg.bin_s * static_cast<double>(20 + rng() % 30);
    std::vector<std::pair<double, Direction>> pk;
    double t = 0;
    for (int j = 0; j < 200; ++j) {
      t += std::uniform_real_distribution<double>(0, 5)(rng);
      pk.emplace_back(t, Direction::Downlink);
    }
    const auto fv = preprocess_pipeline(trace_with(pk), cfg).values;
    CHECK(fv.size() == static_cast<std::size_t>(std::llround(cfg.duration_s / cfg.bin_s)));
    CHECK(*std::max_element(fv.begin(), fv.end()) == 1.0);
    CHECK(*std::min_element(fv.begin(), fv.end()) == 0.0);
  }
}

TEST_CASE("rebin sums onto a coarser grid") {
  const BinnedTrace t{{"P", "v", 0}, 1.0, {1, 2, 3, 4, 5, 6}};
  CHECK(rebin(t, 2.0) == Vec1D{3, 7, 11});
  CHECK_THROWS_AS(rebin(t, 1.5), ArgumentError);
}

TEST_CASE("config validation") {
  PreprocessConfig cfg;
  cfg.duration_s = 605;
  CHECK_THROWS_AS(cfg.validate(), ArgumentError);
  cfg.duration_s = 600;
  cfg.platform_rules["X"] = {200, 100, 1.0};
  CHECK_THROWS_AS(cfg.validate(), ArgumentError);
}
