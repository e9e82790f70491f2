#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "vidprint/kernels.hpp"
#include "vidprint/nn.hpp"

using namespace vidprint;

TEST_CASE("dense layer computes W x + b with relu") {
  Rng init(1);
  nn::Network net(3);
  net.dense(2, nn::Activation::Relu, init);
  net.params()[0].values = {1, 2, 3, -1, -1, -1};
  net.params()[1].values = {0.5, 0.25};
  CHECK(net.forward(Vec1D{1, 1, 1}, false, nullptr, nullptr) == Vec1D{6.5, 0.0});
}

TEST_CASE("conv and pool shapes and values") {
  Rng init(2);
  nn::Network net(6);
  net.conv1d(1, 3, init).max_pool(2);
  net.params()[0].values = {1, 0, -1};
  net.params()[1].values = {0};
  // conv: x[i] - x[i+2] over [5,1,2,3,0,4] -> [3,-2,2,-1], relu -> [3,0,2,0], pool -> [3,2]
  CHECK(net.forward(Vec1D{5, 1, 2, 3, 0, 4}, false, nullptr, nullptr) == Vec1D{3, 2});
  CHECK(net.output_len() == 2);
}

TEST_CASE("lstm with zero weights follows the gate equations") {
  Rng init(3);
  nn::Network net(4);
  net.lstm(2, init);
  for (auto& t : net.params()) std::fill(t.values.begin(), t.values.end(), 0.0);
  // All gates at sigmoid(0) = 0.5 and cell candidate tanh(0) = 0: h stays 0.
  CHECK(net.forward(Vec1D{1, 2, 3, 4}, false, nullptr, nullptr) == Vec1D{0, 0});
  // Cell-gate bias 1: c_t = 0.5 c_{t-1} + 0.5 tanh(1), h = 0.5 tanh(c).
  auto& bias = net.params()[2].values;
  bias[4] = bias[5] = 1.0;
  double c = 0.0;
  for (int t = 0; t < 4; ++t) c = 0.5 * c + 0.5 * std::tanh(1.0);
  const auto h = net.forward(Vec1D{0, 0, 0, 0}, false, nullptr, nullptr);
  CHECK(h[0] == doctest::Approx(0.5 * std::tanh(c)).epsilon(1e-15));
  CHECK(h[1] == h[0]);
}

TEST_CASE("inverted dropout keeps the expectation") {
  Rng init(4);
  nn::Network net(1000);
  net.dropout(0.25);
  const Vec1D x(1000, 1.0);
  Rng r(5);
  const auto y = net.forward(x, true, &r, nullptr);
  double sum = 0;
  for (double v : y) {
    CHECK((v == 0.0 || v == doctest::Approx(1.0 / 0.75)));
    sum += v;
  }
  CHECK(sum / 1000 == doctest::Approx(1.0).epsilon(0.1));
  CHECK(net.forward(x, false, nullptr, nullptr) == x);
}

TEST_CASE("network json round-trip and errors") {
  Rng init(6);
  nn::Network net(10);
  net.conv1d(2, 3, init).max_pool(2).dense(4, nn::Activation::Relu, init).dropout(0.1).dense(3, nn::Activation::Linear, init);
  const auto back = nn::Network::from_json(nlohmann::json::parse(net.to_json().dump()));
  const Vec1D x{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  CHECK(back.forward(x, false, nullptr, nullptr) == net.forward(x, false, nullptr, nullptr));
  auto doc = net.to_json();
  doc["params"][0]["values"].erase(0);
  CHECK_THROWS_AS(nn::Network::from_json(doc), FormatError);
  CHECK_THROWS_AS(net.forward(Vec1D(9, 0.0), false, nullptr, nullptr), DimensionError);
}

TEST_CASE("kernels: serial and OpenMP backends agree with a direct oracle") {
  std::mt19937_64 rng(7);
  std::vector<Vec1D> q, r;
  for (int i = 0; i < 37; ++i) q.push_back(testutil::random_vec(rng, 9));
  for (int i = 0; i < 53; ++i) r.push_back(testutil::random_vec(rng, 9));
  const auto s = kernels::pairwise_sq_distances(kernels::Backend::Serial, q, r);
  const auto o = kernels::pairwise_sq_distances(kernels::Backend::OpenMP, q, r);
  CHECK(s == o);
  for (std::size_t i = 0; i < q.size(); ++i) {
    for (std::size_t j = 0; j < r.size(); ++j) {
      double d = 0;
      for (std::size_t k = 0; k < 9; ++k) d += (q[i][k] - r[j][k]) * (q[i][k] - r[j][k]);
      CHECK(s[i * r.size() + j] == doctest::Approx(d).epsilon(1e-14));
    }
  }

  Rng init(8);
  nn::Network net(9);
  net.dense(5, nn::Activation::Relu, init).dense(3, nn::Activation::Linear, init);
  const auto es = kernels::embed_batch(kernels::Backend::Serial, net, q);
  CHECK(es == kernels::embed_batch(kernels::Backend::OpenMP, net, q));
  for (std::size_t i = 0; i < q.size(); ++i) CHECK(es[i] == net.forward(q[i], false, nullptr, nullptr));
}

TEST_CASE("kernels: accumulate is independent of the thread count") {
  nn::ParamSet shape{{{4}, std::vector<double>(4, 0.0)}};
  auto item = [](std::size_t i, nn::ParamSet& g) {
    for (std::size_t k = 0; k < 4; ++k) g[0].values[k] += 1.0 / static_cast<double>(i + k + 1);
    return std::sqrt(static_cast<double>(i));
  };
  auto serial = nn::zeros_like(shape);
  const double ls = kernels::accumulate(kernels::Backend::Serial, 101, serial, item);
  for (int threads : {1, 2, 3, 8}) {
    kernels::set_threads(threads);
    auto par = nn::zeros_like(shape);
    CHECK(kernels::accumulate(kernels::Backend::OpenMP, 101, par, item) == ls);
    CHECK(par[0].values == serial[0].values);
  }
  kernels::set_threads(0);
  CHECK_THROWS_AS(kernels::set_threads(-1), ArgumentError);
}
