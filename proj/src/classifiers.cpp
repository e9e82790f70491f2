#include "vidprint/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace vidprint {

KnnModel KnnModel::fit(std::vector<Vec1D> points, std::vector<int> labels, std::size_t k) {
  if (k == 0) throw ArgumentError("k must be >= 1");
  if (points.empty()) throw ArgumentError("knn_fit needs at least one point");
  if (points.size() != labels.size()) throw DimensionError("knn_fit: points and labels differ in count");
  if (k > points.size()) {
    throw ArgumentError("k=" + std::to_string(k) + " exceeds the " + std::to_string(points.size()) +
                        " stored points");
  }
  for (const auto& p : points) {
    if (p.size() != points.front().size()) throw DimensionError("knn_fit: points differ in dimension");
  }
  KnnModel m;
  m.points_ = std::move(points);
  m.labels_ = std::move(labels);
  m.k_ = k;
  return m;
}

int KnnModel::vote(std::span<const double> sq_dists) const {
  std::vector<std::size_t> order(points_.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto closer = [&](std::size_t a, std::size_t b) {
    if (sq_dists[a] != sq_dists[b]) return sq_dists[a] < sq_dists[b];
    return labels_[a] < labels_[b];
  };
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k_), order.end(), closer);

  struct Tally {
    std::size_t votes = 0;
    double distance = 0.0;
  };
  std::map<int, Tally> tally;
  for (std::size_t i = 0; i < k_; ++i) {
    auto& t = tally[labels_[order[i]]];
    ++t.votes;
    t.distance += std::sqrt(sq_dists[order[i]]);
  }
  // Map iteration is by ascending label, so strict comparisons keep the smaller label.
  auto best = tally.begin();
  for (auto it = std::next(tally.begin()); it != tally.end(); ++it) {
    if (it->second.votes > best->second.votes ||
        (it->second.votes == best->second.votes && it->second.distance < best->second.distance)) {
      best = it;
    }
  }
  return best->first;
}

int KnnModel::predict(std::span<const double> query) const {
  if (query.size() != points_.front().size()) throw DimensionError("knn query has the wrong dimension");
  std::vector<double> d(points_.size());
  for (std::size_t i = 0; i < points_.size(); ++i) d[i] = squared_distance(query, points_[i]);
  return vote(d);
}

std::vector<int> KnnModel::predict_all(std::span<const Vec1D> queries, kernels::Backend backend) const {
  for (const auto& q : queries) {
    if (q.size() != points_.front().size()) throw DimensionError("knn query has the wrong dimension");
  }
  const auto d = kernels::pairwise_sq_distances(backend, queries, points_);
  std::vector<int> out(queries.size());
  for (std::size_t q = 0; q < queries.size(); ++q) {
    out[q] = vote(std::span<const double>(d.data() + q * points_.size(), points_.size()));
  }
  return out;
}

NmevModel NmevModel::fit(std::span<const Vec1D> points, std::span<const int> labels) {
  if (points.empty()) throw ArgumentError("nmev_fit needs at least one point");
  if (points.size() != labels.size()) throw DimensionError("nmev_fit: points and labels differ in count");
  std::map<int, std::vector<const Vec1D*>> members;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].size() != points.front().size()) throw DimensionError("nmev_fit: points differ in dimension");
    members[labels[i]].push_back(&points[i]);
  }
  NmevModel m;
  for (auto& [label, group] : members) {
    // Sum in a canonical order so the mean is bit-identical under any permutation.
    std::sort(group.begin(), group.end(), [](const Vec1D* a, const Vec1D* b) { return *a < *b; });
    Vec1D mean(points.front().size(), 0.0);
    for (const Vec1D* p : group)
      for (std::size_t j = 0; j < mean.size(); ++j) mean[j] += (*p)[j];
    for (double& v : mean) v /= static_cast<double>(group.size());
    m.labels_.push_back(label);
    m.means_.push_back(std::move(mean));
  }
  return m;
}

int NmevModel::predict(std::span<const double> query) const {
  if (query.size() != means_.front().size()) throw DimensionError("nmev query has the wrong dimension");
  std::size_t best = 0;
  double best_d = squared_distance(query, means_[0]);
  for (std::size_t c = 1; c < means_.size(); ++c) {
    const double d = squared_distance(query, means_[c]);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return labels_[best];
}

nlohmann::json SoftmaxClassifier::to_json() const {
  return {{"kind", "softmax_cnn"}, {"n_out", n_out}, {"network", net.to_json()}};
}

SoftmaxClassifier SoftmaxClassifier::from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("kind").get<std::string>() != "softmax_cnn") throw FormatError("document is not a softmax model");
    SoftmaxClassifier m;
    m.n_out = doc.at("n_out").get<std::size_t>();
    m.net = nn::Network::from_json(doc.at("network"));
    if (m.net.output_len() != m.n_out) throw FormatError("softmax network width does not match n_out");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("softmax document: ") + e.what());
  }
}

void SoftmaxTrainConfig::validate() const {
  if (epochs < 0) throw ArgumentError("epochs must be >= 0");
  if (batch_size < 1) throw ArgumentError("batch_size must be >= 1");
  if (!(learning_rate > 0.0)) throw ArgumentError("learning_rate must be positive");
  if (dropout_rate < 0.0 || dropout_rate >= 1.0) throw ArgumentError("dropout_rate must be in [0, 1)");
}

SoftmaxClassifier make_softmax_cnn(std::size_t input_len, std::size_t n_out, double dropout_rate,
                                   std::uint64_t seed) {
  if (n_out < 2) throw ArgumentError("softmax classifier needs >= 2 outputs");
  if (input_len < 4) throw ArgumentError("softmax cnn needs input length >= 4");
  Rng init = make_rng(seed, {hash_tag("softmax-init"), input_len, n_out});
  SoftmaxClassifier m;
  m.n_out = n_out;
  m.net = nn::Network(input_len);
  m.net.conv1d(8, 3, init)
      .max_pool(2)
      .dense(128, nn::Activation::Relu, init)
      .dense(128, nn::Activation::Relu, init)
      .dropout(dropout_rate)
      .dense(n_out, nn::Activation::Linear, init);
  return m;
}

BatchGradient cross_entropy_gradient(const SoftmaxClassifier& model, std::span<const Vec1D> inputs,
                                     std::span<const int> labels, std::uint64_t dropout_seed,
                                     kernels::Backend backend) {
  if (inputs.size() != labels.size()) throw DimensionError("inputs and labels differ in count");
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= model.n_out) {
      throw ArgumentError("label " + std::to_string(y) + " outside [0, " + std::to_string(model.n_out) + ")");
    }
  }
  BatchGradient out;
  out.grads = nn::zeros_like(model.net.params());
  if (inputs.empty()) return out;
  auto item = [&](std::size_t i, nn::ParamSet& grads) -> double {
    nn::Tape tape;
    Rng rng = make_rng(dropout_seed, {i});
    const Vec1D logits = model.net.forward(inputs[i], true, &rng, &tape);
    Vec1D g = nn::softmax(logits);
    const auto y = static_cast<std::size_t>(labels[i]);
    const double loss = -std::log(std::max(g[y], 1e-300));
    g[y] -= 1.0;
    model.net.backward(tape, g, grads);
    return loss;
  };
  const double total = kernels::accumulate(backend, inputs.size(), out.grads, item);
  const double inv = 1.0 / static_cast<double>(inputs.size());
  nn::scale(out.grads, inv);
  out.mean_loss = total * inv;
  return out;
}

SoftmaxClassifier train_softmax_cnn(std::span<const Vec1D> inputs, std::span<const int> labels, std::size_t n_out,
                                    const SoftmaxTrainConfig& config) {
  config.validate();
  if (inputs.empty()) throw ArgumentError("softmax training needs at least one input");
  if (inputs.size() != labels.size()) throw DimensionError("inputs and labels differ in count");
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= n_out) {
      throw ArgumentError("label " + std::to_string(y) + " outside [0, " + std::to_string(n_out) + ")");
    }
  }
  SoftmaxClassifier model = make_softmax_cnn(inputs.front().size(), n_out, config.dropout_rate, config.seed);
  std::vector<std::size_t> order(inputs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (int e = 0; e < config.epochs; ++e) {
    Rng shuffle = make_rng(config.seed, {hash_tag("softmax-shuffle"), static_cast<std::uint64_t>(e)});
    std::shuffle(order.begin(), order.end(), shuffle);
    std::uint64_t b = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size, ++b) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      std::vector<Vec1D> xs;
      std::vector<int> ys;
      for (std::size_t i = start; i < end; ++i) {
        xs.push_back(inputs[order[i]]);
        ys.push_back(labels[order[i]]);
      }
      auto g = cross_entropy_gradient(
          model, xs, ys, mix_seed(config.seed, {hash_tag("softmax-dropout"), static_cast<std::uint64_t>(e), b}),
          config.backend);
      auto& params = model.net.params();
      for (std::size_t p = 0; p < params.size(); ++p)
        for (std::size_t i = 0; i < params[p].values.size(); ++i)
          params[p].values[i] -= config.learning_rate * g.grads[p].values[i];
    }
  }
  return model;
}

Vec1D predict_softmax(const SoftmaxClassifier& model, std::span<const double> x) {
  return nn::softmax(model.net.forward(x, false, nullptr, nullptr));
}

int open_set_classify(std::span<const double> probs, double threshold) {
  if (probs.empty()) throw ArgumentError("empty probability vector");
  const auto best = std::max_element(probs.begin(), probs.end());
  if (*best < threshold) return kUnknown;
  return static_cast<int>(best - probs.begin());
}

std::vector<PairSample> make_binary_pairs(std::span<const Vec1D> side_a, std::span<const int> labels_a,
                                          std::span<const Vec1D> side_b, std::span<const int> labels_b, Rng& rng) {
  if (side_a.size() != labels_a.size() || side_b.size() != labels_b.size()) {
    throw DimensionError("pair sides and labels differ in count");
  }
  std::vector<std::pair<std::size_t, std::size_t>> same, different;
  for (std::size_t i = 0; i < side_a.size(); ++i) {
    for (std::size_t j = 0; j < side_b.size(); ++j) {
      if (side_a[i].size() != side_a.front().size() || side_b[j].size() != side_a.front().size()) {
        throw DimensionError("pair halves differ in length");
      }
      (labels_a[i] == labels_b[j] ? same : different).emplace_back(i, j);
    }
  }
  if (same.empty()) throw DataError("no same-video pairs available");
  const std::size_t n = std::min(same.size(), different.size());
  auto& majority = same.size() > different.size() ? same : different;
  std::shuffle(majority.begin(), majority.end(), rng);
  majority.resize(n);
  std::sort(majority.begin(), majority.end());

  std::vector<PairSample> out;
  out.reserve(2 * n);
  auto emit = [&](const auto& list, PairLabel label) {
    for (const auto& [i, j] : list) {
      PairSample s;
      s.features = side_a[i];
      s.features.insert(s.features.end(), side_b[j].begin(), side_b[j].end());
      s.label = label;
      s.label_a = labels_a[i];
      s.label_b = labels_b[j];
      out.push_back(std::move(s));
    }
  };
  emit(same, PairLabel::Same);
  emit(different, PairLabel::Different);
  return out;
}

SoftmaxClassifier train_binary(std::span<const PairSample> pairs, const SoftmaxTrainConfig& config) {
  std::vector<Vec1D> xs;
  std::vector<int> ys;
  xs.reserve(pairs.size());
  for (const auto& p : pairs) {
    xs.push_back(p.features);
    ys.push_back(static_cast<int>(p.label));
  }
  return train_softmax_cnn(xs, ys, 2, config);
}

PairLabel predict_binary(const SoftmaxClassifier& model, std::span<const double> pair_features) {
  const Vec1D p = predict_softmax(model, pair_features);
  return p[1] > p[0] ? PairLabel::Same : PairLabel::Different;
}

}  // namespace vidprint
