#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "vidprint/core.hpp"
#include "vidprint/encoder.hpp"
#include "vidprint/kernels.hpp"
#include "vidprint/nn.hpp"

namespace vidprint {

/// Open-set label for a rejected query.
inline constexpr int kUnknown = -1;

class KnnModel {
 public:
  static KnnModel fit(std::vector<Vec1D> points, std::vector<int> labels, std::size_t k);

  /// Majority label among the k nearest points; ties go to the smaller summed
  /// distance, then the smaller label. Neighbors are ranked by (distance, label).
  int predict(std::span<const double> query) const;
  std::vector<int> predict_all(std::span<const Vec1D> queries,
                               kernels::Backend backend = kernels::Backend::OpenMP) const;

  std::size_t k() const noexcept { return k_; }
  std::size_t size() const noexcept { return points_.size(); }

 private:
  int vote(std::span<const double> sq_dists) const;

  std::vector<Vec1D> points_;
  std::vector<int> labels_;
  std::size_t k_ = 1;
};

/// Nearest class mean.
class NmevModel {
 public:
  static NmevModel fit(std::span<const Vec1D> points, std::span<const int> labels);
  int predict(std::span<const double> query) const;

  const std::vector<int>& labels() const noexcept { return labels_; }
  const std::vector<Vec1D>& means() const noexcept { return means_; }

 private:
  std::vector<int> labels_;
  std::vector<Vec1D> means_;
};

struct SoftmaxClassifier {
  nn::Network net;  // emits logits
  std::size_t n_out = 0;

  nlohmann::json to_json() const;
  static SoftmaxClassifier from_json(const nlohmann::json& doc);
};

struct SoftmaxTrainConfig {
  int epochs = 50;
  std::size_t batch_size = 32;
  double learning_rate = 0.1;
  double dropout_rate = 0.1;
  std::uint64_t seed = 0;
  kernels::Backend backend = kernels::Backend::OpenMP;

  void validate() const;
};

/// conv(8 filters, width 3) -> max-pool 2 -> dense 128 x2 -> dropout -> n_out logits.
SoftmaxClassifier make_softmax_cnn(std::size_t input_len, std::size_t n_out, double dropout_rate,
                                   std::uint64_t seed);

/// Mean cross-entropy over the batch and its gradient.
BatchGradient cross_entropy_gradient(const SoftmaxClassifier& model, std::span<const Vec1D> inputs,
                                     std::span<const int> labels, std::uint64_t dropout_seed,
                                     kernels::Backend backend = kernels::Backend::OpenMP);

/// Plain minibatch SGD on cross-entropy over integer labels.
SoftmaxClassifier train_softmax_cnn(std::span<const Vec1D> inputs, std::span<const int> labels, std::size_t n_out,
                                    const SoftmaxTrainConfig& config);

Vec1D predict_softmax(const SoftmaxClassifier& model, std::span<const double> x);

/// kUnknown iff max(probs) < threshold, else the argmax (first on ties).
int open_set_classify(std::span<const double> probs, double threshold);

enum class PairLabel { Different = 0, Same = 1 };

struct PairSample {
  Vec1D features;  // side A then side B
  PairLabel label = PairLabel::Different;
  int label_a = 0, label_b = 0;
};

/// Every same-video pair across the sides, plus an equal number of
/// different-video pairs drawn without replacement.
std::vector<PairSample> make_binary_pairs(std::span<const Vec1D> side_a, std::span<const int> labels_a,
                                          std::span<const Vec1D> side_b, std::span<const int> labels_b, Rng& rng);

SoftmaxClassifier train_binary(std::span<const PairSample> pairs, const SoftmaxTrainConfig& config);
PairLabel predict_binary(const SoftmaxClassifier& model, std::span<const double> pair_features);

}  // namespace vidprint
