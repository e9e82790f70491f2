#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "vidprint/core.hpp"
#include "vidprint/kernels.hpp"
#include "vidprint/nn.hpp"
#include "vidprint/preprocess.hpp"

namespace vidprint {

enum class Arch { Mlp, Cnn1d, Rnn };
enum class Mining { OfflineExhaustive, OnlineSemihard };

std::string to_string(Arch arch);
std::string to_string(Mining mining);
Arch parse_arch(const std::string& name);
Mining parse_mining(const std::string& name);

struct EncoderConfig {
  Arch arch = Arch::Mlp;
  std::size_t embedding_dim = 128;
  std::size_t hidden_units = 128;
  double dropout_rate = 0.1;
  double margin = 1.0;
  Mining mining = Mining::OfflineExhaustive;
  std::optional<int> epochs;  // unset: 5 offline, 20 online
  std::size_t batch_size = 128;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  kernels::Backend backend = kernels::Backend::OpenMP;

  void validate() const;
  int effective_epochs() const;
};

struct EncoderModel {
  Arch arch = Arch::Mlp;
  nn::Network net;

  std::size_t input_len() const noexcept { return net.input_len(); }
  std::size_t embedding_dim() const noexcept { return net.output_len(); }

  nlohmann::json to_json() const;
  static EncoderModel from_json(const nlohmann::json& doc);
};

/// Freshly initialized encoder; parameters depend only on (config.seed, input_len).
EncoderModel make_encoder(const EncoderConfig& config, std::size_t input_len);

Embedding forward(const EncoderModel& model, std::span<const double> x, bool train, Rng* rng);
Embedding embed(const EncoderModel& model, std::span<const double> x);
std::vector<Embedding> embed_all(const EncoderModel& model, std::span<const Vec1D> xs,
                                 kernels::Backend backend = kernels::Backend::OpenMP);

/// max(d(a,p) - d(a,n) + margin, 0) with Euclidean d.
double triplet_loss(std::span<const double> a, std::span<const double> p, std::span<const double> n,
                    double margin);

struct TripletInput {
  const Vec1D* anchor = nullptr;
  const Vec1D* positive = nullptr;
  const Vec1D* negative = nullptr;
};

struct BatchGradient {
  double mean_loss = 0.0;
  nn::ParamSet grads;
};

/// Mean triplet loss over the batch and its gradient. Dropout masks (train
/// mode) are drawn per (dropout_seed, item, role), so they do not depend on
/// evaluation order.
BatchGradient backward(const EncoderModel& model, std::span<const TripletInput> batch, double margin,
                       std::uint64_t dropout_seed, kernels::Backend backend = kernels::Backend::OpenMP);

struct AdamState {
  nn::ParamSet m, v;
  std::int64_t step = 0;
  double beta1 = 0.9, beta2 = 0.999, epsilon = 1e-8;

  static AdamState for_params(const nn::ParamSet& params);
};

void adam_step(nn::ParamSet& params, const nn::ParamSet& grads, AdamState& state, double lr);

/// Feature references use the position in the feature table as `trial`.
struct Triplet {
  TraceKey anchor, positive, negative;
};

/// Every anchor trace paired once with every other class. When both
/// platforms are the same, the positive is a different trial of the anchor's
/// video.
std::vector<Triplet> mine_offline_triplets(const FeatureTable& table, const std::string& anchor_platform,
                                           const std::string& other_platform,
                                           const std::vector<std::string>& classes, Rng& rng);

struct SemihardSelection {
  std::size_t anchor = 0, positive = 0, negative = 0;
  bool semihard = false;  // false: fallback to the farthest margin violator
};

/// In-batch mining. Pairs are same-label items on different platforms (or
/// any two distinct items when the batch holds a single platform);
/// negatives come from the positive's platform.
std::vector<SemihardSelection> mine_semihard(std::span<const Embedding> embeddings, std::span<const int> labels,
                                             std::span<const int> platforms, double margin);

struct TrainResult {
  EncoderModel model;
  std::vector<double> loss_history;  // mean training loss per epoch
  int epochs_run = 0;
};

TrainResult train_encoder(const FeatureTable& table, const std::vector<std::string>& classes,
                          const std::pair<std::string, std::string>& platforms, const EncoderConfig& config);

}  // namespace vidprint
