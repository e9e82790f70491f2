#pragma once

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include <json.hpp>

#include "vidprint/core.hpp"

namespace vidprint::nn {

struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> values;
};

using ParamSet = std::vector<Tensor>;

ParamSet zeros_like(const ParamSet& params);
void add_into(ParamSet& dst, const ParamSet& src);
void scale(ParamSet& params, double factor);
std::size_t parameter_count(const ParamSet& params);
bool same_shapes(const ParamSet& a, const ParamSet& b);

enum class Activation { Linear, Relu };

// Layers refer to their tensors by index into the owning network's ParamSet.

struct Dense {
  std::size_t in = 0, out = 0;
  Activation activation = Activation::Linear;
  std::size_t weight = 0, bias = 0;  // weight is [out][in]
};

/// Single input channel, valid padding, ReLU. Output is [filters][length - width + 1].
struct Conv1D {
  std::size_t length = 0, filters = 0, width = 0;
  std::size_t weight = 0, bias = 0;  // weight is [filters][width]
};

struct MaxPool1D {
  std::size_t channels = 0, length = 0, width = 0;
};

/// Inverted dropout: active only in training mode.
struct Dropout {
  std::size_t size = 0;
  double rate = 0.0;
};

/// Single-layer LSTM over a scalar sequence; the final hidden state is the
/// output. Gate order in the stacked tensors is input, forget, cell, output.
struct Lstm {
  std::size_t steps = 0, hidden = 0;
  std::size_t w_input = 0, w_recurrent = 0, bias = 0;  // [4H], [4H][H], [4H]
};

using Layer = std::variant<Dense, Conv1D, MaxPool1D, Dropout, Lstm>;

/// Activations recorded by a forward pass and consumed by backward.
struct Tape {
  std::vector<Vec1D> inputs;
  std::vector<Vec1D> outputs;
  std::vector<Vec1D> aux;  // dropout mask, pool argmax, or LSTM per-step state
};

class Network {
 public:
  Network() = default;
  explicit Network(std::size_t input_len);

  Network& dense(std::size_t out, Activation activation, Rng& init);
  Network& conv1d(std::size_t filters, std::size_t width, Rng& init);
  Network& max_pool(std::size_t width);
  Network& dropout(double rate);
  Network& lstm(std::size_t hidden, Rng& init);

  std::size_t input_len() const noexcept { return input_len_; }
  std::size_t output_len() const noexcept { return channels_ * length_; }
  const std::vector<Layer>& layers() const noexcept { return layers_; }
  ParamSet& params() noexcept { return params_; }
  const ParamSet& params() const noexcept { return params_; }

  /// `rng` is required when train is set and the network has active dropout.
  /// Pass a tape to enable backward.
  Vec1D forward(std::span<const double> x, bool train, Rng* rng, Tape* tape) const;

  /// Accumulates parameter gradients into `grads` and returns d(loss)/d(input).
  Vec1D backward(const Tape& tape, std::span<const double> grad_out, ParamSet& grads) const;

  nlohmann::json to_json() const;
  static Network from_json(const nlohmann::json& doc);

 private:
  std::size_t add_param(std::vector<std::size_t> shape);

  std::size_t input_len_ = 0;
  std::size_t channels_ = 1;
  std::size_t length_ = 0;
  std::vector<Layer> layers_;
  ParamSet params_;
};

/// Numerically stable softmax.
Vec1D softmax(std::span<const double> logits);

}  // namespace vidprint::nn
