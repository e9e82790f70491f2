#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "vidprint/core.hpp"
#include "vidprint/nn.hpp"

namespace vidprint::kernels {

enum class Backend { Serial, OpenMP };

/// Items per reduction chunk (both backends). Chunks are summed in
/// index order, so results do not depend on the thread count.
inline constexpr std::size_t kReductionChunk = 8;

/// Per-item work: returns the item's loss and adds its gradient into `grads`.
using ItemGradient = std::function<double(std::size_t item, nn::ParamSet& grads)>;

/// Sum of item losses over [0, n); item gradients are summed into `grads`.
double accumulate(Backend backend, std::size_t n, nn::ParamSet& grads, const ItemGradient& item);

/// Inference-mode forward pass of every input.
std::vector<Vec1D> embed_batch(Backend backend, const nn::Network& net, std::span<const Vec1D> inputs);

/// Row-major |queries| x |refs| matrix of squared Euclidean distances.
std::vector<double> pairwise_sq_distances(Backend backend, std::span<const Vec1D> queries,
                                          std::span<const Vec1D> refs);

/// Sets the OpenMP thread count; 0 keeps the runtime default.
void set_threads(int threads);

}  // namespace vidprint::kernels
