#include "vidprint/kernels.hpp"

#include <omp.h>

namespace vidprint::kernels {

namespace {

// Both backends use the same chunked reduction tree, so they agree bit for bit.
double reduce_chunk(std::size_t c, std::size_t n, nn::ParamSet& partial, const ItemGradient& item) {
  double loss = 0.0;
  const std::size_t end = std::min(n, (c + 1) * kReductionChunk);
  for (std::size_t i = c * kReductionChunk; i < end; ++i) loss += item(i, partial);
  return loss;
}

double accumulate_chunks(bool parallel, std::size_t n, nn::ParamSet& grads, const ItemGradient& item) {
  const std::size_t chunks = (n + kReductionChunk - 1) / kReductionChunk;
  std::vector<nn::ParamSet> partial(chunks);
  std::vector<double> losses(chunks, 0.0);
  const auto count = static_cast<std::ptrdiff_t>(chunks);
#pragma omp parallel for schedule(dynamic, 1) if (parallel)
  for (std::ptrdiff_t c = 0; c < count; ++c) {
    const auto ci = static_cast<std::size_t>(c);
    partial[ci] = nn::zeros_like(grads);
    losses[ci] = reduce_chunk(ci, n, partial[ci], item);
  }
  double loss = 0.0;
  for (std::size_t c = 0; c < chunks; ++c) {
    nn::add_into(grads, partial[c]);
    loss += losses[c];
  }
  return loss;
}

}  // namespace

double accumulate(Backend backend, std::size_t n, nn::ParamSet& grads, const ItemGradient& item) {
  return accumulate_chunks(backend == Backend::OpenMP, n, grads, item);
}

std::vector<Vec1D> embed_batch(Backend backend, const nn::Network& net, std::span<const Vec1D> inputs) {
  std::vector<Vec1D> out(inputs.size());
  const auto n = static_cast<std::ptrdiff_t>(inputs.size());
  if (backend == Backend::Serial) {
    for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = net.forward(inputs[i], false, nullptr, nullptr);
    return out;
  }
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = net.forward(inputs[i], false, nullptr, nullptr);
  return out;
}

std::vector<double> pairwise_sq_distances(Backend backend, std::span<const Vec1D> queries,
                                          std::span<const Vec1D> refs) {
  const std::size_t nr = refs.size();
  std::vector<double> out(queries.size() * nr);
  const auto nq = static_cast<std::ptrdiff_t>(queries.size());
  if (backend == Backend::Serial) {
    for (std::ptrdiff_t q = 0; q < nq; ++q)
      for (std::size_t r = 0; r < nr; ++r) out[q * nr + r] = squared_distance(queries[q], refs[r]);
    return out;
  }
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t q = 0; q < nq; ++q)
    for (std::size_t r = 0; r < nr; ++r) out[q * nr + r] = squared_distance(queries[q], refs[r]);
  return out;
}

void set_threads(int threads) {
  if (threads < 0) throw ArgumentError("thread count must be >= 0");
  if (threads > 0) omp_set_num_threads(threads);
}

}  // namespace vidprint::kernels
