#include "vidprint/nn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace vidprint::nn {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void fill_uniform(Tensor& t, double limit, Rng& rng) {
  std::uniform_real_distribution<double> dist(-limit, limit);
  for (double& v : t.values) v = dist(rng);
}

std::size_t product(const std::vector<std::size_t>& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

// LSTM per-step tape layout: i, f, g, o, c, tanh(c), h; each `hidden` wide.
constexpr std::size_t kLstmSlots = 7;

}  // namespace

ParamSet zeros_like(const ParamSet& params) {
  ParamSet out;
  out.reserve(params.size());
  for (const auto& t : params) out.push_back(Tensor{t.shape, std::vector<double>(t.values.size(), 0.0)});
  return out;
}

void add_into(ParamSet& dst, const ParamSet& src) {
  if (!same_shapes(dst, src)) throw DimensionError("add_into: parameter shape mismatch");
  for (std::size_t p = 0; p < dst.size(); ++p) {
    auto& d = dst[p].values;
    const auto& s = src[p].values;
    for (std::size_t i = 0; i < d.size(); ++i) d[i] += s[i];
  }
}

void scale(ParamSet& params, double factor) {
  for (auto& t : params)
    for (double& v : t.values) v *= factor;
}

std::size_t parameter_count(const ParamSet& params) {
  std::size_t n = 0;
  for (const auto& t : params) n += t.values.size();
  return n;
}

bool same_shapes(const ParamSet& a, const ParamSet& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].shape != b[i].shape || a[i].values.size() != b[i].values.size()) return false;
  }
  return true;
}

Network::Network(std::size_t input_len) : input_len_(input_len), channels_(1), length_(input_len) {
  if (input_len == 0) throw ArgumentError("network input length must be >= 1");
}

std::size_t Network::add_param(std::vector<std::size_t> shape) {
  const std::size_t n = product(shape);
  params_.push_back(Tensor{std::move(shape), std::vector<double>(n, 0.0)});
  return params_.size() - 1;
}

Network& Network::dense(std::size_t out, Activation activation, Rng& init) {
  if (out == 0) throw ArgumentError("dense layer needs >= 1 unit");
  Dense d;
  d.in = output_len();
  d.out = out;
  d.activation = activation;
  d.weight = add_param({out, d.in});
  d.bias = add_param({out});
  // He-uniform for rectified layers, LeCun-uniform for linear outputs.
  const double fan_in = static_cast<double>(d.in);
  fill_uniform(params_[d.weight], std::sqrt((activation == Activation::Relu ? 6.0 : 3.0) / fan_in), init);
  layers_.emplace_back(d);
  channels_ = 1;
  length_ = out;
  return *this;
}

Network& Network::conv1d(std::size_t filters, std::size_t width, Rng& init) {
  if (channels_ != 1) throw ArgumentError("conv1d expects a single-channel input");
  if (width == 0 || filters == 0 || width > length_) throw ArgumentError("conv1d width/filters invalid");
  Conv1D c;
  c.length = length_;
  c.filters = filters;
  c.width = width;
  c.weight = add_param({filters, width});
  c.bias = add_param({filters});
  fill_uniform(params_[c.weight], std::sqrt(6.0 / static_cast<double>(width)), init);
  layers_.emplace_back(c);
  channels_ = filters;
  length_ = c.length - width + 1;
  return *this;
}

Network& Network::max_pool(std::size_t width) {
  if (width == 0 || width > length_) throw ArgumentError("max_pool width invalid");
  layers_.emplace_back(MaxPool1D{channels_, length_, width});
  length_ /= width;
  return *this;
}

Network& Network::dropout(double rate) {
  if (rate < 0.0 || rate >= 1.0) throw ArgumentError("dropout rate must be in [0, 1)");
  layers_.emplace_back(Dropout{output_len(), rate});
  return *this;
}

Network& Network::lstm(std::size_t hidden, Rng& init) {
  if (channels_ != 1) throw ArgumentError("lstm expects a scalar sequence");
  if (hidden == 0) throw ArgumentError("lstm needs >= 1 hidden unit");
  Lstm l;
  l.steps = length_;
  l.hidden = hidden;
  l.w_input = add_param({4 * hidden});
  l.w_recurrent = add_param({4 * hidden, hidden});
  l.bias = add_param({4 * hidden});
  const double limit = 1.0 / std::sqrt(static_cast<double>(hidden));
  fill_uniform(params_[l.w_input], limit, init);
  fill_uniform(params_[l.w_recurrent], limit, init);
  for (std::size_t j = hidden; j < 2 * hidden; ++j) params_[l.bias].values[j] = 1.0;  // forget gate
  layers_.emplace_back(l);
  channels_ = 1;
  length_ = hidden;
  return *this;
}

Vec1D Network::forward(std::span<const double> x, bool train, Rng* rng, Tape* tape) const {
  if (x.size() != input_len_) {
    throw DimensionError("network input has length " + std::to_string(x.size()) + ", expected " +
                         std::to_string(input_len_));
  }
  if (tape) {
    tape->inputs.assign(layers_.size(), {});
    tape->outputs.assign(layers_.size(), {});
    tape->aux.assign(layers_.size(), {});
  }
  Vec1D cur(x.begin(), x.end());
  for (std::size_t li = 0; li < layers_.size(); ++li) {
    Vec1D aux;
    Vec1D out = std::visit(
        [&](const auto& layer) -> Vec1D {
          using L = std::decay_t<decltype(layer)>;
          if constexpr (std::is_same_v<L, Dense>) {
            const auto& w = params_[layer.weight].values;
            const auto& b = params_[layer.bias].values;
            Vec1D y(layer.out);
            for (std::size_t o = 0; o < layer.out; ++o) {
              const double* row = w.data() + o * layer.in;
              double acc = b[o];
              for (std::size_t i = 0; i < layer.in; ++i) acc += row[i] * cur[i];
              y[o] = layer.activation == Activation::Relu ? std::max(0.0, acc) : acc;
            }
            return y;
          } else if constexpr (std::is_same_v<L, Conv1D>) {
            const auto& w = params_[layer.weight].values;
            const auto& b = params_[layer.bias].values;
            const std::size_t out_len = layer.length - layer.width + 1;
            Vec1D y(layer.filters * out_len);
            for (std::size_t f = 0; f < layer.filters; ++f) {
              for (std::size_t t = 0; t < out_len; ++t) {
                double acc = b[f];
                for (std::size_t k = 0; k < layer.width; ++k) acc += w[f * layer.width + k] * cur[t + k];
                y[f * out_len + t] = std::max(0.0, acc);
              }
            }
            return y;
          } else if constexpr (std::is_same_v<L, MaxPool1D>) {
            const std::size_t out_len = layer.length / layer.width;
            Vec1D y(layer.channels * out_len);
            aux.resize(y.size());
            for (std::size_t c = 0; c < layer.channels; ++c) {
              for (std::size_t j = 0; j < out_len; ++j) {
                std::size_t best = c * layer.length + j * layer.width;
                for (std::size_t k = 1; k < layer.width; ++k) {
                  const std::size_t idx = c * layer.length + j * layer.width + k;
                  if (cur[idx] > cur[best]) best = idx;
                }
                y[c * out_len + j] = cur[best];
                aux[c * out_len + j] = static_cast<double>(best);
              }
            }
            return y;
          } else if constexpr (std::is_same_v<L, Dropout>) {
            if (!train || layer.rate == 0.0) return cur;
            if (!rng) throw ArgumentError("dropout in training mode needs an rng");
            std::uniform_real_distribution<double> u(0.0, 1.0);
            const double keep = 1.0 / (1.0 - layer.rate);
            aux.resize(cur.size());
            Vec1D y(cur.size());
            for (std::size_t i = 0; i < cur.size(); ++i) {
              aux[i] = u(*rng) < layer.rate ? 0.0 : keep;
              y[i] = cur[i] * aux[i];
            }
            return y;
          } else {
            const std::size_t H = layer.hidden;
            const auto& wx = params_[layer.w_input].values;
            const auto& wh = params_[layer.w_recurrent].values;
            const auto& b = params_[layer.bias].values;
            Vec1D h(H, 0.0), c(H, 0.0), z(4 * H);
            if (tape) aux.assign(layer.steps * kLstmSlots * H, 0.0);
            for (std::size_t t = 0; t < layer.steps; ++t) {
              for (std::size_t r = 0; r < 4 * H; ++r) {
                const double* row = wh.data() + r * H;
                double acc = b[r] + wx[r] * cur[t];
                for (std::size_t j = 0; j < H; ++j) acc += row[j] * h[j];
                z[r] = acc;
              }
              double* slot = tape ? aux.data() + t * kLstmSlots * H : nullptr;
              for (std::size_t j = 0; j < H; ++j) {
                const double ig = sigmoid(z[j]);
                const double fg = sigmoid(z[H + j]);
                const double gg = std::tanh(z[2 * H + j]);
                const double og = sigmoid(z[3 * H + j]);
                c[j] = fg * c[j] + ig * gg;
                const double tc = std::tanh(c[j]);
                h[j] = og * tc;
                if (slot) {
                  slot[j] = ig;
                  slot[H + j] = fg;
                  slot[2 * H + j] = gg;
                  slot[3 * H + j] = og;
                  slot[4 * H + j] = c[j];
                  slot[5 * H + j] = tc;
                  slot[6 * H + j] = h[j];
                }
              }
            }
            return h;
          }
        },
        layers_[li]);
    if (tape) {
      tape->inputs[li] = std::move(cur);
      tape->outputs[li] = out;
      tape->aux[li] = std::move(aux);
    }
    cur = std::move(out);
  }
  return cur;
}

Vec1D Network::backward(const Tape& tape, std::span<const double> grad_out, ParamSet& grads) const {
  if (tape.inputs.size() != layers_.size()) throw ArgumentError("backward: tape does not match network");
  if (grad_out.size() != output_len()) throw DimensionError("backward: gradient has wrong length");
  if (grads.size() != params_.size()) throw DimensionError("backward: gradient set has wrong shape");
  Vec1D g(grad_out.begin(), grad_out.end());
  for (std::size_t li = layers_.size(); li-- > 0;) {
    const Vec1D& in = tape.inputs[li];
    const Vec1D& out = tape.outputs[li];
    const Vec1D& aux = tape.aux[li];
    g = std::visit(
        [&](const auto& layer) -> Vec1D {
          using L = std::decay_t<decltype(layer)>;
          if constexpr (std::is_same_v<L, Dense>) {
            const auto& w = params_[layer.weight].values;
            auto& dw = grads[layer.weight].values;
            auto& db = grads[layer.bias].values;
            Vec1D dx(layer.in, 0.0);
            for (std::size_t o = 0; o < layer.out; ++o) {
              double go = g[o];
              if (layer.activation == Activation::Relu && out[o] <= 0.0) go = 0.0;
              if (go == 0.0) continue;
              db[o] += go;
              const double* row = w.data() + o * layer.in;
              double* drow = dw.data() + o * layer.in;
              for (std::size_t i = 0; i < layer.in; ++i) {
                drow[i] += go * in[i];
                dx[i] += go * row[i];
              }
            }
            return dx;
          } else if constexpr (std::is_same_v<L, Conv1D>) {
            const auto& w = params_[layer.weight].values;
            auto& dw = grads[layer.weight].values;
            auto& db = grads[layer.bias].values;
            const std::size_t out_len = layer.length - layer.width + 1;
            Vec1D dx(layer.length, 0.0);
            for (std::size_t f = 0; f < layer.filters; ++f) {
              for (std::size_t t = 0; t < out_len; ++t) {
                const std::size_t o = f * out_len + t;
                if (out[o] <= 0.0 || g[o] == 0.0) continue;
                db[f] += g[o];
                for (std::size_t k = 0; k < layer.width; ++k) {
                  dw[f * layer.width + k] += g[o] * in[t + k];
                  dx[t + k] += g[o] * w[f * layer.width + k];
                }
              }
            }
            return dx;
          } else if constexpr (std::is_same_v<L, MaxPool1D>) {
            Vec1D dx(layer.channels * layer.length, 0.0);
            for (std::size_t j = 0; j < g.size(); ++j) dx[static_cast<std::size_t>(aux[j])] += g[j];
            return dx;
          } else if constexpr (std::is_same_v<L, Dropout>) {
            if (aux.empty()) return g;
            Vec1D dx(g.size());
            for (std::size_t i = 0; i < g.size(); ++i) dx[i] = g[i] * aux[i];
            return dx;
          } else {
            const std::size_t H = layer.hidden;
            const auto& wx = params_[layer.w_input].values;
            const auto& wh = params_[layer.w_recurrent].values;
            auto& dwx = grads[layer.w_input].values;
            auto& dwh = grads[layer.w_recurrent].values;
            auto& db = grads[layer.bias].values;
            Vec1D dx(layer.steps, 0.0);
            Vec1D dh(g.begin(), g.end()), dc(H, 0.0), dz(4 * H), dh_prev(H);
            for (std::size_t t = layer.steps; t-- > 0;) {
              const double* s = aux.data() + t * kLstmSlots * H;
              const double* prev = t > 0 ? aux.data() + (t - 1) * kLstmSlots * H : nullptr;
              for (std::size_t j = 0; j < H; ++j) {
                const double ig = s[j], fg = s[H + j], gg = s[2 * H + j], og = s[3 * H + j];
                const double tc = s[5 * H + j];
                const double c_prev = prev ? prev[4 * H + j] : 0.0;
                const double dct = dc[j] + dh[j] * og * (1.0 - tc * tc);
                dz[j] = dct * gg * ig * (1.0 - ig);
                dz[H + j] = dct * c_prev * fg * (1.0 - fg);
                dz[2 * H + j] = dct * ig * (1.0 - gg * gg);
                dz[3 * H + j] = dh[j] * tc * og * (1.0 - og);
                dc[j] = dct * fg;
              }
              std::fill(dh_prev.begin(), dh_prev.end(), 0.0);
              double dxt = 0.0;
              for (std::size_t r = 0; r < 4 * H; ++r) {
                const double d = dz[r];
                db[r] += d;
                dwx[r] += d * in[t];
                dxt += d * wx[r];
                const double* row = wh.data() + r * H;
                double* drow = dwh.data() + r * H;
                if (prev) {
                  for (std::size_t j = 0; j < H; ++j) drow[j] += d * prev[6 * H + j];
                }
                for (std::size_t j = 0; j < H; ++j) dh_prev[j] += d * row[j];
              }
              dx[t] = dxt;
              dh.swap(dh_prev);
            }
            return dx;
          }
        },
        layers_[li]);
  }
  return g;
}

nlohmann::json Network::to_json() const {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& layer : layers_) {
    std::visit(
        [&](const auto& l) {
          using L = std::decay_t<decltype(l)>;
          if constexpr (std::is_same_v<L, Dense>) {
            layers.push_back({{"type", "dense"},
                              {"units", l.out},
                              {"activation", l.activation == Activation::Relu ? "relu" : "linear"}});
          } else if constexpr (std::is_same_v<L, Conv1D>) {
            layers.push_back({{"type", "conv1d"}, {"filters", l.filters}, {"width", l.width}});
          } else if constexpr (std::is_same_v<L, MaxPool1D>) {
            layers.push_back({{"type", "max_pool"}, {"width", l.width}});
          } else if constexpr (std::is_same_v<L, Dropout>) {
            layers.push_back({{"type", "dropout"}, {"rate", l.rate}});
          } else {
            layers.push_back({{"type", "lstm"}, {"hidden", l.hidden}});
          }
        },
        layer);
  }
  nlohmann::json params = nlohmann::json::array();
  for (const auto& t : params_) params.push_back({{"shape", t.shape}, {"values", t.values}});
  return {{"input_len", input_len_}, {"layers", layers}, {"params", params}};
}

Network Network::from_json(const nlohmann::json& doc) {
  try {
    Network net(doc.at("input_len").get<std::size_t>());
    Rng unused(0);
    for (const auto& l : doc.at("layers")) {
      const auto type = l.at("type").get<std::string>();
      if (type == "dense") {
        const auto act = l.at("activation").get<std::string>();
        if (act != "relu" && act != "linear") throw FormatError("unknown activation '" + act + "'");
        net.dense(l.at("units").get<std::size_t>(), act == "relu" ? Activation::Relu : Activation::Linear, unused);
      } else if (type == "conv1d") {
        net.conv1d(l.at("filters").get<std::size_t>(), l.at("width").get<std::size_t>(), unused);
      } else if (type == "max_pool") {
        net.max_pool(l.at("width").get<std::size_t>());
      } else if (type == "dropout") {
        net.dropout(l.at("rate").get<double>());
      } else if (type == "lstm") {
        net.lstm(l.at("hidden").get<std::size_t>(), unused);
      } else {
        throw FormatError("unknown layer type '" + type + "'");
      }
    }
    const auto& params = doc.at("params");
    if (params.size() != net.params_.size()) throw FormatError("parameter tensor count mismatch");
    for (std::size_t i = 0; i < params.size(); ++i) {
      auto shape = params[i].at("shape").get<std::vector<std::size_t>>();
      auto values = params[i].at("values").get<std::vector<double>>();
      if (shape != net.params_[i].shape || values.size() != net.params_[i].values.size()) {
        throw FormatError("parameter tensor " + std::to_string(i) + " has the wrong shape");
      }
      if (!all_finite(values)) throw FormatError("parameter tensor " + std::to_string(i) + " is not finite");
      net.params_[i].values = std::move(values);
    }
    return net;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("network document: ") + e.what());
  } catch (const ArgumentError& e) {
    throw FormatError(std::string("network document: ") + e.what());
  }
}

Vec1D softmax(std::span<const double> logits) {
  if (logits.empty()) throw ArgumentError("softmax of empty vector");
  const double m = *std::max_element(logits.begin(), logits.end());
  Vec1D p(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = std::exp(logits[i] - m);
    sum += p[i];
  }
  for (double& v : p) v /= sum;
  return p;
}

}  // namespace vidprint::nn
