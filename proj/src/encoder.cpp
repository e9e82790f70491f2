#include "vidprint/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace vidprint {

namespace {

constexpr std::uint64_t kRoleAnchor = 0, kRolePositive = 1, kRoleNegative = 2;

const Vec1D& lookup(const FeatureTable& table, const TraceKey& key) {
  const auto& trials = features_of(table, key.platform, key.video_id);
  if (key.trial < 0 || static_cast<std::size_t>(key.trial) >= trials.size()) {
    throw DataError("no trial " + std::to_string(key.trial) + " for " + to_string(key));
  }
  return trials[static_cast<std::size_t>(key.trial)];
}

std::size_t uniform_index(std::size_t n, Rng& rng) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

}  // namespace

std::string to_string(Arch arch) {
  switch (arch) {
    case Arch::Mlp: return "mlp";
    case Arch::Cnn1d: return "cnn1d";
    case Arch::Rnn: return "rnn";
  }
  return "?";
}

std::string to_string(Mining mining) {
  return mining == Mining::OfflineExhaustive ? "offline_exhaustive" : "online_semihard";
}

Arch parse_arch(const std::string& name) {
  if (name == "mlp") return Arch::Mlp;
  if (name == "cnn1d") return Arch::Cnn1d;
  if (name == "rnn") return Arch::Rnn;
  throw ArgumentError("unknown architecture '" + name + "' (expected mlp, cnn1d or rnn)");
}

Mining parse_mining(const std::string& name) {
  if (name == "offline_exhaustive") return Mining::OfflineExhaustive;
  if (name == "online_semihard") return Mining::OnlineSemihard;
  throw ArgumentError("unknown mining '" + name + "' (expected offline_exhaustive or online_semihard)");
}

void EncoderConfig::validate() const {
  if (embedding_dim < 1) throw ArgumentError("embedding_dim must be >= 1");
  if (hidden_units < 1) throw ArgumentError("hidden_units must be >= 1");
  if (dropout_rate < 0.0 || dropout_rate >= 1.0) throw ArgumentError("dropout_rate must be in [0, 1)");
  if (!(margin > 0.0)) throw ArgumentError("margin must be positive");
  if (epochs && *epochs < 0) throw ArgumentError("epochs must be >= 0");
  if (batch_size < 1) throw ArgumentError("batch_size must be >= 1");
  if (!(learning_rate > 0.0)) throw ArgumentError("learning_rate must be positive");
}

int EncoderConfig::effective_epochs() const {
  if (epochs) return *epochs;
  return mining == Mining::OfflineExhaustive ? 5 : 20;
}

nlohmann::json EncoderModel::to_json() const {
  return {{"kind", "encoder"}, {"arch", to_string(arch)}, {"network", net.to_json()}};
}

EncoderModel EncoderModel::from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("kind").get<std::string>() != "encoder") throw FormatError("document is not an encoder model");
    EncoderModel m;
    m.arch = parse_arch(doc.at("arch").get<std::string>());
    m.net = nn::Network::from_json(doc.at("network"));
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("encoder document: ") + e.what());
  } catch (const ArgumentError& e) {
    throw FormatError(std::string("encoder document: ") + e.what());
  }
}

EncoderModel make_encoder(const EncoderConfig& config, std::size_t input_len) {
  config.validate();
  Rng init = make_rng(config.seed, {hash_tag("encoder-init"), input_len});
  EncoderModel m;
  m.arch = config.arch;
  m.net = nn::Network(input_len);
  const std::size_t h = config.hidden_units;
  switch (config.arch) {
    case Arch::Mlp:
      m.net.dense(h, nn::Activation::Relu, init)
          .dense(h, nn::Activation::Relu, init)
          .dropout(config.dropout_rate)
          .dense(config.embedding_dim, nn::Activation::Linear, init);
      break;
    case Arch::Cnn1d:
      if (input_len < 4) throw ArgumentError("cnn1d encoder needs input length >= 4");
      m.net.conv1d(8, 3, init)
          .max_pool(2)
          .dense(h, nn::Activation::Relu, init)
          .dense(h, nn::Activation::Relu, init)
          .dropout(config.dropout_rate)
          .dense(config.embedding_dim, nn::Activation::Linear, init);
      break;
    case Arch::Rnn:
      m.net.lstm(config.embedding_dim, init).dropout(config.dropout_rate);
      break;
  }
  return m;
}

Embedding forward(const EncoderModel& model, std::span<const double> x, bool train, Rng* rng) {
  return model.net.forward(x, train, rng, nullptr);
}

Embedding embed(const EncoderModel& model, std::span<const double> x) {
  return model.net.forward(x, false, nullptr, nullptr);
}

std::vector<Embedding> embed_all(const EncoderModel& model, std::span<const Vec1D> xs, kernels::Backend backend) {
  return kernels::embed_batch(backend, model.net, xs);
}

double triplet_loss(std::span<const double> a, std::span<const double> p, std::span<const double> n,
                    double margin) {
  if (a.size() != p.size() || a.size() != n.size()) throw DimensionError("triplet embeddings differ in length");
  return std::max(euclidean_distance(a, p) - euclidean_distance(a, n) + margin, 0.0);
}

BatchGradient backward(const EncoderModel& model, std::span<const TripletInput> batch, double margin,
                       std::uint64_t dropout_seed, kernels::Backend backend) {
  BatchGradient out;
  out.grads = nn::zeros_like(model.net.params());
  if (batch.empty()) return out;
  const std::size_t dim = model.embedding_dim();

  auto item = [&](std::size_t i, nn::ParamSet& grads) -> double {
    const TripletInput& t = batch[i];
    if (!t.anchor || !t.positive || !t.negative) throw ArgumentError("triplet input has a null member");
    nn::Tape ta, tp, tn;
    Rng ra = make_rng(dropout_seed, {i, kRoleAnchor});
    Rng rp = make_rng(dropout_seed, {i, kRolePositive});
    Rng rn = make_rng(dropout_seed, {i, kRoleNegative});
    const Vec1D ea = model.net.forward(*t.anchor, true, &ra, &ta);
    const Vec1D ep = model.net.forward(*t.positive, true, &rp, &tp);
    const Vec1D en = model.net.forward(*t.negative, true, &rn, &tn);
    const double d_ap = euclidean_distance(ea, ep);
    const double d_an = euclidean_distance(ea, en);
    const double loss = d_ap - d_an + margin;
    if (!(loss > 0.0)) return 0.0;

    Vec1D ga(dim, 0.0), gp(dim, 0.0), gn(dim, 0.0);
    for (std::size_t j = 0; j < dim; ++j) {
      // A zero distance contributes the zero subgradient.
      const double u = d_ap > 0.0 ? (ea[j] - ep[j]) / d_ap : 0.0;
      const double w = d_an > 0.0 ? (ea[j] - en[j]) / d_an : 0.0;
      ga[j] = u - w;
      gp[j] = -u;
      gn[j] = w;
    }
    model.net.backward(ta, ga, grads);
    model.net.backward(tp, gp, grads);
    model.net.backward(tn, gn, grads);
    return loss;
  };

  const double total = kernels::accumulate(backend, batch.size(), out.grads, item);
  const double inv = 1.0 / static_cast<double>(batch.size());
  nn::scale(out.grads, inv);
  out.mean_loss = total * inv;
  return out;
}

AdamState AdamState::for_params(const nn::ParamSet& params) {
  AdamState s;
  s.m = nn::zeros_like(params);
  s.v = nn::zeros_like(params);
  return s;
}

void adam_step(nn::ParamSet& params, const nn::ParamSet& grads, AdamState& state, double lr) {
  if (!nn::same_shapes(params, grads) || !nn::same_shapes(params, state.m) || !nn::same_shapes(params, state.v)) {
    throw DimensionError("adam_step: parameter, gradient and moment shapes differ");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t p = 0; p < params.size(); ++p) {
    auto& w = params[p].values;
    const auto& g = grads[p].values;
    auto& m = state.m[p].values;
    auto& v = state.v[p].values;
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
      w[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + state.epsilon);
    }
  }
}

std::vector<Triplet> mine_offline_triplets(const FeatureTable& table, const std::string& anchor_platform,
                                           const std::string& other_platform,
                                           const std::vector<std::string>& classes, Rng& rng) {
  if (classes.size() < 2) throw ArgumentError("offline mining needs at least 2 classes");
  const bool same = anchor_platform == other_platform;
  for (const auto& c : classes) {
    features_of(table, anchor_platform, c);
    const auto& other = features_of(table, other_platform, c);
    if (same && other.size() < 2) {
      throw DataError("same-platform mining needs >= 2 trials of '" + c + "' on " + anchor_platform);
    }
  }
  std::vector<Triplet> out;
  for (std::size_t i = 0; i < classes.size(); ++i) {
    const auto n_anchor = features_of(table, anchor_platform, classes[i]).size();
    const auto n_pos = features_of(table, other_platform, classes[i]).size();
    for (std::size_t a = 0; a < n_anchor; ++a) {
      for (std::size_t k = 0; k < classes.size(); ++k) {
        if (k == i) continue;
        std::size_t pos = 0;
        if (same) {
          pos = uniform_index(n_pos - 1, rng);
          if (pos >= a) ++pos;
        } else {
          pos = uniform_index(n_pos, rng);
        }
        const auto neg = uniform_index(features_of(table, other_platform, classes[k]).size(), rng);
        out.push_back(Triplet{TraceKey{anchor_platform, classes[i], static_cast<int>(a)},
                              TraceKey{other_platform, classes[i], static_cast<int>(pos)},
                              TraceKey{other_platform, classes[k], static_cast<int>(neg)}});
      }
    }
  }
  return out;
}

std::vector<SemihardSelection> mine_semihard(std::span<const Embedding> embeddings, std::span<const int> labels,
                                             std::span<const int> platforms, double margin) {
  const std::size_t n = embeddings.size();
  if (labels.size() != n || platforms.size() != n) throw DimensionError("mine_semihard: input lengths differ");
  const bool single_platform =
      n == 0 || std::all_of(platforms.begin(), platforms.end(), [&](int p) { return p == platforms[0]; });
  std::vector<double> dist(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) dist[i * n + j] = dist[j * n + i] = euclidean_distance(embeddings[i], embeddings[j]);

  std::vector<SemihardSelection> out;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t p = 0; p < n; ++p) {
      if (p == a || labels[p] != labels[a]) continue;
      if (!single_platform && platforms[p] == platforms[a]) continue;
      const double d_ap = dist[a * n + p];
      std::size_t best_semi = n, best_violator = n;
      double semi_d = std::numeric_limits<double>::infinity();
      double viol_d = -std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < n; ++k) {
        if (labels[k] == labels[a] || platforms[k] != platforms[p]) continue;
        const double d_an = dist[a * n + k];
        if (d_an > d_ap && d_an < d_ap + margin) {
          if (d_an < semi_d) {
            semi_d = d_an;
            best_semi = k;
          }
        } else if (d_an < d_ap + margin && d_an > viol_d) {
          viol_d = d_an;
          best_violator = k;
        }
      }
      if (best_semi < n) {
        out.push_back({a, p, best_semi, true});
      } else if (best_violator < n) {
        out.push_back({a, p, best_violator, false});
      }
    }
  }
  return out;
}

namespace {

std::vector<int> platform_list(const std::pair<std::string, std::string>& platforms) {
  return platforms.first == platforms.second ? std::vector<int>{0} : std::vector<int>{0, 1};
}

TrainResult train_offline(const FeatureTable& table, const std::vector<std::string>& classes,
                          const std::pair<std::string, std::string>& platforms, const EncoderConfig& config,
                          TrainResult result) {
  Rng mining = make_rng(config.seed, {hash_tag("offline-mining")});
  auto triplets = mine_offline_triplets(table, platforms.first, platforms.second, classes, mining);
  if (platforms.first != platforms.second) {
    auto reverse = mine_offline_triplets(table, platforms.second, platforms.first, classes, mining);
    triplets.insert(triplets.end(), reverse.begin(), reverse.end());
  }
  std::vector<TripletInput> inputs;
  inputs.reserve(triplets.size());
  for (const auto& t : triplets) {
    inputs.push_back({&lookup(table, t.anchor), &lookup(table, t.positive), &lookup(table, t.negative)});
  }

  AdamState adam = AdamState::for_params(result.model.net.params());
  const int epochs = config.effective_epochs();
  for (int e = 0; e < epochs; ++e) {
    Rng shuffle = make_rng(config.seed, {hash_tag("epoch-shuffle"), static_cast<std::uint64_t>(e)});
    std::shuffle(inputs.begin(), inputs.end(), shuffle);
    double epoch_loss = 0.0;
    std::uint64_t b = 0;
    for (std::size_t start = 0; start < inputs.size(); start += config.batch_size, ++b) {
      const std::size_t end = std::min(inputs.size(), start + config.batch_size);
      std::span<const TripletInput> batch(inputs.data() + start, end - start);
      auto g = backward(result.model, batch, config.margin,
                        mix_seed(config.seed, {hash_tag("dropout"), static_cast<std::uint64_t>(e), b}),
                        config.backend);
      adam_step(result.model.net.params(), g.grads, adam, config.learning_rate);
      epoch_loss += g.mean_loss * static_cast<double>(batch.size());
    }
    result.loss_history.push_back(inputs.empty() ? 0.0 : epoch_loss / static_cast<double>(inputs.size()));
    ++result.epochs_run;
  }
  return result;
}

TrainResult train_online(const FeatureTable& table, const std::vector<std::string>& classes,
                         const std::pair<std::string, std::string>& platforms, const EncoderConfig& config,
                         TrainResult result) {
  struct Item {
    const Vec1D* x;
    int label;
    int platform;
  };
  std::vector<Item> items;
  const auto ids = platform_list(platforms);
  for (int pid : ids) {
    const auto& name = pid == 0 ? platforms.first : platforms.second;
    for (std::size_t c = 0; c < classes.size(); ++c) {
      for (const auto& x : features_of(table, name, classes[c])) items.push_back({&x, static_cast<int>(c), pid});
    }
  }

  AdamState adam = AdamState::for_params(result.model.net.params());
  const int epochs = config.effective_epochs();
  for (int e = 0; e < epochs; ++e) {
    Rng shuffle = make_rng(config.seed, {hash_tag("epoch-shuffle"), static_cast<std::uint64_t>(e)});
    std::shuffle(items.begin(), items.end(), shuffle);
    double loss_sum = 0.0;
    std::size_t selected = 0;
    std::uint64_t b = 0;
    for (std::size_t start = 0; start < items.size(); start += config.batch_size, ++b) {
      const std::size_t end = std::min(items.size(), start + config.batch_size);
      std::vector<Vec1D> xs;
      std::vector<int> labels, plats;
      for (std::size_t i = start; i < end; ++i) {
        xs.push_back(*items[i].x);
        labels.push_back(items[i].label);
        plats.push_back(items[i].platform);
      }
      const auto emb = embed_all(result.model, xs, config.backend);
      const auto sel = mine_semihard(emb, labels, plats, config.margin);
      if (sel.empty()) continue;
      std::vector<TripletInput> batch;
      batch.reserve(sel.size());
      for (const auto& s : sel) {
        batch.push_back({items[start + s.anchor].x, items[start + s.positive].x, items[start + s.negative].x});
      }
      auto g = backward(result.model, batch, config.margin,
                        mix_seed(config.seed, {hash_tag("dropout"), static_cast<std::uint64_t>(e), b}),
                        config.backend);
      adam_step(result.model.net.params(), g.grads, adam, config.learning_rate);
      loss_sum += g.mean_loss * static_cast<double>(batch.size());
      selected += batch.size();
    }
    const double epoch_loss = selected == 0 ? 0.0 : loss_sum / static_cast<double>(selected);
    result.loss_history.push_back(epoch_loss);
    ++result.epochs_run;
    if (epoch_loss == 0.0) break;
  }
  return result;
}

}  // namespace

TrainResult train_encoder(const FeatureTable& table, const std::vector<std::string>& classes,
                          const std::pair<std::string, std::string>& platforms, const EncoderConfig& config) {
  config.validate();
  if (classes.size() < 2) throw ArgumentError("encoder training needs at least 2 classes");
  const auto& probe = features_of(table, platforms.first, classes.front());
  TrainResult result;
  result.model = make_encoder(config, probe.front().size());
  for (const auto& c : classes) {
    for (const auto* name : {&platforms.first, &platforms.second}) {
      for (const auto& x : features_of(table, *name, c)) {
        if (x.size() != result.model.input_len()) throw DimensionError("feature vectors differ in length");
      }
    }
  }
  if (config.mining == Mining::OfflineExhaustive) return train_offline(table, classes, platforms, config, std::move(result));
  return train_online(table, classes, platforms, config, std::move(result));
}

}  // namespace vidprint
