#include "vidprint/preprocess.hpp"

#include <cmath>

namespace vidprint {

namespace {

constexpr double kSpanTolerance = 1e-9;

// Number of whole steps of `step` in `span`, or nullopt if not a multiple.
std::optional<std::size_t> whole_multiple(double span, double step) {
  const double ratio = span / step;
  const double rounded = std::round(ratio);
  if (rounded < 1.0 || std::abs(ratio - rounded) > kSpanTolerance * std::max(1.0, ratio)) {
    return std::nullopt;
  }
  return static_cast<std::size_t>(rounded);
}

}  // namespace

void BurstExtensionRule::validate(double duration_s) const {
  if (!(src_span_s > 0.0) || !(src_span_s < dst_span_s) || dst_span_s > duration_s) {
    throw ArgumentError("burst extension requires 0 < src_span_s < dst_span_s <= duration_s");
  }
  if (!(amplitude_factor > 0.0)) throw ArgumentError("burst extension amplitude must be positive");
}

void PreprocessConfig::validate() const {
  if (!(bin_s > 0.0)) throw ArgumentError("bin_s must be positive");
  if (!whole_multiple(duration_s, bin_s)) {
    throw ArgumentError("duration_s must be a positive multiple of bin_s");
  }
  for (const auto& [platform, rule] : platform_rules) rule.validate(duration_s);
}

std::size_t PreprocessConfig::n_bins() const {
  const auto n = whole_multiple(duration_s, bin_s);
  if (!n) throw ArgumentError("duration_s must be a positive multiple of bin_s");
  return *n;
}

Vec1D bin_downlink_packets(const RawTrace& trace, double bin_s, double duration_s) {
  const auto n = whole_multiple(duration_s, bin_s);
  if (!(bin_s > 0.0) || !n) throw ArgumentError("bin_s/duration_s invalid");
  Vec1D out(*n, 0.0);
  for (const auto& p : trace.packets) {
    if (p.direction != Direction::Downlink || p.time >= duration_s) continue;
    auto idx = static_cast<std::size_t>(std::floor(p.time / bin_s));
    // t / bin_s can land a hair below an integer boundary.
    if (static_cast<double>(idx + 1) * bin_s <= p.time) ++idx;
    if (idx < out.size()) out[idx] += 1.0;
  }
  return out;
}

Vec1D rebin(const BinnedTrace& trace, double bin_s) {
  const auto factor = whole_multiple(bin_s, trace.bin_s);
  if (!factor) {
    throw ArgumentError("cannot rebin " + to_string(trace.key) + " from " + std::to_string(trace.bin_s) +
                        " s to " + std::to_string(bin_s) + " s");
  }
  const std::size_t k = *factor;
  Vec1D out((trace.values.size() + k - 1) / k, 0.0);
  for (std::size_t i = 0; i < trace.values.size(); ++i) out[i / k] += trace.values[i];
  return out;
}

Vec1D extend_initial_burst(std::span<const double> v, const BurstExtensionRule& rule, double bin_s) {
  const auto src = whole_multiple(rule.src_span_s, bin_s);
  const auto dst = whole_multiple(rule.dst_span_s, bin_s);
  if (!src || !dst) throw ArgumentError("burst extension spans must be multiples of bin_s");
  if (v.size() < *src) throw ArgumentError("trace shorter than the burst extension source span");
  Vec1D out = resample_linear(v.first(*src), *dst);
  for (double& x : out) x *= rule.amplitude_factor;
  out.insert(out.end(), v.begin() + static_cast<std::ptrdiff_t>(*src), v.end());
  out.resize(v.size());
  return out;
}

Vec1D truncate_or_pad(std::span<const double> v, std::size_t target_len) {
  if (target_len == 0) throw ArgumentError("target length must be >= 1");
  Vec1D out(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(std::min(v.size(), target_len)));
  out.resize(target_len, 0.0);
  return out;
}

Vec1D augment_gaussian(std::span<const double> v, double fraction, Rng& rng) {
  if (fraction < 0.0) throw ArgumentError("augmentation fraction must be >= 0");
  Vec1D out(v.begin(), v.end());
  if (fraction == 0.0) return out;
  std::normal_distribution<double> unit(0.0, 1.0);
  for (double& x : out) {
    if (x == 0.0) continue;
    x = std::max(0.0, x + fraction * std::abs(x) * unit(rng));
  }
  return out;
}

FeatureVector preprocess_pipeline(const TraceData& trace, const PreprocessConfig& config) {
  config.validate();
  FeatureVector fv;
  fv.key = key_of(trace);
  Vec1D binned = std::visit(
      [&](const auto& t) -> Vec1D {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, RawTrace>) {
          return bin_downlink_packets(t, config.bin_s, config.duration_s);
        } else {
          return rebin(t, config.bin_s);
        }
      },
      trace);
  if (auto it = config.platform_rules.find(fv.key.platform); it != config.platform_rules.end()) {
    binned = extend_initial_burst(binned, it->second, config.bin_s);
  }
  binned = truncate_or_pad(binned, config.n_bins());
  fv.values = config.normalize ? minmax_normalize(binned) : std::move(binned);
  return fv;
}

FeatureTable preprocess_dataset(const Dataset& dataset, const PreprocessConfig& config) {
  config.validate();
  FeatureTable table;
  // Dataset iteration is ordered by key, so trials arrive in order.
  for (const auto& [key, trace] : dataset.all()) {
    table[key.platform][key.video_id].push_back(preprocess_pipeline(trace, config).values);
  }
  return table;
}

const std::vector<Vec1D>& features_of(const FeatureTable& table, const std::string& platform,
                                      const std::string& video_id) {
  auto p = table.find(platform);
  if (p == table.end()) throw DataError("no features for platform '" + platform + "'");
  auto v = p->second.find(video_id);
  if (v == p->second.end() || v->second.empty()) {
    throw DataError("no features for video '" + video_id + "' on platform '" + platform + "'");
  }
  return v->second;
}

}  // namespace vidprint
