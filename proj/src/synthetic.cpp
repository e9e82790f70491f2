#include "vidprint/synthetic.hpp"

#include <cmath>
#include <cstdio>

namespace vidprint {

namespace {

// Content time -> delivery time under an optional startup phase.
double delivery_time(double content_s, const std::optional<StartupModel>& startup) {
  if (!startup) return content_s;
  if (content_s < startup->span_s) return content_s / startup->speedup;
  return content_s - startup->span_s + startup->span_s / startup->speedup;
}

std::size_t slot_of(double t, double resolution_s) {
  auto idx = static_cast<std::size_t>(std::floor(t / resolution_s));
  if (static_cast<double>(idx + 1) * resolution_s <= t) ++idx;
  return idx;
}

}  // namespace

void PlatformModel::validate() const {
  if (!(segment_s > 0.0)) throw ArgumentError("platform segment_s must be positive");
  if (!(gain > 0.0)) throw ArgumentError("platform gain must be positive");
  if (noise_sigma < 0.0) throw ArgumentError("platform noise_sigma must be >= 0");
  if (startup && (!(startup->span_s > 0.0) || !(startup->speedup > 0.0))) {
    throw ArgumentError("startup span and speedup must be positive");
  }
  if (truncate_s && !(*truncate_s > 0.0)) throw ArgumentError("truncate_s must be positive");
  if (background && (!(background->interval_s > 0.0) || background->jitter < 0.0 || background->jitter >= 1.0 ||
                     background->burst_size < 0.0 || background->size_spread < 0.0 ||
                     background->size_spread > 1.0)) {
    throw ArgumentError("background needs interval_s > 0, jitter in [0, 1), burst_size >= 0 and size_spread in [0, 1]");
  }
}

PlatformModel PlatformModel::easy(double gain, std::uint64_t pattern_seed) {
  PlatformModel m;
  m.segment_s = 5.0;
  m.gain = gain;
  m.noise_sigma = 0.05;
  m.background = BackgroundModel{7.0, 0.1, 3000.0, pattern_seed};
  return m;
}

PlatformModel PlatformModel::hard(std::uint64_t pattern_seed) {
  PlatformModel m;
  m.segment_s = 25.0;
  m.gain = 1.0;
  m.noise_sigma = 0.1;
  m.startup = StartupModel{100.0, 2.0};
  m.truncate_s = 520.0;
  m.background = BackgroundModel{7.0, 0.1, 3000.0, pattern_seed};
  return m;
}

void SyntheticSpec::validate() const {
  if (n_classes < 2) throw ArgumentError("synthetic spec needs at least 2 classes");
  if (trials_per_class < 1) throw ArgumentError("synthetic spec needs at least 1 trial per class");
  if (!(resolution_s > 0.0) || !(duration_s > 0.0)) throw ArgumentError("durations must be positive");
  if (platforms.empty()) throw ArgumentError("synthetic spec needs at least one platform");
  for (const auto& [name, model] : platforms) {
    if (name.empty() || name == kVbrPlatform) throw ArgumentError("invalid platform name '" + name + "'");
    model.validate();
  }
}

std::string synthetic_video_id(int class_id) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "v%03d", class_id);
  return buf;
}

Vec1D gen_vbr_profile(std::uint64_t seed, int class_id, double duration_s, double resolution_s,
                      const ProfileModel& model) {
  const double ratio = duration_s / resolution_s;
  if (!(resolution_s > 0.0) || std::abs(ratio - std::round(ratio)) > 1e-9 || ratio < 1.0) {
    throw ArgumentError("resolution_s must divide duration_s");
  }
  const auto n = static_cast<std::size_t>(std::round(ratio));
  Rng rng = make_rng(seed, {hash_tag("vbr-profile"), static_cast<std::uint64_t>(class_id)});
  std::normal_distribution<double> unit(0.0, 1.0);

  const double stationary_sd = model.step / std::sqrt(std::max(1e-12, 1.0 - model.reversion * model.reversion));
  Vec1D walk(n);
  double x = stationary_sd * unit(rng);
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) x = model.reversion * x + model.step * unit(rng);
    walk[i] = std::exp(x);
  }

  // Centered moving average, truncated at the edges.
  const auto window = std::max<std::size_t>(1, static_cast<std::size_t>(std::round(model.smoothing_s / resolution_s)));
  const std::size_t before = (window - 1) / 2;
  const std::size_t after = window - 1 - before;
  Vec1D prefix(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + walk[i];
  Vec1D out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= before ? i - before : 0;
    const std::size_t hi = std::min(n, i + after + 1);
    out[i] = model.nominal_rate * resolution_s * (prefix[hi] - prefix[lo]) / static_cast<double>(hi - lo);
  }
  return out;
}

Vec1D apply_platform_model(std::span<const double> profile, double resolution_s, const PlatformModel& model,
                           Rng& rng) {
  model.validate();
  const std::size_t n = profile.size();
  const double duration_s = static_cast<double>(n) * resolution_s;
  const double cutoff = model.truncate_s.value_or(duration_s);
  std::normal_distribution<double> unit(0.0, 1.0);
  Vec1D out(n, 0.0);

  auto deliver = [&](double t, double mass) {
    if (t >= cutoff) return;
    const std::size_t slot = slot_of(t, resolution_s);
    if (slot < n) out[slot] += mass;
  };

  // Segment boundaries in slots. A trailing partial segment keeps its mass.
  const double seg_slots = model.segment_s / resolution_s;
  std::size_t start = 0;
  for (std::size_t k = 0; start < n; ++k) {
    const auto end = std::min(n, static_cast<std::size_t>(std::llround(static_cast<double>(k + 1) * seg_slots)));
    double mass = 0.0;
    for (std::size_t i = start; i < end; ++i) mass += profile[i];
    const double noise = model.noise_sigma > 0.0 ? model.noise_sigma * unit(rng) : 0.0;
    mass = std::max(0.0, mass * model.gain * (1.0 + noise));
    deliver(delivery_time(static_cast<double>(start) * resolution_s, model.startup), mass);
    start = std::max(end, start + 1);
  }

  if (model.background && model.background->burst_size > 0.0) {
    const auto& bg = *model.background;
    Rng pattern(mix_seed(bg.pattern_seed, {hash_tag("background-pattern")}));
    std::uniform_real_distribution<double> gap(bg.interval_s * (1.0 - bg.jitter), bg.interval_s * (1.0 + bg.jitter));
    std::uniform_real_distribution<double> size(1.0 - bg.size_spread, 1.0 + bg.size_spread);
    for (double t = gap(pattern); t < duration_s; t += gap(pattern)) {
      const double base = bg.burst_size * size(pattern);
      const double noise = model.noise_sigma > 0.0 ? model.noise_sigma * unit(rng) : 0.0;
      deliver(t, std::max(0.0, base * model.gain * (1.0 + noise)));
    }
  }
  return out;
}

Dataset gen_synthetic_dataset(const SyntheticSpec& spec) {
  spec.validate();
  std::vector<TraceData> traces;
  traces.reserve(static_cast<std::size_t>(spec.n_classes) *
                 (1 + spec.platforms.size() * static_cast<std::size_t>(spec.trials_per_class)));
  for (int c = 0; c < spec.n_classes; ++c) {
    const std::string video = synthetic_video_id(c);
    Vec1D profile = gen_vbr_profile(spec.seed, c, spec.duration_s, spec.resolution_s, spec.profile);
    for (std::size_t p = 0; p < spec.platforms.size(); ++p) {
      const auto& [name, model] = spec.platforms[p];
      for (int t = 0; t < spec.trials_per_class; ++t) {
        Rng rng = make_rng(spec.seed, {hash_tag("delivery"), hash_tag(name), static_cast<std::uint64_t>(c),
                                       static_cast<std::uint64_t>(t)});
        traces.emplace_back(BinnedTrace{TraceKey{name, video, t}, spec.resolution_s,
                                        apply_platform_model(profile, spec.resolution_s, model, rng)});
      }
    }
    traces.emplace_back(BinnedTrace{TraceKey{kVbrPlatform, video, 0}, spec.resolution_s, std::move(profile)});
  }
  return Dataset(std::move(traces));
}

}  // namespace vidprint
