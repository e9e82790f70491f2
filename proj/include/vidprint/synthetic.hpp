#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vidprint/core.hpp"
#include "vidprint/ingestion.hpp"

namespace vidprint {

/// Initial buffering: the first `span_s` of content is delivered `speedup`
/// times faster than real time; later content shifts earlier accordingly.
struct StartupModel {
  double span_s = 0.0;
  double speedup = 1.0;
};

/// Player traffic that does not depend on the video: near-periodic bursts
/// (gaps of interval_s * (1 +- jitter)) whose timing and sizes are drawn once
/// per platform from `pattern_seed`.
struct BackgroundModel {
  double interval_s = 7.0;
  double jitter = 0.1;
  double burst_size = 0.0;  // mean size before gain, profile units
  std::uint64_t pattern_seed = 0;
  double size_spread = 0.15;  // sizes uniform in burst_size * (1 +- size_spread)
};

struct PlatformModel {
  double segment_s = 5.0;
  double gain = 1.0;
  double noise_sigma = 0.0;
  std::optional<StartupModel> startup;
  std::optional<double> truncate_s;
  std::optional<BackgroundModel> background;

  void validate() const;

  /// Short chunks, light noise, no startup. Mimics the high VBR-dependence
  /// platforms.
  static PlatformModel easy(double gain, std::uint64_t pattern_seed);
  /// Long chunks, double-speed 100 s startup, early end at 520 s.
  static PlatformModel hard(std::uint64_t pattern_seed);
};

/// Shape of the per-video bitrate profile: a moving average of an
/// exponentiated mean-reverting random walk around `nominal_rate`.
struct ProfileModel {
  double step = 0.15;
  double reversion = 0.95;
  double smoothing_s = 10.0;
  double nominal_rate = 100.0;
};

struct SyntheticSpec {
  int n_classes = 30;
  int trials_per_class = 5;
  double duration_s = 600.0;
  double resolution_s = 1.0;
  std::vector<std::pair<std::string, PlatformModel>> platforms;
  ProfileModel profile;
  std::uint64_t seed = 0;

  void validate() const;
};

std::string synthetic_video_id(int class_id);

/// Strictly positive bitrate profile, a pure function of (seed, class_id).
Vec1D gen_vbr_profile(std::uint64_t seed, int class_id, double duration_s, double resolution_s,
                      const ProfileModel& model = {});

/// Delivers a profile through a platform: content is cut into segments of
/// segment_s, each segment's mass arrives as one burst (scaled, perturbed),
/// startup and truncation reshape delivery times. Output has the profile's
/// length and resolution.
Vec1D apply_platform_model(std::span<const double> profile, double resolution_s, const PlatformModel& model,
                           Rng& rng);

/// n_classes x trials x platforms binned traces plus one VBR entry per class.
Dataset gen_synthetic_dataset(const SyntheticSpec& spec);

}  // namespace vidprint
