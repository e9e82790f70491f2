#pragma once

#include <map>
#include <string>
#include <vector>

#include "vidprint/core.hpp"
#include "vidprint/ingestion.hpp"

namespace vidprint {

/// Stretches the first `src_span_s` of a binned trace over `dst_span_s`
/// and scales it, flattening a platform's initial delivery burst.
struct BurstExtensionRule {
  double src_span_s = 0.0;
  double dst_span_s = 0.0;
  double amplitude_factor = 1.0;

  void validate(double duration_s) const;

  /// First 100 s stretched to 200 s at half amplitude.
  static BurstExtensionRule youtube() { return {100.0, 200.0, 0.5}; }
  /// First 520 s stretched to 600 s; amplitude kept.
  static BurstExtensionRule rumble() { return {520.0, 600.0, 1.0}; }
};

struct PreprocessConfig {
  double bin_s = 10.0;
  double duration_s = 600.0;
  std::map<std::string, BurstExtensionRule> platform_rules;
  bool normalize = true;

  void validate() const;
  std::size_t n_bins() const;
};

struct FeatureVector {
  TraceKey key;
  Vec1D values;
};

/// Counts DOWNLINK packets per half-open bin [i*bin_s, (i+1)*bin_s);
/// packets at or past duration_s are dropped.
Vec1D bin_downlink_packets(const RawTrace& trace, double bin_s, double duration_s);

/// Sums a binned series onto a coarser grid; bin_s must be an integer
/// multiple of the trace's own bin size.
Vec1D rebin(const BinnedTrace& trace, double bin_s);

Vec1D extend_initial_burst(std::span<const double> v, const BurstExtensionRule& rule, double bin_s);

Vec1D truncate_or_pad(std::span<const double> v, std::size_t target_len);

/// Replaces each element by a draw from Normal(v_i, fraction * v_i),
/// clamped at zero. Operates on counts, before normalization.
Vec1D augment_gaussian(std::span<const double> v, double fraction, Rng& rng);

/// bin (or rebin) -> burst extension (if a rule exists for the platform)
/// -> truncate/pad to n_bins -> min-max normalize (if enabled).
FeatureVector preprocess_pipeline(const TraceData& trace, const PreprocessConfig& config);

/// platform -> video -> features ordered by trial.
using FeatureTable = std::map<std::string, std::map<std::string, std::vector<Vec1D>>>;

/// Runs the pipeline over every trace of the dataset.
FeatureTable preprocess_dataset(const Dataset& dataset, const PreprocessConfig& config);

/// Looks up the trial-ordered features of one (platform, video); data error if absent.
const std::vector<Vec1D>& features_of(const FeatureTable& table, const std::string& platform,
                                      const std::string& video_id);

}  // namespace vidprint
