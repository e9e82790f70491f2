#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include "vidprint/core.hpp"

namespace vidprint {

/// Name of the pseudo-platform carrying per-segment source bitrate.
inline constexpr const char* kVbrPlatform = "VBR";

enum class Direction { Downlink, Uplink };

struct PacketRecord {
  double time = 0.0;  // seconds since first packet
  std::uint64_t size = 0;
  Direction direction = Direction::Downlink;
};

struct TraceKey {
  std::string platform;
  std::string video_id;
  int trial = 0;

  auto operator<=>(const TraceKey&) const = default;
  bool operator==(const TraceKey&) const = default;
};

std::string to_string(const TraceKey& key);

struct RawTrace {
  TraceKey key;
  std::vector<PacketRecord> packets;
};

/// A trace already reduced to a per-bin series (binned export, synthetic
/// output or VBR segment sizes).
struct BinnedTrace {
  TraceKey key;
  double bin_s = 0.0;
  Vec1D values;
};

using TraceData = std::variant<RawTrace, BinnedTrace>;

const TraceKey& key_of(const TraceData& trace);

/// Identifies the client side of a 4-column packet log.
struct ClientMarker {
  std::optional<std::string> client_address;
};

/// Parses `time_s,direction(U|D),size` or `time_epoch,src,dst,size` rows
/// (comma or tab separated, '#' comments allowed). The returned trace starts
/// at t = 0 and has an empty key.
RawTrace parse_packet_log(std::istream& in, const ClientMarker& marker = {});

/// Parses `index,bytes` rows. Indices must cover 0..n-1 exactly once.
/// The result is keyed to the VBR pseudo-platform with an empty video id.
BinnedTrace parse_vbr_segments(std::istream& in, double segment_duration_s);

/// Same as parse_vbr_segments but takes the segment duration from the
/// `# segment_s=<real>` header line.
BinnedTrace parse_vbr_file(std::istream& in);

BinnedTrace parse_binned_csv(std::istream& in);

/// Extra `# key=value` lines written after the fixed header (provenance).
using HeaderExtras = std::vector<std::pair<std::string, std::string>>;

void write_binned_csv(const BinnedTrace& trace, std::ostream& out, const HeaderExtras& extras = {});
void write_binned_csv(const BinnedTrace& trace, const std::filesystem::path& path,
                      const HeaderExtras& extras = {});

/// Labeled trace collection keyed by (platform, video_id, trial).
///
/// Construction validates that keys are unique and that every platform
/// carries every class; an invalid collection is never returned.
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(std::vector<TraceData> traces);

  const std::vector<std::string>& classes() const noexcept { return classes_; }
  const std::vector<std::string>& platforms() const noexcept { return platforms_; }
  bool has_platform(const std::string& platform) const;

  /// Traces of one (platform, video) ordered by trial.
  std::vector<const TraceData*> traces(const std::string& platform, const std::string& video_id) const;
  const TraceData* find(const TraceKey& key) const;

  std::size_t size() const noexcept { return traces_.size(); }
  const std::map<TraceKey, TraceData>& all() const noexcept { return traces_; }

 private:
  std::map<TraceKey, TraceData> traces_;
  std::vector<std::string> classes_;
  std::vector<std::string> platforms_;
};

/// Loads `{platforms: {<id>: {<video_id>: [{path, kind, ...}]}}}`.
/// kind is one of packet_log, binned, vbr; packet_log entries may carry a
/// `client` address and a `trial`. Relative paths resolve against the
/// manifest's directory.
Dataset load_manifest(const std::filesystem::path& path);

}  // namespace vidprint
