#include "vidprint/ingestion.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

namespace vidprint {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  const char sep = line.find('\t') != std::string_view::npos ? '\t' : ',';
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::optional<double> to_double(std::string_view s) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::optional<long long> to_integer(std::string_view s) {
  long long v = 0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return v;
}

bool is_skippable(std::string_view line) { return line.empty() || line.front() == '#'; }

// `# key=value` header line, or nullopt.
std::optional<std::pair<std::string, std::string>> header_pair(std::string_view line) {
  if (line.empty() || line.front() != '#') return std::nullopt;
  line = trim(line.substr(1));
  const auto eq = line.find('=');
  if (eq == std::string_view::npos) return std::nullopt;
  return std::pair{std::string(trim(line.substr(0, eq))), std::string(trim(line.substr(eq + 1)))};
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string to_string(const TraceKey& key) {
  return key.platform + "/" + key.video_id + "/" + std::to_string(key.trial);
}

const TraceKey& key_of(const TraceData& trace) {
  return std::visit([](const auto& t) -> const TraceKey& { return t.key; }, trace);
}

RawTrace parse_packet_log(std::istream& in, const ClientMarker& marker) {
  RawTrace trace;
  std::string line;
  std::size_t line_no = 0;
  double origin = 0.0;
  double last = 0.0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto view = trim(line);
    if (is_skippable(view)) continue;
    const auto f = split_fields(view);
    PacketRecord rec;
    std::string_view size_field;
    if (f.size() == 3) {
      if (f[1] == "D" || f[1] == "d") {
        rec.direction = Direction::Downlink;
      } else if (f[1] == "U" || f[1] == "u") {
        rec.direction = Direction::Uplink;
      } else {
        throw ParseError(line_no, "direction must be U or D, got '" + std::string(f[1]) + "'");
      }
      size_field = f[2];
    } else if (f.size() == 4) {
      if (!marker.client_address) {
        throw ParseError(line_no, "4-column row requires a client address");
      }
      if (f[2] == *marker.client_address) {
        rec.direction = Direction::Downlink;
      } else if (f[1] == *marker.client_address) {
        rec.direction = Direction::Uplink;
      } else {
        throw ParseError(line_no, "neither endpoint is the client " + *marker.client_address);
      }
      size_field = f[3];
    } else {
      throw ParseError(line_no, "expected 3 or 4 fields, got " + std::to_string(f.size()));
    }
    const auto t = to_double(f[0]);
    if (!t) throw ParseError(line_no, "bad time '" + std::string(f[0]) + "'");
    const auto size = to_integer(size_field);
    if (!size) throw ParseError(line_no, "bad size '" + std::string(size_field) + "'");
    if (*size < 0) throw ParseError(line_no, "negative packet size");
    if (*t < 0.0) throw ParseError(line_no, "negative timestamp");
    if (trace.packets.empty()) {
      origin = *t;
    } else if (*t < last) {
      throw ParseError(line_no, "timestamps must be non-decreasing");
    }
    last = *t;
    rec.time = *t - origin;
    rec.size = static_cast<std::uint64_t>(*size);
    trace.packets.push_back(rec);
  }
  if (trace.packets.empty()) throw FormatError("packet log is empty");
  return trace;
}

BinnedTrace parse_vbr_segments(std::istream& in, double segment_duration_s) {
  if (!(segment_duration_s > 0.0)) throw ArgumentError("segment duration must be positive");
  std::vector<std::pair<long long, double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto view = trim(line);
    if (is_skippable(view)) continue;
    const auto f = split_fields(view);
    if (f.size() != 2) throw ParseError(line_no, "expected index,bytes");
    const auto idx = to_integer(f[0]);
    const auto bytes = to_double(f[1]);
    if (!idx || *idx < 0) throw ParseError(line_no, "bad segment index");
    if (!bytes || *bytes < 0.0) throw ParseError(line_no, "bad segment size");
    rows.emplace_back(*idx, *bytes);
  }
  if (rows.empty()) throw FormatError("VBR file has no segments");
  std::sort(rows.begin(), rows.end());
  BinnedTrace out;
  out.key.platform = kVbrPlatform;
  out.bin_s = segment_duration_s;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].first != static_cast<long long>(i)) {
      throw FormatError("VBR segment indices not contiguous: expected " + std::to_string(i) +
                        ", found " + std::to_string(rows[i].first));
    }
    out.values.push_back(rows[i].second);
  }
  return out;
}

BinnedTrace parse_vbr_file(std::istream& in) {
  std::stringstream body;
  std::optional<double> segment_s;
  std::string line;
  while (std::getline(in, line)) {
    if (auto kv = header_pair(trim(line)); kv && kv->first == "segment_s") {
      segment_s = to_double(kv->second);
      if (!segment_s) throw FormatError("bad segment_s header");
    }
    body << line << '\n';
  }
  if (!segment_s) throw FormatError("VBR file lacks '# segment_s=' header");
  return parse_vbr_segments(body, *segment_s);
}

BinnedTrace parse_binned_csv(std::istream& in) {
  BinnedTrace out;
  std::optional<std::string> platform, video;
  std::optional<long long> trial;
  std::optional<double> bin_s;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto view = trim(line);
    if (view.empty()) continue;
    if (view.front() == '#') {
      auto kv = header_pair(view);
      if (!kv) continue;
      const auto& [k, v] = *kv;
      if (k == "platform") {
        platform = v;
      } else if (k == "video_id") {
        video = v;
      } else if (k == "trial") {
        trial = to_integer(v);
        if (!trial) throw ParseError(line_no, "bad trial");
      } else if (k == "bin_s") {
        bin_s = to_double(v);
        if (!bin_s || *bin_s <= 0.0) throw ParseError(line_no, "bad bin_s");
      }
      continue;
    }
    const auto value = to_double(view);
    if (!value) throw ParseError(line_no, "non-numeric value '" + std::string(view) + "'");
    out.values.push_back(*value);
  }
  if (!platform) throw FormatError("binned trace missing header key 'platform'");
  if (!video) throw FormatError("binned trace missing header key 'video_id'");
  if (!trial) throw FormatError("binned trace missing header key 'trial'");
  if (!bin_s) throw FormatError("binned trace missing header key 'bin_s'");
  if (out.values.empty()) throw FormatError("binned trace has no values");
  out.key = TraceKey{*platform, *video, static_cast<int>(*trial)};
  out.bin_s = *bin_s;
  return out;
}

void write_binned_csv(const BinnedTrace& trace, std::ostream& out, const HeaderExtras& extras) {
  if (trace.values.empty()) throw ArgumentError("write_binned_csv: empty vector");
  out << "# platform=" << trace.key.platform << '\n'
      << "# video_id=" << trace.key.video_id << '\n'
      << "# trial=" << trace.key.trial << '\n'
      << "# bin_s=" << format_double(trace.bin_s) << '\n';
  for (const auto& [k, v] : extras) out << "# " << k << '=' << v << '\n';
  for (double v : trace.values) out << format_double(v) << '\n';
}

void write_binned_csv(const BinnedTrace& trace, const std::filesystem::path& path,
                      const HeaderExtras& extras) {
  if (trace.values.empty()) throw ArgumentError("write_binned_csv: empty vector");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_binned_csv(trace, out, extras);
  out.flush();
  if (!out) throw IoError("write failed: " + path.string());
}

Dataset::Dataset(std::vector<TraceData> traces) {
  std::map<std::string, std::set<std::string>> per_platform;
  std::set<std::string> all_classes;
  for (auto& t : traces) {
    TraceKey key = key_of(t);
    if (key.platform.empty() || key.video_id.empty()) {
      throw DataError("trace with empty platform or video id");
    }
    if (traces_.contains(key)) throw DataError("duplicate trace key " + to_string(key));
    if (std::find(platforms_.begin(), platforms_.end(), key.platform) == platforms_.end()) {
      platforms_.push_back(key.platform);
    }
    per_platform[key.platform].insert(key.video_id);
    all_classes.insert(key.video_id);
    traces_.emplace(std::move(key), std::move(t));
  }
  for (const auto& [platform, classes] : per_platform) {
    for (const auto& c : all_classes) {
      if (!classes.contains(c)) {
        throw DataError("class '" + c + "' absent from platform '" + platform + "'");
      }
    }
  }
  classes_.assign(all_classes.begin(), all_classes.end());
  // Real platforms first in first-seen order, VBR last.
  std::stable_partition(platforms_.begin(), platforms_.end(),
                        [](const std::string& p) { return p != kVbrPlatform; });
}

bool Dataset::has_platform(const std::string& platform) const {
  return std::find(platforms_.begin(), platforms_.end(), platform) != platforms_.end();
}

std::vector<const TraceData*> Dataset::traces(const std::string& platform,
                                              const std::string& video_id) const {
  std::vector<const TraceData*> out;
  auto it = traces_.lower_bound(TraceKey{platform, video_id, std::numeric_limits<int>::min()});
  for (; it != traces_.end() && it->first.platform == platform && it->first.video_id == video_id; ++it) {
    out.push_back(&it->second);
  }
  return out;
}

const TraceData* Dataset::find(const TraceKey& key) const {
  auto it = traces_.find(key);
  return it == traces_.end() ? nullptr : &it->second;
}

Dataset load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("manifest " + path.string() + ": " + e.what());
  }
  if (!doc.is_object() || !doc.contains("platforms") || !doc["platforms"].is_object()) {
    throw DataError("manifest must contain a 'platforms' object");
  }
  const auto base = path.parent_path();
  std::vector<TraceData> traces;
  for (const auto& [platform, videos] : doc["platforms"].items()) {
    if (!videos.is_object() || videos.empty()) {
      throw DataError("manifest platform '" + platform + "' has no videos");
    }
    for (const auto& [video, entries] : videos.items()) {
      if (!entries.is_array() || entries.empty()) {
        throw DataError("manifest entry " + platform + "/" + video + " has no traces");
      }
      for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto& e = entries[i];
        const std::string where = platform + "/" + video + "[" + std::to_string(i) + "]";
        if (!e.is_object() || !e.contains("path") || !e["path"].is_string()) {
          throw DataError("manifest entry " + where + " lacks a path");
        }
        const std::string kind = e.value("kind", std::string("binned"));
        std::filesystem::path file = e["path"].get<std::string>();
        if (file.is_relative()) file = base / file;
        std::ifstream f(file);
        if (!f) throw IoError("manifest entry " + where + ": missing file " + file.string());
        const int trial = e.value("trial", static_cast<int>(i));
        try {
          if (kind == "packet_log") {
            ClientMarker marker;
            if (e.contains("client")) marker.client_address = e["client"].get<std::string>();
            RawTrace t = parse_packet_log(f, marker);
            t.key = TraceKey{platform, video, trial};
            traces.emplace_back(std::move(t));
          } else if (kind == "binned") {
            BinnedTrace t = parse_binned_csv(f);
            if (t.key.platform != platform || t.key.video_id != video) {
              throw DataError("header says " + to_string(t.key));
            }
            traces.emplace_back(std::move(t));
          } else if (kind == "vbr") {
            BinnedTrace t = parse_vbr_file(f);
            t.key = TraceKey{platform, video, trial};
            traces.emplace_back(std::move(t));
          } else {
            throw DataError("unknown kind '" + kind + "'");
          }
        } catch (const std::runtime_error& err) {
          throw DataError("manifest entry " + where + " (" + file.string() + "): " + err.what());
        }
      }
    }
  }
  if (traces.empty()) throw DataError("manifest lists no traces");
  return Dataset(std::move(traces));
}

}  // namespace vidprint
