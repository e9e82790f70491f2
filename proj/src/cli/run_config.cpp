#include "vidprint/run_config.hpp"

#include <cstdio>
#include <fstream>
#include <set>

namespace vidprint {

namespace {

using Json = nlohmann::ordered_json;

// Strict reader over one JSON object: every key must be consumed.
class Section {
 public:
  Section(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw UsageError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) && !j_.at(key).is_null();
  }

  const Json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  double number(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    const auto& v = j_.at(key);
    if (!v.is_number()) throw UsageError(field(key), "expected a number");
    return v.get<double>();
  }

  std::int64_t integer(const std::string& key, std::int64_t fallback) {
    if (!has(key)) return fallback;
    const auto& v = j_.at(key);
    if (!v.is_number_integer()) throw UsageError(field(key), "expected an integer");
    return v.get<std::int64_t>();
  }

  std::size_t count(const std::string& key, std::size_t fallback, std::int64_t min = 1) {
    const auto v = integer(key, static_cast<std::int64_t>(fallback));
    if (v < min) throw UsageError(field(key), "must be >= " + std::to_string(min));
    return static_cast<std::size_t>(v);
  }

  std::optional<std::size_t> optional_count(const std::string& key) {
    if (!has(key)) return std::nullopt;
    return count(key, 1);
  }

  std::uint64_t u64(const std::string& key, std::uint64_t fallback) {
    if (!has(key)) return fallback;
    const auto& v = j_.at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
      throw UsageError(field(key), "expected a non-negative integer");
    }
    return v.get<std::uint64_t>();
  }

  std::string string(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const auto& v = j_.at(key);
    if (!v.is_string()) throw UsageError(field(key), "expected a string");
    return v.get<std::string>();
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const auto& v = j_.at(key);
    if (!v.is_boolean()) throw UsageError(field(key), "expected true or false");
    return v.get<bool>();
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw UsageError(field(key), "unknown key");
    }
  }

 private:
  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

template <class F>
auto checked(const std::string& field, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ArgumentError& e) {
    throw UsageError(field, e.what());
  }
}

PlatformModel read_platform(Section& s, std::size_t index) {
  const std::string preset = s.string("preset", "easy");
  const double gain = s.number("gain", 1.0);
  const std::uint64_t pattern_seed = s.u64("pattern_seed", index + 1);
  PlatformModel m;
  if (preset == "easy") {
    m = PlatformModel::easy(gain, pattern_seed);
  } else if (preset == "hard") {
    m = PlatformModel::hard(pattern_seed);
    m.gain = gain;
  } else if (preset == "custom") {
    m.gain = gain;
  } else {
    throw UsageError(s.field("preset"), "expected easy, hard or custom");
  }
  m.segment_s = s.number("segment_s", m.segment_s);
  m.noise_sigma = s.number("noise_sigma", m.noise_sigma);
  if (s.has("truncate_s")) m.truncate_s = s.number("truncate_s", 0.0);
  if (s.has("startup")) {
    Section st(s.raw("startup"), s.field("startup"));
    m.startup = StartupModel{st.number("span_s", 0.0), st.number("speedup", 1.0)};
    st.finish();
  }
  if (s.has("background")) {
    const auto& raw = s.raw("background");
    if (raw.is_boolean()) {
      if (!raw.get<bool>()) m.background.reset();
    } else {
      Section bg(raw, s.field("background"));
      BackgroundModel b = m.background.value_or(BackgroundModel{});
      b.interval_s = bg.number("interval_s", b.interval_s);
      b.jitter = bg.number("jitter", b.jitter);
      b.burst_size = bg.number("burst_size", b.burst_size);
      b.pattern_seed = bg.u64("pattern_seed", pattern_seed);
      b.size_spread = bg.number("size_spread", b.size_spread);
      bg.finish();
      m.background = b;
    }
  }
  return m;
}

SyntheticSpec read_synthetic(Section& s, std::uint64_t seed) {
  SyntheticSpec spec;
  spec.seed = seed;
  spec.n_classes = static_cast<int>(s.count("n_classes", 30, 2));
  spec.trials_per_class = static_cast<int>(s.count("trials_per_class", 5));
  spec.duration_s = s.number("duration_s", spec.duration_s);
  spec.resolution_s = s.number("resolution_s", spec.resolution_s);
  if (s.has("platforms")) {
    const auto& list = s.raw("platforms");
    if (!list.is_array() || list.empty()) throw UsageError(s.field("platforms"), "expected a non-empty array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      Section p(list[i], s.field("platforms") + "[" + std::to_string(i) + "]");
      const std::string name = p.string("name", "");
      if (name.empty()) throw UsageError(p.field("name"), "required");
      spec.platforms.emplace_back(name, read_platform(p, i));
      p.finish();
    }
  } else {
    spec.platforms = {{"PA", PlatformModel::easy(1.0, 1)},
                      {"PB", PlatformModel::easy(1.7, 2)},
                      {"PH", PlatformModel::hard(3)}};
  }
  if (s.has("profile")) {
    Section p(s.raw("profile"), s.field("profile"));
    spec.profile.step = p.number("step", spec.profile.step);
    spec.profile.reversion = p.number("reversion", spec.profile.reversion);
    spec.profile.smoothing_s = p.number("smoothing_s", spec.profile.smoothing_s);
    spec.profile.nominal_rate = p.number("nominal_rate", spec.profile.nominal_rate);
    p.finish();
  }
  checked("synthetic", [&] {
    spec.validate();
    return 0;
  });
  return spec;
}

PreprocessConfig read_preprocess(Section& s) {
  PreprocessConfig c;
  c.bin_s = s.number("bin_s", c.bin_s);
  c.duration_s = s.number("duration_s", c.duration_s);
  c.normalize = s.boolean("normalize", c.normalize);
  if (s.has("burst_rules")) {
    const auto& rules = s.raw("burst_rules");
    if (!rules.is_object()) throw UsageError(s.field("burst_rules"), "expected an object");
    for (const auto& [platform, rule] : rules.items()) {
      const std::string where = s.field("burst_rules") + "." + platform;
      if (rule.is_string()) {
        const auto name = rule.get<std::string>();
        if (name == "youtube") {
          c.platform_rules[platform] = BurstExtensionRule::youtube();
        } else if (name == "rumble") {
          c.platform_rules[platform] = BurstExtensionRule::rumble();
        } else {
          throw UsageError(where, "expected youtube, rumble or an object");
        }
      } else {
        Section r(rule, where);
        c.platform_rules[platform] =
            BurstExtensionRule{r.number("src_span_s", 0.0), r.number("dst_span_s", 0.0), r.number("amplitude_factor", 1.0)};
        r.finish();
      }
    }
  }
  checked("preprocess", [&] {
    c.validate();
    return 0;
  });
  return c;
}

EncoderConfig read_encoder(Section& s) {
  EncoderConfig c;
  checked(s.field("arch"), [&] { return c.arch = parse_arch(s.string("arch", "mlp")); });
  checked(s.field("mining"), [&] { return c.mining = parse_mining(s.string("mining", "offline_exhaustive")); });
  c.embedding_dim = s.count("embedding_dim", c.embedding_dim);
  c.hidden_units = s.count("hidden_units", c.hidden_units);
  c.dropout_rate = s.number("dropout_rate", c.dropout_rate);
  c.margin = s.number("margin", c.margin);
  if (s.has("epochs")) c.epochs = static_cast<int>(s.count("epochs", 0, 0));
  c.batch_size = s.count("batch_size", c.batch_size);
  c.learning_rate = s.number("learning_rate", c.learning_rate);
  if (c.dropout_rate < 0.0 || c.dropout_rate >= 1.0) throw UsageError(s.field("dropout_rate"), "must be in [0, 1)");
  if (!(c.margin > 0.0)) throw UsageError(s.field("margin"), "must be positive");
  if (!(c.learning_rate > 0.0)) throw UsageError(s.field("learning_rate"), "must be positive");
  return c;
}

}  // namespace

RunConfig parse_run_config(Json doc, const std::filesystem::path& base_dir, const Overrides& overrides) {
  if (!doc.is_object()) throw UsageError("<root>", "expected an object");
  if (overrides.seed) doc["seed"] = *overrides.seed;
  if (overrides.output_dir) doc["output_dir"] = overrides.output_dir->string();
  if (overrides.jobs) doc["jobs"] = *overrides.jobs;

  RunConfig rc;
  Section root(doc, "");
  if (!root.has("seed")) throw UsageError("seed", "required (set it in the config or pass --seed)");
  rc.seed = root.u64("seed", 0);
  rc.output_dir = root.string("output_dir", "out");
  if (rc.output_dir.is_relative() && !overrides.output_dir) rc.output_dir = base_dir / rc.output_dir;
  rc.jobs = static_cast<int>(root.integer("jobs", 0));
  if (rc.jobs < 0) throw UsageError("jobs", "must be >= 0");

  const bool has_manifest = root.has("manifest");
  const bool has_synthetic = root.has("synthetic");
  if (has_manifest == has_synthetic) {
    throw UsageError(has_manifest ? "manifest" : "synthetic", "exactly one of 'manifest' or 'synthetic' is required");
  }
  if (has_manifest) {
    std::filesystem::path m = root.string("manifest", "");
    rc.manifest = m.is_relative() ? base_dir / m : m;
  } else {
    Section s(root.raw("synthetic"), "synthetic");
    rc.synthetic = read_synthetic(s, rc.seed);
    s.finish();
  }

  rc.eval.seed = rc.seed;
  rc.eval.n_classify = 10;
  if (root.has("preprocess")) {
    Section s(root.raw("preprocess"), "preprocess");
    rc.eval.preprocess = read_preprocess(s);
    s.finish();
  }
  if (root.has("encoder")) {
    Section s(root.raw("encoder"), "encoder");
    rc.eval.encoder = read_encoder(s);
    s.finish();
  }
  if (root.has("classifier")) {
    Section s(root.raw("classifier"), "classifier");
    checked("classifier.kind", [&] { return rc.eval.classifier = parse_classifier(s.string("kind", "knn1")); });
    rc.eval.softmax.epochs = static_cast<int>(s.count("epochs", 50, 0));
    rc.eval.softmax.batch_size = s.count("batch_size", 32);
    rc.eval.softmax.learning_rate = s.number("learning_rate", 0.1);
    rc.eval.softmax.dropout_rate = s.number("dropout_rate", 0.1);
    checked("classifier", [&] {
      rc.eval.softmax.validate();
      return 0;
    });
    s.finish();
  }
  if (root.has("evaluation")) {
    Section s(root.raw("evaluation"), "evaluation");
    rc.eval.n_classify = s.count("n_classify", 10, 2);
    rc.train_platform = s.string("train_platform", "");
    rc.test_platform = s.string("test_platform", "");
    if (s.has("fold")) rc.fold = static_cast<int>(s.count("fold", 0, 0));
    rc.threshold = s.number("threshold", rc.threshold);
    if (rc.threshold < 0.0 || rc.threshold > 1.0) throw UsageError("evaluation.threshold", "must be in [0, 1]");
    rc.eval.encoder_classes_limit = s.optional_count("encoder_classes_limit");
    rc.eval.trials_limit = s.optional_count("trials_limit");
    rc.eval.classifier_shots = s.optional_count("classifier_shots");
    rc.eval.augment_copies = s.count("augment_copies", 0, 0);
    rc.eval.augment_fraction = s.number("augment_fraction", 0.05);
    if (rc.eval.augment_fraction < 0.0) throw UsageError("evaluation.augment_fraction", "must be >= 0");
    if (s.has("sweep")) {
      Section sw(s.raw("sweep"), "evaluation.sweep");
      rc.sweep_axis = sw.string("axis", "");
      if (!sw.has("values") || !sw.raw("values").is_array() || sw.raw("values").empty()) {
        throw UsageError("evaluation.sweep.values", "expected a non-empty array");
      }
      for (const auto& v : sw.raw("values")) rc.sweep_values.push_back(v.is_string() ? v.get<std::string>() : v.dump());
      sw.finish();
    }
    s.finish();
  }
  if (root.has("embed")) {
    Section s(root.raw("embed"), "embed");
    if (s.has("model")) {
      std::filesystem::path m = s.string("model", "");
      rc.encoder_model = m.is_relative() ? base_dir / m : m;
    }
    s.finish();
  }
  root.finish();

  rc.canonical = doc;
  rc.canonical.erase("output_dir");
  rc.canonical.erase("jobs");
  return rc;
}

RunConfig load_run_config(const std::filesystem::path& path, const Overrides& overrides) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(path.string(), std::string("invalid JSON: ") + e.what());
  }
  return parse_run_config(std::move(doc), path.parent_path(), overrides);
}

std::string config_hash(const RunConfig& config) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash_tag(config.canonical.dump())));
  return buf;
}

}  // namespace vidprint
