#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "vidprint/evaluation.hpp"
#include "vidprint/synthetic.hpp"

namespace vidprint {

/// Invalid configuration; the message starts with the offending field path.
class UsageError : public std::runtime_error {
 public:
  UsageError(const std::string& field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(field) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

struct RunConfig {
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "out";
  int jobs = 0;
  std::optional<std::filesystem::path> manifest;
  std::optional<SyntheticSpec> synthetic;
  EvalConfig eval;
  std::string train_platform;
  std::string test_platform;
  std::optional<int> fold;  // unset: every fold
  double threshold = 0.8;
  std::string sweep_axis;
  std::vector<std::string> sweep_values;
  std::optional<std::filesystem::path> encoder_model;

  /// Canonical document the config was read from, with output_dir and jobs
  /// removed; hashed for provenance.
  nlohmann::ordered_json canonical;
};

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> output_dir;
  std::optional<int> jobs;
};

/// Relative paths inside the document resolve against `base_dir`.
RunConfig parse_run_config(nlohmann::ordered_json doc, const std::filesystem::path& base_dir,
                           const Overrides& overrides = {});
RunConfig load_run_config(const std::filesystem::path& path, const Overrides& overrides = {});

/// 16 hex digits of FNV-1a over the canonical document.
std::string config_hash(const RunConfig& config);

}  // namespace vidprint
