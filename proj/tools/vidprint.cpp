#include <iostream>

#include <CLI11.hpp>

#include "vidprint/commands.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kUsage = 2;
constexpr int kData = 3;

}  // namespace

int main(int argc, char** argv) {
  using namespace vidprint;

  CLI::App app{"Cross-platform video identification from encrypted traffic"};
  app.set_version_flag("--version", tool_version());
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> jobs;
  std::string mode = "closed";

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "Override the configured seed");
    sub->add_option("--out", out, "Output directory");
    sub->add_option("--jobs", jobs, "OpenMP threads (0 keeps the runtime default)")->check(CLI::NonNegativeNumber);
  };
  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset");
  auto* preprocess = app.add_subcommand("preprocess", "Write preprocessed feature vectors");
  auto* train = app.add_subcommand("train", "Train a triplet encoder");
  auto* embed = app.add_subcommand("embed", "Embed every trace with a trained encoder");
  auto* eval = app.add_subcommand("eval", "Run an evaluation and write reports");
  for (auto* sub : {synth, preprocess, train, embed, eval}) add_common(sub);
  eval->add_option("--mode", mode, "Evaluation mode")
      ->check(CLI::IsMember({"closed", "open", "grid", "sweep", "binary"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    Overrides ov;
    ov.seed = seed;
    if (out) ov.output_dir = *out;
    ov.jobs = jobs;
    const RunConfig rc = load_run_config(config_path, ov);
    Written written;
    if (synth->parsed()) written = cmd_synth(rc);
    else if (preprocess->parsed()) written = cmd_preprocess(rc);
    else if (train->parsed()) written = cmd_train(rc);
    else if (embed->parsed()) written = cmd_embed(rc);
    else written = cmd_eval(rc, mode);
    std::cerr << "wrote " << written.size() << " file(s) under " << rc.output_dir.string() << "\n";
    for (const auto& p : written) {
      if (p.extension() == ".json" || written.size() <= 8) std::cout << p.string() << "\n";
    }
    return kOk;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const ArgumentError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kData;
  } catch (const ParseError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kData;
  } catch (const FormatError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kData;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
}
