#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "helpers.hpp"
#include "vidprint/commands.hpp"
#include "vidprint/run_config.hpp"

using namespace vidprint;
using Json = nlohmann::ordered_json;

namespace {

Json small_doc() {
  return Json::parse(R"({
    "seed": 9,
    "synthetic": {"n_classes": 8, "trials_per_class": 2,
                  "platforms": [{"name": "PA", "preset": "easy", "gain": 1.0, "pattern_seed": 1},
                                {"name": "PB", "preset": "easy", "gain": 1.7, "pattern_seed": 2}]},
    "encoder": {"epochs": 1, "embedding_dim": 16, "hidden_units": 16},
    "evaluation": {"n_classify": 4}
  })");
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(VIDPRINT_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::filesystem::path write_config(const std::filesystem::path& dir, const Json& doc) {
  const auto path = dir / "config.json";
  std::ofstream(path) << doc.dump(2);
  return path;
}

}  // namespace

TEST_CASE("config parsing") {
  const auto rc = parse_run_config(small_doc(), "/base");
  CHECK(rc.seed == 9);
  CHECK(rc.synthetic->n_classes == 8);
  CHECK(rc.eval.n_classify == 4);
  CHECK(rc.eval.encoder.epochs == 1);
  CHECK(rc.output_dir == std::filesystem::path("/base/out"));

  auto both = small_doc();
  both["manifest"] = "m.json";
  CHECK_THROWS_AS(parse_run_config(both, "."), UsageError);

  auto no_seed = small_doc();
  no_seed.erase("seed");
  CHECK_THROWS_AS(parse_run_config(no_seed, "."), UsageError);
  CHECK(parse_run_config(no_seed, ".", Overrides{.seed = 3}).seed == 3);

  auto typo = small_doc();
  typo["encoder"]["epoch"] = 2;
  try {
    parse_run_config(typo, ".");
    FAIL("expected a usage error");
  } catch (const UsageError& e) {
    CHECK(e.field() == "encoder.epoch");
  }
  auto bad_arch = small_doc();
  bad_arch["encoder"]["arch"] = "transformer";
  CHECK_THROWS_AS(parse_run_config(bad_arch, "."), UsageError);
  auto bad_kind = small_doc();
  bad_kind["synthetic"]["platforms"][0]["preset"] = "medium";
  try {
    parse_run_config(bad_kind, ".");
    FAIL("expected a usage error");
  } catch (const UsageError& e) {
    CHECK(e.field() == "synthetic.platforms[0].preset");
  }
}

TEST_CASE("config hash ignores output location and job count") {
  const auto a = parse_run_config(small_doc(), ".");
  const auto b = parse_run_config(small_doc(), ".", Overrides{.output_dir = "/elsewhere", .jobs = 4});
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a).size() == 16);
  const auto c = parse_run_config(small_doc(), ".", Overrides{.seed = 10});
  CHECK(config_hash(a) != config_hash(c));
}

TEST_CASE("cli end to end") {
  const auto dir = testutil::scratch_dir("cli");
  const auto cfg = write_config(dir, small_doc());
  const auto out = dir / "out";
  const std::string base = "--config " + cfg.string() + " --out " + out.string();

  REQUIRE(run_cli("synth " + base) == 0);
  CHECK(std::filesystem::exists(out / "data" / "manifest.json"));
  const auto rc = load_run_config(cfg, Overrides{.output_dir = out});
  const std::string hash = config_hash(rc);
  const auto sample = slurp(out / "data" / "PA" / "v000_t0.csv");
  CHECK(sample.find("# config_hash=" + hash) != std::string::npos);
  CHECK(sample.find("# tool_version=" + tool_version()) != std::string::npos);

  REQUIRE(run_cli("preprocess " + base) == 0);
  CHECK(slurp(out / "features" / "PB" / "v007_t1.csv").find("# seed=9") != std::string::npos);

  REQUIRE(run_cli("train " + base) == 0);
  const auto enc = Json::parse(slurp(out / "encoder.json"));
  CHECK(enc["provenance"]["config_hash"] == hash);
  CHECK(slurp(out / "loss_history.csv").find("epoch,loss\n1,") != std::string::npos);

  REQUIRE(run_cli("embed " + base) == 0);
  const auto emb = slurp(out / "embeddings.csv");
  CHECK(emb.find("platform,video_id,trial,e0,") != std::string::npos);
  CHECK(std::count(emb.begin(), emb.end(), '\n') == 3 + 1 + 8 * (2 * 2 + 1));

  REQUIRE(run_cli("eval --mode grid " + base) == 0);
  const auto grid = slurp(out / "reports" / "grid_embedding.csv");
  CHECK(grid.find("train\\test,PA,PB\nPA,,") != std::string::npos);
  CHECK(grid.find("\nVBR,") != std::string::npos);
  const auto first = slurp(out / "reports" / "grid.json");
  CHECK(Json::parse(first)["provenance"]["config_hash"] == hash);

  REQUIRE(run_cli("eval --mode grid --jobs 3 " + base) == 0);
  CHECK(slurp(out / "reports" / "grid.json") == first);

  for (const char* mode : {"closed", "open", "sweep", "binary"}) {
    auto doc = small_doc();
    doc["evaluation"]["sweep"] = {{"axis", "training_classes"}, {"values", {2, 4}}};
    doc["classifier"] = {{"epochs", 2}};
    const auto c2 = write_config(dir, doc);
    CHECK(run_cli(std::string("eval --mode ") + mode + " --config " + c2.string() + " --out " + out.string()) == 0);
    CHECK(std::filesystem::exists(out / "reports" / (std::string(mode) + ".json")));
  }
}

TEST_CASE("cli exit codes") {
  const auto dir = testutil::scratch_dir("cli_codes");
  CHECK(run_cli("") == 2);
  CHECK(run_cli("eval --mode nonsense --config " + write_config(dir, small_doc()).string()) == 2);

  auto both = small_doc();
  both["manifest"] = "m.json";
  CHECK(run_cli("synth --config " + write_config(dir, both).string()) == 2);

  Json manifest{{"seed", 1}, {"manifest", "missing.json"}};
  CHECK(run_cli("eval --config " + write_config(dir, manifest).string() + " --out " + (dir / "o").string()) == 3);

  CHECK(run_cli("embed --config " + write_config(dir, small_doc()).string() + " --out " + (dir / "none").string()) == 3);
}
