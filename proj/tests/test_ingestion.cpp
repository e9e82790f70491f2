#include <doctest.h>

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "helpers.hpp"
#include "vidprint/ingestion.hpp"

using namespace vidprint;

TEST_CASE("packet log, 3-column form") {
  std::istringstream in("0.0,D,1500\n0.2,U,60\n0.4,D,1500\n");
  const auto t = parse_packet_log(in);
  REQUIRE(t.packets.size() == 3);
  CHECK(std::count_if(t.packets.begin(), t.packets.end(),
                      [](const PacketRecord& p) { return p.direction == Direction::Downlink; }) == 2);
}

TEST_CASE("packet log, 4-column form resolves direction from the client") {
  std::istringstream in("1000.5\t10.0.0.1\t10.0.0.2\t1400\n1000.7\t10.0.0.2\t10.0.0.1\t60\n");
  const auto t = parse_packet_log(in, {"10.0.0.2"});
  REQUIRE(t.packets.size() == 2);
  CHECK(t.packets[0].direction == Direction::Downlink);
  CHECK(t.packets[0].time == 0.0);
  CHECK(t.packets[1].direction == Direction::Uplink);
  CHECK(t.packets[1].time == doctest::Approx(0.2));
}

TEST_CASE("packet log errors") {
  std::istringstream neg("0.0,D,1500\n0.1,D,-5\n");
  try {
    parse_packet_log(neg);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  std::istringstream empty("");
  CHECK_THROWS_AS(parse_packet_log(empty), FormatError);
  std::istringstream bad("0.0,X,10\n");
  CHECK_THROWS_AS(parse_packet_log(bad), ParseError);
}

TEST_CASE("VBR segments") {
  std::istringstream a("0,100\n1,300\n2,200\n");
  CHECK(parse_vbr_segments(a, 4.0).values == Vec1D{100, 300, 200});
  std::istringstream b("0,500\n");
  CHECK(parse_vbr_segments(b, 4.0).values == Vec1D{500});
  std::istringstream gap("0,100\n2,200\n");
  CHECK_THROWS_AS(parse_vbr_segments(gap, 4.0), FormatError);
  std::istringstream file("# segment_s=2.5\n0,7\n1,8\n");
  const auto f = parse_vbr_file(file);
  CHECK(f.bin_s == 2.5);
  CHECK(f.key.platform == kVbrPlatform);
}

TEST_CASE("binned csv round-trips bit-exactly") {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 50; ++i) {
    BinnedTrace t{{"P" + std::to_string(i % 3), "v" + std::to_string(i), i}, 10.0,
                  testutil::random_vec(rng, 1 + rng() % 100, -1e6, 1e6)};
    std::stringstream ss;
    write_binned_csv(t, ss, {{"seed", "7"}});
    const auto back = parse_binned_csv(ss);
    CHECK(back.key == t.key);
    CHECK(back.bin_s == t.bin_s);
    CHECK(back.values == t.values);
  }
}

TEST_CASE("binned csv header and body rules") {
  std::string text = "# platform=P\n# video_id=v\n# trial=0\n# bin_s=10\n";
  for (int i = 0; i < 60; ++i) text += "1\n";
  std::istringstream ok(text);
  CHECK(parse_binned_csv(ok).values.size() == 60);
  std::istringstream missing("# platform=P\n# video_id=v\n# trial=0\n1\n");
  CHECK_THROWS_AS(parse_binned_csv(missing), FormatError);
  std::istringstream junk("# platform=P\n# video_id=v\n# trial=0\n# bin_s=10\nabc\n");
  CHECK_THROWS_AS(parse_binned_csv(junk), ParseError);
}

TEST_CASE("binned csv writer errors and byte stability") {
  BinnedTrace empty{{"P", "v", 0}, 10.0, {}};
  std::ostringstream sink;
  CHECK_THROWS_AS(write_binned_csv(empty, sink), ArgumentError);
  BinnedTrace t{{"P", "v", 0}, 10.0, {1, 2}};
  CHECK_THROWS_AS(write_binned_csv(t, std::filesystem::path("/nonexistent/dir/x.csv")), IoError);
  std::ostringstream a, b;
  write_binned_csv(t, a);
  write_binned_csv(t, b);
  CHECK(a.str() == b.str());
  CHECK(a.str().rfind("# platform=P\n# video_id=v\n# trial=0\n# bin_s=10\n", 0) == 0);
}

namespace {

std::filesystem::path write_dataset(const std::filesystem::path& dir, int platforms, int videos, int trials) {
  nlohmann::json m;
  for (int p = 0; p < platforms; ++p) {
    for (int v = 0; v < videos; ++v) {
      for (int t = 0; t < trials; ++t) {
        const std::string plat = "P" + std::to_string(p), vid = "v" + std::to_string(v);
        BinnedTrace tr{{plat, vid, t}, 10.0, {1.0 + t, 2.0, 3.0}};
        const auto rel = plat + "_" + vid + "_" + std::to_string(t) + ".csv";
        write_binned_csv(tr, dir / rel);
        m["platforms"][plat][vid].push_back({{"path", rel}, {"kind", "binned"}});
      }
    }
  }
  std::ofstream(dir / "manifest.json") << m.dump();
  return dir / "manifest.json";
}

}  // namespace

TEST_CASE("manifest loading") {
  const auto dir = testutil::scratch_dir("manifest");
  const auto ds = load_manifest(write_dataset(dir, 2, 3, 2));
  CHECK(ds.size() == 12);
  CHECK(ds.platforms() == std::vector<std::string>{"P0", "P1"});
  CHECK(ds.classes() == std::vector<std::string>{"v0", "v1", "v2"});
  CHECK(ds.traces("P1", "v2").size() == 2);

  auto doc = nlohmann::json::parse(std::ifstream(dir / "manifest.json"));
  auto dup = doc;
  dup["platforms"]["P0"]["v0"].push_back(dup["platforms"]["P0"]["v0"][0]);
  std::ofstream(dir / "dup.json") << dup.dump();
  CHECK_THROWS_AS(load_manifest(dir / "dup.json"), DataError);

  auto empty = doc;
  empty["platforms"]["P2"] = nlohmann::json::object();
  std::ofstream(dir / "empty.json") << empty.dump();
  CHECK_THROWS_AS(load_manifest(dir / "empty.json"), DataError);

  auto absent = doc;
  absent["platforms"]["P1"].erase("v1");
  std::ofstream(dir / "absent.json") << absent.dump();
  CHECK_THROWS_AS(load_manifest(dir / "absent.json"), DataError);

  auto missing = doc;
  missing["platforms"]["P0"]["v0"][0]["path"] = "nope.csv";
  std::ofstream(dir / "missing.json") << missing.dump();
  CHECK_THROWS_AS(load_manifest(dir / "missing.json"), IoError);
}
