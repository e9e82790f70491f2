#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "gradcheck.hpp"
#include "helpers.hpp"
#include "knn_oracle.hpp"
#include "vidprint/evaluation.hpp"
#include "vidprint/synthetic.hpp"

using namespace vidprint;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

char buf[512];

template <class... Args>
std::string format(const char* f, Args... args) {
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Outcome gradients() {
  const auto t0 = std::chrono::steady_clock::now();
  const double mlp = testutil::triplet_gradient_error(Arch::Mlp, 12, 8);
  const double cnn = testutil::triplet_gradient_error(Arch::Cnn1d, 12, 8);
  const double dt = seconds_since(t0);
  return {mlp < 1e-4 && cnn < 1e-4 && dt < 30.0,
          format("max rel err mlp=%.2e cnn1d=%.2e, %.1fs", mlp, cnn, dt)};
}

Outcome triplet_examples() {
  const Vec1D o{0, 0};
  const double a = triplet_loss(o, Vec1D{3, 4}, Vec1D{6, 8}, 1.0);
  const double b = triplet_loss(o, Vec1D{0, 1}, Vec1D{0, 1.5}, 1.0);
  const double c = triplet_loss(o, o, Vec1D{0, 0.25}, 1.0);
  return {a == 0.0 && b == 0.5 && c == 0.75, format("losses %.17g, %.17g, %.17g", a, b, c)};
}

Outcome mining() {
  std::mt19937_64 gen(2024);
  int datasets = 0, bad = 0;
  for (int classes = 3; classes <= 6; ++classes) {
    for (int trials = 1; trials <= 4; ++trials) {
      for (int rep = 0; rep < 3; ++rep, ++datasets) {
        FeatureTable t;
        std::vector<std::string> names;
        for (int c = 0; c < classes; ++c) {
          names.push_back("v" + std::to_string(c));
          for (const char* p : {"A", "B"}) {
            for (int i = 0; i < trials; ++i) t[p][names.back()].push_back(testutil::random_vec(gen, 5, 0, 1));
          }
        }
        Rng rng(gen());
        const auto trip = mine_offline_triplets(t, "A", "B", names, rng);
        std::map<std::pair<TraceKey, std::string>, int> seen;
        bool ok = trip.size() == static_cast<std::size_t>(classes * trials * (classes - 1));
        for (const auto& x : trip) {
          ok = ok && x.anchor.video_id == x.positive.video_id && x.anchor.video_id != x.negative.video_id &&
               x.positive.platform == x.negative.platform && x.positive.platform != x.anchor.platform;
          ++seen[{x.anchor, x.negative.video_id}];
        }
        ok = ok && seen.size() == trip.size();
        bad += !ok;
      }
    }
  }
  return {bad == 0, format("%d randomized datasets, %d violations", datasets, bad)};
}

Outcome knn() {
  std::mt19937_64 rng(7);
  std::vector<Vec1D> x;
  std::vector<int> y;
  for (int i = 0; i < 200; ++i) {
    x.push_back(testutil::random_vec(rng, 16));
    y.push_back(static_cast<int>(rng() % 10));
  }
  std::vector<Vec1D> queries;
  for (int i = 0; i < 100; ++i) queries.push_back(testutil::random_vec(rng, 16));
  int disagreements = 0;
  for (std::size_t k : {1u, 10u}) {
    const auto model = KnnModel::fit(x, y, k);
    const auto predicted = model.predict_all(queries);
    for (std::size_t q = 0; q < queries.size(); ++q) {
      disagreements += predicted[q] != testutil::brute_force_knn(x, y, queries[q], k);
    }
  }
  return {disagreements == 0, format("%d disagreements over 2 x 100 queries", disagreements)};
}

Outcome preprocessing() {
  int failures = 0;
  RawTrace t{{"P", "v", 0}, {}};
  for (double time : {1.0, 9.9, 10.0, 25.0}) t.packets.push_back({time, 1500, Direction::Downlink});
  failures += bin_downlink_packets(t, 10, 30) != Vec1D{2, 1, 1};
  failures += extend_initial_burst(Vec1D{4, 4, 2, 2}, {20, 40, 0.5}, 10) != Vec1D{2, 2, 2, 2};
  failures += extend_initial_burst(Vec1D{3, 1, 4}, {10, 10, 1.0}, 10) != Vec1D{3, 1, 4};
  const auto yt = BurstExtensionRule::youtube();
  failures += !(yt.src_span_s == 100 && yt.dst_span_s == 200 && yt.amplitude_factor == 0.5);
  // YT rule at 10 s bins: 10 bins of 8 stretched to 20 bins of 4, then the tail.
  Vec1D v(60, 2.0);
  std::fill(v.begin(), v.begin() + 10, 8.0);
  Vec1D expected(60, 2.0);
  std::fill(expected.begin(), expected.begin() + 20, 4.0);
  failures += extend_initial_burst(v, yt, 10) != expected;
  failures += minmax_normalize(Vec1D{2, 4, 6}) != Vec1D{0, 0.5, 1};
  failures += truncate_or_pad(Vec1D{1, 2}, 4) != Vec1D{1, 2, 0, 0};
  failures += truncate_or_pad(Vec1D{1, 2, 3}, 2) != Vec1D{1, 2};

  std::mt19937_64 rng(11);
  int length_failures = 0;
  for (int i = 0; i < 200; ++i) {
    PreprocessConfig cfg;
    cfg.bin_s = std::vector<double>{1, 5, 10, 20, 30, 60}[rng() % 6];
    cfg.duration_s = cfg.bin_s * static_cast<double>(1 + rng() % 60);
    if (rng() % 2 && cfg.duration_s >= 200 && std::fmod(100.0, cfg.bin_s) == 0) cfg.platform_rules["P"] = yt;
    RawTrace r{{"P", "v", 0}, {}};
    double time = 0;
    const auto n = rng() % 500;
    for (std::size_t j = 0; j < n; ++j) {
      time += std::uniform_real_distribution<double>(0, 4)(rng);
      r.packets.push_back({time, 100, rng() % 5 ? Direction::Downlink : Direction::Uplink});
    }
    if (r.packets.empty()) r.packets.push_back({0.0, 100, Direction::Uplink});
    length_failures += preprocess_pipeline(r, cfg).values.size() != cfg.n_bins();
  }
  return {failures == 0 && length_failures == 0,
          format("%d stage mismatches, %d length mismatches over 200 random pipelines", failures, length_failures)};
}

SyntheticSpec lift_spec(int classes, bool hard) {
  SyntheticSpec s;
  s.n_classes = classes;
  s.trials_per_class = 5;
  s.seed = 42;
  s.platforms = {{"PA", PlatformModel::easy(1.0, 1)},
                 {"PB", hard ? PlatformModel::hard(2) : PlatformModel::easy(1.7, 2)}};
  return s;
}

EvalConfig lift_config(std::size_t n_classify) {
  EvalConfig c;
  c.seed = 42;
  c.n_classify = n_classify;
  c.classifier = ClassifierKind::Knn1;
  return c;
}

struct CrossResult {
  double raw = 0.0, embedding = 0.0;
};

// Mean 1-NN accuracy over every fold and both directions.
CrossResult cross_platform(bool hard) {
  const auto ds = gen_synthetic_dataset(lift_spec(30, hard));
  Experiment ex(ds, lift_config(10));
  const auto plan = ex.folds(false);
  CrossResult r;
  double n = 0;
  for (const auto& fold : plan.folds) {
    for (auto [a, b] : {std::pair{"PA", "PB"}, std::pair{"PB", "PA"}}) {
      r.raw += ex.run_closed_set(a, b, fold, Representation::Raw).metrics.accuracy;
      r.embedding += ex.run_closed_set(a, b, fold, Representation::Embedding).metrics.accuracy;
      n += 1;
    }
  }
  r.raw /= n;
  r.embedding /= n;
  return r;
}

CrossResult easy_result;

Outcome lift() {
  const auto t0 = std::chrono::steady_clock::now();
  easy_result = cross_platform(false);
  const double dt = seconds_since(t0);
  const auto& r = easy_result;
  return {r.embedding >= 2.0 * r.raw && r.embedding >= 0.6 && dt < 300.0,
          format("embedding %.3f vs raw %.3f (%.2fx), %.1fs", r.embedding, r.raw, r.embedding / r.raw, dt)};
}

Outcome hard_platform() {
  const auto r = cross_platform(true);
  return {r.embedding < easy_result.embedding,
          format("P-hard embedding %.3f (raw %.3f) vs P-easy %.3f", r.embedding, r.raw, easy_result.embedding)};
}

Outcome open_set() {
  const auto ds = gen_synthetic_dataset(lift_spec(40, false));
  auto cfg = lift_config(20);
  cfg.classifier = ClassifierKind::Cnn;
  Experiment ex(ds, cfg);
  const auto plan = ex.folds(true);
  bool monotone = true;
  std::vector<double> mean_precision(threshold_grid().size(), 0.0);
  for (const auto& fold : plan.folds) {
    const auto run = ex.prepare_open_set("PA", "PB", fold, Representation::Embedding);
    const auto curve = threshold_sweep(run);
    for (std::size_t i = 1; i < curve.points.size(); ++i) monotone = monotone && curve.points[i].recall <= curve.points[i - 1].recall;
    for (std::size_t i = 0; i < curve.points.size(); ++i) mean_precision[i] += curve.points[i].precision / static_cast<double>(plan.folds.size());
  }
  const auto best = static_cast<std::size_t>(std::max_element(mean_precision.begin(), mean_precision.end()) - mean_precision.begin());
  return {monotone && mean_precision[best] > mean_precision[0],
          format("recall non-increasing: %s; precision %.3f at threshold %.2f vs %.3f at 0", monotone ? "yes" : "no",
                 mean_precision[best], threshold_grid()[best], mean_precision[0])};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism(const std::string& cli) {
  const auto dir = testutil::scratch_dir("acceptance_determinism");
  const auto cfg = dir / "config.json";
  std::ofstream(cfg) << R"({
    "seed": 42,
    "synthetic": {"n_classes": 12, "trials_per_class": 3,
                  "platforms": [{"name": "PA", "preset": "easy", "gain": 1.0, "pattern_seed": 1},
                                {"name": "PB", "preset": "easy", "gain": 1.7, "pattern_seed": 2}]},
    "encoder": {"epochs": 2},
    "classifier": {"kind": "knn1", "epochs": 5},
    "evaluation": {"n_classify": 6, "sweep": {"axis": "training_classes", "values": [3, 6]}}
  })";
  int mismatches = 0, failures = 0, compared = 0;
  for (const char* mode : {"closed", "open", "grid", "sweep", "binary"}) {
    std::vector<std::string> outputs;
    for (int jobs : {1, 4, 4}) {
      const auto out = dir / ("out_" + std::to_string(outputs.size()));
      const std::string cmd = cli + " eval --mode " + mode + " --config " + cfg.string() + " --out " + out.string() +
                              " --jobs " + std::to_string(jobs) + " > /dev/null 2>&1";
      failures += std::system(cmd.c_str()) != 0;
      outputs.push_back(slurp(out / "reports" / (std::string(mode) + ".json")));
    }
    for (const auto& o : outputs) {
      mismatches += o != outputs.front() || o.empty();
      ++compared;
    }
  }
  return {mismatches == 0 && failures == 0,
          format("%d reports over 5 modes at --jobs 1/4/4: %d differ, %d runs failed", compared, mismatches, failures)};
}

Outcome folds() {
  std::vector<std::string> classes;
  for (int i = 0; i < 100; ++i) classes.push_back("c" + std::to_string(i));
  const auto plan = make_folds(classes, 20, 42, false);
  std::set<std::string> covered;
  bool disjoint = plan.folds.size() == 5;
  for (const auto& f : plan.folds) {
    for (const auto& c : f.classify_classes) disjoint = disjoint && covered.insert(c).second;
  }
  bool assertion = false;
  auto corrupt = plan;
  corrupt.folds[0].encoder_classes.push_back(corrupt.folds[0].classify_classes.front());
  try {
    corrupt.validate();
  } catch (const DataError&) {
    assertion = true;
  }
  return {disjoint && covered.size() == 100 && assertion,
          format("%zu folds, %zu classes covered, disjoint: %s, overlap assertion: %s", plan.folds.size(), covered.size(),
                 disjoint ? "yes" : "no", assertion ? "raised" : "missing")};
}

Outcome augmentation() {
  auto rng = make_rng(42, {hash_tag("acceptance-augment")});
  const Vec1D v{100.0};
  double sum = 0, sq = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const double x = augment_gaussian(v, 0.05, rng)[0];
    sum += x;
    sq += x * x;
  }
  const double mean = sum / n, sd = std::sqrt(sq / n - mean * mean);
  const Vec1D w{0.0, 3.5, 1e6};
  const bool identity = augment_gaussian(w, 0.0, rng) == w;
  return {std::abs(mean - 100.0) <= 1.0 && std::abs(sd - 5.0) <= 0.5 && identity,
          format("mean %.3f (100 +- 1), std %.3f (5 +- 0.5), fraction 0 identity: %s", mean, sd, identity ? "yes" : "no")};
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "vidprint";
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"gradient correctness", gradients},
      {"triplet-loss oracle", triplet_examples},
      {"offline mining completeness", mining},
      {"knn oracle equivalence", knn},
      {"pre-processor exactness", preprocessing},
      {"synthetic end-to-end lift", lift},
      {"hard-platform degradation", hard_platform},
      {"open-set behavior", open_set},
      {"determinism across --jobs", [&] { return determinism(cli); }},
      {"fold validity", folds},
      {"augmentation statistics", augmentation},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s criterion %zu (%s): %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - static_cast<std::size_t>(failed), criteria.size());
  return failed == 0 ? 0 : 1;
}
