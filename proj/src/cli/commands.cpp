#include "vidprint/commands.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "vidprint/kernels.hpp"

namespace vidprint {

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

struct Provenance {
  std::string config_hash;
  std::uint64_t seed = 0;
};

Provenance provenance_of(const RunConfig& rc) { return {config_hash(rc), rc.seed}; }

Json provenance_json(const Provenance& p) {
  Json j;
  j["config_hash"] = p.config_hash;
  j["seed"] = p.seed;
  j["tool_version"] = tool_version();
  return j;
}

HeaderExtras provenance_extras(const Provenance& p) {
  return {{"config_hash", p.config_hash}, {"seed", std::to_string(p.seed)}, {"tool_version", tool_version()}};
}

std::string provenance_comment(const Provenance& p) {
  std::string out;
  for (const auto& [k, v] : provenance_extras(p)) out += "# " + k + "=" + v + "\n";
  return out;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read back " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text, Written& written) {
  fs::create_directories(path.parent_path());
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("write failed for " + path.string());
  }
  if (read_file(path) != text) throw IoError("validation failed for " + path.string());
  written.push_back(path);
}

void write_json(const fs::path& path, const Json& doc, Written& written) {
  write_file(path, doc.dump(2) + "\n", written);
  try {
    const auto reparsed = Json::parse(read_file(path));
    if (reparsed != doc) throw IoError("validation failed for " + path.string());
  } catch (const nlohmann::json::exception& e) {
    throw IoError("validation failed for " + path.string() + ": " + e.what());
  }
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Dataset load_dataset(const RunConfig& rc) {
  if (rc.manifest) return load_manifest(*rc.manifest);
  return gen_synthetic_dataset(*rc.synthetic);
}

std::pair<std::string, std::string> platform_pair(const RunConfig& rc, const Dataset& ds) {
  std::vector<std::string> real;
  for (const auto& p : ds.platforms()) {
    if (p != kVbrPlatform) real.push_back(p);
  }
  std::string train = rc.train_platform, test = rc.test_platform;
  if (train.empty()) {
    if (real.empty()) throw DataError("dataset has no platforms");
    train = real.front();
  }
  if (test.empty()) {
    if (real.size() < 2) throw DataError("dataset needs two platforms; set evaluation.test_platform");
    test = real[0] == train ? real[1] : real[0];
  }
  if (!ds.has_platform(train)) throw DataError("unknown train platform '" + train + "'");
  if (!ds.has_platform(test)) throw DataError("unknown test platform '" + test + "'");
  if (test == kVbrPlatform) throw DataError("VBR can only be a training input");
  return {train, test};
}

std::vector<Fold> selected_folds(const RunConfig& rc, const FoldPlan& plan) {
  if (!rc.fold) return plan.folds;
  if (*rc.fold < 0 || static_cast<std::size_t>(*rc.fold) >= plan.folds.size()) {
    throw UsageError("evaluation.fold", "must be < " + std::to_string(plan.folds.size()));
  }
  return {plan.folds[static_cast<std::size_t>(*rc.fold)]};
}

std::string trace_file(const TraceKey& key) { return key.video_id + "_t" + std::to_string(key.trial) + ".csv"; }

void prepare(const RunConfig& rc) { kernels::set_threads(rc.jobs); }

Json report_header(const RunConfig& rc, const std::string& mode) {
  Json j;
  j["provenance"] = provenance_json(provenance_of(rc));
  j["mode"] = mode;
  j["config"] = rc.canonical;
  return j;
}

}  // namespace

std::string tool_version() { return VIDPRINT_VERSION; }

Written cmd_synth(const RunConfig& rc) {
  if (!rc.synthetic) throw UsageError("synthetic", "the synth command needs a synthetic spec");
  prepare(rc);
  const auto prov = provenance_of(rc);
  const Dataset ds = gen_synthetic_dataset(*rc.synthetic);
  const fs::path dir = rc.output_dir / "data";
  Written written;
  Json manifest;
  manifest["provenance"] = provenance_json(prov);
  manifest["platforms"] = Json::object();
  for (const auto& [key, trace] : ds.all()) {
    const auto& binned = std::get<BinnedTrace>(trace);
    const fs::path rel = fs::path(key.platform) / trace_file(key);
    fs::create_directories((dir / rel).parent_path());
    write_binned_csv(binned, dir / rel, provenance_extras(prov));
    written.push_back(dir / rel);
    manifest["platforms"][key.platform][key.video_id].push_back({{"path", rel.generic_string()}, {"kind", "binned"}});
  }
  write_json(dir / "manifest.json", manifest, written);
  const Dataset check = load_manifest(dir / "manifest.json");
  if (check.size() != ds.size()) throw IoError("validation failed: manifest reloads to a different dataset");
  return written;
}

Written cmd_preprocess(const RunConfig& rc) {
  prepare(rc);
  const auto prov = provenance_of(rc);
  const Dataset ds = load_dataset(rc);
  const fs::path dir = rc.output_dir / "features";
  Written written;
  for (const auto& [key, trace] : ds.all()) {
    BinnedTrace out{key, rc.eval.preprocess.bin_s, preprocess_pipeline(trace, rc.eval.preprocess).values};
    const fs::path path = dir / key.platform / trace_file(key);
    fs::create_directories(path.parent_path());
    write_binned_csv(out, path, provenance_extras(prov));
    std::ifstream in(path);
    const auto back = parse_binned_csv(in);
    if (back.key != key || back.values.size() != out.values.size()) {
      throw IoError("validation failed for " + path.string());
    }
    written.push_back(path);
  }
  return written;
}

Written cmd_train(const RunConfig& rc) {
  prepare(rc);
  const Dataset ds = load_dataset(rc);
  const auto [train, test] = platform_pair(rc, ds);
  std::vector<std::string> classes = ds.classes();
  if (rc.fold) {
    const auto plan = make_folds(ds.classes(), rc.eval.n_classify, rc.seed, false);
    classes = selected_folds(rc, plan).front().encoder_classes;
  }
  const FeatureTable table = preprocess_dataset(ds, rc.eval.preprocess);
  EncoderConfig enc = rc.eval.encoder;
  enc.seed = rc.seed;
  const auto result = train_encoder(table, classes, {train, test}, enc);

  Written written;
  Json doc;
  doc["provenance"] = provenance_json(provenance_of(rc));
  doc["platforms"] = {train, test};
  doc["classes"] = classes;
  doc["model"] = result.model.to_json();
  write_json(rc.output_dir / "encoder.json", doc, written);
  if (!nn::same_shapes(EncoderModel::from_json(Json::parse(read_file(written.back())).at("model")).net.params(),
                       result.model.net.params())) {
    throw IoError("validation failed for " + written.back().string());
  }
  std::string csv = provenance_comment(provenance_of(rc)) + "epoch,loss\n";
  for (std::size_t e = 0; e < result.loss_history.size(); ++e) {
    csv += std::to_string(e + 1) + "," + fmt(result.loss_history[e]) + "\n";
  }
  write_file(rc.output_dir / "loss_history.csv", csv, written);
  return written;
}

Written cmd_embed(const RunConfig& rc) {
  prepare(rc);
  const fs::path model_path = rc.encoder_model.value_or(rc.output_dir / "encoder.json");
  Json doc;
  try {
    doc = Json::parse(read_file(model_path));
  } catch (const IoError&) {
    throw DataError("encoder model not found at " + model_path.string() + " (run train first)");
  } catch (const nlohmann::json::exception& e) {
    throw DataError("encoder model " + model_path.string() + ": " + e.what());
  }
  const auto model = EncoderModel::from_json(doc.contains("model") ? doc.at("model") : doc);
  if (model.input_len() != rc.eval.preprocess.n_bins()) {
    throw DataError("encoder expects " + std::to_string(model.input_len()) + " bins but preprocess yields " +
                    std::to_string(rc.eval.preprocess.n_bins()));
  }
  const Dataset ds = load_dataset(rc);
  std::vector<TraceKey> keys;
  std::vector<Vec1D> xs;
  for (const auto& [key, trace] : ds.all()) {
    keys.push_back(key);
    xs.push_back(preprocess_pipeline(trace, rc.eval.preprocess).values);
  }
  const auto emb = embed_all(model, xs);
  std::string csv = provenance_comment(provenance_of(rc)) + "platform,video_id,trial";
  for (std::size_t j = 0; j < model.embedding_dim(); ++j) csv += ",e" + std::to_string(j);
  csv += "\n";
  for (std::size_t i = 0; i < keys.size(); ++i) {
    csv += keys[i].platform + "," + keys[i].video_id + "," + std::to_string(keys[i].trial);
    for (double v : emb[i]) csv += "," + fmt(v);
    csv += "\n";
  }
  Written written;
  write_file(rc.output_dir / "embeddings.csv", csv, written);
  return written;
}

Written cmd_eval(const RunConfig& rc, const std::string& mode) {
  prepare(rc);
  const Dataset ds = load_dataset(rc);
  const fs::path dir = rc.output_dir / "reports";
  const std::string comment = provenance_comment(provenance_of(rc));
  Written written;
  Json doc = report_header(rc, mode);

  if (mode == "closed") {
    const auto [train, test] = platform_pair(rc, ds);
    Experiment ex(ds, rc.eval);
    const auto plan = ex.folds(false);
    doc["fold_plan"] = to_json(plan);
    Json folds = Json::array();
    double raw_sum = 0.0, emb_sum = 0.0;
    std::string csv = comment + "fold,raw_accuracy,embedding_accuracy\n";
    const auto chosen = selected_folds(rc, plan);
    for (const auto& fold : chosen) {
      const auto raw = ex.run_closed_set(train, test, fold, Representation::Raw);
      const auto emb = ex.run_closed_set(train, test, fold, Representation::Embedding);
      folds.push_back({{"fold", fold.id}, {"raw", to_json(raw)}, {"embedding", to_json(emb)}});
      raw_sum += raw.metrics.accuracy;
      emb_sum += emb.metrics.accuracy;
      csv += std::to_string(fold.id) + "," + fmt(raw.metrics.accuracy) + "," + fmt(emb.metrics.accuracy) + "\n";
    }
    const double n = static_cast<double>(chosen.size());
    doc["folds"] = std::move(folds);
    doc["mean_accuracy"] = {{"raw", raw_sum / n}, {"embedding", emb_sum / n}};
    csv += "mean," + fmt(raw_sum / n) + "," + fmt(emb_sum / n) + "\n";
    write_json(dir / "closed.json", doc, written);
    write_file(dir / "closed.csv", csv, written);
  } else if (mode == "open") {
    const auto [train, test] = platform_pair(rc, ds);
    Experiment ex(ds, rc.eval);
    const auto plan = ex.folds(true);
    doc["fold_plan"] = to_json(plan);
    Json folds = Json::array();
    ThresholdCurve mean;
    const auto chosen = selected_folds(rc, plan);
    for (const auto& fold : chosen) {
      const auto run = ex.prepare_open_set(train, test, fold, Representation::Embedding);
      const auto curve = threshold_sweep(run);
      folds.push_back({{"fold", fold.id}, {"report", to_json(evaluate_open_set(run, rc.threshold))},
                       {"curve", to_json(curve)}});
      if (mean.points.empty()) mean.points.assign(curve.points.size(), SweepPoint{});
      for (std::size_t i = 0; i < curve.points.size(); ++i) {
        mean.points[i].threshold = curve.points[i].threshold;
        mean.points[i].precision += curve.points[i].precision / static_cast<double>(chosen.size());
        mean.points[i].recall += curve.points[i].recall / static_cast<double>(chosen.size());
        mean.points[i].accuracy += curve.points[i].accuracy / static_cast<double>(chosen.size());
      }
    }
    for (std::size_t i = 0; i < mean.points.size(); ++i) {
      if (mean.points[i].precision > mean.points[mean.best_precision_index].precision) mean.best_precision_index = i;
    }
    doc["threshold"] = rc.threshold;
    doc["folds"] = std::move(folds);
    doc["mean_curve"] = to_json(mean);
    write_json(dir / "open.json", doc, written);
    write_file(dir / "open_thresholds.csv", comment + threshold_csv(mean), written);
  } else if (mode == "grid") {
    Experiment ex(ds, rc.eval);
    const FoldPlan plan = ex.folds(false);
    doc["fold_plan"] = to_json(plan);
    if (rc.fold) (void)selected_folds(rc, plan);
    const auto grid = ex.run_pair_grid(plan, rc.fold);
    doc["grid"] = to_json(grid);
    write_json(dir / "grid.json", doc, written);
    write_file(dir / "grid_raw.csv", comment + grid_csv(grid, Representation::Raw), written);
    write_file(dir / "grid_embedding.csv", comment + grid_csv(grid, Representation::Embedding), written);
  } else if (mode == "sweep") {
    if (rc.sweep_axis.empty()) throw UsageError("evaluation.sweep.axis", "required for --mode sweep");
    const auto [train, test] = platform_pair(rc, ds);
    const auto rows = sweep(ds, rc.eval, rc.sweep_axis, rc.sweep_values, train, test);
    doc["rows"] = to_json(rows);
    write_json(dir / "sweep.json", doc, written);
    write_file(dir / "sweep.csv", comment + sweep_csv(rows), written);
  } else if (mode == "binary") {
    const auto [train, test] = platform_pair(rc, ds);
    Experiment ex(ds, rc.eval);
    const auto plan = ex.folds(false);
    doc["fold_plan"] = to_json(plan);
    Json folds = Json::array();
    for (const auto& fold : selected_folds(rc, plan)) {
      folds.push_back({{"fold", fold.id},
                       {"raw", to_json(ex.run_binary(train, test, fold, Representation::Raw))},
                       {"embedding", to_json(ex.run_binary(train, test, fold, Representation::Embedding))}});
    }
    doc["folds"] = std::move(folds);
    write_json(dir / "binary.json", doc, written);
  } else {
    throw UsageError("--mode", "expected closed, open, grid, sweep or binary");
  }
  return written;
}

}  // namespace vidprint
