#include <cstdio>
#include <sstream>

#include "vidprint/evaluation.hpp"

namespace vidprint {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

nlohmann::ordered_json matrix_json(const std::vector<std::vector<std::optional<double>>>& m) {
  auto out = nlohmann::ordered_json::array();
  for (const auto& row : m) {
    auto r = nlohmann::ordered_json::array();
    for (const auto& v : row) r.push_back(v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr));
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace

nlohmann::ordered_json to_json(const Metrics& m) {
  nlohmann::ordered_json j;
  j["accuracy"] = m.accuracy;
  j["precision"] = m.precision;
  j["recall"] = m.recall;
  return j;
}

nlohmann::ordered_json to_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["fold"] = r.fold_id;
  j["train_platform"] = r.train_platform;
  j["test_platform"] = r.test_platform;
  j["representation"] = to_string(r.representation);
  j["classifier"] = r.classifier;
  if (r.threshold) j["threshold"] = *r.threshold;
  j["accuracy"] = r.metrics.accuracy;
  j["mean_precision"] = r.mean_precision;
  j["mean_recall"] = r.mean_recall;
  j["classes"] = r.classes;
  j["precision"] = r.metrics.precision;
  j["recall"] = r.metrics.recall;
  j["confusion"] = r.confusion;
  return j;
}

nlohmann::ordered_json to_json(const ThresholdCurve& c) {
  nlohmann::ordered_json j;
  auto pts = nlohmann::ordered_json::array();
  for (const auto& p : c.points) {
    pts.push_back({{"threshold", p.threshold}, {"precision", p.precision}, {"recall", p.recall}, {"accuracy", p.accuracy}});
  }
  j["points"] = std::move(pts);
  if (!c.points.empty()) j["best_precision_threshold"] = c.points[c.best_precision_index].threshold;
  return j;
}

nlohmann::ordered_json to_json(const PairGridReport& r) {
  nlohmann::ordered_json j;
  j["rows"] = r.rows;
  j["columns"] = r.columns;
  j["raw"] = matrix_json(r.raw);
  j["embedding"] = matrix_json(r.embedding);
  j["raw_folds"] = r.raw_folds;
  j["embedding_folds"] = r.embedding_folds;
  j["raw_mean"] = r.raw_mean;
  j["embedding_mean"] = r.embedding_mean;
  auto pairs = nlohmann::ordered_json::array();
  for (const auto& [a, b, raw, emb] : r.pair_means) {
    pairs.push_back({{"a", a}, {"b", b}, {"raw", raw}, {"embedding", emb}});
  }
  j["pair_means"] = std::move(pairs);
  return j;
}

nlohmann::ordered_json to_json(const std::vector<SweepRow>& rows) {
  auto out = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    out.push_back({{"axis", r.axis}, {"value", r.value}, {"mean_accuracy", r.mean_accuracy},
                   {"fold_accuracy", r.fold_accuracy}});
  }
  return out;
}

nlohmann::ordered_json to_json(const BinaryReport& r) {
  nlohmann::ordered_json j;
  j["fold"] = r.fold_id;
  j["train_platform"] = r.train_platform;
  j["test_platform"] = r.test_platform;
  j["representation"] = to_string(r.representation);
  j["labels"] = {"DIFFERENT", "SAME"};
  j["accuracy"] = r.metrics.accuracy;
  j["precision"] = r.metrics.precision;
  j["recall"] = r.metrics.recall;
  j["confusion"] = r.confusion;
  return j;
}

nlohmann::ordered_json to_json(const FoldPlan& plan) {
  nlohmann::ordered_json j;
  j["seed"] = plan.seed;
  j["open_set"] = plan.open_set;
  auto folds = nlohmann::ordered_json::array();
  for (const auto& f : plan.folds) {
    nlohmann::ordered_json fj;
    fj["id"] = f.id;
    fj["encoder_classes"] = f.encoder_classes;
    fj["classify_classes"] = f.classify_classes;
    if (plan.open_set) {
      fj["known"] = f.known;
      fj["unknown"] = f.unknown;
    }
    folds.push_back(std::move(fj));
  }
  j["folds"] = std::move(folds);
  return j;
}

std::string grid_csv(const PairGridReport& r, Representation rep) {
  const auto& m = rep == Representation::Raw ? r.raw : r.embedding;
  std::ostringstream out;
  out << "train\\test";
  for (const auto& c : r.columns) out << ',' << c;
  out << '\n';
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    out << r.rows[i];
    for (const auto& v : m[i]) {
      out << ',';
      if (v) out << fmt(*v);
    }
    out << '\n';
  }
  return out.str();
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << "axis,value,mean_accuracy\n";
  for (const auto& r : rows) out << r.axis << ',' << r.value << ',' << fmt(r.mean_accuracy) << '\n';
  return out.str();
}

std::string threshold_csv(const ThresholdCurve& c) {
  std::ostringstream out;
  out << "threshold,precision,recall,accuracy\n";
  for (const auto& p : c.points) {
    out << fmt(p.threshold) << ',' << fmt(p.precision) << ',' << fmt(p.recall) << ',' << fmt(p.accuracy) << '\n';
  }
  return out.str();
}

}  // namespace vidprint
