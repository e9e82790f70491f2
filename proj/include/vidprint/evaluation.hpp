#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "vidprint/classifiers.hpp"
#include "vidprint/encoder.hpp"
#include "vidprint/ingestion.hpp"
#include "vidprint/preprocess.hpp"

namespace vidprint {

enum class ClassifierKind { Knn1, Knn10, Nmev, Cnn };
enum class Representation { Raw, Embedding };

std::string to_string(ClassifierKind kind);
std::string to_string(Representation rep);
ClassifierKind parse_classifier(const std::string& name);

struct Fold {
  int id = 0;
  std::vector<std::string> encoder_classes;
  std::vector<std::string> classify_classes;
  std::vector<std::string> known;    // open set only
  std::vector<std::string> unknown;  // open set only
};

struct FoldPlan {
  std::vector<Fold> folds;
  std::uint64_t seed = 0;
  bool open_set = false;

  /// Throws DataError when a fold's encoder and classification classes
  /// overlap or classification sets are not a partition of all classes.
  void validate() const;
};

FoldPlan make_folds(const std::vector<std::string>& classes, std::size_t n_classify, std::uint64_t seed,
                    bool open_set);

using Confusion = std::vector<std::vector<std::size_t>>;

struct Metrics {
  double accuracy = 0.0;
  std::vector<double> precision;
  std::vector<double> recall;
};

/// Rows are true classes. Columns are the same classes, optionally followed
/// by one UNKNOWN column. A class never predicted has precision 0.
Metrics metrics(const Confusion& confusion);

struct EvalReport {
  int fold_id = 0;
  std::string train_platform, test_platform;
  Representation representation = Representation::Embedding;
  std::string classifier;
  std::vector<std::string> classes;  // row order; open set adds "UNKNOWN" last
  Confusion confusion;
  Metrics metrics;
  double mean_precision = 0.0;  // over known classes
  double mean_recall = 0.0;
  std::optional<double> threshold;
};

struct EvalConfig {
  PreprocessConfig preprocess;
  EncoderConfig encoder;
  ClassifierKind classifier = ClassifierKind::Knn1;
  SoftmaxTrainConfig softmax;
  std::size_t n_classify = 20;
  std::optional<std::size_t> encoder_classes_limit;
  std::optional<std::size_t> trials_limit;      // applies to every platform
  std::optional<std::size_t> classifier_shots;  // reference trials per class
  std::size_t augment_copies = 0;               // extra traces per training class
  double augment_fraction = 0.05;
  std::uint64_t seed = 0;

  void validate() const;
};

struct OpenSetRun {
  int fold_id = 0;
  std::string train_platform, test_platform;
  std::vector<std::string> known;
  std::vector<Vec1D> probs;   // per test item
  std::vector<int> truth;     // known index or kUnknown
};

struct SweepPoint {
  double threshold = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double accuracy = 0.0;
};

struct ThresholdCurve {
  std::vector<SweepPoint> points;
  std::size_t best_precision_index = 0;
};

struct PairGridReport {
  std::vector<std::string> rows;     // training inputs, VBR last when present
  std::vector<std::string> columns;  // testing platforms
  // [row][column] mean across folds; nullopt on the diagonal
  std::vector<std::vector<std::optional<double>>> raw, embedding;
  std::vector<std::vector<std::vector<double>>> raw_folds, embedding_folds;
  double raw_mean = 0.0, embedding_mean = 0.0;  // off-diagonal platform x platform cells
  std::vector<std::tuple<std::string, std::string, double, double>> pair_means;  // a, b, raw, embedding
};

struct SweepRow {
  std::string axis;
  std::string value;
  std::vector<double> fold_accuracy;
  double mean_accuracy = 0.0;
};

struct BinaryReport {
  int fold_id = 0;
  std::string train_platform, test_platform;
  Representation representation = Representation::Embedding;
  Confusion confusion;  // rows/columns: DIFFERENT, SAME
  Metrics metrics;
};

/// Holds un-normalized features of a dataset plus cached encoders; every
/// result is a pure function of (dataset, config).
class Experiment {
 public:
  Experiment(const Dataset& dataset, EvalConfig config);

  const EvalConfig& config() const noexcept { return config_; }
  const std::vector<std::string>& classes() const noexcept { return classes_; }
  const std::vector<std::string>& platforms() const noexcept { return platforms_; }  // excludes VBR
  bool has_vbr() const noexcept { return has_vbr_; }

  FoldPlan folds(bool open_set) const;

  EvalReport run_closed_set(const std::string& train_platform, const std::string& test_platform, const Fold& fold,
                            Representation rep);

  OpenSetRun prepare_open_set(const std::string& train_platform, const std::string& test_platform,
                              const Fold& fold, Representation rep);

  /// `only_fold` restricts the averaging to one fold of the plan.
  PairGridReport run_pair_grid(const FoldPlan& plan, std::optional<int> only_fold = std::nullopt);

  BinaryReport run_binary(const std::string& train_platform, const std::string& test_platform, const Fold& fold,
                          Representation rep);

  const EncoderModel& encoder_for(const std::string& a, const std::string& b, const Fold& fold);

 private:
  struct Split {
    std::vector<Vec1D> ref_x, test_x;
    std::vector<int> ref_y, test_y;
  };

  std::vector<Vec1D> training_trials(const std::string& platform, const std::string& video,
                                     std::optional<std::size_t> limit) const;
  std::vector<Vec1D> all_trials(const std::string& platform, const std::string& video) const;
  Vec1D finish(const Vec1D& v) const;
  std::vector<Vec1D> represent(const std::vector<Vec1D>& xs, Representation rep, const std::string& a,
                               const std::string& b, const Fold& fold);
  Split split(const std::string& train_platform, const std::string& test_platform,
              const std::vector<std::string>& classes) const;

  EvalConfig config_;
  FeatureTable raw_;
  std::vector<std::string> classes_;
  std::vector<std::string> platforms_;
  bool has_vbr_ = false;
  std::map<std::tuple<std::string, std::string, int, std::vector<std::string>>, EncoderModel> encoders_;
};

EvalReport evaluate_open_set(const OpenSetRun& run, double threshold);

/// Thresholds i/20 for i in 0..20.
std::vector<double> threshold_grid();
ThresholdCurve threshold_sweep(const OpenSetRun& run, const std::vector<double>& thresholds = threshold_grid());

/// Mean closed-set accuracy over the plan's folds for each value of `axis`.
/// Axes: training_classes, trials_per_class, bin_s, duration_min,
/// augmentation, base_model, classifier, classifier_shots.
std::vector<SweepRow> sweep(const Dataset& dataset, const EvalConfig& base, const std::string& axis,
                            const std::vector<std::string>& values, const std::string& train_platform,
                            const std::string& test_platform);

// Reports.
nlohmann::ordered_json to_json(const Metrics& m);
nlohmann::ordered_json to_json(const EvalReport& r);
nlohmann::ordered_json to_json(const ThresholdCurve& c);
nlohmann::ordered_json to_json(const PairGridReport& r);
nlohmann::ordered_json to_json(const std::vector<SweepRow>& rows);
nlohmann::ordered_json to_json(const BinaryReport& r);
nlohmann::ordered_json to_json(const FoldPlan& plan);

/// Heatmap CSV: header `train\test,<col>...`, one row per training input, empty diagonal.
std::string grid_csv(const PairGridReport& r, Representation rep);
std::string sweep_csv(const std::vector<SweepRow>& rows);
std::string threshold_csv(const ThresholdCurve& c);

}  // namespace vidprint
