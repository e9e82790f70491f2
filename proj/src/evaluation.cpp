#include "vidprint/evaluation.hpp"

#include <algorithm>
#include <numeric>
#include <set>

namespace vidprint {

namespace {

std::vector<std::string> head(const std::vector<std::string>& v, std::optional<std::size_t> n) {
  if (!n || *n >= v.size()) return v;
  return {v.begin(), v.begin() + static_cast<std::ptrdiff_t>(*n)};
}

std::size_t parse_count(const std::string& axis, const std::string& value) {
  try {
    std::size_t pos = 0;
    const auto n = std::stoul(value, &pos);
    if (pos != value.size() || n == 0) throw std::invalid_argument(value);
    return n;
  } catch (const std::exception&) {
    throw ArgumentError("sweep axis " + axis + ": '" + value + "' is not a positive integer");
  }
}

double parse_real(const std::string& axis, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size() || !(v > 0.0)) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ArgumentError("sweep axis " + axis + ": '" + value + "' is not a positive number");
  }
}

std::vector<int> argmax_all(const SoftmaxClassifier& model, const std::vector<Vec1D>& xs) {
  std::vector<int> out;
  out.reserve(xs.size());
  for (const auto& x : xs) {
    const Vec1D p = predict_softmax(model, x);
    out.push_back(static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin()));
  }
  return out;
}

}  // namespace

std::string to_string(ClassifierKind kind) {
  switch (kind) {
    case ClassifierKind::Knn1: return "knn1";
    case ClassifierKind::Knn10: return "knn10";
    case ClassifierKind::Nmev: return "nmev";
    case ClassifierKind::Cnn: return "cnn";
  }
  return "?";
}

std::string to_string(Representation rep) { return rep == Representation::Raw ? "raw" : "embedding"; }

ClassifierKind parse_classifier(const std::string& name) {
  if (name == "knn1") return ClassifierKind::Knn1;
  if (name == "knn10") return ClassifierKind::Knn10;
  if (name == "nmev") return ClassifierKind::Nmev;
  if (name == "cnn") return ClassifierKind::Cnn;
  throw ArgumentError("unknown classifier '" + name + "' (expected knn1, knn10, nmev or cnn)");
}

void FoldPlan::validate() const {
  if (folds.empty()) throw DataError("fold plan is empty");
  std::set<std::string> universe(folds.front().encoder_classes.begin(), folds.front().encoder_classes.end());
  universe.insert(folds.front().classify_classes.begin(), folds.front().classify_classes.end());
  std::set<std::string> covered;
  for (const auto& f : folds) {
    std::set<std::string> enc(f.encoder_classes.begin(), f.encoder_classes.end());
    for (const auto& c : f.classify_classes) {
      if (enc.count(c)) {
        throw DataError("fold " + std::to_string(f.id) + ": class '" + c +
                        "' is both an encoder and a classification class");
      }
      if (!covered.insert(c).second) {
        throw DataError("class '" + c + "' is a classification class in more than one fold");
      }
    }
    if (open_set) {
      std::set<std::string> split(f.known.begin(), f.known.end());
      split.insert(f.unknown.begin(), f.unknown.end());
      if (split != std::set<std::string>(f.classify_classes.begin(), f.classify_classes.end()) ||
          f.known.size() + f.unknown.size() != f.classify_classes.size()) {
        throw DataError("fold " + std::to_string(f.id) + ": known/unknown split does not match its classes");
      }
    }
  }
  if (covered != universe) throw DataError("classification sets do not cover every class");
}

FoldPlan make_folds(const std::vector<std::string>& classes, std::size_t n_classify, std::uint64_t seed,
                    bool open_set) {
  if (n_classify == 0 || classes.size() % n_classify != 0) {
    throw ArgumentError("n_classify=" + std::to_string(n_classify) + " does not divide " +
                        std::to_string(classes.size()) + " classes");
  }
  if (n_classify >= classes.size()) throw ArgumentError("n_classify leaves no encoder classes");
  if (open_set && n_classify % 2 != 0) throw ArgumentError("open-set folds need an even n_classify");
  std::vector<std::string> order = classes;
  std::sort(order.begin(), order.end());
  Rng rng = make_rng(seed, {hash_tag("folds")});
  std::shuffle(order.begin(), order.end(), rng);

  FoldPlan plan;
  plan.seed = seed;
  plan.open_set = open_set;
  for (std::size_t start = 0; start < order.size(); start += n_classify) {
    Fold f;
    f.id = static_cast<int>(plan.folds.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
      (i >= start && i < start + n_classify ? f.classify_classes : f.encoder_classes).push_back(order[i]);
    }
    if (open_set) {
      const auto half = static_cast<std::ptrdiff_t>(n_classify / 2);
      f.known.assign(f.classify_classes.begin(), f.classify_classes.begin() + half);
      f.unknown.assign(f.classify_classes.begin() + half, f.classify_classes.end());
    }
    plan.folds.push_back(std::move(f));
  }
  plan.validate();
  return plan;
}

Metrics metrics(const Confusion& confusion) {
  Metrics m;
  const std::size_t n = confusion.size();
  std::size_t total = 0, correct = 0;
  std::vector<std::size_t> predicted(n, 0);
  for (std::size_t r = 0; r < n; ++r) {
    if (confusion[r].size() != n && confusion[r].size() != n + 1) {
      throw DimensionError("confusion rows must have n or n+1 columns");
    }
    for (std::size_t c = 0; c < confusion[r].size(); ++c) {
      total += confusion[r][c];
      if (c < n) predicted[c] += confusion[r][c];
    }
    correct += confusion[r][r];
  }
  m.accuracy = total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
  for (std::size_t r = 0; r < n; ++r) {
    std::size_t row = 0;
    for (auto v : confusion[r]) row += v;
    m.recall.push_back(row == 0 ? 0.0 : static_cast<double>(confusion[r][r]) / static_cast<double>(row));
    m.precision.push_back(predicted[r] == 0 ? 0.0
                                            : static_cast<double>(confusion[r][r]) / static_cast<double>(predicted[r]));
  }
  return m;
}

void EvalConfig::validate() const {
  preprocess.validate();
  encoder.validate();
  softmax.validate();
  if (n_classify < 2) throw ArgumentError("n_classify must be >= 2");
  if (encoder_classes_limit && *encoder_classes_limit < 2) throw ArgumentError("encoder_classes_limit must be >= 2");
  if (trials_limit && *trials_limit < 1) throw ArgumentError("trials_limit must be >= 1");
  if (classifier_shots && *classifier_shots < 1) throw ArgumentError("classifier_shots must be >= 1");
  if (augment_fraction < 0.0) throw ArgumentError("augment_fraction must be >= 0");
}

Experiment::Experiment(const Dataset& dataset, EvalConfig config) : config_(std::move(config)) {
  config_.validate();
  PreprocessConfig pre = config_.preprocess;
  pre.normalize = false;
  raw_ = preprocess_dataset(dataset, pre);
  classes_ = dataset.classes();
  for (const auto& p : dataset.platforms()) {
    if (p == kVbrPlatform) {
      has_vbr_ = true;
    } else {
      platforms_.push_back(p);
    }
  }
}

FoldPlan Experiment::folds(bool open_set) const {
  return make_folds(classes_, config_.n_classify, config_.seed, open_set);
}

Vec1D Experiment::finish(const Vec1D& v) const { return config_.preprocess.normalize ? minmax_normalize(v) : v; }

std::vector<Vec1D> Experiment::all_trials(const std::string& platform, const std::string& video) const {
  const auto& src = features_of(raw_, platform, video);
  const std::size_t n = std::min(src.size(), config_.trials_limit.value_or(src.size()));
  std::vector<Vec1D> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(finish(src[i]));
  return out;
}

std::vector<Vec1D> Experiment::training_trials(const std::string& platform, const std::string& video,
                                               std::optional<std::size_t> limit) const {
  const auto& src = features_of(raw_, platform, video);
  std::size_t n = std::min(src.size(), config_.trials_limit.value_or(src.size()));
  if (limit) n = std::min(n, *limit);
  std::vector<Vec1D> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(finish(src[i]));
  for (std::size_t j = 0; j < config_.augment_copies; ++j) {
    Rng rng = make_rng(config_.seed, {hash_tag("augment"), hash_tag(platform), hash_tag(video), j});
    out.push_back(finish(augment_gaussian(src[j % n], config_.augment_fraction, rng)));
  }
  return out;
}

const EncoderModel& Experiment::encoder_for(const std::string& a, const std::string& b, const Fold& fold) {
  const auto& lo = std::min(a, b);
  const auto& hi = std::max(a, b);
  const auto classes = head(fold.encoder_classes, config_.encoder_classes_limit);
  std::set<std::string> classify(fold.classify_classes.begin(), fold.classify_classes.end());
  for (const auto& c : classes) {
    if (classify.count(c)) throw DataError("encoder class '" + c + "' is also a classification class");
  }
  auto key = std::make_tuple(lo, hi, fold.id, classes);
  if (auto it = encoders_.find(key); it != encoders_.end()) return it->second;

  FeatureTable table;
  for (const auto& p : {lo, hi}) {
    for (const auto& c : classes) table[p][c] = training_trials(p, c, std::nullopt);
  }
  EncoderConfig enc = config_.encoder;
  enc.seed = mix_seed(config_.seed, {hash_tag("encoder"), hash_tag(lo), hash_tag(hi), static_cast<std::uint64_t>(fold.id)});
  auto result = train_encoder(table, classes, {lo, hi}, enc);
  return encoders_.emplace(std::move(key), std::move(result.model)).first->second;
}

std::vector<Vec1D> Experiment::represent(const std::vector<Vec1D>& xs, Representation rep, const std::string& a,
                                         const std::string& b, const Fold& fold) {
  if (rep == Representation::Raw) return xs;
  return embed_all(encoder_for(a, b, fold), xs, config_.encoder.backend);
}

Experiment::Split Experiment::split(const std::string& train_platform, const std::string& test_platform,
                                    const std::vector<std::string>& classes) const {
  Split s;
  for (std::size_t c = 0; c < classes.size(); ++c) {
    const int label = static_cast<int>(c);
    if (train_platform == test_platform) {
      // Even trials are the reference, odd trials the queries.
      const auto& src = features_of(raw_, train_platform, classes[c]);
      const std::size_t n = std::min(src.size(), config_.trials_limit.value_or(src.size()));
      if (n < 2) throw DataError("same-platform evaluation needs >= 2 trials of '" + classes[c] + "'");
      std::vector<Vec1D> ref;
      for (std::size_t i = 0; i < n; ++i) (i % 2 == 0 ? ref : s.test_x).push_back(src[i]);
      for (std::size_t i = 1; i < n; i += 2) s.test_y.push_back(label);
      if (config_.classifier_shots && ref.size() > *config_.classifier_shots) ref.resize(*config_.classifier_shots);
      const std::size_t base = ref.size();
      for (std::size_t j = 0; j < config_.augment_copies; ++j) {
        Rng rng = make_rng(config_.seed, {hash_tag("augment"), hash_tag(train_platform), hash_tag(classes[c]), j});
        ref.push_back(augment_gaussian(ref[j % base], config_.augment_fraction, rng));
      }
      for (auto& v : ref) {
        s.ref_x.push_back(finish(v));
        s.ref_y.push_back(label);
      }
    } else {
      for (auto& v : training_trials(train_platform, classes[c], config_.classifier_shots)) {
        s.ref_x.push_back(std::move(v));
        s.ref_y.push_back(label);
      }
      for (auto& v : all_trials(test_platform, classes[c])) {
        s.test_x.push_back(std::move(v));
        s.test_y.push_back(label);
      }
    }
  }
  for (auto& v : s.test_x) {
    if (train_platform == test_platform) v = finish(v);
  }
  return s;
}

EvalReport Experiment::run_closed_set(const std::string& train_platform, const std::string& test_platform,
                                      const Fold& fold, Representation rep) {
  const auto& classes = fold.classify_classes;
  Split s = split(train_platform, test_platform, classes);
  const auto ref = represent(s.ref_x, rep, train_platform, test_platform, fold);
  const auto test = represent(s.test_x, rep, train_platform, test_platform, fold);

  std::vector<int> pred;
  switch (config_.classifier) {
    case ClassifierKind::Knn1:
    case ClassifierKind::Knn10: {
      const std::size_t k = config_.classifier == ClassifierKind::Knn1 ? 1 : 10;
      pred = KnnModel::fit(ref, s.ref_y, k).predict_all(test, config_.encoder.backend);
      break;
    }
    case ClassifierKind::Nmev: {
      const auto model = NmevModel::fit(ref, s.ref_y);
      for (const auto& q : test) pred.push_back(model.predict(q));
      break;
    }
    case ClassifierKind::Cnn: {
      SoftmaxTrainConfig sc = config_.softmax;
      sc.seed = mix_seed(config_.seed, {hash_tag("softmax"), hash_tag(train_platform), hash_tag(test_platform),
                                        static_cast<std::uint64_t>(fold.id), static_cast<std::uint64_t>(rep)});
      sc.backend = config_.encoder.backend;
      pred = argmax_all(train_softmax_cnn(ref, s.ref_y, classes.size(), sc), test);
      break;
    }
  }

  EvalReport r;
  r.fold_id = fold.id;
  r.train_platform = train_platform;
  r.test_platform = test_platform;
  r.representation = rep;
  r.classifier = to_string(config_.classifier);
  r.classes = classes;
  r.confusion.assign(classes.size(), std::vector<std::size_t>(classes.size(), 0));
  for (std::size_t i = 0; i < pred.size(); ++i) {
    ++r.confusion[static_cast<std::size_t>(s.test_y[i])][static_cast<std::size_t>(pred[i])];
  }
  r.metrics = metrics(r.confusion);
  for (std::size_t c = 0; c < classes.size(); ++c) {
    r.mean_precision += r.metrics.precision[c] / static_cast<double>(classes.size());
    r.mean_recall += r.metrics.recall[c] / static_cast<double>(classes.size());
  }
  return r;
}

OpenSetRun Experiment::prepare_open_set(const std::string& train_platform, const std::string& test_platform,
                                        const Fold& fold, Representation rep) {
  if (fold.known.empty() || fold.unknown.empty()) throw ArgumentError("fold has no known/unknown split");
  Split known = split(train_platform, test_platform, fold.known);
  Split unknown = split(train_platform, test_platform, fold.unknown);

  const auto ref = represent(known.ref_x, rep, train_platform, test_platform, fold);
  SoftmaxTrainConfig sc = config_.softmax;
  sc.seed = mix_seed(config_.seed, {hash_tag("open-softmax"), hash_tag(train_platform), hash_tag(test_platform),
                                    static_cast<std::uint64_t>(fold.id), static_cast<std::uint64_t>(rep)});
  sc.backend = config_.encoder.backend;
  // One output beyond the known classes; it never receives a training label.
  const auto model = train_softmax_cnn(ref, known.ref_y, fold.known.size() + 1, sc);

  // Balance by dropping the highest trials of the larger side. Items are
  // ordered trial-major so truncation removes whole trials first.
  auto trial_major = [](const Split& s, std::size_t n_classes) {
    std::vector<std::size_t> order(s.test_x.size());
    std::vector<std::size_t> rank(s.test_x.size());
    std::vector<std::size_t> seen(n_classes, 0);
    for (std::size_t i = 0; i < s.test_x.size(); ++i) rank[i] = seen[static_cast<std::size_t>(s.test_y[i])]++;
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rank[a] < rank[b]; });
    return order;
  };
  auto known_order = trial_major(known, fold.known.size());
  auto unknown_order = trial_major(unknown, fold.unknown.size());
  const std::size_t n = std::min(known_order.size(), unknown_order.size());
  known_order.resize(n);
  unknown_order.resize(n);

  std::vector<Vec1D> test_x;
  OpenSetRun run;
  run.fold_id = fold.id;
  run.train_platform = train_platform;
  run.test_platform = test_platform;
  run.known = fold.known;
  for (auto i : known_order) {
    test_x.push_back(known.test_x[i]);
    run.truth.push_back(known.test_y[i]);
  }
  for (auto i : unknown_order) {
    test_x.push_back(unknown.test_x[i]);
    run.truth.push_back(kUnknown);
  }
  for (const auto& e : represent(test_x, rep, train_platform, test_platform, fold)) {
    run.probs.push_back(predict_softmax(model, e));
  }
  return run;
}

EvalReport evaluate_open_set(const OpenSetRun& run, double threshold) {
  if (threshold < 0.0 || threshold > 1.0) throw ArgumentError("threshold must be in [0, 1]");
  const std::size_t n = run.known.size();
  EvalReport r;
  r.fold_id = run.fold_id;
  r.train_platform = run.train_platform;
  r.test_platform = run.test_platform;
  r.classifier = "cnn";
  r.classes = run.known;
  r.classes.push_back("UNKNOWN");
  r.threshold = threshold;
  r.confusion.assign(n + 1, std::vector<std::size_t>(n + 1, 0));
  for (std::size_t i = 0; i < run.probs.size(); ++i) {
    int pred = open_set_classify(run.probs[i], threshold);
    if (pred == kUnknown || static_cast<std::size_t>(pred) >= n) pred = static_cast<int>(n);
    const auto row = run.truth[i] == kUnknown ? n : static_cast<std::size_t>(run.truth[i]);
    ++r.confusion[row][static_cast<std::size_t>(pred)];
  }
  r.metrics = metrics(r.confusion);
  for (std::size_t c = 0; c < n; ++c) {
    r.mean_precision += r.metrics.precision[c] / static_cast<double>(n);
    r.mean_recall += r.metrics.recall[c] / static_cast<double>(n);
  }
  return r;
}

std::vector<double> threshold_grid() {
  std::vector<double> out;
  for (int i = 0; i <= 20; ++i) out.push_back(i / 20.0);
  return out;
}

ThresholdCurve threshold_sweep(const OpenSetRun& run, const std::vector<double>& thresholds) {
  ThresholdCurve curve;
  for (double t : thresholds) {
    const auto r = evaluate_open_set(run, t);
    curve.points.push_back({t, r.mean_precision, r.mean_recall, r.metrics.accuracy});
    if (curve.points.back().precision > curve.points[curve.best_precision_index].precision) {
      curve.best_precision_index = curve.points.size() - 1;
    }
  }
  return curve;
}

PairGridReport Experiment::run_pair_grid(const FoldPlan& full_plan, std::optional<int> only_fold) {
  if (platforms_.size() < 2) throw DataError("pair grid needs at least two platforms");
  full_plan.validate();
  FoldPlan plan = full_plan;
  if (only_fold) {
    if (*only_fold < 0 || static_cast<std::size_t>(*only_fold) >= plan.folds.size()) {
      throw ArgumentError("fold index out of range");
    }
    plan.folds = {full_plan.folds[static_cast<std::size_t>(*only_fold)]};
  }
  PairGridReport g;
  g.rows = platforms_;
  if (has_vbr_) g.rows.push_back(kVbrPlatform);
  g.columns = platforms_;
  const std::size_t R = g.rows.size(), C = g.columns.size();
  g.raw.assign(R, std::vector<std::optional<double>>(C));
  g.embedding = g.raw;
  g.raw_folds.assign(R, std::vector<std::vector<double>>(C));
  g.embedding_folds = g.raw_folds;

  double raw_sum = 0.0, emb_sum = 0.0;
  std::size_t cells = 0;
  for (std::size_t r = 0; r < R; ++r) {
    for (std::size_t c = 0; c < C; ++c) {
      if (g.rows[r] == g.columns[c]) continue;
      double raw_acc = 0.0, emb_acc = 0.0;
      for (const auto& fold : plan.folds) {
        const double a = run_closed_set(g.rows[r], g.columns[c], fold, Representation::Raw).metrics.accuracy;
        const double b = run_closed_set(g.rows[r], g.columns[c], fold, Representation::Embedding).metrics.accuracy;
        g.raw_folds[r][c].push_back(a);
        g.embedding_folds[r][c].push_back(b);
        raw_acc += a;
        emb_acc += b;
      }
      g.raw[r][c] = raw_acc / static_cast<double>(plan.folds.size());
      g.embedding[r][c] = emb_acc / static_cast<double>(plan.folds.size());
      if (g.rows[r] != kVbrPlatform) {
        raw_sum += *g.raw[r][c];
        emb_sum += *g.embedding[r][c];
        ++cells;
      }
    }
  }
  g.raw_mean = raw_sum / static_cast<double>(cells);
  g.embedding_mean = emb_sum / static_cast<double>(cells);
  for (std::size_t i = 0; i < C; ++i) {
    for (std::size_t j = i + 1; j < C; ++j) {
      g.pair_means.emplace_back(g.columns[i], g.columns[j], (*g.raw[i][j] + *g.raw[j][i]) / 2.0,
                                (*g.embedding[i][j] + *g.embedding[j][i]) / 2.0);
    }
  }
  return g;
}

BinaryReport Experiment::run_binary(const std::string& train_platform, const std::string& test_platform,
                                    const Fold& fold, Representation rep) {
  // Training pairs come from the encoder classes, test pairs from the
  // held-out classification classes.
  auto sides = [&](const std::vector<std::string>& classes, bool training) {
    std::vector<Vec1D> a, b;
    std::vector<int> la, lb;
    for (std::size_t c = 0; c < classes.size(); ++c) {
      auto xa = training ? training_trials(train_platform, classes[c], std::nullopt)
                         : all_trials(train_platform, classes[c]);
      auto xb = all_trials(test_platform, classes[c]);
      if (train_platform == test_platform) {
        std::vector<Vec1D> even, odd;
        for (std::size_t i = 0; i < xb.size(); ++i) (i % 2 == 0 ? even : odd).push_back(xb[i]);
        xa = std::move(even);
        xb = std::move(odd);
      }
      for (auto& v : xa) {
        a.push_back(std::move(v));
        la.push_back(static_cast<int>(c));
      }
      for (auto& v : xb) {
        b.push_back(std::move(v));
        lb.push_back(static_cast<int>(c));
      }
    }
    a = represent(a, rep, train_platform, test_platform, fold);
    b = represent(b, rep, train_platform, test_platform, fold);
    return std::make_tuple(std::move(a), std::move(la), std::move(b), std::move(lb));
  };

  const auto enc_classes = head(fold.encoder_classes, config_.encoder_classes_limit);
  auto [ta, tla, tb, tlb] = sides(enc_classes, true);
  auto [qa, qla, qb, qlb] = sides(fold.classify_classes, false);
  Rng train_rng = make_rng(config_.seed, {hash_tag("binary-train-pairs"), static_cast<std::uint64_t>(fold.id)});
  Rng test_rng = make_rng(config_.seed, {hash_tag("binary-test-pairs"), static_cast<std::uint64_t>(fold.id)});
  const auto train_pairs = make_binary_pairs(ta, tla, tb, tlb, train_rng);
  const auto test_pairs = make_binary_pairs(qa, qla, qb, qlb, test_rng);

  SoftmaxTrainConfig sc = config_.softmax;
  sc.seed = mix_seed(config_.seed, {hash_tag("binary"), hash_tag(train_platform), hash_tag(test_platform),
                                    static_cast<std::uint64_t>(fold.id), static_cast<std::uint64_t>(rep)});
  sc.backend = config_.encoder.backend;
  const auto model = train_binary(train_pairs, sc);

  BinaryReport r;
  r.fold_id = fold.id;
  r.train_platform = train_platform;
  r.test_platform = test_platform;
  r.representation = rep;
  r.confusion.assign(2, std::vector<std::size_t>(2, 0));
  for (const auto& p : test_pairs) {
    ++r.confusion[static_cast<std::size_t>(p.label)][static_cast<std::size_t>(predict_binary(model, p.features))];
  }
  r.metrics = metrics(r.confusion);
  return r;
}

std::vector<SweepRow> sweep(const Dataset& dataset, const EvalConfig& base, const std::string& axis,
                            const std::vector<std::string>& values, const std::string& train_platform,
                            const std::string& test_platform) {
  if (values.empty()) throw ArgumentError("sweep axis " + axis + " has no values");
  std::vector<SweepRow> rows;
  for (const auto& value : values) {
    EvalConfig cfg = base;
    if (axis == "training_classes") {
      cfg.encoder_classes_limit = parse_count(axis, value);
    } else if (axis == "trials_per_class") {
      cfg.trials_limit = parse_count(axis, value);
    } else if (axis == "bin_s") {
      cfg.preprocess.bin_s = parse_real(axis, value);
    } else if (axis == "duration_min") {
      cfg.preprocess.duration_s = 60.0 * parse_real(axis, value);
    } else if (axis == "augmentation") {
      if (value != "on" && value != "off") throw ArgumentError("sweep axis augmentation: expected on or off");
      cfg.augment_copies = value == "off" ? 0 : (base.augment_copies > 0 ? base.augment_copies : 5);
    } else if (axis == "base_model") {
      cfg.encoder.arch = parse_arch(value);
    } else if (axis == "classifier") {
      cfg.classifier = parse_classifier(value);
    } else if (axis == "classifier_shots") {
      cfg.classifier_shots = parse_count(axis, value);
    } else {
      throw ArgumentError("unknown sweep axis '" + axis + "'");
    }
    Experiment ex(dataset, cfg);
    SweepRow row;
    row.axis = axis;
    row.value = value;
    const auto plan = ex.folds(false);
    for (const auto& fold : plan.folds) {
      row.fold_accuracy.push_back(
          ex.run_closed_set(train_platform, test_platform, fold, Representation::Embedding).metrics.accuracy);
      row.mean_accuracy += row.fold_accuracy.back() / static_cast<double>(plan.folds.size());
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace vidprint
