#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "triage/corpus.hpp"
#include "triage/models.hpp"
#include "triage/preprocess.hpp"

namespace triage {

/// Fraction of positions where gold and pred agree. Throws
/// std::invalid_argument on a length mismatch or empty input.
double accuracy(std::span<const int> gold, std::span<const int> pred);

struct LabelScores {
  std::string label;
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  std::size_t support() const { return tp + fn; }
};

/// Counts and P/R/F1 of one binary column; any metric whose denominator is
/// zero is 0.
LabelScores score_label(std::string label, std::span<const int> gold, std::span<const int> pred);

struct F1Report {
  std::vector<LabelScores> per_label;
  double micro_f1 = 0.0;  // TP/FP/FN pooled over labels
  double macro_f1 = 0.0;  // mean of per-label F1
  std::vector<std::string> warnings;
};

/// Columns are binary label columns of equal length, one per label.
F1Report f1_scores(std::span<const std::vector<int>> gold, std::span<const std::vector<int>> pred,
                   std::span<const std::string> labels);

/// A binary task scored every way it gets reported: accuracy, F1 of the
/// positive class, and micro/macro F1 over both classes (micro equals
/// accuracy).
struct BinaryScores {
  double accuracy = 0.0;
  double positive_f1 = 0.0;
  double micro_f1 = 0.0;
  double macro_f1 = 0.0;
  LabelScores positive;
  LabelScores negative;
  std::vector<std::string> warnings;
};

BinaryScores binary_scores(std::span<const int> gold, std::span<const int> pred,
                           std::string positive_label = "positive");

/// Cohen's kappa over arbitrary integer categories; 1 when chance agreement
/// is 1. Throws std::invalid_argument on a length mismatch or empty input.
double cohens_kappa(std::span<const int> a, std::span<const int> b);

/// Metrics of one split/train/evaluate cycle. For the binary task,
/// `positive_f1` is set and micro/macro are over both classes; for the
/// multi-label tasks `accuracy` is exact-set accuracy and micro/macro pool or
/// average the schema labels.
struct RunMetrics {
  std::uint64_t seed = 0;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  double accuracy = 0.0;
  std::optional<double> positive_f1;
  double micro_f1 = 0.0;
  double macro_f1 = 0.0;
  std::vector<LabelScores> per_label;
  std::vector<std::string> warnings;
};

struct MeanLabelScores {
  std::string label;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct MetricsReport {
  Task task = Task::informative;
  ModelKind kind = ModelKind::mnb;
  double train_fraction = 0.8;
  std::vector<std::uint64_t> seeds;
  std::vector<RunMetrics> runs;

  // Arithmetic means over runs.
  double accuracy = 0.0;
  std::optional<double> positive_f1;
  double micro_f1 = 0.0;
  double macro_f1 = 0.0;
  std::vector<MeanLabelScores> per_label;
};

nlohmann::json to_json(const LabelScores& s);
nlohmann::json to_json(const RunMetrics& m);
nlohmann::json to_json(const MetricsReport& r);

/// Scores predictions against the gold labels of `records` for `task`.
RunMetrics score_predictions(Task task, std::span<const LabeledTweet> records,
                             std::span<const TaskPrediction> predictions);

/// Runs `classifier` over the records and scores it. Records must carry the
/// classifier task's labels.
RunMetrics evaluate_classifier(Classifier& classifier, std::span<const LabeledTweet> records);

/// Fills the means of `report` from its runs.
void summarize(MetricsReport& report);

struct ExperimentConfig {
  Task task = Task::informative;
  TrainOptions train;
  NormalizationConfig normalization;
  std::size_t n_runs = 5;
  std::uint64_t base_seed = 0;
  /// Explicit per-run split seeds; otherwise base_seed, base_seed+1, ...
  std::vector<std::uint64_t> seeds;
  double train_fraction = 0.8;
  bool stratify = false;

  std::vector<std::uint64_t> run_seeds() const;
};

/// One run: split with `seed`, train on the train part, score the test part.
RunMetrics run_once(std::span<const LabeledTweet> data, const ExperimentConfig& cfg,
                    std::uint64_t seed);

/// n_runs independent split/train/evaluate cycles over the records labeled
/// for cfg.task. Throws DataError when the binary task lacks a class or a
/// multi-label task has a label without positives.
MetricsReport run_experiment(std::span<const LabeledTweet> data, const ExperimentConfig& cfg);

struct Disagreement {
  std::string id;
  std::string text;
  bool gold = false;
  bool predicted = false;
  double score = 0.0;
};

struct EventResult {
  std::string event;
  RunMetrics metrics;
  std::vector<Disagreement> disagreements;
};

struct NamedCollection {
  std::string name;
  LabeledCollection records;
};

/// Applies a trained informativeness classifier unchanged to each event.
/// Throws DataError when any record of an event lacks an informative label.
std::vector<EventResult> cross_event_eval(Classifier& informative,
                                          std::span<const NamedCollection> events);

nlohmann::json to_json(const EventResult& r);

}  // namespace triage
