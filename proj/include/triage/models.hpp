#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "triage/corpus.hpp"
#include "triage/preprocess.hpp"
#include "triage/vectorize.hpp"

namespace triage {

// ---------------------------------------------------------------------------
// Multinomial Naive Bayes

/// Two-class multinomial NB over non-negative (possibly fractional) feature
/// weights. theta[c][t] = (alpha + S[c][t]) / (alpha * V + S[c]).
struct MnbModel {
  std::array<double, 2> log_prior{};
  std::array<std::vector<double>, 2> log_likelihood;
  double alpha = 1.0;

  std::size_t dim() const { return log_likelihood[0].size(); }
};

struct MnbPrediction {
  int label = 0;
  std::array<double, 2> log_joint{};

  /// P(class 1 | x) from the normalized joint.
  double positive_probability() const;
};

/// Throws std::invalid_argument when alpha <= 0, sizes disagree, a feature is
/// negative, or only one class is present.
MnbModel train_mnb(std::span<const SparseVector> X, std::span<const int> y, double alpha = 1.0);

/// score_c = log prior_c + sum_t x_t log theta_{c,t}; ties go to class 0.
MnbPrediction predict_mnb(const MnbModel& model, const SparseVector& x);

// ---------------------------------------------------------------------------
// Logistic regression

struct LrHyper {
  double learning_rate = 0.1;
  double l2 = 1e-4;
  std::size_t max_iter = 1000;
  double tolerance = 1e-6;  // on the infinity norm of the full gradient
};

struct LrTrainingInfo {
  std::size_t iterations = 0;
  double final_loss = 0.0;
  double final_gradient_norm = 0.0;
  bool converged = false;
};

struct LrModel {
  std::vector<double> weights;
  double bias = 0.0;
  LrHyper hyper;
  LrTrainingInfo training;

  std::size_t dim() const { return weights.size(); }
};

struct LossGradient {
  double loss = 0.0;
  std::vector<double> grad_weights;
  double grad_bias = 0.0;
};

/// log(p) is evaluated as log(max(p, kLogClamp)).
inline constexpr double kLogClamp = 1e-12;

double sigmoid(double z);

/// Mean cross-entropy plus l2 * |w|^2 (bias unregularized), with its analytic
/// gradient. y must be 0/1.
LossGradient lr_loss_grad(std::span<const double> weights, double bias, double l2,
                          std::span<const SparseVector> X, std::span<const int> y);
LossGradient lr_loss_grad(const LrModel& model, std::span<const SparseVector> X,
                          std::span<const int> y);

/// Full-batch gradient descent from zero. Stops after max_iter steps or once
/// the gradient's infinity norm drops below tolerance. Throws
/// std::runtime_error naming the iteration if the loss becomes non-finite.
/// `loss_trace`, when given, receives the loss before every step and the
/// final loss.
LrModel train_lr(std::span<const SparseVector> X, std::span<const int> y,
                 const LrHyper& hyper = {}, std::vector<double>* loss_trace = nullptr);

double predict_proba_lr(const LrModel& model, const SparseVector& x);

// ---------------------------------------------------------------------------
// One-vs-rest

/// Stand-in for a label whose training column had a single class.
struct ConstantModel {
  bool value = false;
};

using BinaryModel = std::variant<MnbModel, LrModel, ConstantModel>;

/// Positive-class probability: MNB posterior, LR sigmoid, or 0/1.
double positive_score(const BinaryModel& model, const SparseVector& x);

enum class ModelKind { mnb, lr };

std::string_view model_kind_name(ModelKind kind);
ModelKind parse_model_kind(std::string_view name);

struct TrainOptions {
  ModelKind kind = ModelKind::mnb;
  double alpha = 1.0;
  LrHyper lr;
};

BinaryModel train_binary(std::span<const SparseVector> X, std::span<const int> y,
                         const TrainOptions& opts);

struct OvrModel {
  std::vector<std::string> labels;
  std::vector<BinaryModel> models;
  std::vector<double> thresholds;
  std::vector<std::string> warnings;

  std::size_t size() const { return labels.size(); }
};

/// One independent binary model per label column. A column holding a single
/// class becomes a ConstantModel with that value and a warning.
OvrModel train_ovr(std::span<const SparseVector> X, std::span<const std::vector<int>> columns,
                   std::span<const std::string> labels, const TrainOptions& opts);

struct OvrPrediction {
  std::vector<double> scores;
  std::vector<bool> decisions;  // score > threshold
};

OvrPrediction predict_ovr(const OvrModel& model, const SparseVector& x);
OvrPrediction predict_ovr(const OvrModel& model, const SparseVector& x,
                          std::span<const double> thresholds);

// ---------------------------------------------------------------------------
// Text-level models

/// Per-text output of any classifier for a task. `labels` indexes
/// task_labels(task); `scores` holds one positive score per schema label.
struct TaskPrediction {
  LabelMask labels;
  std::vector<double> scores;

  friend bool operator==(const TaskPrediction&, const TaskPrediction&) = default;
};

/// Everything needed to classify raw text for one task: the normalization
/// rules, the fitted vocabulary, and one binary model per schema label.
struct TextModel {
  Task task = Task::informative;
  ModelKind kind = ModelKind::mnb;
  NormalizationConfig normalization;
  Vocabulary vocabulary;
  OvrModel ovr;
};

/// Fits the vocabulary on the normalized training texts and trains one binary
/// model per label of `task`. Records must carry the task's labels (see
/// select_for_task). Throws DataError on an empty training set.
TextModel train_text_model(std::span<const LabeledTweet> train, Task task,
                           const TrainOptions& opts, const NormalizationConfig& norm = {});

TaskPrediction predict_text(const TextModel& model, std::string_view text);

nlohmann::json to_json(const TextModel& model);
/// Verifies the format tag and the vocabulary hash; throws DataError.
TextModel text_model_from_json(const nlohmann::json& j);
void save_model(const std::filesystem::path& path, const TextModel& model);
TextModel load_model(const std::filesystem::path& path);

/// Anything that labels batches of raw texts for one task.
class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual Task task() const = 0;
  /// One prediction per text, in order.
  virtual std::vector<TaskPrediction> predict(std::span<const std::string> texts) = 0;
};

class LocalClassifier final : public Classifier {
 public:
  explicit LocalClassifier(TextModel model) : model_(std::move(model)) {}
  Task task() const override { return model_.task; }
  std::vector<TaskPrediction> predict(std::span<const std::string> texts) override;
  const TextModel& model() const { return model_; }

 private:
  TextModel model_;
};

}  // namespace triage
