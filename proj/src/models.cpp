#include "triage/models.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <type_traits>

#include "csv.hpp"
#include "triage/error.hpp"

namespace triage {

using nlohmann::json;

namespace {

void check_dataset(std::span<const SparseVector> X, std::span<const int> y) {
  if (X.empty()) throw std::invalid_argument("training set is empty");
  if (X.size() != y.size()) {
    throw std::invalid_argument("feature rows (" + std::to_string(X.size()) + ") and labels (" +
                                std::to_string(y.size()) + ") differ");
  }
  const std::size_t dim = X.front().dim;
  bool pos = false, neg = false;
  for (std::size_t i = 0; i < X.size(); ++i) {
    if (X[i].dim != dim) throw std::invalid_argument("feature rows have different dimensions");
    if (y[i] != 0 && y[i] != 1) throw std::invalid_argument("labels must be 0 or 1");
    (y[i] ? pos : neg) = true;
  }
  if (!pos || !neg) throw std::invalid_argument("training labels contain a single class");
}

void check_dim(std::size_t model_dim, const SparseVector& x) {
  if (x.dim != model_dim) {
    throw std::invalid_argument("dimension mismatch: model " + std::to_string(model_dim) +
                                ", input " + std::to_string(x.dim));
  }
}

double sparse_dot_dense(const SparseVector& x, std::span<const double> w) {
  double s = 0.0;
  for (std::size_t k = 0; k < x.indices.size(); ++k) s += x.values[k] * w[x.indices[k]];
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// MNB

double MnbPrediction::positive_probability() const {
  // 1 / (1 + exp(s0 - s1)) without overflow.
  return sigmoid(log_joint[1] - log_joint[0]);
}

MnbModel train_mnb(std::span<const SparseVector> X, std::span<const int> y, double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("smoothing alpha must be positive");
  check_dataset(X, y);
  const std::size_t dim = X.front().dim;

  std::array<std::vector<double>, 2> mass{std::vector<double>(dim, 0.0), std::vector<double>(dim, 0.0)};
  std::array<double, 2> total{0.0, 0.0};
  std::array<std::size_t, 2> count{0, 0};
  for (std::size_t i = 0; i < X.size(); ++i) {
    const int c = y[i];
    ++count[c];
    for (std::size_t k = 0; k < X[i].indices.size(); ++k) {
      const double v = X[i].values[k];
      if (v < 0.0) throw std::invalid_argument("MNB features must be non-negative");
      mass[c][X[i].indices[k]] += v;
      total[c] += v;
    }
  }

  MnbModel m;
  m.alpha = alpha;
  const double n = static_cast<double>(X.size());
  for (int c = 0; c < 2; ++c) {
    m.log_prior[c] = std::log(static_cast<double>(count[c]) / n);
    const double denom = alpha * static_cast<double>(dim) + total[c];
    m.log_likelihood[c].resize(dim);
    for (std::size_t t = 0; t < dim; ++t) {
      m.log_likelihood[c][t] = std::log((alpha + mass[c][t]) / denom);
    }
  }
  return m;
}

MnbPrediction predict_mnb(const MnbModel& model, const SparseVector& x) {
  check_dim(model.dim(), x);
  MnbPrediction p;
  for (int c = 0; c < 2; ++c) {
    p.log_joint[c] = model.log_prior[c] + sparse_dot_dense(x, model.log_likelihood[c]);
  }
  p.label = p.log_joint[1] > p.log_joint[0] ? 1 : 0;
  return p;
}

// ---------------------------------------------------------------------------
// Logistic regression

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

LossGradient lr_loss_grad(std::span<const double> weights, double bias, double l2,
                          std::span<const SparseVector> X, std::span<const int> y) {
  if (X.size() != y.size()) throw std::invalid_argument("feature rows and labels differ in count");
  if (X.empty()) throw std::invalid_argument("empty dataset");
  LossGradient out;
  out.grad_weights.assign(weights.size(), 0.0);
  const double inv_n = 1.0 / static_cast<double>(X.size());
  double loss = 0.0;
  for (std::size_t i = 0; i < X.size(); ++i) {
    check_dim(weights.size(), X[i]);
    const double p = sigmoid(sparse_dot_dense(X[i], weights) + bias);
    loss -= y[i] ? std::log(std::max(p, kLogClamp)) : std::log(std::max(1.0 - p, kLogClamp));
    const double r = (p - static_cast<double>(y[i])) * inv_n;
    for (std::size_t k = 0; k < X[i].indices.size(); ++k) {
      out.grad_weights[X[i].indices[k]] += r * X[i].values[k];
    }
    out.grad_bias += r;
  }
  double sq = 0.0;
  for (std::size_t t = 0; t < weights.size(); ++t) {
    sq += weights[t] * weights[t];
    out.grad_weights[t] += 2.0 * l2 * weights[t];
  }
  out.loss = loss * inv_n + l2 * sq;
  return out;
}

LossGradient lr_loss_grad(const LrModel& model, std::span<const SparseVector> X, std::span<const int> y) {
  return lr_loss_grad(model.weights, model.bias, model.hyper.l2, X, y);
}

LrModel train_lr(std::span<const SparseVector> X, std::span<const int> y, const LrHyper& hyper,
                 std::vector<double>* loss_trace) {
  check_dataset(X, y);
  if (!(hyper.learning_rate > 0.0)) throw std::invalid_argument("learning rate must be positive");
  if (hyper.l2 < 0.0) throw std::invalid_argument("l2 coefficient must be non-negative");

  LrModel m;
  m.hyper = hyper;
  m.weights.assign(X.front().dim, 0.0);

  std::size_t iter = 0;
  LossGradient lg = lr_loss_grad(m, X, y);
  while (true) {
    if (!std::isfinite(lg.loss)) {
      throw std::runtime_error("logistic regression diverged at iteration " + std::to_string(iter));
    }
    if (loss_trace) loss_trace->push_back(lg.loss);
    double gnorm = std::abs(lg.grad_bias);
    for (double g : lg.grad_weights) gnorm = std::max(gnorm, std::abs(g));
    m.training.final_loss = lg.loss;
    m.training.final_gradient_norm = gnorm;
    if (gnorm < hyper.tolerance) {
      m.training.converged = true;
      break;
    }
    if (iter == hyper.max_iter) break;
    for (std::size_t t = 0; t < m.weights.size(); ++t) {
      m.weights[t] -= hyper.learning_rate * lg.grad_weights[t];
    }
    m.bias -= hyper.learning_rate * lg.grad_bias;
    ++iter;
    lg = lr_loss_grad(m, X, y);
  }
  m.training.iterations = iter;
  return m;
}

double predict_proba_lr(const LrModel& model, const SparseVector& x) {
  check_dim(model.dim(), x);
  return sigmoid(sparse_dot_dense(x, model.weights) + model.bias);
}

// ---------------------------------------------------------------------------
// One-vs-rest

double positive_score(const BinaryModel& model, const SparseVector& x) {
  return std::visit(
      [&](const auto& m) -> double {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, MnbModel>) {
          return predict_mnb(m, x).positive_probability();
        } else if constexpr (std::is_same_v<M, LrModel>) {
          return predict_proba_lr(m, x);
        } else {
          return m.value ? 1.0 : 0.0;
        }
      },
      model);
}

std::string_view model_kind_name(ModelKind kind) { return kind == ModelKind::mnb ? "mnb" : "lr"; }

ModelKind parse_model_kind(std::string_view name) {
  if (name == "mnb") return ModelKind::mnb;
  if (name == "lr") return ModelKind::lr;
  throw std::invalid_argument("unknown model kind '" + std::string(name) + "' (expected mnb or lr)");
}

BinaryModel train_binary(std::span<const SparseVector> X, std::span<const int> y, const TrainOptions& opts) {
  if (opts.kind == ModelKind::mnb) return train_mnb(X, y, opts.alpha);
  return train_lr(X, y, opts.lr);
}

OvrModel train_ovr(std::span<const SparseVector> X, std::span<const std::vector<int>> columns,
                   std::span<const std::string> labels, const TrainOptions& opts) {
  if (columns.size() != labels.size()) throw std::invalid_argument("one column per label required");
  OvrModel m;
  m.labels.assign(labels.begin(), labels.end());
  for (std::size_t l = 0; l < labels.size(); ++l) {
    const auto& col = columns[l];
    if (col.size() != X.size()) throw std::invalid_argument("label column length differs from rows");
    const auto positives = static_cast<std::size_t>(std::count(col.begin(), col.end(), 1));
    if (positives == 0 || positives == col.size()) {
      const bool value = positives > 0;
      m.models.emplace_back(ConstantModel{value});
      m.warnings.push_back("label '" + labels[l] + "' has a single class in training data; predicting " +
                           (value ? "true" : "false") + " for every input");
    } else {
      m.models.push_back(train_binary(X, col, opts));
    }
    m.thresholds.push_back(0.5);
  }
  return m;
}

OvrPrediction predict_ovr(const OvrModel& model, const SparseVector& x, std::span<const double> thresholds) {
  if (thresholds.size() != model.size()) throw std::invalid_argument("one threshold per label required");
  OvrPrediction p;
  p.scores.reserve(model.size());
  p.decisions.reserve(model.size());
  for (std::size_t l = 0; l < model.size(); ++l) {
    const double s = positive_score(model.models[l], x);
    p.scores.push_back(s);
    p.decisions.push_back(s > thresholds[l]);
  }
  return p;
}

OvrPrediction predict_ovr(const OvrModel& model, const SparseVector& x) {
  return predict_ovr(model, x, model.thresholds);
}

// ---------------------------------------------------------------------------
// Text models

TextModel train_text_model(std::span<const LabeledTweet> train, Task task, const TrainOptions& opts,
                           const NormalizationConfig& norm) {
  if (train.empty()) throw DataError("no training records for task " + std::string(task_name(task)));
  std::vector<Document> docs;
  docs.reserve(train.size());
  for (const auto& r : train) docs.push_back(analyze(r.tweet.text, norm));

  TextModel m;
  m.task = task;
  m.kind = opts.kind;
  m.normalization = norm;
  m.vocabulary = fit_vocabulary(docs);
  const auto X = transform_all(docs, m.vocabulary);
  const auto& labels = task_labels(task);
  std::vector<std::vector<int>> columns;
  for (std::size_t l = 0; l < labels.size(); ++l) columns.push_back(label_column(train, task, l));
  m.ovr = train_ovr(X, columns, labels, opts);
  return m;
}

TaskPrediction predict_text(const TextModel& model, std::string_view text) {
  const auto x = transform(analyze(text, model.normalization), model.vocabulary);
  const auto p = predict_ovr(model.ovr, x);
  TaskPrediction out;
  out.scores = p.scores;
  for (std::size_t l = 0; l < p.decisions.size(); ++l) {
    if (p.decisions[l]) out.labels.set(l);
  }
  return out;
}

std::vector<TaskPrediction> LocalClassifier::predict(std::span<const std::string> texts) {
  std::vector<TaskPrediction> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(predict_text(model_, t));
  return out;
}

namespace {

constexpr const char* kModelFormat = "crisis-triage-model";
constexpr int kModelVersion = 1;

json binary_to_json(const BinaryModel& model) {
  return std::visit(
      [](const auto& m) -> json {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, MnbModel>) {
          return {{"type", "mnb"},
                  {"alpha", m.alpha},
                  {"log_prior", m.log_prior},
                  {"log_likelihood", m.log_likelihood}};
        } else if constexpr (std::is_same_v<M, LrModel>) {
          return {{"type", "lr"},
                  {"weights", m.weights},
                  {"bias", m.bias},
                  {"hyper",
                   {{"learning_rate", m.hyper.learning_rate},
                    {"l2", m.hyper.l2},
                    {"max_iter", m.hyper.max_iter},
                    {"tolerance", m.hyper.tolerance}}},
                  {"training",
                   {{"iterations", m.training.iterations},
                    {"final_loss", m.training.final_loss},
                    {"final_gradient_norm", m.training.final_gradient_norm},
                    {"converged", m.training.converged}}}};
        } else {
          return {{"type", "constant"}, {"value", m.value}};
        }
      },
      model);
}

BinaryModel binary_from_json(const json& j, std::size_t dim) {
  const auto type = j.at("type").get<std::string>();
  if (type == "mnb") {
    MnbModel m;
    m.alpha = j.at("alpha").get<double>();
    m.log_prior = j.at("log_prior").get<std::array<double, 2>>();
    m.log_likelihood = j.at("log_likelihood").get<std::array<std::vector<double>, 2>>();
    if (m.log_likelihood[0].size() != dim || m.log_likelihood[1].size() != dim) {
      throw DataError("MNB likelihood table does not match the vocabulary size");
    }
    return m;
  }
  if (type == "lr") {
    LrModel m;
    m.weights = j.at("weights").get<std::vector<double>>();
    m.bias = j.at("bias").get<double>();
    const auto& h = j.at("hyper");
    m.hyper.learning_rate = h.at("learning_rate").get<double>();
    m.hyper.l2 = h.at("l2").get<double>();
    m.hyper.max_iter = h.at("max_iter").get<std::size_t>();
    m.hyper.tolerance = h.at("tolerance").get<double>();
    if (auto t = j.find("training"); t != j.end()) {
      m.training.iterations = t->value("iterations", std::size_t{0});
      m.training.final_loss = t->value("final_loss", 0.0);
      m.training.final_gradient_norm = t->value("final_gradient_norm", 0.0);
      m.training.converged = t->value("converged", false);
    }
    if (m.weights.size() != dim) throw DataError("LR weight vector does not match the vocabulary size");
    return m;
  }
  if (type == "constant") return ConstantModel{j.at("value").get<bool>()};
  throw DataError("unknown binary model type '" + type + "'");
}

}  // namespace

json to_json(const TextModel& model) {
  json labels = json::array();
  for (std::size_t l = 0; l < model.ovr.size(); ++l) {
    labels.push_back({{"name", model.ovr.labels[l]},
                      {"threshold", model.ovr.thresholds[l]},
                      {"model", binary_to_json(model.ovr.models[l])}});
  }
  return {{"format", kModelFormat},
          {"version", kModelVersion},
          {"task", task_name(model.task)},
          {"kind", model_kind_name(model.kind)},
          {"normalization", to_json(model.normalization)},
          {"vocabulary", model.vocabulary.to_json()},
          {"vocabulary_hash", model.vocabulary.hash()},
          {"labels", std::move(labels)},
          {"warnings", model.ovr.warnings}};
}

TextModel text_model_from_json(const json& j) {
  try {
    if (j.value("format", std::string()) != kModelFormat) throw DataError("not a triage model file");
    if (j.value("version", 0) != kModelVersion) throw DataError("unsupported model file version");
    TextModel m;
    m.task = parse_task(j.at("task").get<std::string>());
    m.kind = parse_model_kind(j.at("kind").get<std::string>());
    m.normalization = normalization_from_json(j.at("normalization"));
    m.vocabulary = Vocabulary::from_json(j.at("vocabulary"));
    if (m.vocabulary.hash() != j.at("vocabulary_hash").get<std::string>()) {
      throw DataError("vocabulary hash mismatch");
    }
    const auto& schema = task_labels(m.task);
    const auto& labels = j.at("labels");
    if (labels.size() != schema.size()) throw DataError("model does not cover the task's label schema");
    for (std::size_t l = 0; l < labels.size(); ++l) {
      const auto name = labels[l].at("name").get<std::string>();
      if (name != schema[l]) throw DataError("unexpected label '" + name + "' in model file");
      m.ovr.labels.push_back(name);
      m.ovr.thresholds.push_back(labels[l].at("threshold").get<double>());
      m.ovr.models.push_back(binary_from_json(labels[l].at("model"), m.vocabulary.size()));
    }
    m.ovr.warnings = j.value("warnings", std::vector<std::string>{});
    return m;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed model file: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("malformed model file: ") + e.what());
  }
}

void save_model(const std::filesystem::path& path, const TextModel& model) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write " + path.string());
  f << to_json(model).dump(1) << '\n';
  if (!f) throw DataError("error while writing " + path.string());
}

TextModel load_model(const std::filesystem::path& path) {
  const auto content = detail::read_file(path.string());
  json j;
  try {
    j = json::parse(content);
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  return text_model_from_json(j);
}

}  // namespace triage
