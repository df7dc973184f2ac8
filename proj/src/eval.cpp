#include "triage/eval.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

#include "triage/error.hpp"

namespace triage {

using nlohmann::json;

namespace {

void check_pair(std::span<const int> gold, std::span<const int> pred) {
  if (gold.size() != pred.size()) {
    throw std::invalid_argument("length mismatch: " + std::to_string(gold.size()) + " gold vs " +
                                std::to_string(pred.size()) + " predicted");
  }
  if (gold.empty()) throw std::invalid_argument("cannot score an empty sequence");
}

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

void finish_scores(LabelScores& s) {
  s.precision = ratio(s.tp, s.tp + s.fp);
  s.recall = ratio(s.tp, s.tp + s.fn);
  s.f1 = ratio(2 * s.tp, 2 * s.tp + s.fp + s.fn);
}

void zero_division_warnings(const LabelScores& s, std::vector<std::string>& out) {
  if (s.tp + s.fp == 0) out.push_back("label '" + s.label + "': no predicted positives, precision set to 0");
  if (s.tp + s.fn == 0) out.push_back("label '" + s.label + "': no gold positives, recall set to 0");
}

}  // namespace

double accuracy(std::span<const int> gold, std::span<const int> pred) {
  check_pair(gold, pred);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) hits += gold[i] == pred[i] ? 1 : 0;
  return ratio(hits, gold.size());
}

LabelScores score_label(std::string label, std::span<const int> gold, std::span<const int> pred) {
  if (gold.size() != pred.size()) throw std::invalid_argument("label columns differ in length");
  LabelScores s;
  s.label = std::move(label);
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const bool g = gold[i] != 0, p = pred[i] != 0;
    if (g && p) ++s.tp;
    else if (!g && p) ++s.fp;
    else if (g && !p) ++s.fn;
    else ++s.tn;
  }
  finish_scores(s);
  return s;
}

F1Report f1_scores(std::span<const std::vector<int>> gold, std::span<const std::vector<int>> pred,
                   std::span<const std::string> labels) {
  if (gold.size() != pred.size() || gold.size() != labels.size()) {
    throw std::invalid_argument("gold, predicted and label lists must have the same number of labels");
  }
  if (gold.empty()) throw std::invalid_argument("no labels to score");
  F1Report r;
  LabelScores pooled;
  pooled.label = "micro";
  double f1_sum = 0.0;
  for (std::size_t l = 0; l < labels.size(); ++l) {
    if (gold[l].size() != gold.front().size() || pred[l].size() != gold.front().size()) {
      throw std::invalid_argument("label columns differ in length");
    }
    auto s = score_label(labels[l], gold[l], pred[l]);
    zero_division_warnings(s, r.warnings);
    pooled.tp += s.tp;
    pooled.fp += s.fp;
    pooled.fn += s.fn;
    pooled.tn += s.tn;
    f1_sum += s.f1;
    r.per_label.push_back(std::move(s));
  }
  finish_scores(pooled);
  r.micro_f1 = pooled.f1;
  r.macro_f1 = f1_sum / static_cast<double>(labels.size());
  return r;
}

BinaryScores binary_scores(std::span<const int> gold, std::span<const int> pred, std::string positive_label) {
  check_pair(gold, pred);
  std::vector<int> gold_neg(gold.size()), pred_neg(pred.size());
  for (std::size_t i = 0; i < gold.size(); ++i) {
    gold_neg[i] = gold[i] ? 0 : 1;
    pred_neg[i] = pred[i] ? 0 : 1;
  }
  const std::vector<std::vector<int>> g{std::vector<int>(gold.begin(), gold.end()), gold_neg};
  const std::vector<std::vector<int>> p{std::vector<int>(pred.begin(), pred.end()), pred_neg};
  const std::vector<std::string> names{positive_label, "not_" + positive_label};
  auto both = f1_scores(g, p, names);

  BinaryScores b;
  b.accuracy = accuracy(gold, pred);
  b.positive = both.per_label[0];
  b.negative = both.per_label[1];
  b.positive_f1 = b.positive.f1;
  b.micro_f1 = both.micro_f1;
  b.macro_f1 = both.macro_f1;
  b.warnings = std::move(both.warnings);
  return b;
}

double cohens_kappa(std::span<const int> a, std::span<const int> b) {
  check_pair(a, b);
  std::map<int, std::pair<std::size_t, std::size_t>> marginals;
  std::size_t agree = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ++marginals[a[i]].first;
    ++marginals[b[i]].second;
    agree += a[i] == b[i] ? 1 : 0;
  }
  const double n = static_cast<double>(a.size());
  const double p_o = static_cast<double>(agree) / n;
  double p_e = 0.0;
  for (const auto& [label, counts] : marginals) {
    p_e += (static_cast<double>(counts.first) / n) * (static_cast<double>(counts.second) / n);
  }
  if (marginals.size() == 1) return 1.0;  // both raters used one and the same label
  return (p_o - p_e) / (1.0 - p_e);
}

json to_json(const LabelScores& s) {
  return {{"label", s.label}, {"tp", s.tp},           {"fp", s.fp},         {"fn", s.fn}, {"tn", s.tn},
          {"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}, {"support", s.support()}};
}

json to_json(const RunMetrics& m) {
  json per_label = json::array();
  for (const auto& s : m.per_label) per_label.push_back(to_json(s));
  return {{"seed", m.seed},
          {"n_train", m.n_train},
          {"n_test", m.n_test},
          {"accuracy", m.accuracy},
          {"positive_f1", m.positive_f1 ? json(*m.positive_f1) : json(nullptr)},
          {"micro_f1", m.micro_f1},
          {"macro_f1", m.macro_f1},
          {"per_label", std::move(per_label)},
          {"warnings", m.warnings}};
}

json to_json(const MetricsReport& r) {
  json runs = json::array();
  for (const auto& m : r.runs) runs.push_back(to_json(m));
  json per_label = json::array();
  for (const auto& s : r.per_label) {
    per_label.push_back({{"label", s.label}, {"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}});
  }
  return {{"task", task_name(r.task)},
          {"model", model_kind_name(r.kind)},
          {"train_fraction", r.train_fraction},
          {"seeds", r.seeds},
          {"runs", std::move(runs)},
          {"mean",
           {{"accuracy", r.accuracy},
            {"positive_f1", r.positive_f1 ? json(*r.positive_f1) : json(nullptr)},
            {"micro_f1", r.micro_f1},
            {"macro_f1", r.macro_f1},
            {"per_label", std::move(per_label)}}}};
}

RunMetrics score_predictions(Task task, std::span<const LabeledTweet> records,
                             std::span<const TaskPrediction> predictions) {
  if (records.size() != predictions.size()) throw std::invalid_argument("one prediction per record required");
  if (records.empty()) throw DataError("no records to score");
  RunMetrics m;
  m.n_test = records.size();
  const auto& labels = task_labels(task);

  if (task == Task::informative) {
    const auto gold = label_column(records, task, 0);
    std::vector<int> pred;
    for (const auto& p : predictions) pred.push_back(p.labels.has(0) ? 1 : 0);
    auto b = binary_scores(gold, pred, labels[0]);
    m.accuracy = b.accuracy;
    m.positive_f1 = b.positive_f1;
    m.micro_f1 = b.micro_f1;
    m.macro_f1 = b.macro_f1;
    m.per_label = {b.positive};
    m.warnings = std::move(b.warnings);
    return m;
  }

  std::vector<std::vector<int>> gold, pred;
  for (std::size_t l = 0; l < labels.size(); ++l) {
    gold.push_back(label_column(records, task, l));
    std::vector<int> col;
    for (const auto& p : predictions) col.push_back(p.labels.has(l) ? 1 : 0);
    pred.push_back(std::move(col));
  }
  auto f = f1_scores(gold, pred, labels);
  std::size_t exact = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    bool same = true;
    for (std::size_t l = 0; l < labels.size(); ++l) same = same && gold[l][i] == pred[l][i];
    exact += same ? 1 : 0;
  }
  m.accuracy = static_cast<double>(exact) / static_cast<double>(records.size());
  m.micro_f1 = f.micro_f1;
  m.macro_f1 = f.macro_f1;
  m.per_label = std::move(f.per_label);
  m.warnings = std::move(f.warnings);
  return m;
}

RunMetrics evaluate_classifier(Classifier& classifier, std::span<const LabeledTweet> records) {
  std::vector<std::string> texts;
  texts.reserve(records.size());
  for (const auto& r : records) texts.push_back(r.tweet.text);
  const auto preds = classifier.predict(texts);
  return score_predictions(classifier.task(), records, preds);
}

void summarize(MetricsReport& report) {
  const auto n = static_cast<double>(report.runs.size());
  if (report.runs.empty()) return;
  report.accuracy = report.micro_f1 = report.macro_f1 = 0.0;
  bool have_positive = true;
  double positive = 0.0;
  report.per_label.clear();
  for (const auto& s : report.runs.front().per_label) report.per_label.push_back({s.label, 0.0, 0.0, 0.0});
  for (const auto& run : report.runs) {
    report.accuracy += run.accuracy;
    report.micro_f1 += run.micro_f1;
    report.macro_f1 += run.macro_f1;
    if (run.positive_f1) positive += *run.positive_f1;
    else have_positive = false;
    for (std::size_t l = 0; l < report.per_label.size() && l < run.per_label.size(); ++l) {
      report.per_label[l].precision += run.per_label[l].precision;
      report.per_label[l].recall += run.per_label[l].recall;
      report.per_label[l].f1 += run.per_label[l].f1;
    }
  }
  report.accuracy /= n;
  report.micro_f1 /= n;
  report.macro_f1 /= n;
  report.positive_f1 = have_positive ? std::optional<double>(positive / n) : std::nullopt;
  for (auto& s : report.per_label) {
    s.precision /= n;
    s.recall /= n;
    s.f1 /= n;
  }
}

std::vector<std::uint64_t> ExperimentConfig::run_seeds() const {
  if (!seeds.empty()) return seeds;
  std::vector<std::uint64_t> out;
  for (std::size_t i = 0; i < n_runs; ++i) out.push_back(base_seed + i);
  return out;
}

RunMetrics run_once(std::span<const LabeledTweet> data, const ExperimentConfig& cfg, std::uint64_t seed) {
  SplitConfig split_cfg;
  split_cfg.train_fraction = cfg.train_fraction;
  split_cfg.seed = seed;
  if (cfg.stratify) split_cfg.stratify = cfg.task;
  const auto split = split_train_test(data, split_cfg);
  if (split.test.empty()) throw DataError("test partition is empty; need more data");

  LocalClassifier clf(train_text_model(split.train, cfg.task, cfg.train, cfg.normalization));
  auto m = evaluate_classifier(clf, split.test);
  m.seed = seed;
  m.n_train = split.train.size();
  const auto& training_warnings = clf.model().ovr.warnings;
  m.warnings.insert(m.warnings.begin(), training_warnings.begin(), training_warnings.end());
  return m;
}

MetricsReport run_experiment(std::span<const LabeledTweet> data, const ExperimentConfig& cfg) {
  const auto records = select_for_task(data, cfg.task);
  if (records.size() < 2) throw DataError("need at least two labeled records for " + std::string(task_name(cfg.task)));
  const auto& labels = task_labels(cfg.task);
  for (std::size_t l = 0; l < labels.size(); ++l) {
    const auto col = label_column(records, cfg.task, l);
    const auto pos = static_cast<std::size_t>(std::count(col.begin(), col.end(), 1));
    if (cfg.task == Task::informative && (pos == 0 || pos == col.size())) {
      throw DataError("informativeness data must contain both classes");
    }
    if (pos == 0) throw DataError("label '" + labels[l] + "' has no positive examples");
  }

  const auto seeds = cfg.run_seeds();
  if (seeds.empty()) throw std::invalid_argument("at least one run is required");
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size()) {
    throw std::invalid_argument("run seeds must be distinct");
  }

  MetricsReport report;
  report.task = cfg.task;
  report.kind = cfg.train.kind;
  report.train_fraction = cfg.train_fraction;
  report.seeds = seeds;
  for (auto seed : seeds) report.runs.push_back(run_once(records, cfg, seed));
  summarize(report);
  return report;
}

std::vector<EventResult> cross_event_eval(Classifier& informative, std::span<const NamedCollection> events) {
  if (informative.task() != Task::informative) {
    throw std::invalid_argument("cross-event evaluation needs an informativeness classifier");
  }
  std::vector<EventResult> out;
  for (const auto& ev : events) {
    for (const auto& r : ev.records) {
      if (!r.labels.informative) {
        throw DataError("event '" + ev.name + "': record '" + r.tweet.id + "' has no informative label");
      }
    }
    if (ev.records.empty()) throw DataError("event '" + ev.name + "' has no records");
    std::vector<std::string> texts;
    for (const auto& r : ev.records) texts.push_back(r.tweet.text);
    const auto preds = informative.predict(texts);

    EventResult res;
    res.event = ev.name;
    res.metrics = score_predictions(Task::informative, ev.records, preds);
    const bool any_positive = std::any_of(ev.records.begin(), ev.records.end(),
                                          [](const LabeledTweet& r) { return *r.labels.informative; });
    if (!any_positive) res.metrics.warnings.push_back("event '" + ev.name + "' has no positive gold labels; F1 is 0");
    for (std::size_t i = 0; i < ev.records.size(); ++i) {
      const bool gold = *ev.records[i].labels.informative;
      const bool pred = preds[i].labels.has(0);
      if (gold != pred) {
        res.disagreements.push_back({ev.records[i].tweet.id, ev.records[i].tweet.text, gold, pred,
                                     preds[i].scores.empty() ? 0.0 : preds[i].scores.front()});
      }
    }
    out.push_back(std::move(res));
  }
  return out;
}

json to_json(const EventResult& r) {
  json dis = json::array();
  for (const auto& d : r.disagreements) {
    dis.push_back({{"id", d.id}, {"text", d.text}, {"gold", d.gold}, {"predicted", d.predicted}, {"score", d.score}});
  }
  return {{"event", r.event}, {"metrics", to_json(r.metrics)}, {"disagreements", std::move(dis)}};
}

}  // namespace triage
