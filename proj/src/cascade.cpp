#include "triage/cascade.hpp"

#include <cstdio>
#include <stdexcept>

namespace triage {

using nlohmann::json;

std::string format_percent(std::size_t count, std::size_t denominator) {
  if (denominator == 0) return "0.00";
  // Half-up rounding of 10000 * count / denominator, all in integers.
  const unsigned long long c = count, d = denominator;
  const unsigned long long hundredths = (20000ULL * c + d) / (2ULL * d);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%llu.%02llu", hundredths / 100, hundredths % 100);
  return buf;
}

TriageReport build_report(std::vector<TweetTriage> records) {
  TriageReport r;
  r.total = records.size();
  std::size_t informative = 0;
  std::array<std::size_t, 2> intent{};
  std::array<std::size_t, 4> aid{};
  std::size_t both = 0;
  for (const auto& rec : records) {
    if (!rec.informative) {
      if (rec.intent || rec.aid) {
        throw std::logic_error("record '" + rec.id + "' has downstream predictions but is not informative");
      }
      continue;
    }
    ++informative;
    if (rec.intent) {
      for (std::size_t i = 0; i < intent.size(); ++i) intent[i] += rec.intent->labels.has(i) ? 1 : 0;
      if (rec.intent->labels.has(0) && rec.intent->labels.has(1)) ++both;
    }
    if (rec.aid) {
      for (std::size_t i = 0; i < aid.size(); ++i) aid[i] += rec.aid->labels.has(i) ? 1 : 0;
    }
  }
  r.informative = {informative, r.total};
  for (std::size_t i = 0; i < intent.size(); ++i) r.intent[i] = {intent[i], informative};
  for (std::size_t i = 0; i < aid.size(); ++i) r.aid[i] = {aid[i], informative};
  r.both_intents = {both, informative};
  if (both > std::min(intent[0], intent[1]) || intent[0] > informative || intent[1] > informative) {
    throw std::logic_error("intent counts violate count conservation");
  }
  r.records = std::move(records);
  return r;
}

namespace {

json share_json(const CountShare& s) {
  return {{"count", s.count}, {"denominator", s.denominator}, {"percent", s.percent()}};
}

json prediction_json(Task task, const TaskPrediction& p) {
  return {{"labels", mask_names(task, p.labels)}, {"scores", p.scores}};
}

void check_task(const Classifier& c, Task expected) {
  if (c.task() != expected) {
    throw std::invalid_argument("classifier for task '" + std::string(task_name(c.task())) +
                                "' passed where '" + std::string(task_name(expected)) + "' is needed");
  }
}

std::vector<TaskPrediction> run_stage(Classifier& c, std::span<const std::string> texts, const char* stage,
                                      const std::vector<TweetTriage>& so_far) {
  std::vector<TaskPrediction> out;
  try {
    out = c.predict(texts);
  } catch (const std::exception& e) {
    throw CascadeError(stage, e.what(), build_report(so_far));
  }
  if (out.size() != texts.size()) {
    throw CascadeError(stage,
                       "classifier returned " + std::to_string(out.size()) + " predictions for " +
                           std::to_string(texts.size()) + " texts",
                       build_report(so_far));
  }
  return out;
}

}  // namespace

json to_json(const TriageReport& report) {
  json records = json::array();
  for (const auto& rec : report.records) {
    json j = {{"id", rec.id}, {"informative", rec.informative}, {"informative_score", rec.informative_score}};
    j["intent"] = rec.intent ? prediction_json(Task::intent, *rec.intent) : json(nullptr);
    j["aid"] = rec.aid ? prediction_json(Task::aid, *rec.aid) : json(nullptr);
    records.push_back(std::move(j));
  }
  json intent = json::object();
  const auto& intent_labels = task_labels(Task::intent);
  for (std::size_t i = 0; i < intent_labels.size(); ++i) intent[intent_labels[i]] = share_json(report.intent[i]);
  intent["both"] = share_json(report.both_intents);
  json aid = json::object();
  const auto& aid_labels = task_labels(Task::aid);
  for (std::size_t i = 0; i < aid_labels.size(); ++i) aid[aid_labels[i]] = share_json(report.aid[i]);
  return {{"total", report.total},
          {"informative", share_json(report.informative)},
          {"intent", std::move(intent)},
          {"aid", std::move(aid)},
          {"records", std::move(records)}};
}

TriageReport run_cascade(std::span<const Tweet> tweets, Classifier& informative, Classifier& intent,
                         Classifier& aid) {
  check_task(informative, Task::informative);
  check_task(intent, Task::intent);
  check_task(aid, Task::aid);

  std::vector<std::string> texts;
  texts.reserve(tweets.size());
  for (const auto& t : tweets) texts.push_back(t.text);

  std::vector<TweetTriage> records;
  const auto stage1 = run_stage(informative, texts, "informative", records);
  records.resize(tweets.size());
  std::vector<std::size_t> positive;
  std::vector<std::string> positive_texts;
  for (std::size_t i = 0; i < tweets.size(); ++i) {
    records[i].id = tweets[i].id;
    records[i].informative = stage1[i].labels.has(0);
    records[i].informative_score = stage1[i].scores.empty() ? (records[i].informative ? 1.0 : 0.0)
                                                            : stage1[i].scores.front();
    if (records[i].informative) {
      positive.push_back(i);
      positive_texts.push_back(texts[i]);
    }
  }
  if (positive.empty()) return build_report(std::move(records));

  const auto stage2 = run_stage(intent, positive_texts, "intent", records);
  for (std::size_t k = 0; k < positive.size(); ++k) records[positive[k]].intent = stage2[k];
  const auto stage3 = run_stage(aid, positive_texts, "aid", records);
  for (std::size_t k = 0; k < positive.size(); ++k) records[positive[k]].aid = stage3[k];
  return build_report(std::move(records));
}

RoutingSummary routing_report(const TriageReport& report) {
  static const std::array<const char*, 4> clusters{
      "Food Security", "Shelter", "Health", "WASH (Water, Sanitation and Hygiene)"};
  RoutingSummary s;
  s.total = report.total;
  s.informative = report.informative;
  s.intent = report.intent;
  s.both_intents = report.both_intents;
  const auto& labels = task_labels(Task::aid);
  for (std::size_t i = 0; i < labels.size(); ++i) s.clusters.push_back({labels[i], clusters[i], report.aid[i]});
  return s;
}

json to_json(const RoutingSummary& s) {
  json clusters = json::array();
  for (const auto& c : s.clusters) {
    clusters.push_back({{"label", c.label}, {"cluster", c.cluster}, {"share", share_json(c.share)}});
  }
  return {{"total", s.total},
          {"informative", share_json(s.informative)},
          {"need", share_json(s.intent[0])},
          {"supply", share_json(s.intent[1])},
          {"both", share_json(s.both_intents)},
          {"clusters", std::move(clusters)}};
}

std::string format_table(const RoutingSummary& s) {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof line, "Informative: %zu of %zu (%s%%)\n\n", s.informative.count, s.total,
                s.informative.percent().c_str());
  out += line;
  std::snprintf(line, sizeof line, "%-40s %8s %8s\n", "Intent", "Tweets", "Share");
  out += line;
  const std::array<std::pair<const char*, const CountShare*>, 3> intents{
      {{"Need", &s.intent[0]}, {"Supply", &s.intent[1]}, {"Both", &s.both_intents}}};
  for (const auto& [name, share] : intents) {
    std::snprintf(line, sizeof line, "%-40s %8zu %7s%%\n", name, share->count, share->percent().c_str());
    out += line;
  }
  out += "\n";
  std::snprintf(line, sizeof line, "%-40s %8s %8s\n", "UN cluster", "Tweets", "Share");
  out += line;
  for (const auto& c : s.clusters) {
    std::snprintf(line, sizeof line, "%-40s %8zu %7s%%\n", c.cluster.c_str(), c.share.count,
                  c.share.percent().c_str());
    out += line;
  }
  std::snprintf(line, sizeof line, "\nShares are of %zu informative tweets.\n", s.informative.count);
  out += line;
  return out;
}

}  // namespace triage
