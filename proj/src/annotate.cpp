#include "triage/annotate.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>
#include <unordered_map>

#include "csv.hpp"
#include "triage/error.hpp"
#include "triage/eval.hpp"

namespace triage {

namespace {

std::string lower(std::string s) {
  for (char& c : s) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return s;
}

// Canonical label list of one answer: {"yes"}/{"no"} for informativeness,
// validated schema names (or "both") otherwise.
std::vector<std::string> canonical_labels(Task task, const std::vector<std::string>& raw) {
  std::vector<std::string> out;
  for (const auto& r : raw) {
    auto v = lower(r);
    if (v == "none" || v == "none of the above") continue;
    out.push_back(std::move(v));
  }
  if (task == Task::informative) {
    if (out.size() != 1) throw DataError("informative answers must be a single yes/no");
    const auto& v = out.front();
    if (v == "yes" || v == "true" || v == "1") return {"yes"};
    if (v == "no" || v == "false" || v == "0") return {"no"};
    throw DataError("bad informative answer '" + v + "'");
  }
  mask_from_names(task, out);  // validates
  return out;
}

}  // namespace

std::vector<AnnotationRecord> parse_annotations(std::string_view csv) {
  std::size_t unterminated = 0;
  const auto rows = detail::parse_csv_rows(csv, &unterminated);
  if (unterminated) throw DataError("unterminated quoted field starting on line " + std::to_string(unterminated));
  if (rows.empty()) return {};
  const auto& header = rows.front().fields;
  auto col = [&](const char* name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw DataError(std::string("annotation CSV lacks column '") + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t c_id = col("tweet_id"), c_task = col("task"), c_ann = col("annotator_id"), c_lab = col("labels");

  std::vector<AnnotationRecord> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& f = rows[r].fields;
    const auto where = "annotation CSV line " + std::to_string(rows[r].line) + ": ";
    if (f.size() != header.size()) throw DataError(where + "wrong number of fields");
    try {
      AnnotationRecord rec;
      rec.tweet_id = f[c_id];
      rec.annotator_id = f[c_ann];
      if (rec.tweet_id.empty() || rec.annotator_id.empty()) throw DataError("empty tweet or annotator id");
      rec.task = parse_task(lower(f[c_task]));
      rec.labels = canonical_labels(rec.task, detail::split_list(f[c_lab]));
      out.push_back(std::move(rec));
    } catch (const DataError& e) {
      throw DataError(where + e.what());
    } catch (const std::invalid_argument& e) {
      throw DataError(where + e.what());
    }
  }
  return out;
}

std::vector<AnnotationRecord> load_annotations(const std::filesystem::path& path) {
  return parse_annotations(detail::read_file(path.string()));
}

MajorityOutcome aggregate_majority(std::span<const AnnotationRecord> records, std::size_t min_agree) {
  if (records.empty()) throw std::invalid_argument("no annotations to aggregate");
  if (min_agree == 0) throw std::invalid_argument("min_agree must be at least 1");
  const auto& first = records.front();
  std::set<std::string> annotators;
  for (const auto& r : records) {
    if (r.tweet_id != first.tweet_id || r.task != first.task) {
      throw std::invalid_argument("annotations of different tweets or tasks cannot be aggregated together");
    }
    if (!annotators.insert(r.annotator_id).second) {
      throw std::invalid_argument("annotator '" + r.annotator_id + "' answered twice");
    }
  }
  if (min_agree > records.size()) {
    throw std::invalid_argument("min_agree (" + std::to_string(min_agree) + ") exceeds the number of annotators (" +
                                std::to_string(records.size()) + ")");
  }

  MajorityOutcome out;
  if (first.task == Task::informative) {
    std::size_t yes = 0, no = 0;
    for (const auto& r : records) {
      for (const auto& l : canonical_labels(Task::informative, r.labels)) (l == "yes" ? yes : no)++;
    }
    const bool yes_wins = yes >= min_agree, no_wins = no >= min_agree;
    if (yes_wins != no_wins) {
      out.labels.informative = yes_wins;
    } else {
      out.resolved = false;
    }
    return out;
  }

  const auto& schema = task_labels(first.task);
  std::vector<std::size_t> votes(schema.size(), 0);
  for (const auto& r : records) {
    const auto mask = mask_from_names(first.task, r.labels);
    for (std::size_t l = 0; l < schema.size(); ++l) votes[l] += mask.has(l) ? 1 : 0;
  }
  LabelMask result;
  for (std::size_t l = 0; l < schema.size(); ++l) {
    if (votes[l] >= min_agree) result.set(l);
  }
  (first.task == Task::intent ? out.labels.intent : out.labels.aid) = result;
  return out;
}

AggregationResult aggregate_all(std::span<const AnnotationRecord> records, std::size_t min_agree) {
  std::map<std::pair<std::string, Task>, std::vector<AnnotationRecord>> groups;
  for (const auto& r : records) {
    auto& g = groups[{r.tweet_id, r.task}];
    for (const auto& other : g) {
      if (other.annotator_id == r.annotator_id) {
        throw DataError("annotator '" + r.annotator_id + "' labeled tweet '" + r.tweet_id + "' twice for task " +
                        std::string(task_name(r.task)));
      }
    }
    g.push_back(r);
  }
  AggregationResult out;
  for (const auto& [key, group] : groups) {
    if (group.size() < min_agree) {
      out.underannotated.push_back(key);
      continue;
    }
    const auto outcome = aggregate_majority(group, min_agree);
    if (!outcome.resolved) {
      out.unresolved.push_back(key);
      continue;
    }
    auto& labels = out.labels[key.first];
    switch (key.second) {
      case Task::informative: labels.informative = outcome.labels.informative; break;
      case Task::intent: labels.intent = outcome.labels.intent; break;
      case Task::aid: labels.aid = outcome.labels.aid; break;
    }
  }
  return out;
}

LabeledCollection apply_labels(std::span<const LabeledTweet> records, const AggregationResult& aggregation) {
  LabeledCollection out(records.begin(), records.end());
  for (auto& r : out) {
    auto it = aggregation.labels.find(r.tweet.id);
    if (it == aggregation.labels.end()) continue;
    if (it->second.informative) r.labels.informative = it->second.informative;
    if (it->second.intent) r.labels.intent = it->second.intent;
    if (it->second.aid) r.labels.aid = it->second.aid;
  }
  return out;
}

namespace {

int category(const LabelSet& s, Task task) {
  switch (task) {
    case Task::informative: return *s.informative ? 1 : 0;
    case Task::intent: return s.intent->bits();
    case Task::aid: return s.aid->bits();
  }
  return 0;
}

}  // namespace

std::vector<TaskAgreement> agreement_report(const std::map<std::string, LabelSet>& expert,
                                            const std::map<std::string, LabelSet>& majority) {
  std::vector<TaskAgreement> out;
  for (Task task : {Task::informative, Task::intent, Task::aid}) {
    std::vector<std::string> ids;
    for (const auto& [id, labels] : expert) {
      if (labels.has(task)) ids.push_back(id);
    }
    std::vector<std::string> majority_ids;
    for (const auto& [id, labels] : majority) {
      if (labels.has(task)) majority_ids.push_back(id);
    }
    if (ids.empty() && majority_ids.empty()) continue;
    if (ids != majority_ids) {
      std::vector<std::string> diff;
      std::set_symmetric_difference(ids.begin(), ids.end(), majority_ids.begin(), majority_ids.end(),
                                    std::back_inserter(diff));
      throw DataError("expert and majority labels are not aligned for task " + std::string(task_name(task)) +
                      " (first differing id '" + diff.front() + "')");
    }

    TaskAgreement a;
    a.task = task;
    a.n_items = ids.size();
    std::vector<int> ea, ma;
    for (const auto& id : ids) {
      ea.push_back(category(expert.at(id), task));
      ma.push_back(category(majority.at(id), task));
    }
    a.kappa = cohens_kappa(ea, ma);
    const auto& schema = task_labels(task);
    for (std::size_t l = 0; l < schema.size(); ++l) {
      LabelAgreement la;
      la.label = schema[l];
      std::vector<int> eb, mb;
      for (std::size_t i = 0; i < ids.size(); ++i) {
        const int e = task == Task::informative ? ea[i] : ((ea[i] >> l) & 1);
        const int m = task == Task::informative ? ma[i] : ((ma[i] >> l) & 1);
        eb.push_back(e);
        mb.push_back(m);
        ++la.confusion[e][m];
      }
      la.kappa = cohens_kappa(eb, mb);
      a.per_label.push_back(std::move(la));
    }
    out.push_back(std::move(a));
  }
  return out;
}

nlohmann::json to_json(const TaskAgreement& a) {
  nlohmann::json per_label = nlohmann::json::array();
  for (const auto& l : a.per_label) {
    per_label.push_back({{"label", l.label}, {"kappa", l.kappa}, {"confusion", l.confusion}});
  }
  return {{"task", task_name(a.task)}, {"n_items", a.n_items}, {"kappa", a.kappa}, {"per_label", std::move(per_label)}};
}

}  // namespace triage
