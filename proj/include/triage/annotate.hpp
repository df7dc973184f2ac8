#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "triage/corpus.hpp"

namespace triage {

/// One annotator's answer for one tweet and task. For the informative task
/// the labels are {"yes"} or {"no"}; for intent and aid they are label names
/// ("both" allowed for intent), empty meaning "none of the above".
struct AnnotationRecord {
  std::string tweet_id;
  Task task = Task::informative;
  std::string annotator_id;
  std::vector<std::string> labels;
};

/// CSV with header tweet_id,task,annotator_id,labels; labels are
/// semicolon-joined. Throws DataError on unreadable files or bad rows.
std::vector<AnnotationRecord> load_annotations(const std::filesystem::path& path);
std::vector<AnnotationRecord> parse_annotations(std::string_view csv);

struct MajorityOutcome {
  LabelSet labels;  // only the record task's field is set
  bool resolved = true;
};

/// Majority aggregation for one tweet and task. Multi-label tasks keep each
/// label chosen by at least `min_agree` annotators; the informative task
/// takes the value chosen by at least `min_agree`, else it is unresolved.
/// Throws std::invalid_argument when records are empty, mix tweets or tasks,
/// or there are fewer annotators than min_agree.
MajorityOutcome aggregate_majority(std::span<const AnnotationRecord> records,
                                   std::size_t min_agree = 3);

struct AggregationResult {
  std::map<std::string, LabelSet> labels;                   // by tweet id
  std::vector<std::pair<std::string, Task>> unresolved;     // left unlabeled
  std::vector<std::pair<std::string, Task>> underannotated;  // < min_agree annotators
};

/// Groups records by (tweet, task) and aggregates each group. Throws
/// DataError if an annotator answers the same tweet and task twice.
AggregationResult aggregate_all(std::span<const AnnotationRecord> records,
                                std::size_t min_agree = 3);

/// Copies aggregated labels onto matching records (by id). Tasks absent from
/// the aggregation keep their existing labels.
LabeledCollection apply_labels(std::span<const LabeledTweet> records,
                               const AggregationResult& aggregation);

struct LabelAgreement {
  std::string label;
  double kappa = 0.0;
  /// confusion[expert][majority], 0 = absent, 1 = present
  std::array<std::array<std::size_t, 2>, 2> confusion{};
};

struct TaskAgreement {
  Task task = Task::informative;
  std::size_t n_items = 0;
  /// Kappa over whole label sets treated as categories.
  double kappa = 0.0;
  std::vector<LabelAgreement> per_label;
};

/// Cohen's kappa of expert versus majority labels per task. Throws DataError
/// when the two sides do not label the same ids for a task.
std::vector<TaskAgreement> agreement_report(const std::map<std::string, LabelSet>& expert,
                                            const std::map<std::string, LabelSet>& majority);

nlohmann::json to_json(const TaskAgreement& a);

}  // namespace triage
