#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace triage {

/// The three classification tasks. Intent and aid are multi-label and only
/// apply to informative messages.
enum class Task { informative, intent, aid };

std::string_view task_name(Task task);
Task parse_task(std::string_view name);

/// Label names of a task in schema order. The informative task has the single
/// label "informative".
const std::vector<std::string>& task_labels(Task task);

/// Subset of a task's label schema, bit i set for task_labels(task)[i].
class LabelMask {
 public:
  LabelMask() = default;
  explicit LabelMask(std::uint8_t bits) : bits_(bits) {}

  bool has(std::size_t i) const { return (bits_ >> i) & 1u; }
  void set(std::size_t i) { bits_ = static_cast<std::uint8_t>(bits_ | (1u << i)); }
  bool empty() const { return bits_ == 0; }
  std::uint8_t bits() const { return bits_; }
  std::size_t count() const;

  friend bool operator==(LabelMask, LabelMask) = default;

 private:
  std::uint8_t bits_ = 0;
};

/// Parses lowercase label names ("need", "food", ...); throws DataError on an
/// unknown name. "both" expands to {need, supply} for the intent task.
LabelMask mask_from_names(Task task, std::span<const std::string> names);
std::vector<std::string> mask_names(Task task, LabelMask mask);

struct Tweet {
  std::string id;
  std::string text;
  std::optional<std::string> created_at;
  std::optional<std::string> event;

  friend bool operator==(const Tweet&, const Tweet&) = default;
};

/// Gold or predicted labels. Unset fields mean "not annotated for that task";
/// an empty mask is the "none of the above" outcome.
struct LabelSet {
  std::optional<bool> informative;
  std::optional<LabelMask> intent;
  std::optional<LabelMask> aid;

  bool has(Task task) const;
  bool any() const { return informative || intent || aid; }

  friend bool operator==(const LabelSet&, const LabelSet&) = default;
};

struct LabeledTweet {
  Tweet tweet;
  LabelSet labels;

  friend bool operator==(const LabeledTweet&, const LabeledTweet&) = default;
};

using LabeledCollection = std::vector<LabeledTweet>;

enum class FileFormat { jsonl, csv };

/// Picks the format from the extension (.csv, else JSONL).
FileFormat format_for_path(const std::filesystem::path& path);
FileFormat parse_format(std::string_view name);

struct RecordError {
  std::size_t line = 0;  // 1-based line (JSONL) or row (CSV, header = 1)
  std::string message;
};

struct LoadResult {
  LabeledCollection records;
  std::vector<RecordError> errors;

  std::size_t skipped() const { return errors.size(); }
};

/// Reads a JSONL or CSV corpus. Malformed rows, empty texts and duplicate ids
/// are skipped and reported in `errors`; the first occurrence of an id wins.
/// Throws DataError when the file cannot be read.
LoadResult load_tweets(const std::filesystem::path& path, FileFormat format);
LoadResult load_tweets(const std::filesystem::path& path);
LoadResult parse_jsonl(std::string_view content);
LoadResult parse_csv(std::string_view content);

nlohmann::json to_json(const LabeledTweet& record);
LabeledTweet labeled_tweet_from_json(const nlohmann::json& j);

std::string to_jsonl(std::span<const LabeledTweet> records);
std::string to_csv(std::span<const LabeledTweet> records);
/// Writes CSV for a .csv path, JSONL otherwise.
void save_tweets(const std::filesystem::path& path, std::span<const LabeledTweet> records);

/// Records carrying gold labels for `task`. For intent and aid, records whose
/// informative label is false are excluded.
LabeledCollection select_for_task(std::span<const LabeledTweet> records, Task task);

/// Binary gold column for label `label_index` of `task`; every record must
/// carry the task's labels.
std::vector<int> label_column(std::span<const LabeledTweet> records, Task task,
                              std::size_t label_index);

struct SplitConfig {
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
  /// When set, the shuffle is done per label signature of this task and the
  /// train quota is apportioned across strata by largest remainder.
  std::optional<Task> stratify;
};

struct Split {
  LabeledCollection train;
  LabeledCollection test;
};

/// floor(fraction * n), tolerant of binary rounding in the product.
std::size_t train_size(std::size_t n, double fraction);

/// Seeded shuffle split. |train| = floor(train_fraction * n); both halves keep
/// the input's relative order. Throws std::invalid_argument on an empty
/// collection or a fraction outside (0, 1).
Split split_train_test(std::span<const LabeledTweet> records, const SplitConfig& cfg);

/// Index form of the split, used by split_train_test.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(
    std::span<const LabeledTweet> records, const SplitConfig& cfg);

}  // namespace triage
