#include "triage/corpus.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <stdexcept>
#include <unordered_set>

#include "csv.hpp"
#include "triage/error.hpp"

namespace triage {

using nlohmann::json;

std::string_view task_name(Task task) {
  switch (task) {
    case Task::informative: return "informative";
    case Task::intent: return "intent";
    case Task::aid: return "aid";
  }
  return "?";
}

Task parse_task(std::string_view name) {
  if (name == "informative") return Task::informative;
  if (name == "intent") return Task::intent;
  if (name == "aid") return Task::aid;
  throw std::invalid_argument("unknown task '" + std::string(name) + "'");
}

const std::vector<std::string>& task_labels(Task task) {
  static const std::vector<std::string> informative{"informative"};
  static const std::vector<std::string> intent{"need", "supply"};
  static const std::vector<std::string> aid{"food", "shelter", "health", "wash"};
  switch (task) {
    case Task::informative: return informative;
    case Task::intent: return intent;
    case Task::aid: return aid;
  }
  return informative;
}

std::size_t LabelMask::count() const { return static_cast<std::size_t>(std::popcount(bits_)); }

LabelMask mask_from_names(Task task, std::span<const std::string> names) {
  const auto& schema = task_labels(task);
  LabelMask mask;
  for (const auto& name : names) {
    if (task == Task::intent && name == "both") {
      mask.set(0);
      mask.set(1);
      continue;
    }
    auto it = std::find(schema.begin(), schema.end(), name);
    if (it == schema.end()) {
      throw DataError("unknown " + std::string(task_name(task)) + " label '" + name + "'");
    }
    mask.set(static_cast<std::size_t>(it - schema.begin()));
  }
  return mask;
}

std::vector<std::string> mask_names(Task task, LabelMask mask) {
  const auto& schema = task_labels(task);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (mask.has(i)) out.push_back(schema[i]);
  }
  return out;
}

bool LabelSet::has(Task task) const {
  switch (task) {
    case Task::informative: return informative.has_value();
    case Task::intent: return intent.has_value();
    case Task::aid: return aid.has_value();
  }
  return false;
}

FileFormat format_for_path(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".csv" ? FileFormat::csv : FileFormat::jsonl;
}

FileFormat parse_format(std::string_view name) {
  if (name == "jsonl" || name == "json") return FileFormat::jsonl;
  if (name == "csv") return FileFormat::csv;
  throw std::invalid_argument("unknown format '" + std::string(name) + "'");
}

namespace {

std::optional<std::string> optional_string(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw DataError(std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

std::optional<LabelMask> optional_mask(const json& labels, const char* key, Task task) {
  auto it = labels.find(key);
  if (it == labels.end() || it->is_null()) return std::nullopt;
  if (!it->is_array()) throw DataError(std::string("labels.") + key + " must be an array");
  std::vector<std::string> names;
  for (const auto& v : *it) {
    if (!v.is_string()) throw DataError(std::string("labels.") + key + " must hold strings");
    names.push_back(v.get<std::string>());
  }
  return mask_from_names(task, names);
}

// Rejects empty texts and repeated ids into the error list; first id wins.
class CollectionBuilder {
 public:
  void add(LabeledTweet record, std::size_t line, LoadResult& out) {
    if (record.tweet.text.empty()) {
      out.errors.push_back({line, "empty text for id '" + record.tweet.id + "'"});
      return;
    }
    if (!seen_.insert(record.tweet.id).second) {
      out.errors.push_back({line, "duplicate id '" + record.tweet.id + "'"});
      return;
    }
    out.records.push_back(std::move(record));
  }

 private:
  std::unordered_set<std::string> seen_;
};

std::optional<bool> parse_bool_cell(const std::string& cell) {
  std::string v = cell;
  std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
  if (v.empty()) return std::nullopt;
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw DataError("bad boolean '" + cell + "'");
}

// Empty cell = not annotated; "none" = annotated with no labels.
std::optional<LabelMask> parse_mask_cell(const std::string& cell, Task task) {
  if (cell.empty()) return std::nullopt;
  if (cell == "none") return LabelMask{};
  auto names = detail::split_list(cell);
  return mask_from_names(task, names);
}

}  // namespace

LabeledTweet labeled_tweet_from_json(const json& j) {
  if (!j.is_object()) throw DataError("record must be a JSON object");
  LabeledTweet r;
  auto id = j.find("id");
  if (id == j.end()) throw DataError("missing 'id'");
  if (id->is_string()) {
    r.tweet.id = id->get<std::string>();
  } else if (id->is_number_integer()) {
    r.tweet.id = id->dump();
  } else {
    throw DataError("'id' must be a string");
  }
  if (r.tweet.id.empty()) throw DataError("empty 'id'");
  auto text = j.find("text");
  if (text == j.end() || !text->is_string()) throw DataError("missing or non-string 'text'");
  r.tweet.text = text->get<std::string>();
  r.tweet.created_at = optional_string(j, "created_at");
  r.tweet.event = optional_string(j, "event");

  auto labels = j.find("labels");
  if (labels != j.end() && !labels->is_null()) {
    if (!labels->is_object()) throw DataError("'labels' must be an object");
    auto inf = labels->find("informative");
    if (inf != labels->end() && !inf->is_null()) {
      if (!inf->is_boolean()) throw DataError("labels.informative must be a boolean");
      r.labels.informative = inf->get<bool>();
    }
    r.labels.intent = optional_mask(*labels, "intent", Task::intent);
    r.labels.aid = optional_mask(*labels, "aid", Task::aid);
  }
  return r;
}

json to_json(const LabeledTweet& record) {
  json j;
  j["id"] = record.tweet.id;
  j["text"] = record.tweet.text;
  if (record.tweet.created_at) j["created_at"] = *record.tweet.created_at;
  if (record.tweet.event) j["event"] = *record.tweet.event;
  if (record.labels.any()) {
    json labels = json::object();
    if (record.labels.informative) labels["informative"] = *record.labels.informative;
    if (record.labels.intent) labels["intent"] = mask_names(Task::intent, *record.labels.intent);
    if (record.labels.aid) labels["aid"] = mask_names(Task::aid, *record.labels.aid);
    j["labels"] = std::move(labels);
  }
  return j;
}

LoadResult parse_jsonl(std::string_view content) {
  LoadResult out;
  CollectionBuilder builder;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < content.size()) {
    std::size_t end = content.find('\n', start);
    if (end == std::string_view::npos) end = content.size();
    std::string_view line = content.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    try {
      builder.add(labeled_tweet_from_json(json::parse(line)), line_no, out);
    } catch (const json::exception& e) {
      out.errors.push_back({line_no, std::string("malformed JSON: ") + e.what()});
    } catch (const DataError& e) {
      out.errors.push_back({line_no, e.what()});
    }
  }
  return out;
}

LoadResult parse_csv(std::string_view content) {
  LoadResult out;
  std::size_t unterminated = 0;
  auto rows = detail::parse_csv_rows(content, &unterminated);
  if (rows.empty()) return out;

  std::map<std::string, std::size_t> column;
  for (std::size_t i = 0; i < rows[0].fields.size(); ++i) column[rows[0].fields[i]] = i;
  if (!column.count("id") || !column.count("text")) {
    throw DataError("CSV header must contain 'id' and 'text'");
  }
  auto cell = [&](const detail::CsvRow& row, const char* name) -> std::string {
    auto it = column.find(name);
    if (it == column.end() || it->second >= row.fields.size()) return {};
    return row.fields[it->second];
  };

  CollectionBuilder builder;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.fields.size() != rows[0].fields.size()) {
      out.errors.push_back({row.line, "expected " + std::to_string(rows[0].fields.size()) +
                                          " fields, got " + std::to_string(row.fields.size())});
      continue;
    }
    try {
      LabeledTweet rec;
      rec.tweet.id = cell(row, "id");
      if (rec.tweet.id.empty()) throw DataError("empty 'id'");
      rec.tweet.text = cell(row, "text");
      if (auto v = cell(row, "created_at"); !v.empty()) rec.tweet.created_at = v;
      if (auto v = cell(row, "event"); !v.empty()) rec.tweet.event = v;
      rec.labels.informative = parse_bool_cell(cell(row, "informative"));
      rec.labels.intent = parse_mask_cell(cell(row, "intent"), Task::intent);
      rec.labels.aid = parse_mask_cell(cell(row, "aid"), Task::aid);
      builder.add(std::move(rec), row.line, out);
    } catch (const DataError& e) {
      out.errors.push_back({row.line, e.what()});
    }
  }
  if (unterminated) out.errors.push_back({unterminated, "unterminated quoted field"});
  return out;
}

LoadResult load_tweets(const std::filesystem::path& path, FileFormat format) {
  const std::string content = detail::read_file(path.string());
  return format == FileFormat::csv ? parse_csv(content) : parse_jsonl(content);
}

LoadResult load_tweets(const std::filesystem::path& path) {
  return load_tweets(path, format_for_path(path));
}

std::string to_jsonl(std::span<const LabeledTweet> records) {
  std::string out;
  for (const auto& r : records) {
    out += to_json(r).dump(-1, ' ', false, json::error_handler_t::replace);
    out.push_back('\n');
  }
  return out;
}

std::string to_csv(std::span<const LabeledTweet> records) {
  auto list = [](Task task, const std::optional<LabelMask>& mask) -> std::string {
    if (!mask) return "";
    if (mask->empty()) return "none";
    std::string joined;
    for (const auto& n : mask_names(task, *mask)) joined += (joined.empty() ? "" : ";") + n;
    return joined;
  };
  std::string out = "id,text,created_at,event,informative,intent,aid\n";
  for (const auto& r : records) {
    const auto& t = r.tweet;
    const std::string informative = r.labels.informative ? (*r.labels.informative ? "true" : "false") : "";
    const std::string fields[] = {t.id, t.text, t.created_at.value_or(""), t.event.value_or(""), informative,
                                  list(Task::intent, r.labels.intent), list(Task::aid, r.labels.aid)};
    for (std::size_t i = 0; i < std::size(fields); ++i) {
      if (i) out.push_back(',');
      out += detail::csv_escape(fields[i]);
    }
    out.push_back('\n');
  }
  return out;
}

void save_tweets(const std::filesystem::path& path, std::span<const LabeledTweet> records) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write " + path.string());
  f << (format_for_path(path) == FileFormat::csv ? to_csv(records) : to_jsonl(records));
  if (!f) throw DataError("error while writing " + path.string());
}

LabeledCollection select_for_task(std::span<const LabeledTweet> records, Task task) {
  LabeledCollection out;
  for (const auto& r : records) {
    if (!r.labels.has(task)) continue;
    if (task != Task::informative && r.labels.informative == false) continue;
    out.push_back(r);
  }
  return out;
}

std::vector<int> label_column(std::span<const LabeledTweet> records, Task task,
                              std::size_t label_index) {
  std::vector<int> col;
  col.reserve(records.size());
  for (const auto& r : records) {
    if (!r.labels.has(task)) {
      throw DataError("record '" + r.tweet.id + "' has no " + std::string(task_name(task)) +
                      " labels");
    }
    switch (task) {
      case Task::informative: col.push_back(*r.labels.informative ? 1 : 0); break;
      case Task::intent: col.push_back(r.labels.intent->has(label_index) ? 1 : 0); break;
      case Task::aid: col.push_back(r.labels.aid->has(label_index) ? 1 : 0); break;
    }
  }
  return col;
}

std::size_t train_size(std::size_t n, double fraction) {
  // 0.29 * 100 evaluates to 28.999999999999996; nudge before flooring.
  const double product = fraction * static_cast<double>(n);
  return static_cast<std::size_t>(std::floor(product + 1e-9 * std::max(1.0, product)));
}

namespace {

int stratum_key(const LabelSet& labels, Task task) {
  switch (task) {
    case Task::informative: return labels.informative ? (*labels.informative ? 1 : 0) : -1;
    case Task::intent: return labels.intent ? labels.intent->bits() : -1;
    case Task::aid: return labels.aid ? labels.aid->bits() : -1;
  }
  return -1;
}

}  // namespace

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(
    std::span<const LabeledTweet> records, const SplitConfig& cfg) {
  if (records.empty()) throw std::invalid_argument("cannot split an empty collection");
  if (!(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0)) {
    throw std::invalid_argument("train_fraction must lie strictly between 0 and 1");
  }
  const std::size_t n = records.size();
  const std::size_t n_train = train_size(n, cfg.train_fraction);
  std::mt19937_64 rng(cfg.seed);

  std::vector<std::size_t> train;
  std::vector<std::size_t> test;

  if (!cfg.stratify) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  } else {
    std::map<int, std::vector<std::size_t>> strata;
    for (std::size_t i = 0; i < n; ++i) strata[stratum_key(records[i].labels, *cfg.stratify)].push_back(i);

    // Largest-remainder apportionment so the quotas sum to n_train exactly.
    struct Quota {
      std::vector<std::size_t>* members;
      std::size_t take;
      double remainder;
      std::size_t order;
    };
    std::vector<Quota> quotas;
    std::size_t assigned = 0;
    for (auto& [key, members] : strata) {
      const double exact = cfg.train_fraction * static_cast<double>(members.size());
      const std::size_t base = train_size(members.size(), cfg.train_fraction);
      quotas.push_back({&members, base, exact - static_cast<double>(base), quotas.size()});
      assigned += base;
    }
    std::vector<std::size_t> by_remainder(quotas.size());
    std::iota(by_remainder.begin(), by_remainder.end(), 0);
    std::stable_sort(by_remainder.begin(), by_remainder.end(), [&](std::size_t a, std::size_t b) {
      return quotas[a].remainder > quotas[b].remainder;
    });
    for (std::size_t k = 0; assigned < n_train && k < by_remainder.size(); ++k) {
      auto& q = quotas[by_remainder[k]];
      if (q.take < q.members->size()) {
        ++q.take;
        ++assigned;
      }
    }
    for (auto& q : quotas) {
      std::shuffle(q.members->begin(), q.members->end(), rng);
      train.insert(train.end(), q.members->begin(), q.members->begin() + static_cast<std::ptrdiff_t>(q.take));
      test.insert(test.end(), q.members->begin() + static_cast<std::ptrdiff_t>(q.take), q.members->end());
    }
  }
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {std::move(train), std::move(test)};
}

Split split_train_test(std::span<const LabeledTweet> records, const SplitConfig& cfg) {
  auto [train_idx, test_idx] = split_indices(records, cfg);
  Split out;
  out.train.reserve(train_idx.size());
  out.test.reserve(test_idx.size());
  for (auto i : train_idx) out.train.push_back(records[i]);
  for (auto i : test_idx) out.test.push_back(records[i]);
  return out;
}

}  // namespace triage
