// triage: command-line front end for the crisis-message triage pipeline.
//
//   ingest -> filter -> dedup -> split -> train -> evaluate -> triage (run)
//   plus aggregate (annotation majority vote) and crossval (cross-event).
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 backend error.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "triage/annotate.hpp"
#include "triage/backend.hpp"
#include "triage/cascade.hpp"
#include "triage/corpus.hpp"
#include "triage/error.hpp"
#include "triage/eval.hpp"
#include "triage/filterquery.hpp"
#include "triage/models.hpp"
#include "triage/preprocess.hpp"
#include "triage/vectorize.hpp"

namespace {

using namespace triage;
using nlohmann::json;

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitBackend = 3;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

LabeledCollection read_records(const std::string& path, const std::string& format = "auto") {
  const auto fmt = format == "auto" ? format_for_path(path) : parse_format(format);
  auto loaded = load_tweets(path, fmt);
  if (!loaded.errors.empty()) {
    std::cerr << path << ": skipped " << loaded.skipped() << " record(s)\n";
    for (std::size_t i = 0; i < loaded.errors.size() && i < 5; ++i) {
      std::cerr << "  line " << loaded.errors[i].line << ": " << loaded.errors[i].message << '\n';
    }
    if (loaded.errors.size() > 5) std::cerr << "  ...\n";
  }
  return std::move(loaded.records);
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write " + path);
  f << text;
  if (!f) throw DataError("error while writing " + path);
}

void write_json(const std::string& path, const json& j) {
  write_text(path, j.dump(2, ' ', false, json::error_handler_t::replace) + "\n");
}

// Normalization flags shared by every subcommand that vectorizes text.
struct NormalizationFlags {
  NormalizationConfig cfg;
  std::string tag_mode = "remove_token";

  void attach(CLI::App* app) {
    app->add_option("--remove-urls", cfg.remove_urls, "Drop URL tokens")->capture_default_str();
    app->add_option("--remove-image-links", cfg.remove_image_links, "Drop image-link tokens")->capture_default_str();
    app->add_option("--remove-numbers", cfg.remove_numbers, "Drop numeric tokens")->capture_default_str();
    app->add_option("--remove-hashtags", cfg.remove_hashtags, "Apply the hashtag rule")->capture_default_str();
    app->add_option("--remove-mentions", cfg.remove_mentions, "Apply the mention rule")->capture_default_str();
    app->add_option("--remove-non-ascii", cfg.remove_non_ascii, "Drop non-ASCII bytes")->capture_default_str();
    app->add_option("--collapse-whitespace", cfg.collapse_whitespace, "Contract whitespace runs")->capture_default_str();
    app->add_option("--lowercase", cfg.lowercase, "Lowercase text")->capture_default_str();
    app->add_option("--tag-mode", tag_mode, "Hashtag/mention rule: remove_token or strip_marker")
        ->check(CLI::IsMember({"remove_token", "strip_marker"}))
        ->capture_default_str();
  }

  NormalizationConfig get() const {
    auto c = cfg;
    c.tag_mode = tag_mode == "strip_marker" ? TagMode::strip_marker : TagMode::remove_token;
    return c;
  }
};

struct TrainFlags {
  std::string model = "mnb";
  TrainOptions opts;

  void attach(CLI::App* app, bool with_kind = true) {
    if (with_kind) {
      app->add_option("--model", model, "Model kind: mnb or lr")
          ->check(CLI::IsMember({"mnb", "lr"}))
          ->capture_default_str();
    }
    app->add_option("--alpha", opts.alpha, "MNB smoothing")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--learning-rate", opts.lr.learning_rate, "LR step size")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app->add_option("--l2", opts.lr.l2, "LR L2 coefficient")->check(CLI::NonNegativeNumber)->capture_default_str();
    app->add_option("--max-iter", opts.lr.max_iter, "LR iteration cap")->capture_default_str();
    app->add_option("--tolerance", opts.lr.tolerance, "LR gradient tolerance")->capture_default_str();
  }

  TrainOptions get() const {
    auto o = opts;
    o.kind = parse_model_kind(model);
    return o;
  }
};

// Model flag value: a model file path, or "backend" to use --backend.
std::unique_ptr<Classifier> make_classifier(const std::string& spec, Task task,
                                            const std::shared_ptr<BackendClient>& backend,
                                            std::size_t batch_size) {
  if (spec == "backend") {
    if (!backend) throw UsageError("model 'backend' needs --backend");
    return std::make_unique<BackendClassifier>(backend, task, batch_size);
  }
  auto model = load_model(spec);
  if (model.task != task) {
    throw DataError(spec + " is a " + std::string(task_name(model.task)) + " model, expected " +
                    std::string(task_name(task)));
  }
  return std::make_unique<LocalClassifier>(std::move(model));
}

// ---------------------------------------------------------------------------
// Flat key/value config: "key = value" lines, '#' comments. Keys name long
// flags of the chosen subcommand; flags given on the command line win.

std::map<std::string, std::string> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t n = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    const auto e = s.find_last_not_of(" \t\r");
    s = s.substr(b, e - b + 1);
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
    return s;
  };
  while (std::getline(in, line)) {
    ++n;
    const auto t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == '[') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw UsageError(path + ":" + std::to_string(n) + ": expected key = value");
    auto key = trim(t.substr(0, eq));
    for (char& c : key) {
      if (c == '_') c = '-';
    }
    kv[key] = trim(t.substr(eq + 1));
  }
  return kv;
}

std::vector<std::string> apply_config(CLI::App& app, std::vector<std::string> args) {
  std::optional<std::string> config_path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) config_path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) config_path = args[i].substr(9);
  }
  if (!config_path) return args;

  CLI::App* sub = nullptr;
  std::size_t sub_pos = 0;
  for (std::size_t i = 0; i < args.size() && !sub; ++i) {
    if (i > 0 && args[i - 1] == "--config") continue;
    for (auto* s : app.get_subcommands({})) {
      if (s->check_name(args[i])) {
        sub = s;
        sub_pos = i;
        break;
      }
    }
  }
  const auto kv = read_config(*config_path);
  if (!sub) return args;

  auto given = [&](const std::string& flag) {
    for (const auto& a : args) {
      if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
    }
    return false;
  };
  std::vector<std::string> injected;
  for (const auto& [key, value] : kv) {
    const std::string flag = "--" + key;
    const CLI::Option* opt = sub->get_option_no_throw(flag);
    if (!opt) {
      bool known = false;
      for (auto* s : app.get_subcommands({})) known = known || s->get_option_no_throw(flag) != nullptr;
      if (!known) throw UsageError("unknown config key '" + key + "'");
      continue;  // belongs to another subcommand
    }
    if (given(flag)) continue;
    if (opt->get_expected_min() == 0) {
      if (value == "true" || value == "1" || value == "yes") injected.push_back(flag);
    } else {
      injected.push_back(flag);
      injected.push_back(value);
    }
  }
  args.insert(args.begin() + static_cast<std::ptrdiff_t>(sub_pos) + 1, injected.begin(), injected.end());
  return args;
}

void require(const std::string& value, const char* flag) {
  if (value.empty()) throw UsageError(std::string(flag) + " is required");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Crisis-message triage: filter, deduplicate, classify and route humanitarian tweets"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  app.add_option("--config", config_path, "Flat key = value file with defaults for the subcommand's flags");

  // ingest ------------------------------------------------------------------
  std::string ingest_in, ingest_out, ingest_format = "auto";
  auto* ingest = app.add_subcommand("ingest", "Read a JSONL or CSV corpus and write canonical JSONL");
  ingest->add_option("--in", ingest_in, "Input corpus");
  ingest->add_option("--format", ingest_format, "jsonl, csv or auto (by extension)")
      ->check(CLI::IsMember({"auto", "jsonl", "csv"}))
      ->capture_default_str();
  ingest->add_option("--out", ingest_out, "Output JSONL");

  // filter ------------------------------------------------------------------
  std::string filter_in, filter_out, filter_queries, filter_locations, filter_since, filter_until;
  std::string filter_combine = "and";
  std::vector<std::string> filter_lexicons;
  auto* filter = app.add_subcommand("filter", "Keep tweets matching keyword/location queries");
  filter->add_option("--in", filter_in, "Input corpus");
  filter->add_option("--out", filter_out, "Output JSONL");
  filter->add_option("--query-file", filter_queries, "One boolean query per line");
  filter->add_option("--lexicon", filter_lexicons, "Keyword lexicon file (repeatable)");
  filter->add_option("--locations", filter_locations, "Location lexicon file");
  filter->add_option("--combine", filter_combine, "How lexicons meet locations: and, or")
      ->check(CLI::IsMember({"and", "or"}))
      ->capture_default_str();
  filter->add_option("--since", filter_since, "Earliest created_at date (YYYY-MM-DD, inclusive)");
  filter->add_option("--until", filter_until, "Latest created_at date (YYYY-MM-DD, inclusive)");

  // dedup -------------------------------------------------------------------
  std::string dedup_in, dedup_out, dedup_removed;
  double dedup_threshold = 0.85;
  NormalizationFlags dedup_norm;
  auto* dedup = app.add_subcommand("dedup", "Remove near-duplicates by TF-IDF cosine similarity");
  dedup->add_option("--in", dedup_in, "Input corpus");
  dedup->add_option("--out", dedup_out, "Output JSONL");
  dedup->add_option("--threshold", dedup_threshold, "Drop when cosine is strictly above this")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  dedup->add_option("--removed", dedup_removed, "Optional JSONL of (removed_id, kept_id, similarity)");
  dedup_norm.attach(dedup);

  // split -------------------------------------------------------------------
  std::string split_in, split_train, split_test, split_stratify, split_task;
  double split_fraction = 0.8;
  std::uint64_t split_seed = 0;
  auto* split = app.add_subcommand("split", "Seeded train/test split");
  split->add_option("--in", split_in, "Labeled corpus");
  split->add_option("--train-out", split_train, "Train JSONL");
  split->add_option("--test-out", split_test, "Test JSONL");
  split->add_option("--fraction", split_fraction, "Train fraction")->capture_default_str();
  split->add_option("--seed", split_seed, "Shuffle seed")->capture_default_str();
  split->add_option("--stratify", split_stratify, "Stratify by a task's labels")
      ->check(CLI::IsMember({"informative", "intent", "aid"}));
  split->add_option("--task", split_task, "Keep only records labeled for this task before splitting")
      ->check(CLI::IsMember({"informative", "intent", "aid"}));

  // train -------------------------------------------------------------------
  std::string train_task, train_data, train_out;
  TrainFlags train_flags;
  NormalizationFlags train_norm;
  auto* train = app.add_subcommand("train", "Train an MNB or LR model for one task");
  train->add_option("--task", train_task, "informative, intent or aid")
      ->check(CLI::IsMember({"informative", "intent", "aid"}));
  train->add_option("--train", train_data, "Labeled training corpus");
  train->add_option("--out", train_out, "Model JSON");
  train_flags.attach(train);
  train_norm.attach(train);

  // evaluate ----------------------------------------------------------------
  std::string eval_task, eval_data, eval_model_file, eval_out, eval_stratify_flag;
  TrainFlags eval_flags;
  NormalizationFlags eval_norm;
  std::size_t eval_runs = 5;
  std::uint64_t eval_seed = 0;
  double eval_fraction = 0.8;
  bool eval_stratify = false;
  auto* evaluate = app.add_subcommand(
      "evaluate", "Repeated split/train/test experiment, or score a saved model on a labeled file");
  evaluate->add_option("--task", eval_task, "informative, intent or aid")
      ->check(CLI::IsMember({"informative", "intent", "aid"}));
  evaluate->add_option("--data", eval_data, "Labeled corpus");
  evaluate->add_option("--model-file", eval_model_file, "Saved model to score instead of running an experiment");
  evaluate->add_option("--runs", eval_runs, "Number of runs")->check(CLI::PositiveNumber)->capture_default_str();
  evaluate->add_option("--seed", eval_seed, "Seed of the first run; later runs use seed+1, ...")
      ->capture_default_str();
  evaluate->add_option("--fraction", eval_fraction, "Train fraction")->capture_default_str();
  evaluate->add_flag("--stratify", eval_stratify, "Stratify splits by label signature");
  evaluate->add_option("--out", eval_out, "MetricsReport JSON (default stdout)");
  eval_flags.attach(evaluate);
  eval_norm.attach(evaluate);

  // triage / run ------------------------------------------------------------
  std::string run_input, run_info, run_intent, run_aid, run_out, run_routing_out, run_backend;
  long long run_timeout_ms = 30000;
  std::size_t run_batch = 64;
  bool run_table = false;
  auto* run = app.add_subcommand("triage", "Run the informative -> intent/aid cascade and report routing counts");
  run->alias("run");
  run->add_option("--input", run_input, "Tweets to triage");
  run->add_option("--info-model", run_info, "Informativeness model file, or 'backend'");
  run->add_option("--intent-model", run_intent, "Intent model file, or 'backend'");
  run->add_option("--aid-model", run_aid, "Aid-type model file, or 'backend'");
  run->add_option("--backend", run_backend, "stdio:<command> or tcp:<host>:<port>");
  run->add_option("--timeout-ms", run_timeout_ms, "Backend response timeout")->capture_default_str();
  run->add_option("--batch-size", run_batch, "Texts per backend request")->check(CLI::PositiveNumber)->capture_default_str();
  run->add_option("--out", run_out, "TriageReport JSON (default stdout)");
  run->add_option("--routing-out", run_routing_out, "Per-cluster routing summary JSON");
  run->add_flag("--table", run_table, "Print the routing table to stderr");

  // aggregate ---------------------------------------------------------------
  std::string agg_annotations, agg_tweets, agg_out, agg_expert, agg_report;
  std::size_t agg_min = 3;
  auto* aggregate = app.add_subcommand("aggregate", "Majority-vote annotator labels and audit agreement");
  aggregate->add_option("--annotations", agg_annotations, "CSV: tweet_id,task,annotator_id,labels");
  aggregate->add_option("--tweets", agg_tweets, "Corpus to attach the aggregated labels to");
  aggregate->add_option("--out", agg_out, "Labeled JSONL");
  aggregate->add_option("--min-agree", agg_min, "Votes needed to accept a label")->check(CLI::PositiveNumber)->capture_default_str();
  aggregate->add_option("--expert", agg_expert, "Expert annotations (same CSV format) to compare against");
  aggregate->add_option("--report", agg_report, "Agreement report JSON (default stdout when --expert is set)");

  // crossval ----------------------------------------------------------------
  std::string cv_model, cv_out, cv_backend;
  std::vector<std::string> cv_events;
  long long cv_timeout_ms = 30000;
  auto* crossval = app.add_subcommand("crossval", "Score an informativeness model on other events' data");
  crossval->add_option("--model", cv_model, "Informativeness model file, or 'backend'");
  crossval->add_option("--backend", cv_backend, "stdio:<command> or tcp:<host>:<port>");
  crossval->add_option("--timeout-ms", cv_timeout_ms, "Backend response timeout")->capture_default_str();
  crossval->add_option("--event", cv_events, "name=path of a labeled event corpus (repeatable)");
  crossval->add_option("--out", cv_out, "Report JSON (default stdout)");

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = apply_config(app, std::move(args));
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*ingest) {
      require(ingest_in, "--in");
      require(ingest_out, "--out");
      const auto records = read_records(ingest_in, ingest_format);
      save_tweets(ingest_out, records);
      std::cout << "ingested " << records.size() << " record(s) into " << ingest_out << '\n';
    } else if (*filter) {
      require(filter_in, "--in");
      require(filter_out, "--out");
      std::vector<Query> queries;
      if (!filter_queries.empty()) queries = load_query_file(filter_queries);
      std::vector<Query> lexicons;
      for (const auto& path : filter_lexicons) {
        lexicons.push_back(load_lexicon(path, std::filesystem::path(path).stem().string()));
      }
      std::optional<Query> locations;
      if (!filter_locations.empty()) locations = load_lexicon(filter_locations, "location");
      if (locations && filter_combine == "and" && !lexicons.empty()) {
        QueryNode any;
        any.kind = QueryNode::Kind::op_or;
        for (const auto& l : lexicons) any.children.push_back(l.root);
        Query keywords{lexicons.size() == 1 ? lexicons.front().root : any, "keywords"};
        queries.push_back(conjoin(keywords, *locations, "keywords AND location"));
      } else {
        for (auto& l : lexicons) queries.push_back(std::move(l));
        if (locations) queries.push_back(*locations);
      }
      if (queries.empty()) std::cerr << "warning: no queries given; output will be empty\n";
      DateWindow window;
      if (!filter_since.empty()) window.since = filter_since;
      if (!filter_until.empty()) window.until = filter_until;
      const auto records = read_records(filter_in);
      const auto result = filter_corpus(queries, records, window);
      save_tweets(filter_out, result.kept);
      std::cout << "kept " << result.kept.size() << " of " << records.size() << " tweet(s)\n";
      for (std::size_t q = 0; q < queries.size(); ++q) {
        std::cout << "  " << queries[q].source_tag << ": " << result.hits[q] << " hit(s)\n";
      }
    } else if (*dedup) {
      require(dedup_in, "--in");
      require(dedup_out, "--out");
      const auto records = read_records(dedup_in);
      DedupConfig cfg;
      cfg.threshold = dedup_threshold;
      cfg.normalization = dedup_norm.get();
      const auto result = deduplicate(records, cfg);
      save_tweets(dedup_out, result.kept);
      if (!dedup_removed.empty()) {
        std::string lines;
        for (const auto& r : result.removed) {
          lines += json{{"removed_id", r.removed_id}, {"kept_id", r.kept_id}, {"similarity", r.similarity}}.dump() + "\n";
        }
        write_text(dedup_removed, lines);
      }
      std::cout << "kept " << result.kept.size() << ", removed " << result.removed.size()
                << " near-duplicate(s) at threshold " << dedup_threshold << '\n';
    } else if (*split) {
      require(split_in, "--in");
      require(split_train, "--train-out");
      require(split_test, "--test-out");
      auto records = read_records(split_in);
      if (!split_task.empty()) records = select_for_task(records, parse_task(split_task));
      if (records.empty()) throw DataError("nothing to split");
      SplitConfig cfg;
      cfg.train_fraction = split_fraction;
      cfg.seed = split_seed;
      if (!split_stratify.empty()) cfg.stratify = parse_task(split_stratify);
      const auto parts = split_train_test(records, cfg);
      save_tweets(split_train, parts.train);
      save_tweets(split_test, parts.test);
      std::cout << "train " << parts.train.size() << ", test " << parts.test.size() << " (seed " << split_seed
                << ")\n";
    } else if (*train) {
      require(train_task, "--task");
      require(train_data, "--train");
      require(train_out, "--out");
      const Task task = parse_task(train_task);
      const auto records = select_for_task(read_records(train_data), task);
      const auto model = train_text_model(records, task, train_flags.get(), train_norm.get());
      save_model(train_out, model);
      std::cout << "trained " << model_kind_name(model.kind) << " for " << task_name(task) << " on "
                << records.size() << " record(s), vocabulary " << model.vocabulary.size() << " term(s) -> "
                << train_out << '\n';
      for (const auto& w : model.ovr.warnings) std::cerr << "warning: " << w << '\n';
    } else if (*evaluate) {
      require(eval_data, "--data");
      const auto records = read_records(eval_data);
      if (!eval_model_file.empty()) {
        LocalClassifier clf(load_model(eval_model_file));
        const Task task = eval_task.empty() ? clf.task() : parse_task(eval_task);
        if (task != clf.task()) throw DataError("model task does not match --task");
        const auto labeled = select_for_task(records, task);
        auto m = evaluate_classifier(clf, labeled);
        json out = to_json(m);
        out["task"] = task_name(task);
        out["model"] = model_kind_name(clf.model().kind);
        write_json(eval_out, out);
        for (const auto& w : m.warnings) std::cerr << "warning: " << w << '\n';
      } else {
        require(eval_task, "--task");
        ExperimentConfig cfg;
        cfg.task = parse_task(eval_task);
        cfg.train = eval_flags.get();
        cfg.normalization = eval_norm.get();
        cfg.n_runs = eval_runs;
        cfg.base_seed = eval_seed;
        cfg.train_fraction = eval_fraction;
        cfg.stratify = eval_stratify;
        const auto report = run_experiment(records, cfg);
        write_json(eval_out, to_json(report));
      }
    } else if (*run) {
      require(run_input, "--input");
      require(run_info, "--info-model");
      require(run_intent, "--intent-model");
      require(run_aid, "--aid-model");
      std::shared_ptr<BackendClient> backend;
      if (!run_backend.empty()) {
        backend = std::make_shared<BackendClient>(BackendClient::connect(
            BackendEndpoint::parse(run_backend), std::chrono::milliseconds(run_timeout_ms)));
      }
      auto info = make_classifier(run_info, Task::informative, backend, run_batch);
      auto intent = make_classifier(run_intent, Task::intent, backend, run_batch);
      auto aid = make_classifier(run_aid, Task::aid, backend, run_batch);
      const auto records = read_records(run_input);
      std::vector<Tweet> tweets;
      for (const auto& r : records) tweets.push_back(r.tweet);
      TriageReport report;
      try {
        report = run_cascade(tweets, *info, *intent, *aid);
      } catch (const CascadeError& e) {
        std::cerr << "error: " << e.what() << "\npartial report: "
                  << to_json(routing_report(e.partial())).dump() << '\n';
        return kExitBackend;
      }
      write_json(run_out, to_json(report));
      const auto routing = routing_report(report);
      if (!run_routing_out.empty()) write_json(run_routing_out, to_json(routing));
      if (run_table) std::cerr << format_table(routing);
    } else if (*aggregate) {
      require(agg_annotations, "--annotations");
      const auto annotations = load_annotations(agg_annotations);
      const auto agg = aggregate_all(annotations, agg_min);
      std::cerr << "aggregated " << agg.labels.size() << " tweet(s); " << agg.unresolved.size()
                << " unresolved, " << agg.underannotated.size() << " with fewer than " << agg_min
                << " annotators\n";
      if (!agg_out.empty()) {
        require(agg_tweets, "--tweets");
        save_tweets(agg_out, apply_labels(read_records(agg_tweets), agg));
      }
      if (!agg_expert.empty()) {
        const auto expert = aggregate_all(load_annotations(agg_expert), 1);
        json report = json::array();
        for (const auto& a : agreement_report(expert.labels, agg.labels)) report.push_back(to_json(a));
        write_json(agg_report, report);
      }
    } else if (*crossval) {
      require(cv_model, "--model");
      if (cv_events.empty()) throw UsageError("at least one --event name=path is required");
      std::shared_ptr<BackendClient> backend;
      if (!cv_backend.empty()) {
        backend = std::make_shared<BackendClient>(BackendClient::connect(
            BackendEndpoint::parse(cv_backend), std::chrono::milliseconds(cv_timeout_ms)));
      }
      auto clf = make_classifier(cv_model, Task::informative, backend, 64);
      std::vector<NamedCollection> events;
      for (const auto& e : cv_events) {
        const auto eq = e.find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 == e.size()) {
          throw UsageError("--event expects name=path, got '" + e + "'");
        }
        events.push_back({e.substr(0, eq), read_records(e.substr(eq + 1))});
      }
      json out = json::array();
      for (const auto& r : cross_event_eval(*clf, events)) {
        out.push_back(to_json(r));
        for (const auto& w : r.metrics.warnings) std::cerr << "warning: " << w << '\n';
      }
      write_json(cv_out, out);
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const BackendError& e) {
    std::cerr << "backend error: " << e.what() << '\n';
    if (const auto* pe = dynamic_cast<const ProtocolError*>(&e)) std::cerr << "offending line: " << pe->line() << '\n';
    return kExitBackend;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return 0;
}
