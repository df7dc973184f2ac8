#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <nlohmann/json.hpp>

#include "triage/annotate.hpp"
#include "triage/cascade.hpp"
#include "triage/corpus.hpp"
#include "triage/error.hpp"
#include "triage/eval.hpp"
#include "triage/filterquery.hpp"
#include "triage/models.hpp"
#include "triage/preprocess.hpp"
#include "triage/vectorize.hpp"

namespace py = pybind11;
using nlohmann::json;
using namespace triage;

namespace {

py::object to_py(const json& j) {
  switch (j.type()) {
    case json::value_t::null: return py::none();
    case json::value_t::boolean: return py::bool_(j.get<bool>());
    case json::value_t::number_integer: return py::int_(j.get<std::int64_t>());
    case json::value_t::number_unsigned: return py::int_(j.get<std::uint64_t>());
    case json::value_t::number_float: return py::float_(j.get<double>());
    case json::value_t::string: return py::str(j.get<std::string>());
    case json::value_t::array: {
      py::list out;
      for (const auto& v : j) out.append(to_py(v));
      return out;
    }
    case json::value_t::object: {
      py::dict out;
      for (const auto& [k, v] : j.items()) out[py::str(k)] = to_py(v);
      return out;
    }
    default: return py::none();
  }
}

json from_py(const py::handle& o) {
  if (o.is_none()) return nullptr;
  if (py::isinstance<py::bool_>(o)) return o.cast<bool>();
  if (py::isinstance<py::int_>(o)) return o.cast<std::int64_t>();
  if (py::isinstance<py::float_>(o)) return o.cast<double>();
  if (py::isinstance<py::str>(o)) return o.cast<std::string>();
  if (py::isinstance<py::dict>(o)) {
    json out = json::object();
    for (const auto& [k, v] : o.cast<py::dict>()) out[py::str(k).cast<std::string>()] = from_py(v);
    return out;
  }
  if (py::isinstance<py::list>(o) || py::isinstance<py::tuple>(o)) {
    json out = json::array();
    for (const auto& v : o) out.push_back(from_py(v));
    return out;
  }
  throw py::type_error("cannot convert " + py::repr(o).cast<std::string>() + " to JSON");
}

LabeledCollection records_from_py(const py::iterable& items) {
  LabeledCollection out;
  for (const auto& item : items) out.push_back(labeled_tweet_from_json(from_py(item)));
  return out;
}

py::list records_to_py(std::span<const LabeledTweet> records) {
  py::list out;
  for (const auto& r : records) out.append(to_py(to_json(r)));
  return out;
}

TrainOptions train_options(const std::string& model, double alpha, double learning_rate, double l2,
                           std::size_t max_iter) {
  TrainOptions o;
  o.kind = parse_model_kind(model);
  o.alpha = alpha;
  o.lr.learning_rate = learning_rate;
  o.lr.l2 = l2;
  o.lr.max_iter = max_iter;
  return o;
}

py::dict prediction_to_py(Task task, const TaskPrediction& p) {
  py::dict d;
  d["labels"] = mask_names(task, p.labels);
  d["scores"] = p.scores;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Crisis-tweet triage: cleanup, filtering, dedup, classifiers, metrics and routing reports";

  static py::exception<DataError> data_error(m, "DataError", PyExc_ValueError);
  static py::exception<QueryError> query_error(m, "QueryError", PyExc_ValueError);
  static py::exception<BackendError> backend_error(m, "BackendError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const QueryError& e) {
      py::set_error(query_error, e.what());
    } catch (const DataError& e) {
      py::set_error(data_error, e.what());
    } catch (const BackendError& e) {
      py::set_error(backend_error, e.what());
    }
  });

  py::enum_<TagMode>(m, "TagMode")
      .value("remove_token", TagMode::remove_token)
      .value("strip_marker", TagMode::strip_marker);

  py::class_<NormalizationConfig>(m, "NormalizationConfig")
      .def(py::init<>())
      .def_readwrite("remove_urls", &NormalizationConfig::remove_urls)
      .def_readwrite("remove_image_links", &NormalizationConfig::remove_image_links)
      .def_readwrite("remove_numbers", &NormalizationConfig::remove_numbers)
      .def_readwrite("remove_hashtags", &NormalizationConfig::remove_hashtags)
      .def_readwrite("remove_mentions", &NormalizationConfig::remove_mentions)
      .def_readwrite("remove_non_ascii", &NormalizationConfig::remove_non_ascii)
      .def_readwrite("collapse_whitespace", &NormalizationConfig::collapse_whitespace)
      .def_readwrite("lowercase", &NormalizationConfig::lowercase)
      .def_readwrite("tag_mode", &NormalizationConfig::tag_mode)
      .def("__eq__", [](const NormalizationConfig& a, const NormalizationConfig& b) { return a == b; });

  m.def("normalize", [](const std::string& text, const NormalizationConfig& cfg) { return normalize(text, cfg); },
        py::arg("text"), py::arg("config") = NormalizationConfig{});
  m.def("tokenize", [](const std::string& text) { return tokenize(text); }, py::arg("text"));
  m.def("analyze", [](const std::string& text, const NormalizationConfig& cfg) { return analyze(text, cfg); },
        py::arg("text"), py::arg("config") = NormalizationConfig{});

  py::class_<Query>(m, "Query")
      .def(py::init([](const std::string& source, const std::string& tag) { return parse_query(source, tag); }),
           py::arg("source"), py::arg("tag") = "query")
      .def("match", [](const Query& q, const std::string& text) { return match(q.root, text); }, py::arg("text"))
      .def_readonly("source_tag", &Query::source_tag)
      .def("__str__", [](const Query& q) { return to_string(q.root); })
      .def("__repr__", [](const Query& q) { return "Query(" + py::repr(py::str(to_string(q.root))).cast<std::string>() + ")"; });

  m.def(
      "load_tweets",
      [](const std::filesystem::path& path) {
        const auto r = load_tweets(path);
        py::list errors;
        for (const auto& e : r.errors) errors.append(py::make_tuple(e.line, e.message));
        return py::make_tuple(records_to_py(r.records), errors);
      },
      py::arg("path"), "Returns (records, [(line, message), ...]) for a JSONL or CSV corpus.");
  m.def(
      "save_tweets", [](const std::filesystem::path& path, const py::iterable& records) {
        save_tweets(path, records_from_py(records));
      },
      py::arg("path"), py::arg("records"));

  m.def(
      "filter_tweets",
      [](const std::vector<std::string>& queries, const py::iterable& records) {
        std::vector<Query> qs;
        for (const auto& q : queries) qs.push_back(parse_query(q));
        const auto r = filter_corpus(qs, records_from_py(records));
        return py::make_tuple(records_to_py(r.kept), r.hits);
      },
      py::arg("queries"), py::arg("records"));

  m.def(
      "deduplicate",
      [](const py::iterable& records, double threshold, const NormalizationConfig& cfg) {
        DedupConfig dc;
        dc.threshold = threshold;
        dc.normalization = cfg;
        const auto r = deduplicate(records_from_py(records), dc);
        py::list removed;
        for (const auto& d : r.removed) removed.append(py::make_tuple(d.removed_id, d.kept_id, d.similarity));
        return py::make_tuple(records_to_py(r.kept), removed);
      },
      py::arg("records"), py::arg("threshold") = 0.85, py::arg("config") = NormalizationConfig{});

  m.def("train_size", &train_size, py::arg("n"), py::arg("fraction"));
  m.def(
      "split",
      [](const py::iterable& records, double fraction, std::uint64_t seed) {
        SplitConfig cfg;
        cfg.train_fraction = fraction;
        cfg.seed = seed;
        const auto s = split_train_test(records_from_py(records), cfg);
        return py::make_tuple(records_to_py(s.train), records_to_py(s.test));
      },
      py::arg("records"), py::arg("fraction") = 0.8, py::arg("seed") = 0);

  py::class_<TextModel>(m, "Model")
      .def_property_readonly("task", [](const TextModel& t) { return std::string(task_name(t.task)); })
      .def_property_readonly("kind", [](const TextModel& t) { return std::string(model_kind_name(t.kind)); })
      .def_property_readonly("labels", [](const TextModel& t) { return t.ovr.labels; })
      .def_property_readonly("vocabulary_size", [](const TextModel& t) { return t.vocabulary.size(); })
      .def_property_readonly("warnings", [](const TextModel& t) { return t.ovr.warnings; })
      .def(
          "predict",
          [](const TextModel& t, const std::vector<std::string>& texts) {
            py::list out;
            for (const auto& text : texts) out.append(prediction_to_py(t.task, predict_text(t, text)));
            return out;
          },
          py::arg("texts"))
      .def("save", [](const TextModel& t, const std::filesystem::path& path) { save_model(path, t); }, py::arg("path"))
      .def_static("load", [](const std::filesystem::path& path) { return load_model(path); }, py::arg("path"));

  m.def(
      "train",
      [](const py::iterable& records, const std::string& task, const std::string& model, double alpha,
         double learning_rate, double l2, std::size_t max_iter, const NormalizationConfig& cfg) {
        const Task t = parse_task(task);
        const auto data = select_for_task(records_from_py(records), t);
        return train_text_model(data, t, train_options(model, alpha, learning_rate, l2, max_iter), cfg);
      },
      py::arg("records"), py::arg("task"), py::arg("model") = "mnb", py::arg("alpha") = 1.0,
      py::arg("learning_rate") = 0.1, py::arg("l2") = 1e-4, py::arg("max_iter") = 1000,
      py::arg("config") = NormalizationConfig{});

  m.def(
      "evaluate",
      [](const TextModel& model, const py::iterable& records) {
        LocalClassifier clf(model);
        return to_py(to_json(evaluate_classifier(clf, select_for_task(records_from_py(records), model.task))));
      },
      py::arg("model"), py::arg("records"));

  m.def(
      "run_experiment",
      [](const py::iterable& records, const std::string& task, const std::string& model, std::size_t runs,
         std::uint64_t seed, double fraction, bool stratify, const NormalizationConfig& cfg) {
        ExperimentConfig ec;
        ec.task = parse_task(task);
        ec.train = train_options(model, 1.0, 0.1, 1e-4, 1000);
        ec.n_runs = runs;
        ec.base_seed = seed;
        ec.train_fraction = fraction;
        ec.stratify = stratify;
        ec.normalization = cfg;
        return to_py(to_json(run_experiment(records_from_py(records), ec)));
      },
      py::arg("records"), py::arg("task"), py::arg("model") = "mnb", py::arg("runs") = 5, py::arg("seed") = 0,
      py::arg("fraction") = 0.8, py::arg("stratify") = false, py::arg("config") = NormalizationConfig{});

  m.def(
      "triage",
      [](const py::iterable& records, const TextModel& informative, const TextModel& intent, const TextModel& aid) {
        LocalClassifier a(informative), b(intent), c(aid);
        std::vector<Tweet> tweets;
        for (const auto& r : records_from_py(records)) tweets.push_back(r.tweet);
        const auto report = run_cascade(tweets, a, b, c);
        py::dict out = to_py(to_json(report));
        out["routing"] = to_py(to_json(routing_report(report)));
        out["table"] = format_table(routing_report(report));
        return out;
      },
      py::arg("records"), py::arg("informative"), py::arg("intent"), py::arg("aid"));

  m.def("format_percent", &format_percent, py::arg("count"), py::arg("denominator"));
  m.def(
      "cohens_kappa", [](const std::vector<int>& a, const std::vector<int>& b) { return cohens_kappa(a, b); },
      py::arg("a"), py::arg("b"));
  m.def(
      "f1_scores",
      [](const std::vector<std::vector<int>>& gold, const std::vector<std::vector<int>>& pred,
         const std::vector<std::string>& labels) {
        const auto r = f1_scores(gold, pred, labels);
        py::dict out;
        py::list per_label;
        for (const auto& s : r.per_label) per_label.append(to_py(to_json(s)));
        out["per_label"] = per_label;
        out["micro_f1"] = r.micro_f1;
        out["macro_f1"] = r.macro_f1;
        out["warnings"] = r.warnings;
        return out;
      },
      py::arg("gold"), py::arg("pred"), py::arg("labels"));

  m.def(
      "aggregate_annotations",
      [](const std::filesystem::path& path, std::size_t min_agree) {
        const auto agg = aggregate_all(load_annotations(path), min_agree);
        py::dict labels;
        for (const auto& [id, set] : agg.labels) {
          LabeledTweet r;
          r.labels = set;
          labels[py::str(id)] = to_py(to_json(r))["labels"];
        }
        auto pairs = [](const std::vector<std::pair<std::string, Task>>& v) {
          py::list out;
          for (const auto& [id, task] : v) out.append(py::make_tuple(id, std::string(task_name(task))));
          return out;
        };
        return py::make_tuple(labels, pairs(agg.unresolved), pairs(agg.underannotated));
      },
      py::arg("path"), py::arg("min_agree") = 3);

#ifdef VERSION_INFO
  m.attr("__version__") = VERSION_INFO;
#else
  m.attr("__version__") = "dev";
#endif
}
