#include <doctest.h>

#include <algorithm>
#include <random>

#include "oracles.hpp"
#include "stub_classifiers.hpp"
#include "test_util.hpp"
#include "triage/error.hpp"
#include "triage/eval.hpp"

using namespace triage;

namespace {

std::vector<int> random_bits(std::mt19937_64& rng, std::size_t n) {
  std::vector<int> v(n);
  for (auto& x : v) x = static_cast<int>(rng() % 2);
  return v;
}

LabeledCollection fixture() { return load_tweets(testutil::fixture("labeled_small.jsonl")).records; }

}  // namespace

TEST_SUITE("eval") {
  TEST_CASE("hand cases") {
    const std::vector<int> g{1, 1, 0, 0}, p{1, 0, 0, 0}, q{1, 0, 1, 0};
    CHECK(accuracy(g, g) == 1.0);
    CHECK(accuracy(g, std::vector<int>{0, 0, 1, 1}) == 0.0);
    CHECK(accuracy(g, p) == 0.75);
    const auto s = score_label("x", g, q);
    CHECK(s.precision == 0.5);
    CHECK(s.recall == 0.5);
    CHECK(s.f1 == 0.5);
    CHECK(cohens_kappa(g, q) == 0.0);
    CHECK(cohens_kappa(g, g) == 1.0);
    CHECK(cohens_kappa(std::vector<int>{2, 2, 2}, std::vector<int>{2, 2, 2}) == 1.0);
    CHECK_THROWS_AS(accuracy(g, std::vector<int>{1}), std::invalid_argument);
    CHECK_THROWS_AS(cohens_kappa(std::vector<int>{}, std::vector<int>{}), std::invalid_argument);
  }

  TEST_CASE("no predicted or gold positives yields zero with warnings") {
    const std::vector<std::vector<int>> gold{{0, 0, 0}}, pred{{0, 0, 0}};
    const std::vector<std::string> names{"food"};
    const auto r = f1_scores(gold, pred, names);
    CHECK(r.per_label[0].f1 == 0.0);
    CHECK_FALSE(r.warnings.empty());
  }

  TEST_CASE("property: metrics agree with confusion-matrix oracle") {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 1000; ++trial) {
      const std::size_t n = 1 + rng() % 25, L = 1 + rng() % 4;
      std::vector<std::vector<int>> gold, pred;
      std::vector<std::string> names;
      std::vector<oracle::Confusion> cs;
      double macro = 0;
      for (std::size_t l = 0; l < L; ++l) {
        gold.push_back(random_bits(rng, n));
        pred.push_back(random_bits(rng, n));
        names.push_back("l" + std::to_string(l));
        cs.push_back(oracle::confusion(gold.back(), pred.back()));
        macro += oracle::f1_of(cs.back());
      }
      const auto r = f1_scores(gold, pred, names);
      for (std::size_t l = 0; l < L; ++l) CHECK(std::abs(r.per_label[l].f1 - oracle::f1_of(cs[l])) < 1e-12);
      CHECK(std::abs(r.micro_f1 - oracle::pooled_f1(cs)) < 1e-12);
      CHECK(std::abs(r.macro_f1 - macro / static_cast<double>(L)) < 1e-12);

      const auto& c = cs[0];
      CHECK(std::abs(accuracy(gold[0], pred[0]) - (c.tp + c.tn) / static_cast<double>(n)) < 1e-12);
      const auto b = binary_scores(gold[0], pred[0]);
      CHECK(b.micro_f1 == b.accuracy);
      CHECK(std::abs(b.positive_f1 - oracle::f1_of(c)) < 1e-12);

      std::vector<int> ka(n), kb(n);
      for (std::size_t i = 0; i < n; ++i) {
        ka[i] = static_cast<int>(rng() % 3);
        kb[i] = rng() % 2 ? ka[i] : static_cast<int>(rng() % 3);
      }
      const double k = cohens_kappa(ka, kb);
      CHECK(std::abs(k - oracle::kappa(ka, kb)) < 1e-12);
      CHECK(k == cohens_kappa(kb, ka));
      CHECK(k >= -1.0);
      CHECK(k <= 1.0);
      CHECK(cohens_kappa(ka, ka) == 1.0);

      auto rg = gold, rp = pred;
      auto rn = names;
      std::reverse(rg.begin(), rg.end());
      std::reverse(rp.begin(), rp.end());
      std::reverse(rn.begin(), rn.end());
      CHECK(std::abs(f1_scores(rg, rp, rn).macro_f1 - r.macro_f1) < 1e-12);
    }
  }

  TEST_CASE("run_experiment: mean equals manually executed runs; n_runs=1 equals run_once") {
    const auto data = fixture();
    LabeledCollection small(data.begin(), data.begin() + 20);
    ExperimentConfig cfg;
    cfg.task = Task::informative;
    cfg.n_runs = 4;
    cfg.base_seed = 10;
    const auto report = run_experiment(small, cfg);
    double mean = 0;
    for (std::uint64_t s = 10; s < 14; ++s) {
      SplitConfig sc;
      sc.seed = s;
      const auto split = split_train_test(small, sc);
      LocalClassifier clf(train_text_model(split.train, Task::informative, cfg.train));
      const auto m = evaluate_classifier(clf, split.test);
      mean += m.accuracy;
    }
    CHECK(std::abs(report.accuracy - mean / 4) < 1e-12);

    cfg.n_runs = 1;
    const auto one = run_experiment(small, cfg);
    CHECK(to_json(one.runs[0]).dump() == to_json(run_once(small, cfg, 10)).dump());
  }

  TEST_CASE("run_experiment is deterministic and validates its input") {
    const auto data = fixture();
    ExperimentConfig cfg;
    cfg.task = Task::aid;
    cfg.train.kind = ModelKind::lr;
    CHECK(to_json(run_experiment(data, cfg)).dump() == to_json(run_experiment(data, cfg)).dump());
    cfg.seeds = {1, 1};
    CHECK_THROWS_AS(run_experiment(data, cfg), std::invalid_argument);

    LabeledCollection negatives;
    for (const auto& r : data) {
      if (!*r.labels.informative) negatives.push_back(r);
    }
    ExperimentConfig bin;
    CHECK_THROWS_AS(run_experiment(negatives, bin), DataError);
  }

  TEST_CASE("multi-label exact-set accuracy") {
    LabeledCollection recs(2);
    recs[0].labels.intent = LabelMask(0b11);
    recs[1].labels.intent = LabelMask(0b01);
    std::vector<TaskPrediction> preds(2);
    preds[0].labels = LabelMask(0b01);
    preds[1].labels = LabelMask(0b01);
    const auto m = score_predictions(Task::intent, recs, preds);
    CHECK(m.accuracy == 0.5);
    CHECK_FALSE(m.positive_f1.has_value());
    CHECK(m.per_label.size() == 2);
  }

  TEST_CASE("cross-event evaluation") {
    const auto data = fixture();
    LabeledCollection flood, quake;
    for (const auto& r : data) (r.tweet.event == "flood" ? flood : quake).push_back(r);
    LocalClassifier clf(train_text_model(flood, Task::informative, TrainOptions{}));
    LabeledCollection no_pos;
    for (const auto& r : quake) {
      if (!*r.labels.informative) no_pos.push_back(r);
    }
    const std::vector<NamedCollection> events{{"flood", flood}, {"quake", quake}, {"calm", no_pos}};
    const auto res = cross_event_eval(clf, events);
    REQUIRE(res.size() == 3);
    CHECK(to_json(res[0].metrics).dump() == to_json(evaluate_classifier(clf, flood)).dump());
    CHECK(res[2].metrics.positive_f1 == 0.0);
    CHECK_FALSE(res[2].metrics.warnings.empty());
    for (const auto& d : res[1].disagreements) CHECK(d.gold != d.predicted);

    LabeledCollection unlabeled(1);
    unlabeled[0].tweet.id = "u";
    unlabeled[0].tweet.text = "x";
    CHECK_THROWS_AS(cross_event_eval(clf, std::vector<NamedCollection>{{"u", unlabeled}}), DataError);
  }
}
