#include <doctest.h>

#include "stub_classifiers.hpp"
#include "triage/cascade.hpp"

using namespace triage;

namespace {

std::vector<Tweet> tweets(std::size_t n) {
  std::vector<Tweet> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back({"t" + std::to_string(i), "text " + std::to_string(i), {}, {}});
  return out;
}

std::vector<TweetTriage> synthetic(std::size_t informative, std::size_t need, std::size_t supply, std::size_t both,
                                   std::size_t food) {
  std::vector<TweetTriage> out;
  for (std::size_t i = 0; i < informative; ++i) {
    TweetTriage r;
    r.id = std::to_string(i);
    r.informative = true;
    r.intent = TaskPrediction{};
    r.aid = TaskPrediction{};
    const bool is_need = i < need;
    const bool is_supply = i >= need - both && i < need - both + supply;
    if (is_need) r.intent->labels.set(0);
    if (is_supply) r.intent->labels.set(1);
    if (i < food) r.aid->labels.set(0);
    out.push_back(r);
  }
  return out;
}

}  // namespace

TEST_SUITE("cascade") {
  TEST_CASE("percent formatting") {
    CHECK(format_percent(8370, 14073) == "59.48");
    CHECK(format_percent(7940, 14073) == "56.42");
    CHECK(format_percent(4362, 14073) == "31.00");
    CHECK(format_percent(1, 8) == "12.50");
    CHECK(format_percent(1, 3) == "33.33");
    CHECK(format_percent(2, 3) == "66.67");
    CHECK(format_percent(0, 0) == "0.00");
    CHECK(format_percent(10, 10) == "100.00");
  }

  TEST_CASE("saturating stubs") {
    ConstantClassifier info(Task::informative, true), intent(Task::intent, true), aid(Task::aid, true);
    const auto r = run_cascade(tweets(10), info, intent, aid);
    CHECK(r.informative.count == 10);
    CHECK(r.informative.percent() == "100.00");
    for (const auto& c : r.intent) CHECK(c.count == 10);
    CHECK(r.both_intents.count == 10);
    for (const auto& c : r.aid) CHECK(c.count == 10);
  }

  TEST_CASE("gating: all-negative stage 1 never reaches stages 2 and 3") {
    ConstantClassifier info(Task::informative, false), intent(Task::intent, true), aid(Task::aid, true);
    const auto r = run_cascade(tweets(10), info, intent, aid);
    CHECK(intent.calls == 0);
    CHECK(aid.calls == 0);
    CHECK(r.informative.count == 0);
    for (const auto& t : r.records) {
      CHECK_FALSE(t.intent.has_value());
      CHECK_FALSE(t.aid.has_value());
    }
    for (const auto& c : r.aid) CHECK(c.count == 0);
  }

  TEST_CASE("only informative tweets go downstream") {
    KeywordClassifier info(Task::informative);
    ConstantClassifier intent(Task::intent, true), aid(Task::aid, false);
    std::vector<Tweet> ts = tweets(4);
    ts[1].text = "informative";
    ts[3].text = "informative too";
    const auto r = run_cascade(ts, info, intent, aid);
    CHECK(intent.seen == 2);
    CHECK(r.informative.count == 2);
    CHECK(r.intent[0].denominator == 2);
    CHECK(r.records[0].intent == std::nullopt);
    CHECK(r.records[1].intent.has_value());
  }

  TEST_CASE("deployment-scale arithmetic") {
    const auto r = build_report(synthetic(14073, 8370, 9073, 3593, 7940));
    CHECK(r.intent[0].percent() == "59.48");
    CHECK(r.aid[0].percent() == "56.42");
    CHECK(r.both_intents.count == 3593);
    CHECK(r.both_intents.count <= std::min(r.intent[0].count, r.intent[1].count));
    const auto table = format_table(routing_report(r));
    CHECK(table.find("59.48%") != std::string::npos);
    CHECK(table.find("Food Security") != std::string::npos);
  }

  TEST_CASE("empty input and gating violations") {
    ConstantClassifier info(Task::informative, true), intent(Task::intent, true), aid(Task::aid, true);
    const auto r = run_cascade({}, info, intent, aid);
    CHECK(r.total == 0);
    CHECK(r.informative.percent() == "0.00");
    TweetTriage bad;
    bad.id = "x";
    bad.intent = TaskPrediction{};
    CHECK_THROWS_AS(build_report({bad}), std::logic_error);
  }

  TEST_CASE("stage failures keep completed stages") {
    ConstantClassifier info(Task::informative, true), intent(Task::intent, true);
    ThrowingClassifier aid(Task::aid);
    try {
      run_cascade(tweets(3), info, intent, aid);
      FAIL("expected CascadeError");
    } catch (const CascadeError& e) {
      CHECK(e.stage() == "aid");
      CHECK(e.partial().informative.count == 3);
      CHECK(e.partial().intent[0].count == 3);
      CHECK(e.partial().aid[0].count == 0);
    }
    CHECK_THROWS_AS(run_cascade(tweets(1), intent, intent, intent), std::invalid_argument);
  }

  TEST_CASE("report json is deterministic") {
    KeywordClassifier info(Task::informative), intent(Task::intent), aid(Task::aid);
    std::vector<Tweet> ts = tweets(5);
    ts[0].text = "informative need food";
    ts[2].text = "informative supply need wash";
    const auto a = to_json(run_cascade(ts, info, intent, aid)).dump();
    const auto b = to_json(run_cascade(ts, info, intent, aid)).dump();
    CHECK(a == b);
    CHECK(to_json(routing_report(run_cascade(ts, info, intent, aid))).dump() ==
          to_json(routing_report(run_cascade(ts, info, intent, aid))).dump());
  }
}
