#include <doctest.h>

#include <cctype>
#include <functional>
#include <random>

#include "oracles.hpp"
#include "test_util.hpp"
#include "triage/error.hpp"
#include "triage/filterquery.hpp"

using namespace triage;
using K = QueryNode::Kind;

namespace {

LabeledTweet tweet(const std::string& id, const std::string& text, const char* date = nullptr) {
  LabeledTweet r;
  r.tweet.id = id;
  r.tweet.text = text;
  if (date) r.tweet.created_at = date;
  return r;
}

}  // namespace

TEST_SUITE("filterquery") {
  TEST_CASE("grammar shapes") {
    const auto q = parse_query("hurricane AND (food OR water)");
    REQUIRE(q.root.kind == K::op_and);
    REQUIRE(q.root.children.size() == 2);
    CHECK(q.root.children[0].kind == K::term);
    CHECK(q.root.children[1].kind == K::op_or);
    CHECK(q.root.children[1].children.size() == 2);

    const auto p = parse_query("\"need shelter\" AND bahamas");
    CHECK(p.root.children[0].kind == K::phrase);
    CHECK(p.root.children[0].words == std::vector<std::string>{"need", "shelter"});

    CHECK(parse_query("a OR b AND c").root.kind == K::op_or);
    CHECK(parse_query("a AND b AND c").root.children.size() == 3);
    CHECK(parse_query("a AND NOT b").root.children[1].kind == K::op_not);
  }

  TEST_CASE("syntax errors carry positions") {
    try {
      parse_query("AND food");
      FAIL("expected QueryError");
    } catch (const QueryError& e) {
      CHECK(e.position() == 0);
    }
    CHECK_THROWS_AS(parse_query("food AND"), QueryError);
    CHECK_THROWS_AS(parse_query("(food"), QueryError);
    CHECK_THROWS_AS(parse_query("food water"), QueryError);
    CHECK_THROWS_AS(parse_query("\"open"), QueryError);
    CHECK_THROWS_AS(parse_query("NOT food"), QueryError);
    CHECK_THROWS_AS(parse_query(""), QueryError);
  }

  TEST_CASE("matching examples") {
    CHECK(match(parse_query("food OR water").root, "Water distribution at 5pm"));
    CHECK_FALSE(match(parse_query("food AND water").root, "Water distribution"));
    CHECK(match(parse_query("bahamas").root, "Praying for the Bahamas"));
    CHECK_FALSE(match(parse_query("aid").root, "said the paid staff"));
    CHECK(match(parse_query("\"need shelter\"").root, "We NEED   shelter!"));
    CHECK_FALSE(match(parse_query("\"need shelter\"").root, "need some shelter"));
  }

  TEST_CASE("canonical printing round-trips") {
    for (const char* src : {"a AND (b OR c)", "(a OR b) AND NOT \"x y\"", "a OR b OR c", "NOT (a OR b) AND c"}) {
      const auto q = parse_query(src);
      CHECK(parse_query(to_string(q.root)).root == q.root);
    }
  }

  TEST_CASE("filter: empty query list, identity and date window") {
    LabeledCollection recs{tweet("1", "flood water", "2019-09-01T10:00:00Z"), tweet("2", "water now", "2019-09-05"),
                           tweet("3", "water", nullptr)};
    CHECK(filter_corpus({}, recs).kept.empty());
    const std::vector<Query> all{parse_query("water")};
    CHECK(filter_corpus(all, recs).kept == recs);
    DateWindow w;
    w.since = "2019-09-02";
    const auto r = filter_corpus(all, recs, w);
    REQUIRE(r.kept.size() == 1);
    CHECK(r.kept[0].tweet.id == "2");
    CHECK(r.hits == std::vector<std::size_t>{1});
  }

  TEST_CASE("lexicons") {
    testutil::TempDir dir;
    testutil::write_file(dir / "lex.txt", "# comment\nFood\n\nclean water\nfood\n");
    const auto q = load_lexicon(dir / "lex.txt", "aid-type");
    CHECK(q.source_tag == "aid-type");
    REQUIRE(q.root.kind == K::op_or);
    CHECK(q.root.children.size() == 2);
    CHECK(match(q, tweet("1", "need CLEAN water").tweet));
    testutil::write_file(dir / "q.txt", "food\nAND\n");
    CHECK_THROWS_AS(load_query_file(dir / "q.txt"), DataError);
  }

  TEST_CASE("property: match agrees with rescan oracle; adding queries never shrinks output") {
    const std::vector<std::string> vocab{"food", "water", "need", "flood", "aid", "bahamas", "relief", "foodbank"};
    std::mt19937_64 rng(17);
    auto random_text = [&] {
      std::string s;
      const std::size_t n = rng() % 8;
      const char* seps[] = {" ", ", ", "!", " #", "-", "  "};
      for (std::size_t i = 0; i < n; ++i) {
        std::string w = vocab[rng() % vocab.size()];
        if (rng() % 4 == 0) w[0] = static_cast<char>(std::toupper(w[0]));
        s += w + seps[rng() % 6];
      }
      return s;
    };
    std::function<std::string(int)> random_query = [&](int depth) -> std::string {
      const auto r = rng() % 6;
      if (depth == 0 || r < 2) {
        if (rng() % 5 == 0) return "\"" + vocab[rng() % vocab.size()] + " " + vocab[rng() % vocab.size()] + "\"";
        return vocab[rng() % vocab.size()];
      }
      const auto a = random_query(depth - 1), b = random_query(depth - 1);
      if (r == 2) return "(" + a + " AND " + b + ")";
      if (r == 3) return "(" + a + " OR " + b + ")";
      return "(" + a + " AND NOT " + b + ")";
    };
    for (int trial = 0; trial < 300; ++trial) {
      LabeledCollection recs;
      for (int i = 0; i < 10; ++i) recs.push_back(tweet(std::to_string(i), random_text()));
      std::vector<Query> qs;
      std::size_t prev = 0;
      for (int k = 0; k < 3; ++k) {
        qs.push_back(parse_query(random_query(3)));
        const auto out = filter_corpus(qs, recs);
        std::size_t expected = 0;
        for (const auto& r : recs) {
          bool any = false;
          for (const auto& q : qs) any = any || oracle::eval(q.root, r.tweet.text);
          expected += any;
          CHECK(match(qs.back().root, r.tweet.text) == oracle::eval(qs.back().root, r.tweet.text));
        }
        CHECK(out.kept.size() == expected);
        CHECK(out.kept.size() >= prev);
        prev = out.kept.size();
      }
    }
  }
}
