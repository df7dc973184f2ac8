#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "triage/error.hpp"
#include "triage/vectorize.hpp"

using namespace triage;

namespace {

std::vector<Document> random_corpus(std::mt19937_64& rng, std::size_t max_docs, std::size_t max_terms,
                                    std::size_t max_len) {
  const std::size_t n = 1 + rng() % max_docs;
  const std::size_t v = 1 + rng() % max_terms;
  std::vector<Document> docs(n);
  for (auto& d : docs) {
    const std::size_t len = rng() % (max_len + 1);
    for (std::size_t i = 0; i < len; ++i) d.push_back("t" + std::to_string(rng() % v));
  }
  return docs;
}

LabeledCollection as_records(const std::vector<std::string>& texts) {
  LabeledCollection out;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    LabeledTweet r;
    r.tweet.id = std::to_string(i);
    r.tweet.text = texts[i];
    out.push_back(r);
  }
  return out;
}

}  // namespace

TEST_SUITE("vectorize") {
  TEST_CASE("hand-computed idf and weights") {
    const std::vector<Document> docs{{"a", "b"}, {"a", "c"}};
    const auto v = fit_vocabulary(docs);
    REQUIRE(v.size() == 3);
    CHECK(v.terms() == std::vector<std::string>{"a", "b", "c"});
    CHECK(v.df(0) == 2);
    CHECK(v.df(1) == 1);
    CHECK(v.idf(0) == doctest::Approx(1.0).epsilon(1e-12));
    const double idf_b = std::log(3.0 / 2.0) + 1.0;
    CHECK(std::abs(v.idf(1) - idf_b) < 1e-9);

    const auto x = transform({"a", "a", "b"}, v);
    const double n = std::sqrt(4.0 + idf_b * idf_b);
    const auto d = x.to_dense();
    CHECK(std::abs(d[0] - 2.0 / n) < 1e-9);
    CHECK(std::abs(d[1] - idf_b / n) < 1e-9);
    CHECK(d[2] == 0.0);

    const auto single = fit_vocabulary(std::vector<Document>{{"x"}});
    CHECK(single.idf(0) == 1.0);
  }

  TEST_CASE("edge cases") {
    const std::vector<Document> docs{{"a", "b"}, {"b", "a"}};
    const auto v = fit_vocabulary(docs);
    CHECK(v.idf(0) == v.idf(1));
    CHECK(transform({"zzz"}, v).is_zero());
    CHECK(l2_norm(transform(docs[0], v)) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(fit_vocabulary(std::vector<Document>{{}, {}}), DataError);
    CHECK(v.index_of("zzz") == -1);
    SparseVector other;
    other.dim = 7;
    CHECK_THROWS_AS(cosine(transform(docs[0], v), other), std::invalid_argument);
  }

  TEST_CASE("vocabulary json round trip and hash") {
    const auto v = fit_vocabulary(std::vector<Document>{{"food", "water"}, {"water"}});
    const auto w = Vocabulary::from_json(v.to_json());
    CHECK(w.terms() == v.terms());
    CHECK(w.hash() == v.hash());
    CHECK(v.hash().size() == 16);
    CHECK(fit_vocabulary(std::vector<Document>{{"food"}}).hash() != v.hash());
  }

  TEST_CASE("property: idf monotone in df") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 1000; ++trial) {
      auto docs = random_corpus(rng, 12, 8, 6);
      docs.push_back({"t0"});
      const auto v = fit_vocabulary(docs);
      for (std::size_t s = 0; s < v.size(); ++s) {
        for (std::size_t t = 0; t < v.size(); ++t) {
          if (v.df(s) < v.df(t)) CHECK(v.idf(s) > v.idf(t));
        }
      }
    }
  }

  TEST_CASE("property: sparse ops match dense computation") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-2, 2);
    for (int trial = 0; trial < 500; ++trial) {
      const std::size_t dim = 1 + rng() % 12;
      oracle::Dense a(dim), b(dim);
      for (std::size_t i = 0; i < dim; ++i) {
        a[i] = rng() % 3 ? 0.0 : u(rng);
        b[i] = rng() % 3 ? 0.0 : u(rng);
      }
      double d = 0;
      for (std::size_t i = 0; i < dim; ++i) d += a[i] * b[i];
      const auto sa = oracle::sparse(a), sb = oracle::sparse(b);
      CHECK(std::abs(dot(sa, sb) - d) < 1e-12);
      CHECK(cosine(sa, sb) == cosine(sb, sa));
      if (!sa.is_zero()) CHECK(std::abs(cosine(sa, sa) - 1.0) < 1e-12);
    }
  }

  TEST_CASE("property: repeating every token k times leaves the vector unchanged") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 300; ++trial) {
      auto docs = random_corpus(rng, 8, 6, 6);
      docs.push_back({"t0", "t1"});
      const auto v = fit_vocabulary(docs);
      const auto& doc = docs[rng() % docs.size()];
      const std::size_t k = 2 + rng() % 4;
      Document rep;
      for (const auto& t : doc) {
        for (std::size_t i = 0; i < k; ++i) rep.push_back(t);
      }
      const auto x = transform(doc, v), y = transform(rep, v);
      REQUIRE(x.indices == y.indices);
      for (std::size_t i = 0; i < x.nnz(); ++i) CHECK(std::abs(x.values[i] - y.values[i]) < 1e-12);
    }
  }

  TEST_CASE("disjoint supports have zero cosine") {
    const auto v = fit_vocabulary(std::vector<Document>{{"a"}, {"b"}});
    CHECK(cosine(transform({"a"}, v), transform({"b"}, v)) == 0.0);
  }

  TEST_CASE("dedup: identical texts and threshold boundary") {
    const auto recs = as_records({"Need water in Abaco", "need WATER in abaco!!", "shelter open downtown"});
    const auto r = deduplicate(recs);
    REQUIRE(r.kept.size() == 2);
    REQUIRE(r.removed.size() == 1);
    CHECK(r.removed[0].removed_id == "1");
    CHECK(r.removed[0].kept_id == "0");
    CHECK(r.removed[0].similarity == doctest::Approx(1.0));
    DedupConfig cfg;
    cfg.threshold = 1.0;
    CHECK(deduplicate(recs, cfg).removed.empty());
    cfg.threshold = 1.5;
    CHECK_THROWS_AS(deduplicate(recs, cfg), std::invalid_argument);
  }

  TEST_CASE("dedup visits by created_at only when every record has one") {
    auto recs = as_records({"flood relief now", "flood relief now"});
    recs[0].tweet.created_at = "2019-09-03";
    recs[1].tweet.created_at = "2019-09-01";
    CHECK(deduplicate(recs).kept[0].tweet.id == "1");
    recs[1].tweet.created_at.reset();
    CHECK(deduplicate(recs).kept[0].tweet.id == "0");
  }

  TEST_CASE("property: dedup equals the greedy oracle; no kept pair above threshold") {
    std::mt19937_64 rng(33);
    const std::vector<std::string> words{"food", "water", "need", "help", "shelter", "abaco", "now"};
    for (int trial = 0; trial < 150; ++trial) {
      std::vector<std::string> texts;
      const std::size_t n = 1 + rng() % 30;
      for (std::size_t i = 0; i < n; ++i) {
        std::string s;
        const std::size_t len = 1 + rng() % 4;
        for (std::size_t j = 0; j < len; ++j) s += words[rng() % words.size()] + " ";
        texts.push_back(s);
      }
      const auto recs = as_records(texts);
      DedupConfig cfg;
      cfg.threshold = trial % 3 == 0 ? 0.5 : 0.85;
      const auto got = deduplicate(recs, cfg);

      std::vector<Document> docs;
      for (const auto& t : texts) docs.push_back(analyze(t));
      const auto f = oracle::tfidf_fit(docs);
      std::vector<oracle::Dense> vecs;
      for (const auto& d : docs) vecs.push_back(oracle::tfidf_vector(f, d));
      std::vector<std::size_t> order(n);
      for (std::size_t i = 0; i < n; ++i) order[i] = i;
      const auto kept = oracle::greedy_dedup(vecs, order, cfg.threshold);
      REQUIRE(got.kept.size() == kept.size());
      for (std::size_t i = 0; i < kept.size(); ++i) CHECK(got.kept[i].tweet.id == std::to_string(kept[i]));
      for (std::size_t i = 0; i < kept.size(); ++i) {
        for (std::size_t j = i + 1; j < kept.size(); ++j) {
          CHECK(oracle::dense_cosine(vecs[kept[i]], vecs[kept[j]]) <= cfg.threshold + 1e-12);
        }
      }
    }
  }
}
