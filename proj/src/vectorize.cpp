#include "triage/vectorize.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <stdexcept>

#include "triage/error.hpp"

namespace triage {

Vocabulary::Vocabulary(std::size_t n_docs, std::vector<std::string> terms, std::vector<std::size_t> df)
    : n_docs_(n_docs), terms_(std::move(terms)), df_(std::move(df)) {
  if (terms_.size() != df_.size()) throw DataError("vocabulary terms and df differ in length");
  idf_.reserve(terms_.size());
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    if (df_[i] < 1 || df_[i] > n_docs_) {
      throw DataError("document frequency of '" + terms_[i] + "' outside [1, n_docs]");
    }
    if (!index_.emplace(terms_[i], i).second) throw DataError("duplicate term '" + terms_[i] + "'");
    idf_.push_back(std::log((1.0 + static_cast<double>(n_docs_)) / (1.0 + static_cast<double>(df_[i]))) + 1.0);
  }
}

std::int64_t Vocabulary::index_of(std::string_view term) const {
  auto it = index_.find(std::string(term));
  return it == index_.end() ? -1 : static_cast<std::int64_t>(it->second);
}

nlohmann::json Vocabulary::to_json() const {
  nlohmann::json terms = nlohmann::json::array();
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    terms.push_back({{"t", terms_[i]}, {"df", df_[i]}, {"idx", i}});
  }
  return {{"n_docs", n_docs_}, {"terms", std::move(terms)}};
}

Vocabulary Vocabulary::from_json(const nlohmann::json& j) {
  try {
    const auto n_docs = j.at("n_docs").get<std::size_t>();
    const auto& entries = j.at("terms");
    std::vector<std::string> terms(entries.size());
    std::vector<std::size_t> df(entries.size());
    std::vector<bool> filled(entries.size(), false);
    for (const auto& e : entries) {
      const auto idx = e.at("idx").get<std::size_t>();
      if (idx >= entries.size() || filled[idx]) throw DataError("vocabulary indices are not dense");
      filled[idx] = true;
      terms[idx] = e.at("t").get<std::string>();
      df[idx] = e.at("df").get<std::size_t>();
    }
    return Vocabulary(n_docs, std::move(terms), std::move(df));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed vocabulary: ") + e.what());
  }
}

std::string Vocabulary::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : to_json().dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Vocabulary fit_vocabulary(std::span<const Document> docs) {
  std::map<std::string, std::size_t> df;
  bool any = false;
  for (const auto& doc : docs) {
    std::vector<std::string> uniq(doc.begin(), doc.end());
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    for (auto& t : uniq) ++df[t];
    any = any || !doc.empty();
  }
  if (!any) throw DataError("cannot fit a vocabulary: every document is empty");
  std::vector<std::string> terms;
  std::vector<std::size_t> counts;
  terms.reserve(df.size());
  counts.reserve(df.size());
  for (auto& [t, c] : df) {
    terms.push_back(t);
    counts.push_back(c);
  }
  return Vocabulary(docs.size(), std::move(terms), std::move(counts));
}

bool SparseVector::is_zero() const {
  return std::all_of(values.begin(), values.end(), [](double v) { return v == 0.0; });
}

std::vector<double> SparseVector::to_dense() const {
  std::vector<double> out(dim, 0.0);
  for (std::size_t k = 0; k < indices.size(); ++k) out[indices[k]] = values[k];
  return out;
}

double dot(const SparseVector& a, const SparseVector& b) {
  if (a.dim != b.dim) {
    throw std::invalid_argument("dimension mismatch: " + std::to_string(a.dim) + " vs " +
                                std::to_string(b.dim));
  }
  double sum = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.indices.size() && j < b.indices.size()) {
    if (a.indices[i] < b.indices[j]) {
      ++i;
    } else if (a.indices[i] > b.indices[j]) {
      ++j;
    } else {
      sum += a.values[i++] * b.values[j++];
    }
  }
  return sum;
}

double l2_norm(const SparseVector& v) {
  double s = 0.0;
  for (double x : v.values) s += x * x;
  return std::sqrt(s);
}

double sum_values(const SparseVector& v) {
  return std::accumulate(v.values.begin(), v.values.end(), 0.0);
}

SparseVector transform(const Document& doc, const Vocabulary& vocab) {
  std::map<std::uint32_t, double> tf;
  for (const auto& token : doc) {
    const auto idx = vocab.index_of(token);
    if (idx >= 0) tf[static_cast<std::uint32_t>(idx)] += 1.0;
  }
  SparseVector v;
  v.dim = vocab.size();
  v.indices.reserve(tf.size());
  v.values.reserve(tf.size());
  for (auto& [idx, count] : tf) {
    v.indices.push_back(idx);
    v.values.push_back(count * vocab.idf(idx));
  }
  const double norm = l2_norm(v);
  if (norm > 0.0) {
    for (double& x : v.values) x /= norm;
  }
  return v;
}

std::vector<SparseVector> transform_all(std::span<const Document> docs, const Vocabulary& vocab) {
  std::vector<SparseVector> out;
  out.reserve(docs.size());
  for (const auto& d : docs) out.push_back(transform(d, vocab));
  return out;
}

double cosine(const SparseVector& a, const SparseVector& b) {
  const double d = dot(a, b);
  const double na = l2_norm(a);
  const double nb = l2_norm(b);
  if (na == 0.0 || nb == 0.0) return 0.0;
  // Rounding can push a self-similarity just past 1, which would break the
  // strict threshold comparison at 1.0.
  return std::clamp(d / (na * nb), -1.0, 1.0);
}

std::vector<std::size_t> dedup_order(std::span<const LabeledTweet> records) {
  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), 0);
  const bool all_timestamped = std::all_of(records.begin(), records.end(),
                                           [](const LabeledTweet& r) { return r.tweet.created_at.has_value(); });
  if (all_timestamped) {
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return *records[a].tweet.created_at < *records[b].tweet.created_at;
    });
  }
  return order;
}

DedupResult deduplicate(std::span<const LabeledTweet> records, const DedupConfig& cfg) {
  if (!(cfg.threshold >= 0.0 && cfg.threshold <= 1.0)) {
    throw std::invalid_argument("dedup threshold must lie in [0, 1]");
  }
  std::vector<Document> docs;
  docs.reserve(records.size());
  for (const auto& r : records) docs.push_back(analyze(r.tweet.text, cfg.normalization));

  std::vector<SparseVector> vectors;
  const bool any_terms = std::any_of(docs.begin(), docs.end(), [](const Document& d) { return !d.empty(); });
  if (any_terms) {
    vectors = transform_all(docs, fit_vocabulary(docs));
  } else {
    vectors.assign(docs.size(), SparseVector{});
  }

  DedupResult out;
  std::vector<bool> keep(records.size(), false);
  std::vector<std::size_t> kept_so_far;
  for (std::size_t i : dedup_order(records)) {
    bool duplicate = false;
    if (!vectors[i].is_zero()) {
      for (std::size_t j : kept_so_far) {
        const double sim = cosine(vectors[i], vectors[j]);
        if (sim > cfg.threshold) {
          out.removed.push_back({records[i].tweet.id, records[j].tweet.id, sim});
          duplicate = true;
          break;
        }
      }
    }
    if (!duplicate) {
      keep[i] = true;
      kept_so_far.push_back(i);
    }
  }
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (keep[i]) out.kept.push_back(records[i]);
  }
  return out;
}

}  // namespace triage
