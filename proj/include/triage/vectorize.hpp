#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "triage/corpus.hpp"
#include "triage/preprocess.hpp"

namespace triage {

using Document = std::vector<std::string>;

/// Term dictionary with document frequencies. Columns are assigned in
/// lexicographic term order, so fitting is independent of document order.
class Vocabulary {
 public:
  Vocabulary() = default;

  /// Builds from (term, df) pairs; throws DataError when indices would not be
  /// dense, a df is outside [1, n_docs], or a term repeats.
  Vocabulary(std::size_t n_docs, std::vector<std::string> terms, std::vector<std::size_t> df);

  std::size_t size() const { return terms_.size(); }
  std::size_t n_docs() const { return n_docs_; }
  const std::vector<std::string>& terms() const { return terms_; }
  std::size_t df(std::size_t index) const { return df_[index]; }

  /// Smoothed inverse document frequency ln((1 + N) / (1 + df)) + 1.
  double idf(std::size_t index) const { return idf_[index]; }

  /// Column of `term`, or -1 when out of vocabulary.
  std::int64_t index_of(std::string_view term) const;

  nlohmann::json to_json() const;
  static Vocabulary from_json(const nlohmann::json& j);

  /// FNV-1a 64 of the canonical JSON form, as 16 hex digits.
  std::string hash() const;

 private:
  std::size_t n_docs_ = 0;
  std::vector<std::string> terms_;
  std::vector<std::size_t> df_;
  std::vector<double> idf_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Throws DataError when every document is empty.
Vocabulary fit_vocabulary(std::span<const Document> docs);

/// Sparse vector with strictly increasing indices below `dim`.
struct SparseVector {
  std::size_t dim = 0;
  std::vector<std::uint32_t> indices;
  std::vector<double> values;

  std::size_t nnz() const { return indices.size(); }
  bool is_zero() const;
  std::vector<double> to_dense() const;
};

double dot(const SparseVector& a, const SparseVector& b);
double l2_norm(const SparseVector& v);
/// Sum of the weights; MNB uses this as the document's total term mass.
double sum_values(const SparseVector& v);

/// tf * idf per in-vocabulary term, L2-normalized. Empty or all-OOV
/// documents map to the zero vector.
SparseVector transform(const Document& doc, const Vocabulary& vocab);
std::vector<SparseVector> transform_all(std::span<const Document> docs, const Vocabulary& vocab);

/// dot(a, b) / (|a| |b|), 0 when either side is zero. Throws
/// std::invalid_argument on a dimension mismatch.
double cosine(const SparseVector& a, const SparseVector& b);

struct DedupConfig {
  double threshold = 0.85;
  NormalizationConfig normalization;
};

struct DuplicateRecord {
  std::string removed_id;
  std::string kept_id;
  double similarity = 0.0;
};

struct DedupResult {
  LabeledCollection kept;
  std::vector<DuplicateRecord> removed;
};

/// Visiting order for greedy dedup: ascending created_at when every record
/// has one (ties keep input order), otherwise input order.
std::vector<std::size_t> dedup_order(std::span<const LabeledTweet> records);

/// Greedy keep-first near-duplicate removal: a record is dropped when its
/// TF-IDF cosine to an already-kept record is strictly above the threshold.
/// The vocabulary is fitted on the normalized input itself. `kept` preserves
/// input order; a dropped record names the earliest-visited kept record whose
/// similarity exceeded the threshold.
DedupResult deduplicate(std::span<const LabeledTweet> records, const DedupConfig& cfg = {});

}  // namespace triage
