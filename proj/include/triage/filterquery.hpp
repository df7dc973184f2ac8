#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "triage/corpus.hpp"

namespace triage {

/// Node of a boolean keyword query. Literals are stored lowercased.
struct QueryNode {
  enum class Kind { term, phrase, op_and, op_or, op_not };

  Kind kind = Kind::term;
  std::string text;                 // term literal
  std::vector<std::string> words;   // phrase literal, one entry per word
  std::vector<QueryNode> children;  // and/or: >= 2, not: exactly 1

  friend bool operator==(const QueryNode&, const QueryNode&) = default;
};

struct Query {
  QueryNode root;
  /// Which lexicon the query came from ("query", "generic-disaster",
  /// "un-cluster", "aid-type", "location", ...).
  std::string source_tag = "query";
};

/// Grammar: terms, "quoted phrases", AND / OR / NOT (uppercase), parentheses.
/// Precedence NOT > AND > OR; chains of the same operator are flattened.
/// Throws QueryError carrying the byte offset of the offending token.
Query parse_query(std::string_view source, std::string source_tag = "query");

/// Canonical text form; parse_query(to_string(q)) reproduces q.root.
std::string to_string(const QueryNode& node);

/// Case-insensitive evaluation against raw text. A term matches where it
/// occurs with no ASCII alphanumeric immediately before or after it; a phrase
/// matches a contiguous run of alphanumeric words.
bool match(const QueryNode& node, std::string_view text);
bool match(const Query& query, const Tweet& tweet);

/// Reads a lexicon (one term per line, '#' starts a comment line, multi-word
/// entries become phrases) into a single OR query.
Query load_lexicon(const std::filesystem::path& path, std::string source_tag);
Query lexicon_query(std::span<const std::string> terms, std::string source_tag);

/// One query per non-empty, non-comment line.
std::vector<Query> load_query_file(const std::filesystem::path& path);

/// Conjunction of two queries, e.g. (keywords) AND (locations).
Query conjoin(const Query& lhs, const Query& rhs, std::string source_tag);

/// Inclusive date window on created_at (compared on the YYYY-MM-DD prefix).
/// Tweets without a timestamp fall outside any window.
struct DateWindow {
  std::optional<std::string> since;
  std::optional<std::string> until;

  bool active() const { return since || until; }
  bool contains(const Tweet& tweet) const;
};

struct FilterResult {
  LabeledCollection kept;
  std::vector<std::size_t> hits;  // per query, in-window tweets it matched
};

/// Keeps tweets matching at least one query and lying inside the window, in
/// input order.
FilterResult filter_corpus(std::span<const Query> queries,
                           std::span<const LabeledTweet> records,
                           const DateWindow& window = {});

}  // namespace triage
