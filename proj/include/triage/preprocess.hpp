#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace triage {

/// What happens to #hashtags and @mentions when their rule is enabled.
enum class TagMode {
  remove_token,  // drop the whole token, word included
  strip_marker,  // drop only the leading '#' / '@'
};

/// Text cleanup rules applied before vectorization. Rules operate on
/// whitespace-delimited tokens after non-ASCII bytes are dropped; whitespace
/// collapsing always runs last.
struct NormalizationConfig {
  bool remove_urls = true;
  bool remove_image_links = true;
  bool remove_numbers = true;
  bool remove_hashtags = true;
  bool remove_mentions = true;
  bool remove_non_ascii = true;
  bool collapse_whitespace = true;
  bool lowercase = true;
  TagMode tag_mode = TagMode::remove_token;

  friend bool operator==(const NormalizationConfig&, const NormalizationConfig&) = default;
};

nlohmann::json to_json(const NormalizationConfig& cfg);
/// Missing keys keep their defaults.
NormalizationConfig normalization_from_json(const nlohmann::json& j);

std::string normalize(std::string_view text, const NormalizationConfig& cfg = {});

/// Maximal runs of ASCII letters and digits, in order.
std::vector<std::string> tokenize(std::string_view text);

/// normalize followed by tokenize.
std::vector<std::string> analyze(std::string_view text, const NormalizationConfig& cfg = {});

// Token classifiers used by normalize (exposed for tests).
bool is_url_token(std::string_view token);
bool is_image_link_token(std::string_view token);
bool is_number_token(std::string_view token);

}  // namespace triage
