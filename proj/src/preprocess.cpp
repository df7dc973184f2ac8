#include "triage/preprocess.hpp"

#include <algorithm>
#include <cctype>

namespace triage {

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

bool is_alnum(char c) {
  const auto u = static_cast<unsigned char>(c);
  return u < 0x80 && std::isalnum(u);
}

char to_lower(char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

bool starts_with_icase(std::string_view s, std::string_view prefix) {
  if (s.size() < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (to_lower(s[i]) != prefix[i]) return false;
  }
  return true;
}

std::string_view tag_mode_name(TagMode m) {
  return m == TagMode::remove_token ? "remove_token" : "strip_marker";
}

}  // namespace

bool is_url_token(std::string_view token) {
  if (starts_with_icase(token, "www.")) return true;
  // scheme://  with scheme = ALPHA *( ALPHA / DIGIT / "+" / "-" / "." )
  auto sep = token.find("://");
  if (sep == std::string_view::npos || sep == 0) return false;
  if (!std::isalpha(static_cast<unsigned char>(token[0]))) return false;
  for (std::size_t i = 1; i < sep; ++i) {
    const char c = token[i];
    if (!(is_alnum(c) || c == '+' || c == '-' || c == '.')) return false;
  }
  return true;
}

bool is_image_link_token(std::string_view token) {
  return starts_with_icase(token, "pic.twitter.com/") || starts_with_icase(token, "pbs.twimg.com/");
}

bool is_number_token(std::string_view token) {
  bool digit = false;
  for (char c : token) {
    if (c >= '0' && c <= '9') {
      digit = true;
    } else if (std::string_view(".,:;/-+%").find(c) == std::string_view::npos) {
      return false;
    }
  }
  return digit;
}

nlohmann::json to_json(const NormalizationConfig& cfg) {
  return {
      {"remove_urls", cfg.remove_urls},
      {"remove_image_links", cfg.remove_image_links},
      {"remove_numbers", cfg.remove_numbers},
      {"remove_hashtags", cfg.remove_hashtags},
      {"remove_mentions", cfg.remove_mentions},
      {"remove_non_ascii", cfg.remove_non_ascii},
      {"collapse_whitespace", cfg.collapse_whitespace},
      {"lowercase", cfg.lowercase},
      {"tag_mode", tag_mode_name(cfg.tag_mode)},
  };
}

NormalizationConfig normalization_from_json(const nlohmann::json& j) {
  NormalizationConfig cfg;
  cfg.remove_urls = j.value("remove_urls", cfg.remove_urls);
  cfg.remove_image_links = j.value("remove_image_links", cfg.remove_image_links);
  cfg.remove_numbers = j.value("remove_numbers", cfg.remove_numbers);
  cfg.remove_hashtags = j.value("remove_hashtags", cfg.remove_hashtags);
  cfg.remove_mentions = j.value("remove_mentions", cfg.remove_mentions);
  cfg.remove_non_ascii = j.value("remove_non_ascii", cfg.remove_non_ascii);
  cfg.collapse_whitespace = j.value("collapse_whitespace", cfg.collapse_whitespace);
  cfg.lowercase = j.value("lowercase", cfg.lowercase);
  const auto mode = j.value("tag_mode", std::string(tag_mode_name(cfg.tag_mode)));
  cfg.tag_mode = mode == "strip_marker" ? TagMode::strip_marker : TagMode::remove_token;
  return cfg;
}

std::string normalize(std::string_view text, const NormalizationConfig& cfg) {
  std::string ascii;
  ascii.reserve(text.size());
  for (char c : text) {
    if (cfg.remove_non_ascii && static_cast<unsigned char>(c) >= 0x80) continue;
    ascii.push_back(cfg.lowercase ? to_lower(c) : c);
  }

  // Walk whitespace-delimited tokens; keep, trim or drop each one. With
  // collapsing on, kept tokens are joined by single spaces; otherwise the
  // original separators survive and only token bytes are removed.
  std::string out;
  out.reserve(ascii.size());
  std::size_t i = 0;
  while (i < ascii.size()) {
    if (is_space(ascii[i])) {
      if (!cfg.collapse_whitespace) out.push_back(ascii[i]);
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < ascii.size() && !is_space(ascii[j])) ++j;
    std::string_view token(ascii.data() + i, j - i);
    i = j;

    if ((cfg.remove_urls && is_url_token(token)) ||
        (cfg.remove_image_links && is_image_link_token(token)) ||
        (cfg.remove_numbers && is_number_token(token))) {
      continue;
    }
    const bool hashtag = cfg.remove_hashtags && token.front() == '#';
    const bool mention = cfg.remove_mentions && token.front() == '@';
    if (hashtag || mention) {
      if (cfg.tag_mode == TagMode::remove_token) continue;
      // Strip every leading marker so a second pass finds nothing to strip.
      const char marker = token.front();
      while (!token.empty() && token.front() == marker) token.remove_prefix(1);
      if (token.empty() || (cfg.remove_hashtags && token.front() == '#') ||
          (cfg.remove_mentions && token.front() == '@')) {
        continue;
      }
      if ((cfg.remove_urls && is_url_token(token)) ||
          (cfg.remove_image_links && is_image_link_token(token)) ||
          (cfg.remove_numbers && is_number_token(token))) {
        continue;
      }
    }
    if (cfg.collapse_whitespace && !out.empty()) out.push_back(' ');
    out.append(token);
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && !is_alnum(text[i])) ++i;
    std::size_t j = i;
    while (j < text.size() && is_alnum(text[j])) ++j;
    if (j > i) tokens.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return tokens;
}

std::vector<std::string> analyze(std::string_view text, const NormalizationConfig& cfg) {
  return tokenize(normalize(text, cfg));
}

}  // namespace triage
