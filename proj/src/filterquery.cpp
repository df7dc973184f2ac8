#include "triage/filterquery.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "csv.hpp"
#include "triage/error.hpp"
#include "triage/preprocess.hpp"

namespace triage {

namespace {

using Kind = QueryNode::Kind;

bool is_alnum(char c) {
  const auto u = static_cast<unsigned char>(c);
  return u < 0x80 && std::isalnum(u);
}

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

struct Lexeme {
  enum class Type { word, phrase, op_and, op_or, op_not, lparen, rparen, end };
  Type type = Type::end;
  std::string text;
  std::size_t pos = 0;
};

std::vector<Lexeme> lex(std::string_view s) {
  std::vector<Lexeme> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (c == '(') {
      out.push_back({Lexeme::Type::lparen, "(", i++});
    } else if (c == ')') {
      out.push_back({Lexeme::Type::rparen, ")", i++});
    } else if (c == '"') {
      const std::size_t close = s.find('"', i + 1);
      if (close == std::string_view::npos) throw QueryError("unterminated phrase", i);
      out.push_back({Lexeme::Type::phrase, std::string(s.substr(i + 1, close - i - 1)), i});
      i = close + 1;
    } else {
      std::size_t j = i;
      while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j])) && s[j] != '(' &&
             s[j] != ')' && s[j] != '"') {
        ++j;
      }
      std::string word(s.substr(i, j - i));
      Lexeme::Type type = Lexeme::Type::word;
      if (word == "AND") type = Lexeme::Type::op_and;
      if (word == "OR") type = Lexeme::Type::op_or;
      if (word == "NOT") type = Lexeme::Type::op_not;
      out.push_back({type, std::move(word), i});
      i = j;
    }
  }
  out.push_back({Lexeme::Type::end, "", s.size()});
  return out;
}

QueryNode make_nary(Kind kind, std::vector<QueryNode> parts) {
  if (parts.size() == 1) return std::move(parts.front());
  QueryNode node;
  node.kind = kind;
  for (auto& p : parts) {
    if (p.kind == kind) {
      for (auto& c : p.children) node.children.push_back(std::move(c));
    } else {
      node.children.push_back(std::move(p));
    }
  }
  return node;
}

class Parser {
 public:
  explicit Parser(std::string_view source) : lexemes_(lex(source)) {}

  QueryNode parse() {
    QueryNode root = parse_or();
    if (peek().type != Lexeme::Type::end) unexpected("expected operator or end of query");
    return root;
  }

 private:
  const Lexeme& peek() const { return lexemes_[pos_]; }
  const Lexeme& next() { return lexemes_[pos_++]; }

  [[noreturn]] void unexpected(const std::string& what) const {
    const auto& l = peek();
    const std::string got = l.type == Lexeme::Type::end ? "end of query" : "'" + l.text + "'";
    throw QueryError(what + ", got " + got, l.pos);
  }

  QueryNode parse_or() {
    std::vector<QueryNode> parts{parse_and()};
    while (peek().type == Lexeme::Type::op_or) {
      next();
      parts.push_back(parse_and());
    }
    return make_nary(Kind::op_or, std::move(parts));
  }

  QueryNode parse_and() {
    std::vector<QueryNode> parts{parse_not()};
    while (peek().type == Lexeme::Type::op_and) {
      next();
      parts.push_back(parse_not());
    }
    return make_nary(Kind::op_and, std::move(parts));
  }

  QueryNode parse_not() {
    if (peek().type == Lexeme::Type::op_not) {
      next();
      QueryNode node;
      node.kind = Kind::op_not;
      node.children.push_back(parse_not());
      return node;
    }
    return parse_primary();
  }

  QueryNode parse_primary() {
    const Lexeme& l = peek();
    switch (l.type) {
      case Lexeme::Type::word: {
        QueryNode node;
        node.kind = Kind::term;
        node.text = ascii_lower(l.text);
        next();
        return node;
      }
      case Lexeme::Type::phrase: {
        QueryNode node;
        node.kind = Kind::phrase;
        node.words = tokenize(ascii_lower(l.text));
        if (node.words.empty()) throw QueryError("phrase has no words", l.pos);
        next();
        return node;
      }
      case Lexeme::Type::lparen: {
        next();
        QueryNode inner = parse_or();
        if (peek().type != Lexeme::Type::rparen) unexpected("expected ')'");
        next();
        return inner;
      }
      default:
        unexpected("expected a term, phrase, NOT or '('");
    }
  }

  std::vector<Lexeme> lexemes_;
  std::size_t pos_ = 0;
};

bool has_positive_literal(const QueryNode& node, bool negated) {
  switch (node.kind) {
    case Kind::term:
    case Kind::phrase:
      return !negated;
    case Kind::op_not:
      return has_positive_literal(node.children.front(), !negated);
    default:
      return std::any_of(node.children.begin(), node.children.end(),
                         [&](const QueryNode& c) { return has_positive_literal(c, negated); });
  }
}

// Lowercased text plus its alphanumeric words, shared by every literal test.
struct MatchSubject {
  std::string lower;
  std::vector<std::string> words;

  explicit MatchSubject(std::string_view text) : lower(ascii_lower(text)), words(tokenize(lower)) {}
};

bool term_matches(std::string_view term, std::string_view text) {
  if (term.empty()) return false;
  std::size_t from = 0;
  while (true) {
    const std::size_t at = text.find(term, from);
    if (at == std::string_view::npos) return false;
    const bool left_ok = at == 0 || !is_alnum(text[at - 1]);
    const std::size_t end = at + term.size();
    const bool right_ok = end == text.size() || !is_alnum(text[end]);
    if (left_ok && right_ok) return true;
    from = at + 1;
  }
}

bool phrase_matches(const std::vector<std::string>& phrase, const std::vector<std::string>& words) {
  if (phrase.empty() || phrase.size() > words.size()) return false;
  auto it = std::search(words.begin(), words.end(), phrase.begin(), phrase.end());
  return it != words.end();
}

bool evaluate(const QueryNode& node, const MatchSubject& subject) {
  switch (node.kind) {
    case Kind::term: return term_matches(node.text, subject.lower);
    case Kind::phrase: return phrase_matches(node.words, subject.words);
    case Kind::op_not: return !evaluate(node.children.front(), subject);
    case Kind::op_and:
      return std::all_of(node.children.begin(), node.children.end(),
                         [&](const QueryNode& c) { return evaluate(c, subject); });
    case Kind::op_or:
      return std::any_of(node.children.begin(), node.children.end(),
                         [&](const QueryNode& c) { return evaluate(c, subject); });
  }
  return false;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> content_lines(const std::filesystem::path& path,
                                       std::vector<std::size_t>* line_numbers) {
  const std::string content = detail::read_file(path.string());
  std::vector<std::string> lines;
  std::size_t start = 0, n = 0;
  while (start <= content.size()) {
    std::size_t end = content.find('\n', start);
    if (end == std::string::npos) end = content.size();
    ++n;
    std::string line = trim(std::string_view(content).substr(start, end - start));
    if (!line.empty() && line.front() != '#') {
      lines.push_back(std::move(line));
      if (line_numbers) line_numbers->push_back(n);
    }
    start = end + 1;
  }
  return lines;
}

}  // namespace

Query parse_query(std::string_view source, std::string source_tag) {
  Query q;
  q.root = Parser(source).parse();
  if (!has_positive_literal(q.root, false)) {
    throw QueryError("query needs at least one non-negated literal", 0);
  }
  q.source_tag = std::move(source_tag);
  return q;
}

std::string to_string(const QueryNode& node) {
  auto wrapped = [](const QueryNode& child, std::initializer_list<Kind> needs_parens) {
    const bool paren = std::find(needs_parens.begin(), needs_parens.end(), child.kind) != needs_parens.end();
    return paren ? "(" + to_string(child) + ")" : to_string(child);
  };
  switch (node.kind) {
    case Kind::term: return node.text;
    case Kind::phrase: {
      std::string out = "\"";
      for (std::size_t i = 0; i < node.words.size(); ++i) {
        if (i) out.push_back(' ');
        out += node.words[i];
      }
      return out + "\"";
    }
    case Kind::op_not: return "NOT " + wrapped(node.children.front(), {Kind::op_and, Kind::op_or});
    case Kind::op_and:
    case Kind::op_or: {
      const bool is_and = node.kind == Kind::op_and;
      std::string out;
      for (std::size_t i = 0; i < node.children.size(); ++i) {
        if (i) out += is_and ? " AND " : " OR ";
        out += is_and ? wrapped(node.children[i], {Kind::op_or}) : wrapped(node.children[i], {});
      }
      return out;
    }
  }
  return {};
}

bool match(const QueryNode& node, std::string_view text) {
  return evaluate(node, MatchSubject(text));
}

bool match(const Query& query, const Tweet& tweet) { return match(query.root, tweet.text); }

Query lexicon_query(std::span<const std::string> terms, std::string source_tag) {
  std::vector<QueryNode> literals;
  std::set<std::string> seen;
  for (const auto& raw : terms) {
    const std::string term = ascii_lower(trim(raw));
    if (term.empty() || !seen.insert(term).second) continue;
    QueryNode node;
    if (term.find_first_of(" \t") != std::string::npos) {
      node.kind = Kind::phrase;
      node.words = tokenize(term);
      if (node.words.empty()) continue;
    } else {
      node.kind = Kind::term;
      node.text = term;
    }
    literals.push_back(std::move(node));
  }
  if (literals.empty()) throw DataError("lexicon '" + source_tag + "' has no terms");
  Query q;
  q.root = make_nary(Kind::op_or, std::move(literals));
  q.source_tag = std::move(source_tag);
  return q;
}

Query load_lexicon(const std::filesystem::path& path, std::string source_tag) {
  const auto lines = content_lines(path, nullptr);
  return lexicon_query(lines, std::move(source_tag));
}

std::vector<Query> load_query_file(const std::filesystem::path& path) {
  std::vector<std::size_t> numbers;
  const auto lines = content_lines(path, &numbers);
  std::vector<Query> out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    try {
      out.push_back(parse_query(lines[i], "query:" + std::to_string(numbers[i])));
    } catch (const QueryError& e) {
      throw DataError(path.string() + " line " + std::to_string(numbers[i]) + ": " + e.what());
    }
  }
  return out;
}

Query conjoin(const Query& lhs, const Query& rhs, std::string source_tag) {
  Query q;
  q.root = make_nary(Kind::op_and, {lhs.root, rhs.root});
  q.source_tag = std::move(source_tag);
  return q;
}

bool DateWindow::contains(const Tweet& tweet) const {
  if (!active()) return true;
  if (!tweet.created_at) return false;
  const std::string day = tweet.created_at->substr(0, 10);
  if (since && day < since->substr(0, 10)) return false;
  if (until && day > until->substr(0, 10)) return false;
  return true;
}

FilterResult filter_corpus(std::span<const Query> queries, std::span<const LabeledTweet> records,
                           const DateWindow& window) {
  FilterResult out;
  out.hits.assign(queries.size(), 0);
  for (const auto& r : records) {
    if (!window.contains(r.tweet)) continue;
    const MatchSubject subject(r.tweet.text);
    bool keep = false;
    for (std::size_t q = 0; q < queries.size(); ++q) {
      if (evaluate(queries[q].root, subject)) {
        ++out.hits[q];
        keep = true;
      }
    }
    if (keep) out.kept.push_back(r);
  }
  return out;
}

}  // namespace triage
