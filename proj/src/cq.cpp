#include "medley/cq.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "medley/error.hpp"
#include "medley/text.hpp"

namespace medley {

bool Atom::instantiated() const {
  return std::any_of(args.begin(), args.end(), [](const Term& t) { return t.is_constant(); });
}

std::string quote_constant(std::string_view value) {
  std::string out = "\"";
  for (char c : value) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  out += '"';
  return out;
}

std::string Atom::to_string() const {
  std::string out = predicate + "(";
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) out += ",";
    out += args[i].is_variable() ? args[i].value : quote_constant(args[i].value);
  }
  return out + ")";
}

bool ConjunctiveQuery::same_structure(const ConjunctiveQuery& other) const {
  return answer_vars == other.answer_vars && body == other.body;
}

std::vector<std::string> ConjunctiveQuery::variables() const {
  std::vector<std::string> out;
  for (const auto& a : body)
    for (const auto& t : a.args)
      if (t.is_variable() && std::find(out.begin(), out.end(), t.value) == out.end()) out.push_back(t.value);
  return out;
}

namespace {

struct Token {
  enum class Kind { Ident, String, LParen, RParen, Comma, Semicolon, Turnstile, End };
  Kind kind;
  std::string text;
  std::size_t offset;
};

class Lexer {
 public:
  explicit Lexer(std::string_view s) : s_(s) {}

  Token next() {
    while (i_ < s_.size() && (text::is_xml_space(s_[i_]) || s_[i_] == '\f' || s_[i_] == '\v')) ++i_;
    std::size_t at = i_;
    if (i_ >= s_.size()) return {Token::Kind::End, "", at};
    char c = s_[i_];
    switch (c) {
      case '(': ++i_; return {Token::Kind::LParen, "(", at};
      case ')': ++i_; return {Token::Kind::RParen, ")", at};
      case ',': ++i_; return {Token::Kind::Comma, ",", at};
      case ';': ++i_; return {Token::Kind::Semicolon, ";", at};
      case ':':
        if (i_ + 1 < s_.size() && (s_[i_ + 1] == '-' || s_[i_ + 1] == '=')) {
          i_ += 2;
          return {Token::Kind::Turnstile, std::string(s_.substr(at, 2)), at};
        }
        fail(at, "expected ':-' or ':='");
      case '"': return string_token();
      default: break;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (i_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[i_])) || s_[i_] == '_')) ++i_;
      return {Token::Kind::Ident, std::string(s_.substr(at, i_ - at)), at};
    }
    fail(at, std::string("unexpected character '") + c + "'");
  }

  [[noreturn]] void fail(std::size_t at, const std::string& msg) const {
    throw Error(ErrorKind::Syntax, "query: " + msg, SourcePosition::at(s_, at));
  }

 private:
  Token string_token() {
    std::size_t at = i_++;
    std::string out;
    while (i_ < s_.size() && s_[i_] != '"') {
      if (s_[i_] == '\\') {
        if (i_ + 1 >= s_.size() || (s_[i_ + 1] != '"' && s_[i_ + 1] != '\\')) fail(i_, "invalid escape in string constant");
        out += s_[i_ + 1];
        i_ += 2;
        continue;
      }
      out += s_[i_++];
    }
    if (i_ >= s_.size()) fail(at, "unterminated string constant");
    ++i_;
    return {Token::Kind::String, std::move(out), at};
  }

  std::string_view s_;
  std::size_t i_ = 0;
};

class QueryParser {
 public:
  explicit QueryParser(std::string_view s) : lex_(s) { advance(); }

  ConjunctiveQuery parse() {
    ConjunctiveQuery q;
    if (tok_.kind != Token::Kind::Ident || tok_.text != "Ans") lex_.fail(tok_.offset, "query must start with 'Ans('");
    advance();
    expect(Token::Kind::LParen, "'('");
    for (;;) {
      if (tok_.kind != Token::Kind::Ident) lex_.fail(tok_.offset, "expected answer variable");
      q.answer_vars.push_back(tok_.text);
      advance();
      if (tok_.kind == Token::Kind::Comma) {
        advance();
        continue;
      }
      expect(Token::Kind::RParen, "',' or ')'");
      break;
    }
    expect(Token::Kind::Turnstile, "':-' or ':='");
    if (tok_.kind == Token::Kind::Semicolon) lex_.fail(tok_.offset, "empty query body");
    for (;;) {
      q.body.push_back(atom());
      if (tok_.kind == Token::Kind::Comma) {
        advance();
        continue;
      }
      expect(Token::Kind::Semicolon, "',' or ';'");
      break;
    }
    if (tok_.kind != Token::Kind::End) lex_.fail(tok_.offset, "text after ';'");
    return q;
  }

 private:
  void advance() { tok_ = lex_.next(); }
  void expect(Token::Kind k, const char* what) {
    if (tok_.kind != k) lex_.fail(tok_.offset, std::string("expected ") + what);
    advance();
  }

  Atom atom() {
    if (tok_.kind != Token::Kind::Ident) lex_.fail(tok_.offset, "expected predicate name");
    Atom a;
    a.predicate = tok_.text;
    advance();
    expect(Token::Kind::LParen, "'('");
    for (;;) {
      if (tok_.kind == Token::Kind::Ident) a.args.push_back(Term::variable(tok_.text));
      else if (tok_.kind == Token::Kind::String) a.args.push_back(Term::constant(tok_.text));
      else lex_.fail(tok_.offset, "expected variable or quoted constant");
      advance();
      if (tok_.kind == Token::Kind::Comma) {
        advance();
        continue;
      }
      expect(Token::Kind::RParen, "',' or ')'");
      return a;
    }
  }

  Lexer lex_;
  Token tok_{};
};

bool connected(const std::vector<Atom>& body) {
  if (body.size() <= 1) return true;
  std::vector<std::set<std::string>> vars(body.size());
  for (std::size_t i = 0; i < body.size(); ++i)
    for (const auto& t : body[i].args)
      if (t.is_variable()) vars[i].insert(t.value);
  std::vector<bool> seen(body.size(), false);
  std::vector<std::size_t> stack{0};
  seen[0] = true;
  std::set<std::string> reached = vars[0];
  while (!stack.empty()) {
    stack.pop_back();
    for (std::size_t j = 0; j < body.size(); ++j) {
      if (seen[j]) continue;
      bool shares = std::any_of(vars[j].begin(), vars[j].end(), [&](const std::string& v) { return reached.count(v); });
      if (!shares) continue;
      seen[j] = true;
      reached.insert(vars[j].begin(), vars[j].end());
      stack.push_back(j);
    }
  }
  return std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
}

}  // namespace

ConjunctiveQuery parse_query(std::string_view text) {
  ConjunctiveQuery q = QueryParser(text).parse();
  q.source_text = std::string(text);
  std::set<std::string> body_vars;
  for (const auto& a : q.body)
    for (const auto& t : a.args)
      if (t.is_variable()) body_vars.insert(t.value);
  for (const auto& v : q.answer_vars)
    if (!body_vars.count(v)) throw Error(ErrorKind::InvalidQuery, "answer variable " + v + " does not occur in the body");
  return q;
}

ConjunctiveQuery validate(const ConjunctiveQuery& query, const Ontology& ontology) {
  ConjunctiveQuery out = query;
  out.body.clear();
  // Variables bound to literal values vs. individuals; mixing is rejected.
  std::map<std::string, std::string> literal_use, individual_use;

  for (const Atom& in : query.body) {
    Atom a = in;
    ResolvedPredicate r = ontology.resolve_predicate(a.predicate);
    if (r.casing_differs)
      out.warnings.push_back("predicate '" + a.predicate + "' resolved to '" + r.canonical + "' (casing differs)");
    a.predicate = r.canonical;
    a.kind = r.kind;
    std::size_t want = r.kind == PredicateKind::Class ? 1 : 2;
    if (a.args.size() != want)
      throw Error(ErrorKind::Arity, std::string(to_string(r.kind)) + " " + a.predicate + " takes " + std::to_string(want) +
                                        " argument(s), got " + std::to_string(a.args.size()));
    if (r.kind == PredicateKind::Class && a.args[0].is_constant())
      throw Error(ErrorKind::InvalidQuery, "class atom " + a.to_string() + " applied to a constant");
    if (r.kind != PredicateKind::Class && a.args[0].is_constant())
      throw Error(ErrorKind::InvalidQuery, "property atom " + a.to_string() + " must have a variable as first argument");
    individual_use.emplace(a.args[0].value, a.to_string());
    if (a.args.size() == 2 && a.args[1].is_variable()) {
      if (r.kind == PredicateKind::DatatypeProperty) literal_use.emplace(a.args[1].value, a.to_string());
      else individual_use.emplace(a.args[1].value, a.to_string());
    }
    if (r.kind == PredicateKind::ObjectProperty && a.args[1].is_constant())
      out.warnings.push_back("object property atom " + a.to_string() + " carries a constant; treated as a key filter");
    if (std::find(out.body.begin(), out.body.end(), a) != out.body.end()) {
      out.warnings.push_back("duplicate atom " + a.to_string() + " removed");
      continue;
    }
    out.body.push_back(std::move(a));
  }
  for (const auto& [var, atom] : literal_use)
    if (auto it = individual_use.find(var); it != individual_use.end())
      throw Error(ErrorKind::InvalidQuery, "variable " + var + " is used both as a literal (" + atom + ") and as an individual (" + it->second + ")");
  if (!connected(out.body)) throw Error(ErrorKind::InvalidQuery, "query body is disconnected (no shared variables between some atoms)");
  return out;
}

std::string canonicalize(const ConjunctiveQuery& query) {
  std::string out = "Ans(" + text::join(query.answer_vars, ",") + ") :- ";
  for (std::size_t i = 0; i < query.body.size(); ++i) {
    if (i) out += ", ";
    out += query.body[i].to_string();
  }
  return out + ";";
}

}  // namespace medley
