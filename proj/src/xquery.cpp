#include "medley/xquery.hpp"

#include <cstdint>

#include "medley/error.hpp"
#include "medley/text.hpp"

namespace medley::xquery {

namespace {

class Parser {
 public:
  explicit Parser(std::string_view s) : s_(s) {}

  Query parse() {
    Query q;
    keyword("for");
    q.var = variable();
    keyword("in");
    q.for_path = path_token();
    if (!q.for_path.absolute) fail("for-clause path must be absolute");
    skip_ws();
    if (peek_word() == "where") {
      keyword("where");
      q.where.push_back(condition(q.var));
      while (peek_word() == "and") {
        keyword("and");
        q.where.push_back(condition(q.var));
      }
    }
    keyword("return");
    std::string rv = variable();
    if (rv != q.var) fail("return clause must reference $" + q.var);
    if (!at_end() && s_[i_] == '/') {
      ++i_;
      xpath::Path rel = path_token();
      if (rel.absolute) fail("return path must be relative");
      q.return_path = rel;
    }
    skip_ws();
    if (!at_end()) fail("unsupported construct after return clause");
    return q;
  }

 private:
  std::string_view s_;
  std::size_t i_ = 0;

  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(ErrorKind::Syntax, "XQuery: " + msg, SourcePosition::at(s_, i_));
  }
  bool at_end() const { return i_ >= s_.size(); }
  void skip_ws() {
    while (!at_end() && text::is_xml_space(s_[i_])) ++i_;
  }

  static bool word_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' || c == '_';
  }

  std::string_view peek_word() {
    skip_ws();
    std::size_t j = i_;
    while (j < s_.size() && word_char(s_[j])) ++j;
    return s_.substr(i_, j - i_);
  }

  void keyword(std::string_view kw) {
    std::string_view w = peek_word();
    if (w != kw) fail("expected '" + std::string(kw) + "'" + (w.empty() ? std::string() : ", found '" + std::string(w) + "'"));
    i_ += w.size();
  }

  void expect(char c) {
    skip_ws();
    if (at_end() || s_[i_] != c) fail(std::string("expected '") + c + "'");
    ++i_;
  }

  std::string variable() {
    skip_ws();
    if (at_end() || s_[i_] != '$') fail("expected variable");
    ++i_;
    std::size_t b = i_;
    while (!at_end() && word_char(s_[i_])) ++i_;
    std::string name(s_.substr(b, i_ - b));
    if (!text::is_identifier(name)) fail("invalid variable name");
    return name;
  }

  xpath::Path path_token() {
    skip_ws();
    std::size_t b = i_;
    while (!at_end() && !text::is_xml_space(s_[i_]) && s_[i_] != ')') ++i_;
    if (b == i_) fail("expected path");
    try {
      return xpath::Path::parse(s_.substr(b, i_ - b));
    } catch (const Error& e) {
      i_ = b;
      fail(e.detail());
    }
  }

  std::string string_literal() {
    skip_ws();
    if (at_end() || (s_[i_] != '"' && s_[i_] != '\'')) fail("expected string literal");
    char q = s_[i_++];
    std::string out;
    for (;;) {
      if (at_end()) fail("unterminated string literal");
      char c = s_[i_];
      if (c == q) {
        if (i_ + 1 < s_.size() && s_[i_ + 1] == q) {
          out += q;
          i_ += 2;
          continue;
        }
        ++i_;
        return out;
      }
      if (c == '&') {
        std::size_t semi = s_.find(';', i_);
        if (semi == std::string_view::npos) fail("unterminated reference in string literal");
        // Reuse the XML reference decoder through a tiny document.
        std::string probe = "<x>" + std::string(s_.substr(i_, semi - i_ + 1)) + "</x>";
        try {
          out += xml::parse(probe).string_value();
        } catch (const Error&) {
          fail("bad reference in string literal");
        }
        i_ = semi + 1;
        continue;
      }
      out += c;
      ++i_;
    }
  }

  xpath::Path relative_after_var(const std::string& var) {
    std::string v = variable();
    if (v != var) fail("condition must reference $" + var);
    if (at_end() || s_[i_] != '/') fail("expected '/' after $" + var);
    ++i_;
    xpath::Path p = path_token();
    if (p.absolute) fail("where path must be relative");
    return p;
  }

  Condition condition(const std::string& var) {
    Condition c;
    if (peek_word() == "lower-case") {
      keyword("lower-case");
      expect('(');
      c.lower_case = true;
      c.path = relative_after_var(var);
      expect(')');
    } else {
      c.path = relative_after_var(var);
    }
    keyword("eq");
    c.value = string_literal();
    return c;
  }
};

}  // namespace

Query Query::parse(std::string_view text) { return Parser(text).parse(); }

std::string quote(std::string_view value) {
  std::string out = "\"";
  for (char c : value) {
    if (c == '"') out += "\"\"";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  out += '"';
  return out;
}

std::string Query::to_string() const {
  std::string out = "for $" + var + " in " + for_path.to_string();
  for (std::size_t i = 0; i < where.size(); ++i) {
    out += i == 0 ? " where " : " and ";
    const auto& c = where[i];
    std::string lhs = "$" + var + "/" + c.path.to_string();
    out += c.lower_case ? "lower-case(" + lhs + ")" : lhs;
    out += " eq ";
    out += quote(c.value);
  }
  out += " return $" + var;
  if (return_path) out += "/" + return_path->to_string();
  return out;
}

xpath::Path Query::item_path() const { return return_path ? for_path.join(*return_path) : for_path; }

bool condition_holds(const xml::Node& node, const Condition& cond) {
  const std::string want = text::normalize_value(cond.value);
  for (const xml::Node* hit : xpath::eval_relative(node, cond.path)) {
    std::string sv = hit->string_value();
    std::string got = cond.lower_case ? text::fold_key(sv) : text::normalize_value(sv);
    if (got == want) return true;
  }
  return false;
}

void visit_results(const xml::Node& doc, const Query& q, const xpath::MatchVisitor& visit) {
  xpath::visit_absolute(doc, q.for_path, [&](const xml::Node& n, const std::vector<std::string>& names) {
    for (const auto& c : q.where)
      if (!condition_holds(n, c)) return;
    if (!q.return_path) {
      visit(n, names);
      return;
    }
    xpath::Path rel = *q.return_path;
    // Re-walk the relative part so the concrete names of `*` steps are reported.
    xpath::Path anchored;
    anchored.absolute = true;
    anchored.steps.push_back(n.name);
    anchored.steps.insert(anchored.steps.end(), rel.steps.begin(), rel.steps.end());
    xpath::visit_absolute(n, anchored, [&](const xml::Node& item, const std::vector<std::string>& tail) {
      std::vector<std::string> item_names = names;
      item_names.insert(item_names.end(), tail.begin() + 1, tail.end());
      visit(item, item_names);
    });
  });
}

xml::Node eval(const xml::Node& doc, const Query& q) {
  xml::Node result = xml::Node::element("Result");
  visit_results(doc, q, [&](const xml::Node& item, const std::vector<std::string>&) { result.children.push_back(item); });
  return result;
}

}  // namespace medley::xquery
