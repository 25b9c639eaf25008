// FLWOR subset understood by the data services:
//
//   query := "for" $v "in" abs-path
//            [ "where" cond { "and" cond } ]
//            "return" $v [ "/" rel-path ]
//   cond  := $v "/" rel-path "eq" string
//          | "lower-case" "(" $v "/" rel-path ")" "eq" string
//
// Strings are double- or single-quoted; a doubled quote escapes itself and the
// predefined entity / character references are expanded.
#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "medley/xml.hpp"
#include "medley/xpath.hpp"

namespace medley::xquery {

struct Condition {
  xpath::Path path;        // relative to the for-variable
  bool lower_case = false;  // compare the lower-cased string value
  std::string value;

  friend bool operator==(const Condition&, const Condition&) = default;
};

struct Query {
  std::string var = "d";  // without '$'
  xpath::Path for_path;
  std::vector<Condition> where;
  std::optional<xpath::Path> return_path;  // relative extension of the for-variable

  static Query parse(std::string_view text);
  /// Single-line canonical rendering.
  std::string to_string() const;
  /// Absolute path of the returned items.
  xpath::Path item_path() const;

  friend bool operator==(const Query&, const Query&) = default;
};

/// Quotes `value` as an XQuery string literal.
std::string quote(std::string_view value);

/// True when one of the nodes selected by `cond.path` from `node` matches.
bool condition_holds(const xml::Node& node, const Condition& cond);

/// Calls `visit` for every returned item with its concrete absolute element names.
void visit_results(const xml::Node& doc, const Query& q, const xpath::MatchVisitor& visit);

/// `<Result>` wrapping deep copies of the returned items in document order.
xml::Node eval(const xml::Node& doc, const Query& q);

}  // namespace medley::xquery
