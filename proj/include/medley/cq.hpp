// Conjunctive queries over ontology terms:
//
//   query := "Ans" "(" var { "," var } ")" (":-" | ":=") atom { "," atom } ";"
//   atom  := name "(" term { "," term } ")"
//   term  := identifier | "\"" chars "\""      (\" and \\ escapes)
#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "medley/ontology.hpp"

namespace medley {

struct Term {
  enum class Kind { Variable, Constant };
  Kind kind = Kind::Variable;
  std::string value;

  static Term variable(std::string name) { return {Kind::Variable, std::move(name)}; }
  static Term constant(std::string value) { return {Kind::Constant, std::move(value)}; }
  bool is_variable() const noexcept { return kind == Kind::Variable; }
  bool is_constant() const noexcept { return kind == Kind::Constant; }

  friend bool operator==(const Term&, const Term&) = default;
  friend auto operator<=>(const Term&, const Term&) = default;
};

struct Atom {
  std::string predicate;
  std::vector<Term> args;
  std::optional<PredicateKind> kind;  // set by validate()

  bool instantiated() const;
  std::string to_string() const;

  friend bool operator==(const Atom&, const Atom&) = default;
};

struct ConjunctiveQuery {
  std::vector<std::string> answer_vars;
  std::vector<Atom> body;
  std::string source_text;
  std::vector<std::string> warnings;

  /// Equality of head and body, ignoring source text and warnings.
  bool same_structure(const ConjunctiveQuery& other) const;
  /// Variables in order of first occurrence in the body.
  std::vector<std::string> variables() const;
};

/// Throws Error(Syntax) with position, or Error(InvalidQuery) for an answer
/// variable missing from the body.
ConjunctiveQuery parse_query(std::string_view text);

/// Resolves predicates against the ontology, checks arities and variable roles,
/// removes duplicate atoms and rejects disconnected bodies.
ConjunctiveQuery validate(const ConjunctiveQuery& query, const Ontology& ontology);

/// `Ans(A,B) :- p(A,B), q(A);`
std::string canonicalize(const ConjunctiveQuery& query);

/// Double-quoted constant with \" and \\ escapes.
std::string quote_constant(std::string_view value);

}  // namespace medley
