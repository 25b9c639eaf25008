// Domain ontology: single-inheritance class tree plus datatype and object
// properties. Immutable after load.
//
// File format (UTF-8, one declaration per line, `#` starts a comment line):
//   class <Name> [< <Parent>]
//   dataprop <name> domain=<Class>
//   objprop <name> domain=<Class> range=<Class>
//   base <absolute-IRI>
// Forward references are allowed.
#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace medley {

struct ClassDef {
  std::string name;
  std::optional<std::string> parent;
};

struct DatatypeProperty {
  std::string name;
  std::string domain;
};

struct ObjectProperty {
  std::string name;
  std::string domain;
  std::string range;
};

enum class PredicateKind { Class, DatatypeProperty, ObjectProperty };
std::string_view to_string(PredicateKind kind);

struct ResolvedPredicate {
  PredicateKind kind;
  std::string canonical;
  bool casing_differs = false;
};

inline constexpr std::string_view kDefaultBaseIri = "http://medley.example/onto#";

class Ontology {
 public:
  static Ontology load(std::string_view text);

  const std::string& base_iri() const noexcept { return base_iri_; }
  const std::vector<ClassDef>& classes() const noexcept { return classes_; }
  const std::vector<DatatypeProperty>& datatype_properties() const noexcept { return datatype_properties_; }
  const std::vector<ObjectProperty>& object_properties() const noexcept { return object_properties_; }

  bool has_class(std::string_view name) const;
  const ClassDef& class_def(std::string_view name) const;
  const DatatypeProperty& datatype_property(std::string_view name) const;
  const ObjectProperty& object_property(std::string_view name) const;

  /// Reflexive-transitive subclass test; throws on unknown names.
  bool is_subclass(std::string_view a, std::string_view b) const;
  /// a ⊑ b or b ⊑ a.
  bool compatible(std::string_view a, std::string_view b) const;
  /// Topmost ancestor of `name` (itself for roots).
  const std::string& root_of(std::string_view name) const;
  /// Number of ancestors (0 for roots).
  std::size_t depth(std::string_view name) const;
  /// Declared subclasses of `name`, including itself.
  std::vector<std::string> descendants(std::string_view name) const;

  /// Case-insensitive lookup across all three namespaces.
  ResolvedPredicate resolve_predicate(std::string_view name) const;

  friend bool operator==(const Ontology&, const Ontology&) = default;

 private:
  std::string base_iri_{kDefaultBaseIri};
  std::vector<ClassDef> classes_;
  std::vector<DatatypeProperty> datatype_properties_;
  std::vector<ObjectProperty> object_properties_;
  // lower-cased name -> index
  std::map<std::string, std::size_t> class_index_;
  std::map<std::string, std::size_t> dataprop_index_;
  std::map<std::string, std::size_t> objprop_index_;
  std::vector<std::string> roots_;  // parallel to classes_
};

}  // namespace medley
