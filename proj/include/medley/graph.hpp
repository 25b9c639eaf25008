// Ontology instances produced from source answers, and the instance graph they
// are integrated into.
#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "medley/ontology.hpp"
#include "medley/semdir.hpp"
#include "medley/xml.hpp"

namespace medley {

/// Individuals are identified by the root of their class hierarchy plus their
/// key; before reconciliation the key keeps the source spelling.
struct IndividualId {
  std::string root;
  std::string key;

  IndividualId folded() const;
  friend bool operator==(const IndividualId&, const IndividualId&) = default;
  friend auto operator<=>(const IndividualId&, const IndividualId&) = default;
};

struct MemberFact {
  IndividualId ind;
  std::string class_name;
  std::string source;
  friend auto operator<=>(const MemberFact&, const MemberFact&) = default;
};

// domain_class / range_class record the mapping the fact came from; atoms only
// use facts whose mapping classes are compatible with the query's class atoms.
struct LiteralFact {
  IndividualId ind;
  std::string property;
  std::string value;
  std::string domain_class;
  std::string source;
  friend auto operator<=>(const LiteralFact&, const LiteralFact&) = default;
};

struct EdgeFact {
  std::string property;
  IndividualId domain;
  IndividualId range;
  std::string domain_class;
  std::string range_class;
  std::string source;
  friend auto operator<=>(const EdgeFact&, const EdgeFact&) = default;
};

struct Facts {
  std::set<MemberFact> members;
  std::set<LiteralFact> literals;
  std::set<EdgeFact> edges;
  std::size_t skipped = 0;  // instance elements without a key value

  void merge(const Facts& other);
  bool empty() const { return members.empty() && literals.empty() && edges.empty(); }
};

/// Applies every mapping of `source` to the items of a `<Result>` document whose
/// elements sit at absolute `item_path`. Only mappings located at or below the
/// item path are applied (object mappings need their record element inside).
Facts translate(const xml::Node& result, const xpath::Path& item_path, const std::string& source, const SemanticDirectory& dir);

struct Individual {
  struct Literal {
    std::string property;
    std::string value;
    std::string domain_class;
    std::string source;
    friend auto operator<=>(const Literal&, const Literal&) = default;
  };

  IndividualId id;
  std::set<std::pair<std::string, std::string>> memberships;  // (class, source)
  std::set<std::string> implied_classes;                      // from property mappings
  std::set<Literal> literals;

  /// Deepest asserted class (ties by name), else deepest implied class.
  std::string class_name(const Ontology& ontology) const;
  /// Whether some asserted class is a subclass of `cls`.
  bool member_of(const Ontology& ontology, const std::string& cls) const;
  std::set<std::string> sources() const;

  friend bool operator==(const Individual&, const Individual&) = default;
};

struct InstanceGraph {
  std::map<IndividualId, Individual> individuals;
  std::set<EdgeFact> edges;

  Individual& ensure(const IndividualId& id);
  const Individual* find(const IndividualId& id) const;

  friend bool operator==(const InstanceGraph&, const InstanceGraph&) = default;
};

/// Builds the graph from facts. With `keep`, only individuals whose folded id is
/// in `keep` survive, together with the edges between survivors.
InstanceGraph link(const Facts& facts, const std::set<IndividualId>* keep = nullptr);

/// Merges individuals with equal root class and case-folded key. The merged key
/// is the smallest spelling; literals, memberships and edges are unioned.
InstanceGraph reconcile(const InstanceGraph& graph);

/// Every edge's endpoints carry a class within the property's domain / range.
bool edges_type_safe(const InstanceGraph& graph, const Ontology& ontology);

}  // namespace medley
