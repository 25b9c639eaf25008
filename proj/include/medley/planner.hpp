// Query planning: predicate groups, root selection, plan tree, reordering.
#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "medley/cq.hpp"
#include "medley/semdir.hpp"

namespace medley {

enum class GroupKind { Composite, Property, Class };

struct Group {
  std::string id;                    // "G1", "G2", ...
  GroupKind kind = GroupKind::Class;
  std::vector<std::size_t> atoms;    // body indices; composite = {class atom, property atom}
  std::vector<std::string> sources;  // registry order, distinct
  std::vector<Mapping> mappings;
  bool instantiated = false;

  /// The property atom of composite and property groups, else the class atom.
  std::size_t main_atom() const { return atoms.back(); }
};

struct PlanArc {
  enum class Kind { Expand, Closing, Constant };
  Kind kind = Kind::Expand;
  std::size_t group = 0;  // object-property group
  std::string object_property;
  std::string domain_var;
  std::string range;  // variable, or the constant for Kind::Constant
  std::optional<std::size_t> target;  // node index for Kind::Expand
  std::string chosen_source;
  std::vector<std::string> ontology_terms;
  std::vector<std::string> resource_elements;
  std::string xquery_template;
  std::vector<std::size_t> type_check_groups;
  std::vector<std::size_t> filter_groups;
  bool parallel_ok = true;
  std::optional<std::size_t> constant_distance;  // nullopt = no constant reachable
};

struct PlanNode {
  std::string variable;
  std::string class_name;
  std::optional<std::size_t> group;  // root group; arc targets have none
  std::string chosen_source;
  std::vector<std::string> ontology_terms;
  std::vector<std::string> resource_elements;
  std::string xquery_template;
  // Checks on this node's variable. For arc targets the type checks and
  // constant filters live on the incoming arc.
  std::vector<std::size_t> type_check_groups;
  std::vector<std::size_t> filter_groups;
  std::vector<std::size_t> attribute_groups;
  std::vector<std::size_t> subsumed_groups;
  std::vector<PlanArc> children;
};

struct PlanTree {
  ConjunctiveQuery query;
  std::vector<Group> groups;
  std::vector<PlanNode> nodes;  // nodes[0] is the root
  std::size_t root_group = 0;
  bool optimized = false;

  /// Child arcs of `node` split into execution stages: consecutive parallel_ok
  /// arcs share a stage, every other arc runs alone.
  std::vector<std::vector<std::size_t>> stages(std::size_t node) const;
  /// Node binding `var`, if any.
  std::optional<std::size_t> node_of(const std::string& var) const;
};

/// Classes asserted for `var` by class atoms of the query.
std::vector<std::string> classes_of(const ConjunctiveQuery& q, const std::string& var);

/// Mappings able to contribute facts to a property atom: those whose domain
/// (and range) is subclass-compatible with every class atom on the atom's
/// variables. Class atoms use lookup_class.
std::vector<DatatypeMapping> relevant_datatype_mappings(const SemanticDirectory& dir, const ConjunctiveQuery& q, std::size_t atom);
std::vector<ObjectMapping> relevant_object_mappings(const SemanticDirectory& dir, const ConjunctiveQuery& q, std::size_t atom);
std::vector<ClassMapping> relevant_class_mappings(const SemanticDirectory& dir, const ConjunctiveQuery& q, std::size_t atom);

std::vector<Group> form_groups(const ConjunctiveQuery& q, const SemanticDirectory& dir);
std::size_t select_root(const std::vector<Group>& groups, const ConjunctiveQuery& q);
/// Whether `candidate` could serve as root (reaches every answer variable).
bool root_eligible(const std::vector<Group>& groups, const ConjunctiveQuery& q, std::size_t candidate, std::size_t* reached = nullptr);
PlanTree build_plan(const ConjunctiveQuery& q, std::vector<Group> groups, std::size_t root, const SemanticDirectory& dir);
PlanTree optimize_plan(PlanTree tree);
/// form_groups + select_root + build_plan + optimize_plan.
PlanTree plan_query(const ConjunctiveQuery& q, const SemanticDirectory& dir);

// XQuery templates; holes are written `{$Var}`.
std::string root_query(const DatatypeMapping& m, const std::string& constant);
std::string key_query(const xpath::Path& location, const xpath::Path& key_path, const std::string& hole_var);
std::string arc_query(const ObjectMapping& m, const xpath::Path& domain_key_path, const std::string& hole_var);
/// Replaces every `{$Var}` hole with the quoted binding; Error(MissingBinding)
/// when a hole has no binding.
std::string instantiate(const std::string& xquery_template, const std::map<std::string, std::string>& bindings);

/// Table-1-style group listing followed by the plan tree with Fig-8-style node
/// records.
std::string explain(const PlanTree& tree, const SemanticDirectory& dir);
std::string explain_groups(const std::vector<Group>& groups, const ConjunctiveQuery& q);

}  // namespace medley
