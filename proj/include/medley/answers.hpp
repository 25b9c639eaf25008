// Answer extraction over an integrated instance graph, and result rendering.
#pragma once

#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "medley/cq.hpp"
#include "medley/graph.hpp"
#include "medley/source.hpp"

namespace medley {

/// An answer value: an individual or a literal.
using Value = std::variant<IndividualId, std::string>;

struct ResultSet {
  std::vector<std::string> answer_vars;
  std::vector<std::vector<Value>> rows;  // distinct, sorted
  InstanceGraph graph;                   // individuals and edges supporting some row
  std::vector<ProvenanceRecord> sources;  // services that contributed

  bool empty() const { return rows.empty(); }
};

/// All bindings of the answer variables that extend to a satisfying assignment
/// of the whole body over `graph` (expected reconciled).
ResultSet filter_answers(const InstanceGraph& graph, const ConjunctiveQuery& q, const Ontology& ontology);

enum class OutputFormat { Rdf, Xml, Html, Json };
OutputFormat parse_format(std::string_view name);
std::string_view to_string(OutputFormat f);
std::string_view content_type(OutputFormat f);

std::string serialize(const ResultSet& rs, OutputFormat format, const Ontology& ontology);

/// `<base><Class>/<percent-encoded key>`
std::string individual_iri(const Individual& ind, const Ontology& ontology);

}  // namespace medley
