// Plan execution against data services.
#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "medley/answers.hpp"
#include "medley/graph.hpp"
#include "medley/planner.hpp"
#include "medley/source.hpp"

namespace medley {

struct CallRecord {
  std::string source;
  std::string xquery;
  std::size_t items = 0;
};

struct ExecutionReport {
  Facts facts;  // every fact obtained from the services
  // Candidate individuals (folded ids) per plan variable: when first reached,
  // and after every check below them has run.
  std::map<std::string, std::set<IndividualId>> initial;
  std::map<std::string, std::set<IndividualId>> bindings;
  std::vector<CallRecord> calls;  // distinct calls, registry order then query text
  std::map<std::string, std::size_t> calls_per_source;
  std::size_t type_check_drops = 0;
  std::size_t filter_drops = 0;
  std::vector<ProvenanceRecord> provenance;  // one per called source, registry order
};

using ClientMap = std::map<std::string, std::shared_ptr<SourceClient>>;

/// Runs an optimized plan. Sibling arcs flagged parallel_ok run concurrently;
/// results are merged in plan order so the report does not depend on timing.
/// A service failure aborts with Error(Transport) naming the source.
ExecutionReport execute_plan(const PlanTree& plan, const SemanticDirectory& dir, const ClientMap& clients);

/// Folded ids of the individuals an answer may use: every binding plus the
/// ranges matched by constant object atoms.
std::set<IndividualId> kept_individuals(const ExecutionReport& report, const ConjunctiveQuery& q);

/// Links the executed facts, reconciles identities and extracts the answers.
ResultSet integrate(const ExecutionReport& report, const PlanTree& plan, const Ontology& ontology);

}  // namespace medley
