#include <sstream>

#include "medley/planner.hpp"
#include "medley/text.hpp"

namespace medley {

namespace {

// Splits a one-line FLWOR into its for / where / return clauses.
std::vector<std::string> clauses(const std::string& q) {
  std::vector<std::string> out;
  std::size_t start = 0;
  char quote = 0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    char c = q[i];
    if (quote) {
      if (c == quote) quote = 0;
      continue;
    }
    if (c == '"' || c == '\'') {
      quote = c;
      continue;
    }
    for (std::string_view kw : {" where ", " return "}) {
      if (q.compare(i, kw.size(), kw) == 0) {
        out.push_back(q.substr(start, i - start));
        start = i + 1;
      }
    }
  }
  out.push_back(q.substr(start));
  return out;
}

std::string group_list(const PlanTree& t, const std::vector<std::size_t>& gs) {
  if (gs.empty()) return "-";
  std::vector<std::string> ids;
  for (std::size_t g : gs) ids.push_back(t.groups[g].id);
  return text::join(ids, ", ");
}

std::string atoms_text(const Group& g, const ConjunctiveQuery& q) {
  std::vector<std::string> parts;
  for (std::size_t i : g.atoms) parts.push_back(q.body[i].to_string());
  return text::join(parts, ", ");
}

void record(std::ostringstream& os, const std::string& pad, const SemanticDirectory& dir, const std::string& source,
            const std::vector<std::string>& terms, const std::vector<std::string>& elements, const std::string& xq) {
  os << pad << "Ontology: " << dir.ontology().base_iri() << "\n";
  os << pad << "Resource: " << source << ", " << dir.registration(source).endpoint << "\n";
  os << pad << "Ontology terms: " << text::join(terms, "; ") << "\n";
  os << pad << "Resource elements: " << text::join(elements, "; ") << "\n";
  os << pad << "Xquery:\n";
  if (xq.empty()) os << pad << "  -\n";
  for (const auto& c : clauses(xq))
    if (!xq.empty()) os << pad << "  " << c << "\n";
}

void node_text(std::ostringstream& os, const PlanTree& t, const SemanticDirectory& dir, std::size_t idx, const std::string& pad) {
  const PlanNode& n = t.nodes[idx];
  os << pad << "Node " << n.variable << " : " << n.class_name;
  if (n.group) os << " [" << t.groups[*n.group].id << "]";
  os << "\n";
  std::string in = pad + "  ";
  record(os, in, dir, n.chosen_source, n.ontology_terms, n.resource_elements, n.xquery_template);
  if (idx == 0) {
    os << in << "Type checks: " << group_list(t, n.type_check_groups) << "\n";
    os << in << "Filters: " << group_list(t, n.filter_groups) << "\n";
  }
  os << in << "Attributes: " << group_list(t, n.attribute_groups) << "\n";
  os << in << "Subsumed: " << group_list(t, n.subsumed_groups) << "\n";
  auto stages = t.stages(idx);
  for (std::size_t s = 0; s < stages.size(); ++s) {
    os << in << "Stage " << (s + 1) << (stages[s].size() > 1 ? " (parallel)" : "") << "\n";
    for (std::size_t ci : stages[s]) {
      const PlanArc& a = n.children[ci];
      std::string ap = in + "  ";
      os << ap << "Arc " << a.object_property << " [" << t.groups[a.group].id << "] " << a.domain_var << " -> "
         << (a.kind == PlanArc::Kind::Constant ? "\"" + a.range + "\"" : a.range);
      if (a.kind == PlanArc::Kind::Closing) os << " (closing)";
      os << "  distance=" << (a.constant_distance ? std::to_string(*a.constant_distance) : "none")
         << (a.parallel_ok ? "  parallel" : "  sequential") << "\n";
      std::string rp = ap + "  ";
      record(os, rp, dir, a.chosen_source, a.ontology_terms, a.resource_elements, a.xquery_template);
      os << rp << "Type checks: " << group_list(t, a.type_check_groups) << "\n";
      os << rp << "Filters: " << group_list(t, a.filter_groups) << "\n";
      if (a.target) node_text(os, t, dir, *a.target, rp);
    }
  }
}

}  // namespace

std::string explain_groups(const std::vector<Group>& groups, const ConjunctiveQuery& q) {
  std::vector<std::string> queries;
  std::size_t width = 5;
  for (const auto& g : groups) {
    queries.push_back(atoms_text(g, q));
    width = std::max(width, queries.back().size());
  }
  std::ostringstream os;
  os << "Group  " << "Query" << std::string(width - 5 + 2, ' ') << "Mapping source\n";
  for (std::size_t i = 0; i < groups.size(); ++i) {
    std::string id = groups[i].id;
    os << id << std::string(id.size() < 7 ? 7 - id.size() : 1, ' ') << queries[i]
       << std::string(width - queries[i].size() + 2, ' ') << text::join(groups[i].sources, "; ") << "\n";
  }
  return os.str();
}

std::string explain(const PlanTree& t, const SemanticDirectory& dir) {
  std::ostringstream os;
  os << "Query: " << canonicalize(t.query) << "\n\n";
  os << explain_groups(t.groups, t.query) << "\n";
  os << "Root: " << t.groups[t.root_group].id << "\n";
  os << "Plan" << (t.optimized ? " (optimized)" : "") << ":\n";
  node_text(os, t, dir, 0, "");
  return os.str();
}

}  // namespace medley
