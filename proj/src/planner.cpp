#include "medley/planner.hpp"

#include <algorithm>
#include <deque>

#include "medley/error.hpp"
#include "medley/text.hpp"
#include "medley/xquery.hpp"

namespace medley {

namespace {

const Atom& atom_at(const ConjunctiveQuery& q, std::size_t i) { return q.body.at(i); }

bool is_kind(const Atom& a, PredicateKind k) { return a.kind && *a.kind == k; }

std::vector<std::string> sorted_sources(const SemanticDirectory& dir, const std::vector<Mapping>& ms) {
  std::vector<std::string> out;
  for (const auto& m : ms)
    if (std::find(out.begin(), out.end(), mapping_source(m)) == out.end()) out.push_back(mapping_source(m));
  std::sort(out.begin(), out.end(),
            [&](const std::string& a, const std::string& b) { return dir.source_rank(a) < dir.source_rank(b); });
  return out;
}

template <typename M>
std::vector<Mapping> erase_kind(const std::vector<M>& ms) {
  return {ms.begin(), ms.end()};
}

// Preferred source, then highest correspondence index, then registry order.
template <typename M>
const M& choose(const SemanticDirectory& dir, const std::vector<M>& ms, const std::string& preferred) {
  const M* best = nullptr;
  auto better = [&](const M& a, const M& b) {
    bool pa = a.source == preferred, pb = b.source == preferred;
    if (pa != pb) return pa;
    if (a.correspondence_index != b.correspondence_index) return a.correspondence_index > b.correspondence_index;
    return dir.source_rank(a.source) < dir.source_rank(b.source);
  };
  for (const auto& m : ms)
    if (!best || better(m, *best)) best = &m;
  return *best;
}

std::string first_var(const ConjunctiveQuery& q, const Group& g) { return atom_at(q, g.main_atom()).args[0].value; }

std::set<std::string> group_vars(const ConjunctiveQuery& q, const Group& g) {
  std::set<std::string> out;
  for (std::size_t i : g.atoms)
    for (const auto& t : atom_at(q, i).args)
      if (t.is_variable()) out.insert(t.value);
  return out;
}

}  // namespace

std::vector<std::string> classes_of(const ConjunctiveQuery& q, const std::string& var) {
  std::vector<std::string> out;
  for (const auto& a : q.body)
    if (is_kind(a, PredicateKind::Class) && a.args[0].value == var &&
        std::find(out.begin(), out.end(), a.predicate) == out.end())
      out.push_back(a.predicate);
  return out;
}

namespace {

bool compatible_with_all(const Ontology& ont, const std::string& cls, const std::vector<std::string>& classes) {
  return std::all_of(classes.begin(), classes.end(), [&](const std::string& c) { return ont.compatible(cls, c); });
}

}  // namespace

std::vector<DatatypeMapping> relevant_datatype_mappings(const SemanticDirectory& dir, const ConjunctiveQuery& q, std::size_t atom) {
  const Atom& a = atom_at(q, atom);
  auto classes = classes_of(q, a.args[0].value);
  std::vector<DatatypeMapping> out;
  for (auto& m : dir.datatype_mappings(a.predicate))
    if (compatible_with_all(dir.ontology(), m.domain_name, classes)) out.push_back(std::move(m));
  return out;
}

std::vector<ObjectMapping> relevant_object_mappings(const SemanticDirectory& dir, const ConjunctiveQuery& q, std::size_t atom) {
  const Atom& a = atom_at(q, atom);
  auto dom = classes_of(q, a.args[0].value);
  std::vector<std::string> rng;
  if (a.args[1].is_variable()) rng = classes_of(q, a.args[1].value);
  std::vector<ObjectMapping> out;
  for (auto& m : dir.object_mappings(a.predicate))
    if (compatible_with_all(dir.ontology(), m.domain_name, dom) && compatible_with_all(dir.ontology(), m.range_name, rng))
      out.push_back(std::move(m));
  return out;
}

std::vector<ClassMapping> relevant_class_mappings(const SemanticDirectory& dir, const ConjunctiveQuery& q, std::size_t atom) {
  return dir.lookup_class(atom_at(q, atom).predicate);
}

std::vector<Group> form_groups(const ConjunctiveQuery& q, const SemanticDirectory& dir) {
  const Ontology& ont = dir.ontology();
  std::vector<std::size_t> unary, binary;
  for (std::size_t i = 0; i < q.body.size(); ++i) {
    if (!q.body[i].kind) throw Error(ErrorKind::Internal, "form_groups needs a validated query");
    (is_kind(q.body[i], PredicateKind::Class) ? unary : binary).push_back(i);
  }

  std::vector<Group> out;
  std::set<std::size_t> in_composite;
  auto add = [&](GroupKind kind, std::vector<std::size_t> atoms, std::vector<Mapping> ms) {
    Group g;
    g.kind = kind;
    g.atoms = std::move(atoms);
    g.sources = sorted_sources(dir, ms);
    g.mappings = std::move(ms);
    g.instantiated = std::any_of(g.atoms.begin(), g.atoms.end(), [&](std::size_t i) { return q.body[i].instantiated(); });
    for (const auto& h : out)
      if (h.atoms == g.atoms) return;
    out.push_back(std::move(g));
  };

  for (std::size_t c : unary) {
    const Atom& ca = q.body[c];
    for (std::size_t p : binary) {
      const Atom& pa = q.body[p];
      if (pa.args[0] != ca.args[0]) continue;
      std::vector<Mapping> ms;
      if (is_kind(pa, PredicateKind::DatatypeProperty)) ms = erase_kind(dir.lookup_datatype(ca.predicate, pa.predicate));
      else ms = erase_kind(dir.lookup_object(ca.predicate, ont.object_property(pa.predicate).range, pa.predicate));
      if (ms.empty()) continue;
      add(GroupKind::Composite, {c, p}, std::move(ms));
      in_composite.insert(p);
    }
  }
  for (std::size_t p : binary) {
    const Atom& pa = q.body[p];
    std::vector<Mapping> ms;
    if (is_kind(pa, PredicateKind::ObjectProperty)) ms = erase_kind(relevant_object_mappings(dir, q, p));
    else if (!in_composite.count(p)) ms = erase_kind(relevant_datatype_mappings(dir, q, p));
    if (!ms.empty()) add(GroupKind::Property, {p}, std::move(ms));
  }
  for (std::size_t c : unary) {
    auto ms = erase_kind(relevant_class_mappings(dir, q, c));
    if (!ms.empty()) add(GroupKind::Class, {c}, std::move(ms));
  }
  if (out.empty()) throw Error(ErrorKind::Plan, "no query predicate is mapped by the selected sources");
  for (std::size_t i = 0; i < out.size(); ++i) out[i].id = "G" + std::to_string(i + 1);
  return out;
}

bool root_eligible(const std::vector<Group>& groups, const ConjunctiveQuery& q, std::size_t candidate, std::size_t* reached) {
  std::set<std::string> vars = group_vars(q, groups[candidate]);
  std::vector<bool> absorbed(groups.size(), false);
  absorbed[candidate] = true;
  std::size_t count = 1;
  for (bool grew = true; grew;) {
    grew = false;
    for (std::size_t i = 0; i < groups.size(); ++i) {
      if (absorbed[i] || !vars.count(first_var(q, groups[i]))) continue;
      absorbed[i] = true;
      ++count;
      grew = true;
      auto more = group_vars(q, groups[i]);
      vars.insert(more.begin(), more.end());
    }
  }
  if (reached) *reached = count;
  return std::all_of(q.answer_vars.begin(), q.answer_vars.end(), [&](const std::string& v) { return vars.count(v); });
}

std::size_t select_root(const std::vector<Group>& groups, const ConjunctiveQuery& q) {
  std::optional<std::size_t> best;
  std::size_t best_reach = 0;
  bool any_candidate = false;
  auto first_atom = [&](std::size_t g) { return *std::min_element(groups[g].atoms.begin(), groups[g].atoms.end()); };
  for (std::size_t i = 0; i < groups.size(); ++i) {
    const Atom& a = q.body[groups[i].main_atom()];
    if (!is_kind(a, PredicateKind::DatatypeProperty) || !a.args[1].is_constant()) continue;
    any_candidate = true;
    std::size_t reach = 0;
    if (!root_eligible(groups, q, i, &reach)) continue;
    if (!best || reach > best_reach || (reach == best_reach && first_atom(i) < first_atom(*best))) {
      best = i;
      best_reach = reach;
    }
  }
  if (!any_candidate) throw Error(ErrorKind::Plan, "no root: the query has no mapped datatype atom with a constant");
  if (!best) throw Error(ErrorKind::Plan, "no root: no group with a constant reaches every answer variable");
  return *best;
}

std::string root_query(const DatatypeMapping& m, const std::string& constant) {
  return "for $d in " + m.domain_location.to_string() + " where $d/" + m.value_location.to_string() + " eq " +
         xquery::quote(constant) + " return $d";
}

std::string key_query(const xpath::Path& location, const xpath::Path& key_path, const std::string& hole_var) {
  return "for $d in " + location.to_string() + " where lower-case($d/" + key_path.to_string() + ") eq {$" + hole_var +
         "} return $d";
}

std::string arc_query(const ObjectMapping& m, const xpath::Path& domain_key_path, const std::string& hole_var) {
  xpath::Path rel = m.record_location.relative_to_descendant(m.domain_location).join(domain_key_path);
  return "for $d in " + m.record_location.to_string() + " where lower-case($d/" + rel.to_string() + ") eq {$" + hole_var +
         "} return $d";
}

std::string instantiate(const std::string& tpl, const std::map<std::string, std::string>& bindings) {
  std::string out;
  char quote = 0;
  for (std::size_t i = 0; i < tpl.size(); ++i) {
    char c = tpl[i];
    if (quote) {
      if (c == quote) quote = 0;  // a doubled quote closes and reopens
      out += c;
      continue;
    }
    if (c == '"' || c == '\'') {
      quote = c;
      out += c;
      continue;
    }
    if (c == '{' && i + 1 < tpl.size() && tpl[i + 1] == '$') {
      auto close = tpl.find('}', i);
      if (close == std::string::npos) throw Error(ErrorKind::Internal, "unterminated hole in template");
      std::string var = tpl.substr(i + 2, close - i - 2);
      auto it = bindings.find(var);
      if (it == bindings.end()) throw Error(ErrorKind::MissingBinding, "no binding for template parameter $" + var);
      out += xquery::quote(it->second);
      i = close;
      continue;
    }
    out += c;
  }
  return out;
}

PlanTree build_plan(const ConjunctiveQuery& q, std::vector<Group> groups, std::size_t root, const SemanticDirectory& dir) {
  PlanTree t;
  t.query = q;
  t.groups = std::move(groups);
  t.root_group = root;
  const auto& gs = t.groups;
  const Group& rg = gs.at(root);
  const Atom& ra = q.body[rg.main_atom()];
  if (!is_kind(ra, PredicateKind::DatatypeProperty) || !ra.args[1].is_constant())
    throw Error(ErrorKind::Plan, "root group " + rg.id + " has no constant datatype atom");

  std::vector<bool> placed(gs.size(), false);
  std::map<std::string, std::size_t> bound;

  auto node_class = [&](const std::string& var, const std::string& fallback) {
    auto cs = classes_of(q, var);
    if (cs.empty()) return fallback;
    // Most specific asserted class.
    return *std::max_element(cs.begin(), cs.end(), [&](const std::string& a, const std::string& b) {
      return dir.ontology().depth(a) < dir.ontology().depth(b);
    });
  };
  auto terms_of = [&](const Group& g) {
    std::vector<std::string> out;
    for (std::size_t i : g.atoms) out.push_back(q.body[i].predicate);
    return out;
  };

  {
    auto ms = relevant_datatype_mappings(dir, q, rg.main_atom());
    if (ms.empty()) throw Error(ErrorKind::Plan, "root group " + rg.id + " has no mapping");
    const DatatypeMapping& m = choose(dir, ms, "");
    PlanNode n;
    n.variable = ra.args[0].value;
    n.class_name = node_class(n.variable, m.domain_name);
    n.group = root;
    n.chosen_source = m.source;
    n.ontology_terms = terms_of(rg);
    n.resource_elements = {m.domain_location.to_string(), m.domain_location.join(m.value_location).to_string()};
    n.xquery_template = root_query(m, ra.args[1].value);
    t.nodes.push_back(std::move(n));
    placed[root] = true;
    bound[t.nodes[0].variable] = 0;
  }

  struct Pending {
    std::size_t node;
    std::optional<std::pair<std::size_t, std::size_t>> arc;  // (parent node, child index)
  };
  std::deque<Pending> queue{{0, std::nullopt}};
  while (!queue.empty()) {
    Pending p = queue.front();
    queue.pop_front();
    const std::string var = t.nodes[p.node].variable;
    auto arc = [&]() -> PlanArc* { return p.arc ? &t.nodes[p.arc->first].children[p.arc->second] : nullptr; };

    for (std::size_t g = 0; g < gs.size(); ++g) {
      if (placed[g] || first_var(q, gs[g]) != var) continue;
      const Atom& a = q.body[gs[g].main_atom()];
      if (gs[g].kind == GroupKind::Class) {
        (arc() ? arc()->type_check_groups : t.nodes[p.node].type_check_groups).push_back(g);
        placed[g] = true;
      } else if (is_kind(a, PredicateKind::DatatypeProperty)) {
        if (gs[g].instantiated) (arc() ? arc()->filter_groups : t.nodes[p.node].filter_groups).push_back(g);
        else t.nodes[p.node].attribute_groups.push_back(g);
        placed[g] = true;
      }
    }
    for (std::size_t g = 0; g < gs.size(); ++g) {
      if (placed[g] || gs[g].kind != GroupKind::Property || first_var(q, gs[g]) != var) continue;
      const Atom& a = q.body[gs[g].main_atom()];
      if (!is_kind(a, PredicateKind::ObjectProperty)) continue;
      auto ms = relevant_object_mappings(dir, q, gs[g].main_atom());
      const ObjectMapping& m = choose(dir, ms, t.nodes[p.node].chosen_source);
      PlanArc arc_rec;
      arc_rec.group = g;
      arc_rec.object_property = a.predicate;
      arc_rec.domain_var = var;
      arc_rec.range = a.args[1].value;
      arc_rec.chosen_source = m.source;
      arc_rec.ontology_terms = {a.predicate};
      arc_rec.resource_elements = {m.domain_location.to_string(), m.range_location.to_string()};
      auto key = dir.key_path(m.source, m.domain_name);
      arc_rec.xquery_template = arc_query(m, *key, var);
      placed[g] = true;
      if (a.args[1].is_constant()) {
        arc_rec.kind = PlanArc::Kind::Constant;
      } else if (bound.count(a.args[1].value)) {
        arc_rec.kind = PlanArc::Kind::Closing;
      } else {
        arc_rec.kind = PlanArc::Kind::Expand;
        const std::string& w = a.args[1].value;
        PlanNode n;
        n.variable = w;
        n.class_name = node_class(w, m.range_name);
        n.chosen_source = m.source;
        n.ontology_terms = {n.class_name};
        for (const auto& cm : dir.lookup_class(n.class_name))
          if (cm.source == m.source) {
            n.resource_elements.push_back(cm.element_location.to_string());
            if (n.xquery_template.empty())
              n.xquery_template = key_query(cm.element_location, *dir.key_path(cm.source, cm.class_name), w);
          }
        t.nodes.push_back(std::move(n));
        arc_rec.target = t.nodes.size() - 1;
        bound[w] = t.nodes.size() - 1;
      }
      t.nodes[p.node].children.push_back(std::move(arc_rec));
      const PlanArc& stored = t.nodes[p.node].children.back();
      if (stored.target) queue.push_back({*stored.target, std::make_pair(p.node, t.nodes[p.node].children.size() - 1)});
    }
  }

  std::set<std::size_t> covered;
  for (std::size_t g = 0; g < gs.size(); ++g)
    if (placed[g]) covered.insert(gs[g].atoms.begin(), gs[g].atoms.end());
  for (std::size_t i = 0; i < q.body.size(); ++i) {
    if (covered.count(i)) continue;
    bool grouped = std::any_of(gs.begin(), gs.end(), [&](const Group& g) {
      return std::find(g.atoms.begin(), g.atoms.end(), i) != g.atoms.end();
    });
    if (!grouped) throw Error(ErrorKind::Plan, "atom " + q.body[i].to_string() + " is not mapped by the selected sources");
  }
  for (std::size_t g = 0; g < gs.size(); ++g) {
    if (placed[g]) continue;
    bool subsumed = std::all_of(gs[g].atoms.begin(), gs[g].atoms.end(), [&](std::size_t i) { return covered.count(i) > 0; });
    if (!subsumed) {
      std::string atoms;
      for (std::size_t i : gs[g].atoms) atoms += (atoms.empty() ? "" : ", ") + q.body[i].to_string();
      throw Error(ErrorKind::Plan, "group " + gs[g].id + " (" + atoms + ") is unreachable from the root " + rg.id);
    }
    auto it = bound.find(first_var(q, gs[g]));
    t.nodes[it == bound.end() ? 0 : it->second].subsumed_groups.push_back(g);
  }
  return t;
}

namespace {

std::optional<std::size_t> arc_distance(PlanTree& t, PlanArc& arc);

std::optional<std::size_t> node_distance(PlanTree& t, std::size_t node) {
  std::optional<std::size_t> best;
  for (auto& c : t.nodes[node].children) {
    auto d = arc_distance(t, c);
    if (d && (!best || *d + 1 < *best)) best = *d + 1;
  }
  return best;
}

std::optional<std::size_t> arc_distance(PlanTree& t, PlanArc& arc) {
  std::optional<std::size_t> d;
  if (arc.kind == PlanArc::Kind::Constant || !arc.filter_groups.empty()) d = 0;
  if (arc.target) {
    auto below = node_distance(t, *arc.target);
    if (!d) d = below;
  }
  arc.constant_distance = d;
  return d;
}

}  // namespace

PlanTree optimize_plan(PlanTree t) {
  node_distance(t, 0);
  for (auto& n : t.nodes) {
    std::stable_sort(n.children.begin(), n.children.end(), [](const PlanArc& a, const PlanArc& b) {
      if (a.constant_distance.has_value() != b.constant_distance.has_value()) return a.constant_distance.has_value();
      return a.constant_distance && *a.constant_distance < *b.constant_distance;
    });
    bool after_filter = false;
    for (auto& c : n.children) {
      if (c.constant_distance == std::optional<std::size_t>(0)) {
        c.parallel_ok = false;
        after_filter = true;
      } else {
        c.parallel_ok = !after_filter;
      }
    }
  }
  t.optimized = true;
  return t;
}

PlanTree plan_query(const ConjunctiveQuery& q, const SemanticDirectory& dir) {
  auto groups = form_groups(q, dir);
  std::size_t root = select_root(groups, q);
  return optimize_plan(build_plan(q, std::move(groups), root, dir));
}

std::vector<std::vector<std::size_t>> PlanTree::stages(std::size_t node) const {
  std::vector<std::vector<std::size_t>> out;
  bool open = false;
  const auto& cs = nodes.at(node).children;
  for (std::size_t i = 0; i < cs.size(); ++i) {
    if (cs[i].parallel_ok && open) {
      out.back().push_back(i);
      continue;
    }
    out.push_back({i});
    open = cs[i].parallel_ok;
  }
  return out;
}

std::optional<std::size_t> PlanTree::node_of(const std::string& var) const {
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i].variable == var) return i;
  return std::nullopt;
}

}  // namespace medley
