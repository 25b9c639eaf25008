#include "medley/graph.hpp"

#include <algorithm>

#include "medley/text.hpp"
#include "medley/xpath.hpp"

namespace medley {

IndividualId IndividualId::folded() const { return {root, text::fold_key(key)}; }

void Facts::merge(const Facts& other) {
  members.insert(other.members.begin(), other.members.end());
  literals.insert(other.literals.begin(), other.literals.end());
  edges.insert(other.edges.begin(), other.edges.end());
  skipped += other.skipped;
}

namespace {

// Elements at absolute `target` inside items located at `item_path`.
std::vector<const xml::Node*> within(const std::vector<const xml::Node*>& items, const xpath::Path& item_path,
                                     const xpath::Path& target) {
  std::vector<const xml::Node*> out;
  if (!item_path.is_prefix_of(target)) return out;
  xpath::Path rel = item_path.relative_to_descendant(target);
  for (const xml::Node* it : items) {
    auto found = xpath::eval_relative(*it, rel);
    out.insert(out.end(), found.begin(), found.end());
  }
  return out;
}

std::optional<std::string> key_of(const xml::Node& element, const xpath::Path& key_path) {
  auto nodes = xpath::eval_relative(element, key_path);
  if (nodes.empty()) return std::nullopt;
  std::string k = text::normalize_value(nodes.front()->string_value());
  if (k.empty()) return std::nullopt;
  return k;
}

}  // namespace

Facts translate(const xml::Node& result, const xpath::Path& item_path, const std::string& source, const SemanticDirectory& dir) {
  Facts out;
  const Ontology& ont = dir.ontology();
  std::vector<const xml::Node*> items;
  for (const auto& c : result.children)
    if (c.is_element()) items.push_back(&c);

  auto ident = [&](const xml::Node& e, const std::string& cls) -> std::optional<IndividualId> {
    auto kp = dir.key_path(source, cls);
    if (!kp) return std::nullopt;
    auto k = key_of(e, *kp);
    if (!k) {
      ++out.skipped;
      return std::nullopt;
    }
    return IndividualId{ont.root_of(cls), *k};
  };

  for (const Mapping& m : dir.mappings(source)) {
    if (auto* c = std::get_if<ClassMapping>(&m)) {
      for (const xml::Node* e : within(items, item_path, c->element_location))
        if (auto id = ident(*e, c->class_name)) out.members.insert({*id, c->class_name, source});
    } else if (auto* d = std::get_if<DatatypeMapping>(&m)) {
      for (const xml::Node* e : within(items, item_path, d->domain_location)) {
        auto id = ident(*e, d->domain_name);
        if (!id) continue;
        for (const xml::Node* v : xpath::eval_relative(*e, d->value_location))
          out.literals.insert({*id, d->property_name, text::normalize_value(v->string_value()), d->domain_name, source});
      }
    } else {
      const auto& o = std::get<ObjectMapping>(m);
      xpath::Path to_dom = o.record_location.relative_to_descendant(o.domain_location);
      xpath::Path to_rng = o.record_location.relative_to_descendant(o.range_location);
      for (const xml::Node* r : within(items, item_path, o.record_location)) {
        std::vector<IndividualId> doms, rngs;
        for (const xml::Node* e : xpath::eval_relative(*r, to_dom))
          if (auto id = ident(*e, o.domain_name)) doms.push_back(*id);
        for (const xml::Node* e : xpath::eval_relative(*r, to_rng))
          if (auto id = ident(*e, o.range_name)) rngs.push_back(*id);
        for (const auto& a : doms)
          for (const auto& b : rngs) out.edges.insert({o.property_name, a, b, o.domain_name, o.range_name, source});
      }
    }
  }
  return out;
}

std::string Individual::class_name(const Ontology& ont) const {
  auto deepest = [&](auto begin, auto end, auto get) {
    std::string best;
    for (auto it = begin; it != end; ++it) {
      const std::string& c = get(*it);
      if (best.empty() || ont.depth(c) > ont.depth(best) || (ont.depth(c) == ont.depth(best) && c < best)) best = c;
    }
    return best;
  };
  if (!memberships.empty())
    return deepest(memberships.begin(), memberships.end(), [](const auto& p) -> const std::string& { return p.first; });
  if (!implied_classes.empty())
    return deepest(implied_classes.begin(), implied_classes.end(), [](const std::string& s) -> const std::string& { return s; });
  return id.root;
}

bool Individual::member_of(const Ontology& ont, const std::string& cls) const {
  return std::any_of(memberships.begin(), memberships.end(), [&](const auto& p) { return ont.is_subclass(p.first, cls); });
}

std::set<std::string> Individual::sources() const {
  std::set<std::string> out;
  for (const auto& [_, s] : memberships) out.insert(s);
  for (const auto& l : literals) out.insert(l.source);
  return out;
}

Individual& InstanceGraph::ensure(const IndividualId& id) {
  auto [it, inserted] = individuals.try_emplace(id);
  if (inserted) it->second.id = id;
  return it->second;
}

const Individual* InstanceGraph::find(const IndividualId& id) const {
  auto it = individuals.find(id);
  return it == individuals.end() ? nullptr : &it->second;
}

InstanceGraph link(const Facts& facts, const std::set<IndividualId>* keep) {
  InstanceGraph g;
  auto kept = [&](const IndividualId& id) { return !keep || keep->count(id.folded()) > 0; };
  for (const auto& m : facts.members)
    if (kept(m.ind)) g.ensure(m.ind).memberships.insert({m.class_name, m.source});
  for (const auto& l : facts.literals)
    if (kept(l.ind)) {
      auto& ind = g.ensure(l.ind);
      ind.literals.insert({l.property, l.value, l.domain_class, l.source});
      ind.implied_classes.insert(l.domain_class);
    }
  for (const auto& e : facts.edges)
    if (kept(e.domain) && kept(e.range)) {
      g.ensure(e.domain).implied_classes.insert(e.domain_class);
      g.ensure(e.range).implied_classes.insert(e.range_class);
      g.edges.insert(e);
    }
  return g;
}

InstanceGraph reconcile(const InstanceGraph& graph) {
  std::map<IndividualId, IndividualId> canonical;  // folded -> merged id
  for (const auto& [id, _] : graph.individuals) {
    auto f = id.folded();
    auto it = canonical.find(f);
    if (it == canonical.end() || id.key < it->second.key) canonical[f] = id;
  }
  auto to = [&](const IndividualId& id) {
    auto it = canonical.find(id.folded());
    return it == canonical.end() ? id : it->second;
  };
  InstanceGraph out;
  for (const auto& [id, ind] : graph.individuals) {
    Individual& m = out.ensure(to(id));
    m.memberships.insert(ind.memberships.begin(), ind.memberships.end());
    m.implied_classes.insert(ind.implied_classes.begin(), ind.implied_classes.end());
    m.literals.insert(ind.literals.begin(), ind.literals.end());
  }
  for (auto e : graph.edges) {
    e.domain = to(e.domain);
    e.range = to(e.range);
    out.edges.insert(std::move(e));
  }
  return out;
}

bool edges_type_safe(const InstanceGraph& graph, const Ontology& ont) {
  auto has_class_within = [&](const Individual* ind, const std::string& cls) {
    if (!ind) return false;
    for (const auto& [c, _] : ind->memberships)
      if (ont.is_subclass(c, cls)) return true;
    for (const auto& c : ind->implied_classes)
      if (ont.is_subclass(c, cls)) return true;
    return false;
  };
  for (const auto& e : graph.edges) {
    const auto& p = ont.object_property(e.property);
    if (!has_class_within(graph.find(e.domain), p.domain) || !has_class_within(graph.find(e.range), p.range)) return false;
  }
  return true;
}

}  // namespace medley
