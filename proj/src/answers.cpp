#include "medley/answers.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <set>

#include "medley/planner.hpp"
#include "medley/text.hpp"

namespace medley {

namespace {

struct Support {
  std::set<IndividualId> individuals;
  std::set<EdgeFact> edges;
};

class Join {
 public:
  Join(const InstanceGraph& g, const ConjunctiveQuery& q, const Ontology& ont) : g_(g), q_(q), ont_(ont) {
    for (const auto& e : g.edges) edges_by_property_[e.property].push_back(&e);
    order_atoms();
  }

  void run(const std::function<void(const std::map<std::string, Value>&, const std::vector<const EdgeFact*>&)>& emit) {
    emit_ = &emit;
    step(0);
  }

 private:
  void order_atoms() {
    std::set<std::string> bound;
    std::vector<bool> used(q_.body.size(), false);
    for (std::size_t n = 0; n < q_.body.size(); ++n) {
      std::optional<std::size_t> best;
      int best_score = -1;
      for (std::size_t i = 0; i < q_.body.size(); ++i) {
        if (used[i]) continue;
        int score = 0;
        for (const auto& t : q_.body[i].args) score += t.is_constant() ? 2 : (bound.count(t.value) ? 3 : 0);
        if (score > best_score) {
          best = i;
          best_score = score;
        }
      }
      used[*best] = true;
      order_.push_back(*best);
      for (const auto& t : q_.body[*best].args)
        if (t.is_variable()) bound.insert(t.value);
    }
  }

  bool compatible_all(const std::string& cls, const std::string& var) {
    auto key = std::make_pair(cls, var);
    auto it = compat_cache_.find(key);
    if (it != compat_cache_.end()) return it->second;
    bool ok = true;
    for (const auto& c : classes_of(q_, var)) ok = ok && ont_.compatible(cls, c);
    compat_cache_[key] = ok;
    return ok;
  }

  // Binds `var` to `v` (or checks an existing binding) and continues.
  void with(const std::string& var, const Value& v, std::size_t next) {
    auto it = binding_.find(var);
    if (it != binding_.end()) {
      if (it->second == v) step(next);
      return;
    }
    binding_.emplace(var, v);
    step(next);
    binding_.erase(var);
  }

  void step(std::size_t k) {
    if (k == order_.size()) {
      (*emit_)(binding_, used_edges_);
      return;
    }
    const Atom& a = q_.body[order_[k]];
    const std::string& x = a.args[0].value;
    auto bx = binding_.find(x);
    if (*a.kind == PredicateKind::Class) {
      if (bx != binding_.end()) {
        const auto* id = std::get_if<IndividualId>(&bx->second);
        const Individual* ind = id ? g_.find(*id) : nullptr;
        if (ind && ind->member_of(ont_, a.predicate)) step(k + 1);
        return;
      }
      for (const auto& [id, ind] : g_.individuals)
        if (ind.member_of(ont_, a.predicate)) with(x, id, k + 1);
      return;
    }
    if (*a.kind == PredicateKind::DatatypeProperty) {
      auto each = [&](const Individual& ind) {
        std::set<std::string> seen;
        for (const auto& l : ind.literals) {
          if (l.property != a.predicate || !compatible_all(l.domain_class, x) || !seen.insert(l.value).second) continue;
          if (a.args[1].is_constant()) {
            if (l.value == text::normalize_value(a.args[1].value)) {
              with(x, ind.id, k + 1);
              return;
            }
            continue;
          }
          binding_.count(x) ? with(a.args[1].value, l.value, k + 1) : with_pair(x, ind.id, a.args[1].value, l.value, k + 1);
        }
      };
      if (bx != binding_.end()) {
        const auto* id = std::get_if<IndividualId>(&bx->second);
        if (const Individual* ind = id ? g_.find(*id) : nullptr) each(*ind);
        return;
      }
      for (const auto& [_, ind] : g_.individuals) each(ind);
      return;
    }
    auto pe = edges_by_property_.find(a.predicate);
    if (pe == edges_by_property_.end()) return;
    const Term& y = a.args[1];
    for (const EdgeFact* e : pe->second) {
      if (!compatible_all(e->domain_class, x)) continue;
      if (y.is_variable() && !compatible_all(e->range_class, y.value)) continue;
      if (bx != binding_.end() && bx->second != Value(e->domain)) continue;
      used_edges_.push_back(e);
      if (y.is_constant()) {
        if (text::fold_key(e->range.key) == text::fold_key(y.value)) with(x, e->domain, k + 1);
      } else {
        with_pair(x, e->domain, y.value, e->range, k + 1);
      }
      used_edges_.pop_back();
    }
  }

  void with_pair(const std::string& v1, const Value& a, const std::string& v2, const Value& b, std::size_t next) {
    auto it = binding_.find(v1);
    if (it != binding_.end()) {
      if (it->second == a) with(v2, b, next);
      return;
    }
    if (v1 == v2) {
      if (a == b) with(v1, a, next);
      return;
    }
    binding_.emplace(v1, a);
    with(v2, b, next);
    binding_.erase(v1);
  }

  const InstanceGraph& g_;
  const ConjunctiveQuery& q_;
  const Ontology& ont_;
  std::map<std::string, std::vector<const EdgeFact*>> edges_by_property_;
  std::map<std::pair<std::string, std::string>, bool> compat_cache_;
  std::vector<std::size_t> order_;
  std::map<std::string, Value> binding_;
  std::vector<const EdgeFact*> used_edges_;
  const std::function<void(const std::map<std::string, Value>&, const std::vector<const EdgeFact*>&)>* emit_ = nullptr;
};

}  // namespace

ResultSet filter_answers(const InstanceGraph& graph, const ConjunctiveQuery& q, const Ontology& ontology) {
  ResultSet rs;
  rs.answer_vars = q.answer_vars;
  std::set<std::vector<Value>> rows;
  Support support;
  Join(graph, q, ontology).run([&](const std::map<std::string, Value>& b, const std::vector<const EdgeFact*>& edges) {
    std::vector<Value> row;
    for (const auto& v : q.answer_vars) row.push_back(b.at(v));
    rows.insert(std::move(row));
    for (const auto& [_, v] : b)
      if (const auto* id = std::get_if<IndividualId>(&v)) support.individuals.insert(*id);
    for (const EdgeFact* e : edges) support.edges.insert(*e);
  });
  rs.rows.assign(rows.begin(), rows.end());
  for (const auto& id : support.individuals) rs.graph.individuals.emplace(id, graph.individuals.at(id));
  rs.graph.edges = std::move(support.edges);
  return rs;
}

}  // namespace medley
