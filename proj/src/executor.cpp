#include "medley/executor.hpp"

#include <algorithm>
#include <future>
#include <mutex>

#include "medley/error.hpp"
#include "medley/text.hpp"
#include "medley/xpath.hpp"

namespace medley {

namespace {

using Fid = IndividualId;  // folded

struct CovKey {
  std::string source;
  std::string location;
  std::string key_path;
  std::string key;
  friend auto operator<=>(const CovKey&, const CovKey&) = default;
};

struct CallResult {
  Facts facts;
  std::vector<std::pair<CovKey, xpath::Path>> unique_seen;  // coverage with anchor
  ProvenanceRecord provenance;
  std::size_t items = 0;
};

struct Store {
  Facts facts;
  std::map<Fid, std::set<std::pair<std::string, std::string>>> members;
  std::map<Fid, std::set<LiteralFact>> literals;
  std::map<std::pair<std::string, Fid>, std::set<EdgeFact>> edges_out;
  std::map<CovKey, std::set<xpath::Path>> coverage;

  void add(const Facts& f) {
    facts.merge(f);
    for (const auto& m : f.members) members[m.ind.folded()].insert({m.class_name, m.source});
    for (const auto& l : f.literals) literals[l.ind.folded()].insert(l);
    for (const auto& e : f.edges) edges_out[{e.property, e.domain.folded()}].insert(e);
  }
  void cover(const CovKey& k, const xpath::Path& anchor) { coverage[k].insert(anchor); }
  bool covered(const CovKey& k, const xpath::Path& needed_anchor) const {
    auto it = coverage.find(k);
    if (it == coverage.end()) return false;
    return std::any_of(it->second.begin(), it->second.end(), [&](const xpath::Path& a) { return a.is_prefix_of(needed_anchor); });
  }
  void merge(const Store& o) {
    add(o.facts);
    for (const auto& [k, anchors] : o.coverage) coverage[k].insert(anchors.begin(), anchors.end());
  }
};

struct Ctx {
  Store store;
  std::map<std::string, std::set<Fid>> bound;
  std::map<std::string, std::set<Fid>> initial;
  std::size_t type_drops = 0;
  std::size_t filter_drops = 0;
};

std::optional<std::string> first_key(const xml::Node& e, const xpath::Path& kp) {
  auto nodes = xpath::eval_relative(e, kp);
  if (nodes.empty()) return std::nullopt;
  std::string k = text::fold_key(nodes.front()->string_value());
  if (k.empty()) return std::nullopt;
  return k;
}

void collect_unique(const xml::Node& n, const SchemaElement& decl, xpath::Path& path, const std::string& source,
                    const xpath::Path& anchor, std::vector<std::pair<CovKey, xpath::Path>>& out) {
  if (decl.unique)
    if (auto k = first_key(n, *decl.unique)) out.push_back({CovKey{source, path.to_string(), decl.unique->to_string(), *k}, anchor});
  for (const auto& c : n.children) {
    if (!c.is_element()) continue;
    const SchemaElement* cd = decl.child(c.name);
    if (!cd) continue;
    path.steps.push_back(c.name);
    collect_unique(c, *cd, path, source, anchor, out);
    path.steps.pop_back();
  }
}

class Run {
 public:
  Run(const PlanTree& plan, const SemanticDirectory& dir, const ClientMap& clients) : plan_(plan), dir_(dir), clients_(clients) {
    const auto& q = plan.query;
    for (const auto& v : q.answer_vars) answer_vars_.insert(v);
    for (const auto& a : q.body)
      for (const auto& t : a.args)
        if (t.is_variable()) ++occurrences_[t.value];
  }

  ExecutionReport run() {
    Ctx ctx;
    const PlanNode& root = plan_.nodes[0];
    const Group& rg = plan_.groups[plan_.root_group];
    std::size_t ai = rg.main_atom();
    const Atom& a = plan_.query.body[ai];
    std::string value = text::normalize_value(a.args[1].value);
    auto ms = relevant_datatype_mappings(dir_, plan_.query, ai);
    for (const auto& m : ms) apply(ctx.store, call(m.source, root_query(m, a.args[1].value), m.domain_location));
    std::set<Fid> cands;
    for (const auto& [id, lits] : ctx.store.literals)
      for (const auto& l : lits)
        if (l.property == a.predicate && l.value == value && compatible(l.domain_class, root.variable)) cands.insert(id);
    ctx.initial[root.variable] = cands;
    ctx.bound[root.variable] = std::move(cands);
    process_node(ctx, 0, nullptr);

    ExecutionReport r;
    r.facts = ctx.store.facts;
    r.initial = ctx.initial;
    r.bindings = ctx.bound;
    r.type_check_drops = ctx.type_drops;
    r.filter_drops = ctx.filter_drops;
    std::map<std::string, ProvenanceRecord> prov;
    std::size_t skipped = 0;
    for (const auto& [key, fut] : calls_) {
      auto res = fut.get();
      auto nl = key.find('\n');
      std::string src = key.substr(0, nl);
      r.calls.push_back({src, key.substr(nl + 1), res->items});
      skipped += res->facts.skipped;
      ++r.calls_per_source[src];
      prov.emplace(src, res->provenance);
    }
    r.facts.skipped = skipped;
    std::stable_sort(r.calls.begin(), r.calls.end(), [&](const CallRecord& x, const CallRecord& y) {
      return dir_.source_rank(x.source) < dir_.source_rank(y.source);
    });
    for (const auto& s : dir_.source_names())
      if (auto it = prov.find(s); it != prov.end()) r.provenance.push_back(it->second);
    return r;
  }

 private:
  bool compatible(const std::string& cls, const std::string& var) {
    for (const auto& c : classes_of(plan_.query, var))
      if (!dir_.ontology().compatible(cls, c)) return false;
    return true;
  }

  std::shared_ptr<const CallResult> call(const std::string& source, const std::string& xq, const xpath::Path& item_path) {
    std::string key = source + "\n" + xq;
    std::promise<std::shared_ptr<const CallResult>> promise;
    std::shared_future<std::shared_ptr<const CallResult>> pending;
    {
      std::lock_guard lock(mu_);
      auto it = calls_.find(key);
      if (it != calls_.end()) pending = it->second;
      else calls_.emplace(key, promise.get_future().share());
    }
    if (pending.valid()) return pending.get();
    try {
      auto client = clients_.find(source);
      if (client == clients_.end()) throw Error(ErrorKind::Config, "no client for source '" + source + "'");
      ServiceAnswer ans;
      try {
        ans = client->second->query(xq);
      } catch (const Error& e) {
        std::string msg = e.what();
        if (msg.rfind("source " + source, 0) != 0) msg = "source " + source + ": " + msg;
        throw Error(e.kind(), msg);
      }
      auto res = std::make_shared<CallResult>();
      res->provenance = ans.provenance;
      const SourceSchema& schema = dir_.schema(source);
      const SchemaElement* decl = schema.find(item_path);
      for (const auto& item : ans.result.children) {
        if (!item.is_element()) continue;
        ++res->items;
        try {
          schema.validate(item, item_path);
        } catch (const Error& e) {
          throw Error(ErrorKind::Internal, "source " + source + " returned data outside its schema: " + e.what());
        }
        xpath::Path p = item_path;
        if (decl) collect_unique(item, *decl, p, source, item_path, res->unique_seen);
      }
      res->facts = translate(ans.result, item_path, source, dir_);
      promise.set_value(res);
      return res;
    } catch (...) {
      promise.set_exception(std::current_exception());
      throw;
    }
  }

  static void apply(Store& s, const std::shared_ptr<const CallResult>& r) {
    s.add(r->facts);
    for (const auto& [k, anchor] : r->unique_seen) s.cover(k, anchor);
  }

  // Makes facts about the elements at `loc` keyed `key` complete in `ctx`.
  void ensure_location(Ctx& ctx, const std::string& source, const xpath::Path& loc, const xpath::Path& kp, const std::string& key) {
    CovKey ck{source, loc.to_string(), kp.to_string(), key};
    if (ctx.store.covered(ck, loc)) return;
    apply(ctx.store, call(source, instantiate(key_query(loc, kp, "k"), {{"k", key}}), loc));
    ctx.store.cover(ck, loc);
  }

  void ensure_arc(Ctx& ctx, const ObjectMapping& m, const std::string& key) {
    xpath::Path kp = *dir_.key_path(m.source, m.domain_name);
    CovKey ck{m.source, m.domain_location.to_string(), kp.to_string(), key};
    if (ctx.store.covered(ck, m.record_location)) return;
    apply(ctx.store, call(m.source, instantiate(arc_query(m, kp, "k"), {{"k", key}}), m.record_location));
    ctx.store.cover(ck, m.record_location);
  }

  bool class_witness(const Ctx& ctx, const Fid& x, const std::string& cls) {
    auto it = ctx.store.members.find(x);
    if (it == ctx.store.members.end()) return false;
    return std::any_of(it->second.begin(), it->second.end(),
                       [&](const auto& p) { return dir_.ontology().is_subclass(p.first, cls); });
  }

  bool literal_witness(const Ctx& ctx, const Fid& x, const Atom& a) {
    auto it = ctx.store.literals.find(x);
    if (it == ctx.store.literals.end()) return false;
    std::optional<std::string> want;
    if (a.args[1].is_constant()) want = text::normalize_value(a.args[1].value);
    for (const auto& l : it->second)
      if (l.property == a.predicate && compatible(l.domain_class, a.args[0].value) && (!want || l.value == *want)) return true;
    return false;
  }

  bool holds(Ctx& ctx, std::size_t ai, const Fid& x) {
    const Atom& a = plan_.query.body[ai];
    if (*a.kind == PredicateKind::Class) {
      if (class_witness(ctx, x, a.predicate)) return true;
      for (const auto& m : relevant_class_mappings(dir_, plan_.query, ai))
        ensure_location(ctx, m.source, m.element_location, *dir_.key_path(m.source, m.class_name), x.key);
      return class_witness(ctx, x, a.predicate);
    }
    // Datatype atom. A value variable that is answered or joined needs every value.
    bool need_all = a.args[1].is_variable() &&
                    (answer_vars_.count(a.args[1].value) || occurrences_[a.args[1].value] > 1);
    if (!need_all && literal_witness(ctx, x, a)) return true;
    for (const auto& m : relevant_datatype_mappings(dir_, plan_.query, ai))
      ensure_location(ctx, m.source, m.domain_location, *dir_.key_path(m.source, m.domain_name), x.key);
    return literal_witness(ctx, x, a);
  }

  void check(Ctx& ctx, const std::string& var, const std::vector<std::size_t>& atoms, std::size_t& drops) {
    auto& b = ctx.bound[var];
    for (std::size_t ai : atoms) {
      for (auto it = b.begin(); it != b.end();) {
        if (holds(ctx, ai, *it)) {
          ++it;
        } else {
          it = b.erase(it);
          ++drops;
        }
      }
    }
  }

  std::vector<std::size_t> atoms_on(const std::vector<std::size_t>& groups, const std::string& var, std::set<std::size_t>& done) {
    std::vector<std::size_t> out;
    for (std::size_t g : groups)
      for (std::size_t ai : plan_.groups[g].atoms)
        if (plan_.query.body[ai].args[0].value == var && *plan_.query.body[ai].kind != PredicateKind::ObjectProperty &&
            done.insert(ai).second)
          out.push_back(ai);
    return out;
  }

  void collect_vars(std::size_t node, std::vector<std::string>& out) {
    out.push_back(plan_.nodes[node].variable);
    for (const auto& c : plan_.nodes[node].children)
      if (c.target) collect_vars(*c.target, out);
  }

  void process_node(Ctx& ctx, std::size_t idx, const PlanArc* incoming) {
    const PlanNode& n = plan_.nodes[idx];
    const std::string& v = n.variable;
    std::set<std::size_t> done;
    std::vector<std::size_t> filters, types;
    if (idx == 0) {
      filters = atoms_on({plan_.root_group}, v, done);
      auto more = atoms_on(n.filter_groups, v, done);
      filters.insert(filters.end(), more.begin(), more.end());
      types = atoms_on(n.type_check_groups, v, done);
    } else if (incoming) {
      filters = atoms_on(incoming->filter_groups, v, done);
      types = atoms_on(incoming->type_check_groups, v, done);
    }
    check(ctx, v, filters, ctx.filter_drops);
    check(ctx, v, types, ctx.type_drops);

    for (const auto& stage : plan_.stages(idx)) {
      if (ctx.bound[v].empty()) break;
      if (stage.size() == 1) {
        run_arc(ctx, idx, n.children[stage[0]]);
        continue;
      }
      std::vector<Ctx> copies(stage.size(), ctx);
      std::vector<std::future<void>> futs;
      for (std::size_t i = 0; i < stage.size(); ++i)
        futs.push_back(std::async(std::launch::async, [&, i] { run_arc(copies[i], idx, n.children[stage[i]]); }));
      std::exception_ptr err;
      for (auto& f : futs) {
        try {
          f.get();
        } catch (...) {
          if (!err) err = std::current_exception();
        }
      }
      if (err) std::rethrow_exception(err);
      std::set<Fid> survivors = ctx.bound[v];
      std::size_t td = ctx.type_drops, fd = ctx.filter_drops;
      for (std::size_t i = 0; i < stage.size(); ++i) {
        const Ctx& c = copies[i];
        ctx.store.merge(c.store);
        ctx.type_drops += c.type_drops - td;
        ctx.filter_drops += c.filter_drops - fd;
        const PlanArc& arc = n.children[stage[i]];
        if (arc.target) {
          std::vector<std::string> vars;
          collect_vars(*arc.target, vars);
          for (const auto& w : vars) {
            if (auto it = c.bound.find(w); it != c.bound.end()) ctx.bound[w] = it->second;
            if (auto it = c.initial.find(w); it != c.initial.end()) ctx.initial[w] = it->second;
          }
        }
        std::set<Fid> kept;
        const auto& cb = c.bound.at(v);
        std::set_intersection(survivors.begin(), survivors.end(), cb.begin(), cb.end(), std::inserter(kept, kept.end()));
        survivors = std::move(kept);
      }
      ctx.bound[v] = std::move(survivors);
    }

    std::vector<std::size_t> attrs = atoms_on(n.attribute_groups, v, done);
    check(ctx, v, attrs, ctx.filter_drops);
  }

  std::set<Fid> targets_of(const Ctx& ctx, const Fid& x, std::size_t ai) {
    const Atom& a = plan_.query.body[ai];
    std::set<Fid> out;
    auto it = ctx.store.edges_out.find({a.predicate, x});
    if (it == ctx.store.edges_out.end()) return out;
    for (const auto& e : it->second) {
      if (!compatible(e.domain_class, a.args[0].value)) continue;
      if (a.args[1].is_variable() && !compatible(e.range_class, a.args[1].value)) continue;
      out.insert(e.range.folded());
    }
    return out;
  }

  void run_arc(Ctx& ctx, std::size_t parent, const PlanArc& arc) {
    const std::string& v = plan_.nodes[parent].variable;
    std::size_t ai = plan_.groups[arc.group].main_atom();
    auto ms = relevant_object_mappings(dir_, plan_.query, ai);
    auto& bv = ctx.bound[v];

    if (arc.kind == PlanArc::Kind::Constant) {
      Fid want{"", text::fold_key(arc.range)};
      auto hits = [&](const Fid& x) {
        for (const auto& y : targets_of(ctx, x, ai))
          if (y.key == want.key) return true;
        return false;
      };
      for (auto it = bv.begin(); it != bv.end();) {
        bool ok = hits(*it);
        if (!ok) {
          for (const auto& m : ms) ensure_arc(ctx, m, it->key);
          ok = hits(*it);
        }
        if (ok) {
          ++it;
        } else {
          it = bv.erase(it);
          ++ctx.filter_drops;
        }
      }
      return;
    }

    for (const auto& x : bv)
      for (const auto& m : ms) ensure_arc(ctx, m, x.key);
    if (arc.kind == PlanArc::Kind::Closing) return;

    const std::string& w = arc.range;
    std::set<Fid> reached;
    for (const auto& x : bv) {
      auto ys = targets_of(ctx, x, ai);
      reached.insert(ys.begin(), ys.end());
    }
    ctx.initial[w] = reached;
    ctx.bound[w] = std::move(reached);
    if (!ctx.bound[w].empty()) {
      process_node(ctx, *arc.target, &arc);
    } else {
      std::vector<std::string> vars;
      collect_vars(*arc.target, vars);
      for (const auto& u : vars) ctx.bound[u];
    }
    const auto& bw = ctx.bound[w];
    for (auto it = bv.begin(); it != bv.end();) {
      auto ys = targets_of(ctx, *it, ai);
      bool ok = std::any_of(ys.begin(), ys.end(), [&](const Fid& y) { return bw.count(y) > 0; });
      it = ok ? std::next(it) : bv.erase(it);
    }
  }

  const PlanTree& plan_;
  const SemanticDirectory& dir_;
  const ClientMap& clients_;
  std::set<std::string> answer_vars_;
  std::map<std::string, std::size_t> occurrences_;
  std::mutex mu_;
  std::map<std::string, std::shared_future<std::shared_ptr<const CallResult>>> calls_;
};

}  // namespace

ExecutionReport execute_plan(const PlanTree& plan, const SemanticDirectory& dir, const ClientMap& clients) {
  if (!plan.optimized) throw Error(ErrorKind::Internal, "execute_plan needs an optimized plan");
  return Run(plan, dir, clients).run();
}

std::set<IndividualId> kept_individuals(const ExecutionReport& report, const ConjunctiveQuery& q) {
  std::set<IndividualId> keep;
  for (const auto& [_, ids] : report.bindings) keep.insert(ids.begin(), ids.end());
  // ranges named by a constant are bound to no variable
  for (const auto& a : q.body) {
    if (a.kind != PredicateKind::ObjectProperty || !a.args[1].is_constant()) continue;
    std::string k = text::fold_key(a.args[1].value);
    for (const auto& e : report.facts.edges)
      if (e.property == a.predicate && text::fold_key(e.range.key) == k) keep.insert(e.range.folded());
  }
  return keep;
}

ResultSet integrate(const ExecutionReport& report, const PlanTree& plan, const Ontology& ontology) {
  std::set<IndividualId> keep = kept_individuals(report, plan.query);
  InstanceGraph g = reconcile(link(report.facts, &keep));
  ResultSet rs = filter_answers(g, plan.query, ontology);
  std::set<std::string> used;
  for (const auto& [_, ind] : rs.graph.individuals)
    for (const auto& s : ind.sources()) used.insert(s);
  for (const auto& e : rs.graph.edges) used.insert(e.source);
  for (const auto& p : report.provenance)
    if (used.count(p.source)) rs.sources.push_back(p);
  return rs;
}

}  // namespace medley
