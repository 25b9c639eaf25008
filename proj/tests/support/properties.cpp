#include "properties.hpp"

#include <functional>
#include <random>
#include <set>
#include <sstream>

#include "medley/text.hpp"
#include "medley/xquery.hpp"
#include "oracle.hpp"
#include "world.hpp"

namespace medley::testing {

std::string RunStats::summary() const {
  std::ostringstream ss;
  ss << cases << " cases, " << failures << " failures";
  if (skipped) ss << ", " << skipped << " skipped";
  return ss.str();
}

namespace {

bool is_plan_error(const QueryResponse& r) { return r.error && r.error->stage == "plan"; }

void fail(RunStats& s, const std::string& what) {
  if (s.failures++ == 0) s.first_failure = what;
}

bool subset(const std::set<Row>& a, const std::set<Row>& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

// One random world per batch of queries keeps generation cheap.
struct Worlds {
  std::mt19937 rng;
  World world;
  std::shared_ptr<Mediator> mediator;
  std::size_t used = 0;

  explicit Worlds(std::uint32_t seed) : rng(seed) { refresh(); }
  void refresh() {
    world = used == 0 ? fixture_world() : random_world(rng);
    mediator = world.mediator();
  }
  void next() {
    if (++used % 8 == 0) refresh();
  }
};

}  // namespace

std::size_t check_provenance(const QueryResponse& r, RunStats& s, const std::string& query) {
  std::set<std::string> called, listed;
  for (const auto& [src, n] : r.diagnostics.calls_per_source)
    if (n > 0) called.insert(src);
  for (const auto& p : r.result.sources) listed.insert(p.source);
  std::size_t checked = 0;
  auto check = [&](const std::string& src, const std::string& what) {
    ++checked;
    if (src.empty() || !called.count(src) || !listed.count(src)) fail(s, query + ": " + what + " carries source '" + src + "'");
  };
  for (const auto& [id, ind] : r.result.graph.individuals) {
    for (const auto& l : ind.literals) check(l.source, "literal " + l.property + " of " + id.key);
    for (const auto& [cls, src] : ind.memberships) check(src, "membership " + cls + " of " + id.key);
  }
  for (const auto& e : r.result.graph.edges) check(e.source, "edge " + e.property);
  return checked;
}

OracleRun run_oracle_cases(std::uint32_t seed, std::size_t min_cases) {
  OracleRun run;
  Worlds w(seed);
  for (std::size_t attempt = 0; run.equivalence.cases < min_cases && attempt < min_cases * 20; ++attempt, w.next()) {
    std::string text = random_query(w.world, w.rng);
    QueryRequest req;
    req.query = text;
    QueryResponse r = w.mediator->handle_query(req);
    auto q = validate(parse_query(text), *w.world.ontology);
    if (is_plan_error(r)) {
      // an unmapped atom has no facts, so the query has no answers
      if (r.error->message.find("is not mapped") != std::string::npos) {
        ++run.equivalence.cases;
        if (!oracle_answers(w.world, q).empty()) fail(run.equivalence, text + ": rejected as unmapped but has answers");
      } else {
        ++run.equivalence.skipped;
      }
      continue;
    }
    if (!r.ok()) {
      fail(run.equivalence, text + ": " + r.error->stage + ": " + r.error->message);
      continue;
    }
    ++run.equivalence.cases;
    auto want = oracle_answers(w.world, q);
    auto got = encode_rows(r.result);
    if (!want.empty()) ++run.nonempty;
    if (want != got) fail(run.equivalence, text + "\nexpected:\n" + show(want) + "got:\n" + show(got));
    ++run.provenance.cases;
    run.facts_checked += check_provenance(r, run.provenance, text);
  }
  return run;
}

RunStats run_source_antimonotonicity(std::uint32_t seed, std::size_t min_cases) {
  RunStats s;
  Worlds w(seed);
  for (std::size_t attempt = 0; s.cases < min_cases && attempt < min_cases * 20; ++attempt, w.next()) {
    std::string text = random_query(w.world, w.rng);
    QueryRequest req;
    req.query = text;
    QueryResponse full = w.mediator->handle_query(req);
    if (!full.ok()) {
      ++s.skipped;
      continue;
    }
    auto names = w.world.source_names();
    std::shuffle(names.begin(), names.end(), w.rng);
    names.resize(std::uniform_int_distribution<std::size_t>(1, names.size() - 1)(w.rng));
    req.sources = names;
    QueryResponse part = w.mediator->handle_query(req);
    if (!part.ok() && !is_plan_error(part)) {
      fail(s, text + " on " + text::join(names, ",") + ": " + part.error->message);
      continue;
    }
    ++s.cases;
    auto a = part.ok() ? encode_rows(part.result) : std::set<Row>{};
    auto b = encode_rows(full.result);
    if (!subset(a, b)) fail(s, text + " on " + text::join(names, ",") + " added answers:\n" + show(a));
  }
  return s;
}

RunStats run_filter_monotonicity(std::uint32_t seed, std::size_t min_cases) {
  RunStats s;
  Worlds w(seed);
  for (std::size_t attempt = 0; s.cases < min_cases && attempt < min_cases * 20; ++attempt, w.next()) {
    std::string text = random_query(w.world, w.rng);
    QueryRequest req;
    req.query = text;
    QueryResponse base = w.mediator->handle_query(req);
    if (!base.ok()) {
      ++s.skipped;
      continue;
    }
    const Ontology& ont = *w.world.ontology;
    auto q = validate(parse_query(text), ont);
    std::vector<std::string> inds;
    for (const auto& a : q.body)
      if (*a.kind != PredicateKind::DatatypeProperty || a.args[0].is_variable()) {
        inds.push_back(a.args[0].value);
        if (*a.kind == PredicateKind::ObjectProperty && a.args[1].is_variable()) inds.push_back(a.args[1].value);
      }
    std::string x = inds[std::uniform_int_distribution<std::size_t>(0, inds.size() - 1)(w.rng)];
    Atom extra;
    int kind = std::uniform_int_distribution<int>(0, 2)(w.rng);
    if (kind == 0) {
      const auto& cls = ont.classes()[std::uniform_int_distribution<std::size_t>(0, ont.classes().size() - 1)(w.rng)];
      extra = Atom{cls.name, {Term::variable(x)}, std::nullopt};
    } else {
      const auto& dps = ont.datatype_properties();
      const auto& p = dps[std::uniform_int_distribution<std::size_t>(0, dps.size() - 1)(w.rng)];
      if (kind == 1) {
        auto values = literal_values(w.world)[p.name];
        std::string v = values.empty() ? "none" : values[std::uniform_int_distribution<std::size_t>(0, values.size() - 1)(w.rng)];
        extra = Atom{p.name, {Term::variable(x), Term::constant(v)}, std::nullopt};
      } else {
        extra = Atom{p.name, {Term::variable(x), Term::variable("Fresh")}, std::nullopt};
      }
    }
    ConjunctiveQuery q2 = q;
    q2.body.push_back(extra);
    std::string text2 = canonicalize(q2);
    req.query = text2;
    QueryResponse narrowed = w.mediator->handle_query(req);
    if (!narrowed.ok() && !is_plan_error(narrowed) && narrowed.error->stage != "validate") {
      fail(s, text2 + ": " + narrowed.error->message);
      continue;
    }
    ++s.cases;
    auto a = narrowed.ok() ? encode_rows(narrowed.result) : std::set<Row>{};
    auto b = encode_rows(base.result);
    if (!subset(a, b)) fail(s, text2 + " added answers over " + text + ":\n" + show(a));
  }
  return s;
}

namespace {

// ---- XQuery reference evaluator ------------------------------------------

using NamePath = std::vector<std::string>;

void walk(const xml::Node& n, NamePath& path, std::vector<std::pair<const xml::Node*, NamePath>>& out) {
  path.push_back(n.name);
  out.emplace_back(&n, path);
  for (const auto& c : n.children)
    if (c.is_element()) walk(c, path, out);
  path.pop_back();
}

bool step_match(const NamePath& names, const std::vector<std::string>& steps) {
  if (names.size() != steps.size()) return false;
  for (std::size_t i = 0; i < steps.size(); ++i)
    if (steps[i] != "*" && steps[i] != names[i]) return false;
  return true;
}

std::string text_of(const xml::Node& n) {
  if (n.is_text()) return n.text;
  std::string s;
  for (const auto& c : n.children) s += text_of(c);
  return s;
}

std::vector<const xml::Node*> relative(const xml::Node& ctx, const std::vector<std::string>& steps) {
  std::vector<std::pair<const xml::Node*, NamePath>> all;
  NamePath p;
  walk(ctx, p, all);
  std::vector<const xml::Node*> out;
  for (const auto& [n, names] : all)
    if (step_match(NamePath(names.begin() + 1, names.end()), steps)) out.push_back(n);
  return out;
}

struct RefCond {
  std::vector<std::string> path;
  bool lower = false;
  std::string value;
};

xml::Node reference_eval(const xml::Node& doc, const std::vector<std::string>& for_path, const std::vector<RefCond>& where,
                         const std::vector<std::string>& ret) {
  xml::Node result = xml::Node::element("Result");
  std::vector<std::pair<const xml::Node*, NamePath>> all;
  NamePath p;
  walk(doc, p, all);
  for (const auto& [n, names] : all) {
    if (!step_match(names, for_path)) continue;
    bool ok = true;
    for (const auto& c : where) {
      bool any = false;
      for (const auto* hit : relative(*n, c.path)) {
        std::string got = c.lower ? text::fold_key(text_of(*hit)) : text::normalize_value(text_of(*hit));
        any = any || got == text::normalize_value(c.value);
      }
      ok = ok && any;
    }
    if (!ok) continue;
    if (ret.empty()) result.children.push_back(*n);
    else
      for (const auto* r : relative(*n, ret)) result.children.push_back(*r);
  }
  return result;
}

const std::vector<std::string> kNames{"a", "b", "c"};
const std::vector<std::string> kValues{"x", "X", " x ", "y", "Ab", "ab", "AB", "\u00e9", "e\u0301", "a&b", "1 < 2", "it's"};

template <class T>
const T& pick(const std::vector<T>& v, std::mt19937& rng) {
  return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
}

xml::Node random_doc(std::mt19937& rng, int depth, bool attributes, bool mixed) {
  xml::Node n = xml::Node::element(pick(kNames, rng));
  if (attributes && std::bernoulli_distribution(0.3)(rng)) n.attributes["id"] = pick(kValues, rng);
  if (attributes && std::bernoulli_distribution(0.2)(rng)) n.attributes["k-2"] = pick(kValues, rng) + "\"q\"";
  if (depth >= 4 || std::bernoulli_distribution(0.25)(rng)) {
    std::string v = pick(kValues, rng);
    if (!text::trim(v).empty()) n.add_text(v);
    return n;
  }
  int kids = std::uniform_int_distribution<int>(1, 3)(rng);
  bool text_before = mixed && std::bernoulli_distribution(0.3)(rng);
  if (text_before) n.add_text("t " + pick(kValues, rng));
  for (int i = 0; i < kids; ++i) {
    n.children.push_back(random_doc(rng, depth + 1, attributes, mixed));
    if (mixed && std::bernoulli_distribution(0.2)(rng)) n.add_text(pick(kValues, rng) + " t");
  }
  return n;
}

std::vector<std::string> random_steps(std::mt19937& rng, int lo, int hi) {
  std::vector<std::string> s(std::uniform_int_distribution<int>(lo, hi)(rng));
  for (auto& x : s) x = std::bernoulli_distribution(0.2)(rng) ? "*" : pick(kNames, rng);
  return s;
}

}  // namespace

RunStats run_xquery_conformance(std::uint32_t seed, std::size_t cases) {
  RunStats s;
  std::mt19937 rng(seed);
  const std::vector<std::string> vars{"d", "x", "item"};
  for (std::size_t i = 0; i < cases; ++i) {
    xml::Node doc = random_doc(rng, 0, true, false);
    std::vector<std::string> for_path = random_steps(rng, 1, 4);
    std::vector<RefCond> where;
    int nconds = std::uniform_int_distribution<int>(0, 2)(rng);
    for (int c = 0; c < nconds; ++c)
      where.push_back({random_steps(rng, 1, 2), std::bernoulli_distribution(0.4)(rng), pick(kValues, rng)});
    std::vector<std::string> ret = std::bernoulli_distribution(0.3)(rng) ? random_steps(rng, 1, 2) : std::vector<std::string>{};
    const std::string& v = pick(vars, rng);

    std::string q = "for $" + v + " in /" + text::join(for_path, "/");
    for (std::size_t c = 0; c < where.size(); ++c) {
      q += c == 0 ? " where " : " and ";
      std::string lhs = "$" + v + "/" + text::join(where[c].path, "/");
      q += where[c].lower ? "lower-case(" + lhs + ")" : lhs;
      q += " eq " + xquery::quote(where[c].value);
    }
    q += " return $" + v;
    if (!ret.empty()) q += "/" + text::join(ret, "/");

    try {
      auto parsed = xquery::Query::parse(q);
      auto got = xml::serialize(xquery::eval(doc, parsed));
      auto want = xml::serialize(reference_eval(doc, for_path, where, ret));
      ++s.cases;
      if (got != want) fail(s, q + " on " + xml::serialize(doc) + "\nexpected " + want + "\ngot      " + got);
      if (xquery::Query::parse(parsed.to_string()) != parsed) fail(s, "to_string/parse differs for " + q);
    } catch (const std::exception& e) {
      fail(s, q + ": " + e.what());
    }
  }
  return s;
}

RunStats run_xml_roundtrip(std::uint32_t seed, std::size_t cases) {
  RunStats s;
  std::mt19937 rng(seed);
  for (std::size_t i = 0; i < cases; ++i) {
    xml::Node doc = random_doc(rng, 0, true, i % 2 == 1);
    ++s.cases;
    for (bool indent : {false, true}) {
      std::string text = xml::serialize(doc, {.declaration = indent, .indent = indent});
      try {
        if (xml::parse(text) != doc) fail(s, "round trip changed " + text);
      } catch (const std::exception& e) {
        fail(s, text + ": " + e.what());
      }
    }
  }
  return s;
}

}  // namespace medley::testing
