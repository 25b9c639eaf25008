#include <doctest.h>

#include <algorithm>

#include "medley/error.hpp"
#include "medley/planner.hpp"
#include "medley/xquery.hpp"
#include "scenario.hpp"
#include "world.hpp"

using namespace medley;
using namespace medley::testing;

namespace {

const SemanticDirectory& dir() {
  static const SemanticDirectory d = fixture_world().directory();
  return d;
}

ConjunctiveQuery worked() { return validate(parse_query(yeast_case_query()), *fixture_world().ontology); }

ConjunctiveQuery q(const std::string& text) { return validate(parse_query(text), *fixture_world().ontology); }

std::size_t group_with(const std::vector<Group>& gs, const ConjunctiveQuery& query, const std::string& atoms) {
  for (std::size_t i = 0; i < gs.size(); ++i) {
    std::string s;
    for (auto a : gs[i].atoms) s += (s.empty() ? "" : ", ") + query.body[a].to_string();
    if (s == atoms) return i;
  }
  FAIL("no group " << atoms);
  return 0;
}

const PlanArc& arc(const PlanNode& n, const std::string& property) {
  for (const auto& a : n.children)
    if (a.object_property == property) return a;
  throw std::runtime_error("no arc " + property);
}

ErrorKind plan_error(const std::string& text, const std::vector<std::string>& only = {}) {
  try {
    plan_query(q(text), only.empty() ? dir() : dir().restrict(only));
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::Internal;
}

}  // namespace

TEST_CASE("groups of the worked query") {
  auto query = worked();
  auto gs = form_groups(query, dir());
  CHECK(gs.size() == 17);
  CHECK(group_rows(gs, query) == expected_group_rows());
  for (std::size_t i = 0; i < gs.size(); ++i) CHECK(gs[i].id == "G" + std::to_string(i + 1));
  CHECK(std::count_if(gs.begin(), gs.end(), [](const Group& g) { return g.kind == GroupKind::Composite; }) == 8);
  CHECK(std::count_if(gs.begin(), gs.end(), [](const Group& g) { return g.instantiated; }) == 2);
}

TEST_CASE("root selection") {
  auto query = worked();
  auto gs = form_groups(query, dir());
  std::size_t root = select_root(gs, query);
  CHECK(root == group_with(gs, query, "Protein(P), hasDescription(P,\"DNA Topoisomerase III\")"));
  std::size_t g8 = group_with(gs, query, "Chromosome(C), hasName(C,\"XVI\")");
  std::size_t reached = 0;
  CHECK_FALSE(root_eligible(gs, query, g8, &reached));
  CHECK(reached < gs.size());
  CHECK(root_eligible(gs, query, root, &reached));
  CHECK(reached == gs.size());
}

TEST_CASE("optimized plan tree") {
  PlanTree t = plan_query(worked(), dir());
  CHECK(t.optimized);
  const PlanNode& p = t.nodes[0];
  CHECK(p.variable == "P");
  CHECK(p.class_name == "Protein");
  CHECK(p.chosen_source == "sgd");
  CHECK(p.ontology_terms == std::vector<std::string>{"Protein", "hasDescription"});
  CHECK(p.resource_elements ==
        std::vector<std::string>{"/Result/Entries/Entry/Protein", "/Result/Entries/Entry/Protein/Description"});

  REQUIRE(p.children.size() == 2);
  CHECK(p.children[0].object_property == "regulatedBy");
  CHECK(p.children[1].object_property == "hasBibRef");
  CHECK(p.children[0].parallel_ok);
  CHECK(p.children[1].parallel_ok);
  CHECK(t.stages(0) == std::vector<std::vector<std::size_t>>{{0, 1}});
  CHECK(arc(p, "regulatedBy").constant_distance == std::optional<std::size_t>(1));
  CHECK_FALSE(arc(p, "hasBibRef").constant_distance);

  const PlanNode& tf = t.nodes.at(*t.node_of("TF"));
  CHECK(tf.class_name == "TranscriptionFactor");
  REQUIRE(tf.children.size() == 2);
  CHECK(tf.children[0].object_property == "belongsTo");
  CHECK(tf.children[1].object_property == "hasPhosphoSite");
  CHECK_FALSE(tf.children[0].parallel_ok);
  CHECK_FALSE(tf.children[1].parallel_ok);
  CHECK(t.stages(*t.node_of("TF")) == std::vector<std::vector<std::size_t>>{{0}, {1}});
  CHECK(tf.children[0].constant_distance == std::optional<std::size_t>(0));
  CHECK(tf.children[0].chosen_source == "yeastract");
  CHECK(tf.children[1].chosen_source == "phosphogrid");
  REQUIRE(tf.children[0].filter_groups.size() == 1);
  CHECK(t.query.body[t.groups[tf.children[0].filter_groups[0]].main_atom()].to_string() == "hasName(C,\"XVI\")");
  CHECK(t.node_of("Nt") == std::nullopt);
  CHECK(t.nodes.size() == 5);
}

TEST_CASE("the unoptimized plan keeps body order") {
  auto query = worked();
  auto gs = form_groups(query, dir());
  std::size_t root = select_root(gs, query);
  PlanTree t = build_plan(query, gs, root, dir());
  CHECK_FALSE(t.optimized);
  const PlanNode& tf = t.nodes.at(*t.node_of("TF"));
  REQUIRE(tf.children.size() == 2);
  CHECK(tf.children[0].object_property == "belongsTo");
  CHECK(t.nodes[0].children[0].object_property == "hasBibRef");
}

TEST_CASE("root query matches the published form") {
  PlanTree t = plan_query(worked(), dir());
  std::string xq = instantiate(t.nodes[0].xquery_template, {});
  CHECK(whitespace_tokens(xq) == whitespace_tokens(expected_root_xquery()));
  CHECK(xquery::Query::parse(xq).to_string() == xq);
}

TEST_CASE("templates and instantiation") {
  PlanTree t = plan_query(worked(), dir());
  const PlanArc& reg = arc(t.nodes[0], "regulatedBy");
  CHECK(reg.xquery_template ==
        "for $d in /Result/Entries/Entry/Protein where lower-case($d/Name) eq {$P} return $d");
  CHECK(instantiate(reg.xquery_template, {{"P", "top3"}}) ==
        "for $d in /Result/Entries/Entry/Protein where lower-case($d/Name) eq \"top3\" return $d");
  CHECK(instantiate("for $d in /a where $d/b eq \"{$X}\" and $d/c eq {$X} return $d", {{"X", "say \"x\""}}) ==
        "for $d in /a where $d/b eq \"{$X}\" and $d/c eq \"say \"\"x\"\"\" return $d");
  try {
    instantiate(reg.xquery_template, {{"TF", "x"}});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::MissingBinding);
  }
  const PlanArc& bt = arc(t.nodes.at(*t.node_of("TF")), "belongsTo");
  CHECK(bt.xquery_template ==
        "for $d in /Result/Chromosomes/Chromosome where lower-case($d/Genes/TranscriptionFactor/Name) eq {$TF} return $d");
}

TEST_CASE("explain lists groups and the tree") {
  PlanTree t = plan_query(worked(), dir());
  std::string text = explain(t, dir());
  CHECK(text.find("G17") != std::string::npos);
  CHECK(text.find("Root: G1") != std::string::npos);
  CHECK(text.find("Arc belongsTo") < text.find("Arc hasPhosphoSite"));
  CHECK(explain_groups(t.groups, t.query).find("sgd; yeastract; phosphogrid") != std::string::npos);
}

TEST_CASE("planning failures") {
  CHECK(plan_error("Ans(X) :- Protein(X);") == ErrorKind::Plan);
  CHECK(plan_error("Ans(X) :- Chromosome(C), hasName(C, \"XVI\"), belongsTo(X, C);") == ErrorKind::Plan);
  CHECK(plan_error("Ans(X) :- hasTitle(X, \"t\"), hasYear(X, Y);") == ErrorKind::Internal);
  CHECK(plan_error("Ans(X) :- Gene(X), hasFunction(X, \"f\"), belongsTo(X, C);") == ErrorKind::Plan);
  CHECK(plan_error("Ans(X) :- hasName(X, \"TOP3\");", {"mips", "biogrid", "phosphogrid"}) == ErrorKind::Internal);
  CHECK(plan_error("Ans(X) :- hasDescription(X, \"d\");", {"mips"}) == ErrorKind::Plan);
  CHECK(plan_error(yeast_case_query(), {"sgd", "yeastract"}) == ErrorKind::Plan);
}

TEST_CASE("relevant mappings follow class atoms") {
  auto query = q("Ans(X) :- TranscriptionFactor(X), hasName(X, \"Fhl1p\");");
  auto ms = relevant_datatype_mappings(dir(), query, 1);
  CHECK(ms.size() == 3);
  for (const auto& m : ms) CHECK(m.source == "yeastract");
  auto any = q("Ans(X) :- hasName(X, \"Fhl1p\");");
  CHECK(relevant_datatype_mappings(dir(), any, 0).size() == 7);
  CHECK(classes_of(query, "X") == std::vector<std::string>{"TranscriptionFactor"});
}
