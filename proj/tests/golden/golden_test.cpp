#include <doctest.h>

#include <cstdlib>
#include <fstream>

#include "medley/mediator.hpp"
#include "world.hpp"

using namespace medley;
using namespace medley::testing;

namespace {

// Compares `actual` with tests/golden/<name>; MEDLEY_UPDATE_GOLDEN=1 rewrites the file instead.
void check_golden(const std::string& name, const std::string& actual) {
  auto path = golden_dir() / name;
  if (const char* u = std::getenv("MEDLEY_UPDATE_GOLDEN"); u && std::string(u) == "1") {
    std::ofstream(path, std::ios::binary) << actual;
    MESSAGE("updated " << path.string());
    return;
  }
  std::string expected;
  REQUIRE_NOTHROW(expected = read_text(path));
  CHECK_MESSAGE(actual == expected, name << " differs from the golden file");
}

std::string body(const QueryRequest& r) {
  auto resp = fixture_mediator()->handle_query(r);
  REQUIRE(resp.ok());
  return resp.body;
}

QueryRequest yeast(OutputFormat f) {
  QueryRequest r;
  r.query = yeast_case_query();
  r.format = f;
  return r;
}

}  // namespace

TEST_CASE("plan explanation") {
  const auto& w = fixture_world();
  auto dir = w.directory();
  auto q = validate(parse_query(yeast_case_query()), *w.ontology);
  auto plan = plan_query(q, dir);
  check_golden("yeast_case.explain.txt", explain(plan, dir));
}

TEST_CASE("result formats") {
  check_golden("yeast_case.rdf", body(yeast(OutputFormat::Rdf)));
  check_golden("yeast_case.xml", body(yeast(OutputFormat::Xml)));
  check_golden("yeast_case.json", body(yeast(OutputFormat::Json)));
  check_golden("yeast_case.html", body(yeast(OutputFormat::Html)));
}

TEST_CASE("keyword search and empty results") {
  QueryRequest k;
  k.keyword = "TOP3";
  k.format = OutputFormat::Xml;
  check_golden("keyword_top3.xml", body(k));

  QueryRequest none;
  none.query = R"(Ans(P) :- Protein(P), hasName(P, "no such protein");)";
  none.format = OutputFormat::Xml;
  check_golden("empty.xml", body(none));
}
