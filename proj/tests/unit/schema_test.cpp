#include <doctest.h>

#include "medley/error.hpp"
#include "medley/schema.hpp"

using namespace medley;

namespace {

const char* kSchema =
    "<Schema id=\"s-1\"><Element name=\"Result\"><Element name=\"Entries\">"
    "<Element name=\"Entry\" repeating=\"true\"><Element name=\"Protein\" unique=\"Name\">"
    "<Attribute name=\"lang\"/><Element name=\"Name\"/><Element name=\"Description\"/>"
    "<Element name=\"Refs\"><Element name=\"Ref\" repeating=\"true\"/></Element>"
    "</Element></Element></Element></Element></Schema>";

xpath::Path P(const char* s) { return xpath::Path::parse(s); }

ErrorKind doc_error(std::string_view doc) {
  try {
    SourceSchema::parse(kSchema).validate_document(xml::parse(doc));
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::Internal;
}

ErrorKind schema_error(std::string_view text) {
  try {
    SourceSchema::parse(text);
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::Internal;
}

}  // namespace

TEST_CASE("declarations") {
  auto s = SourceSchema::parse(kSchema);
  CHECK(s.id() == "s-1");
  CHECK(s.contains(P("/Result/Entries/Entry/Protein/Refs/Ref")));
  CHECK_FALSE(s.contains(P("/Result/Entries/Entry/Gene")));
  CHECK_FALSE(s.contains(P("/Entries")));
  CHECK_FALSE(s.contains(P("Result")));
  CHECK(s.deepest_repeating(P("/Result/Entries/Entry/Protein/Name")) == P("/Result/Entries/Entry"));
  CHECK(s.deepest_repeating(P("/Result/Entries/Entry/Protein/Refs/Ref")) == P("/Result/Entries/Entry/Protein/Refs/Ref"));
  CHECK_FALSE(s.deepest_repeating(P("/Result/Entries")));
  CHECK(s.unique_key(P("/Result/Entries/Entry/Protein")) == P("Name"));
  CHECK_FALSE(s.unique_key(P("/Result/Entries/Entry")));
  auto paths = s.element_paths();
  REQUIRE(paths.size() == 8);
  CHECK(paths.front() == P("/Result"));
  CHECK(paths.back() == P("/Result/Entries/Entry/Protein/Refs/Ref"));
}

TEST_CASE("conforming documents validate") {
  CHECK(doc_error("<Result><Entries><Entry><Protein lang=\"en\"><Name>A</Name><Refs><Ref>1</Ref><Ref>2</Ref></Refs>"
                  "</Protein></Entry><Entry><Protein><Name>B</Name></Protein></Entry></Entries></Result>") ==
        ErrorKind::Internal);
  CHECK(doc_error("<Result/>") == ErrorKind::Internal);
}

TEST_CASE("violations are schema errors") {
  CHECK(doc_error("<Other/>") == ErrorKind::Schema);
  CHECK(doc_error("<Result><Entries><Entry><Gene/></Entry></Entries></Result>") == ErrorKind::Schema);
  CHECK(doc_error("<Result><Entries/><Entries/></Result>") == ErrorKind::Schema);
  CHECK(doc_error("<Result><Entries><Entry><Protein x=\"1\"/></Entry></Entries></Result>") == ErrorKind::Schema);
  CHECK(doc_error("<Result>stray<Entries/></Result>") == ErrorKind::Schema);
  CHECK(doc_error("<Result><Entries><Entry><Protein><Name>A</Name></Protein></Entry>"
                  "<Entry><Protein><Name> a </Name></Protein></Entry></Entries></Result>") == ErrorKind::Schema);
}

TEST_CASE("validate checks a fragment at its path") {
  auto s = SourceSchema::parse(kSchema);
  CHECK_NOTHROW(s.validate(xml::parse("<Protein><Name>A</Name></Protein>"), P("/Result/Entries/Entry/Protein")));
  CHECK_THROWS_AS(s.validate(xml::parse("<Protein><Year>1</Year></Protein>"), P("/Result/Entries/Entry/Protein")), Error);
  CHECK_THROWS_AS(s.validate(xml::parse("<Protein/>"), P("/Result/Entries/Entry/Gene")), Error);
}

TEST_CASE("malformed schemas") {
  CHECK(schema_error("<NotSchema id=\"x\"/>") == ErrorKind::Schema);
  CHECK(schema_error("<Schema><Element name=\"R\"/></Schema>") == ErrorKind::Schema);
  CHECK(schema_error("<Schema id=\"x\"><Element name=\"R\"/><Element name=\"S\"/></Schema>") == ErrorKind::Schema);
  CHECK(schema_error("<Schema id=\"x\"><Element name=\"R\"><Element name=\"A\"/><Element name=\"A\"/></Element></Schema>") ==
        ErrorKind::Schema);
  CHECK(schema_error("<Schema id=\"x\"><Element name=\"R\" unique=\"/a\"/></Schema>") == ErrorKind::Schema);
  CHECK(schema_error("<Schema id=\"x\"><Thing/></Schema>") == ErrorKind::Schema);
  CHECK(schema_error("<Schema id=\"x\"><Element name=\"R\"") == ErrorKind::Syntax);
}
