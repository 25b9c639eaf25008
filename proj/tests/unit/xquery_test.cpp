#include <doctest.h>

#include "medley/error.hpp"
#include "medley/xquery.hpp"

using namespace medley;

namespace {

const xml::Node& doc() {
  static const xml::Node d = xml::parse(
      "<Result><Entries>"
      "<Entry><Protein><Name>TOP3</Name><Description> DNA Topoisomerase III </Description></Protein></Entry>"
      "<Entry><Protein><Name>Rad51</Name><Description>DNA repair</Description>"
      "<Refs><Ref>1</Ref><Ref>2</Ref></Refs></Protein></Entry>"
      "</Entries></Result>");
  return d;
}

std::vector<std::string> names(const xml::Node& result) {
  std::vector<std::string> out;
  for (const auto& c : result.children) out.push_back(c.child("Name") ? c.child("Name")->string_value() : c.string_value());
  return out;
}

ErrorKind kind_of(std::string_view text, std::size_t* column = nullptr) {
  try {
    xquery::Query::parse(text);
  } catch (const Error& e) {
    if (column && e.position()) *column = e.position()->column;
    return e.kind();
  }
  return ErrorKind::Internal;
}

}  // namespace

TEST_CASE("parses the root query form") {
  auto q = xquery::Query::parse(
      "for $d in /Result/Entries/Entry/Protein\n  where $d/Description eq \"DNA Topoisomerase III\"\n  return $d");
  CHECK(q.var == "d");
  CHECK(q.for_path.to_string() == "/Result/Entries/Entry/Protein");
  REQUIRE(q.where.size() == 1);
  CHECK(q.where[0].path.to_string() == "Description");
  CHECK_FALSE(q.where[0].lower_case);
  CHECK(q.where[0].value == "DNA Topoisomerase III");
  CHECK_FALSE(q.return_path);
  CHECK(q.to_string() ==
        "for $d in /Result/Entries/Entry/Protein where $d/Description eq \"DNA Topoisomerase III\" return $d");
  CHECK(xquery::Query::parse(q.to_string()) == q);
}

TEST_CASE("lower-case conditions, conjunctions and return paths") {
  auto q = xquery::Query::parse(
      "for $x in /Result/Entries/Entry where lower-case($x/Protein/Name) eq 'rad51' and $x/Protein/Refs/Ref eq \"2\" "
      "return $x/Protein");
  CHECK(q.var == "x");
  REQUIRE(q.where.size() == 2);
  CHECK(q.where[0].lower_case);
  CHECK(q.return_path->to_string() == "Protein");
  CHECK(q.item_path().to_string() == "/Result/Entries/Entry/Protein");
  CHECK(names(xquery::eval(doc(), q)) == std::vector<std::string>{"Rad51"});
  CHECK(xquery::Query::parse(q.to_string()) == q);
}

TEST_CASE("string literals") {
  auto q = xquery::Query::parse("for $d in /a where $d/b eq \"say \"\"hi\"\" &amp; &#65;\" return $d");
  CHECK(q.where[0].value == "say \"hi\" & A");
  CHECK(xquery::quote("a\"b&c") == "\"a\"\"b&amp;c\"");
  CHECK(xquery::Query::parse(q.to_string()) == q);
}

TEST_CASE("eq compares trimmed NFC values, case-sensitively unless lower-cased") {
  auto hit = [](std::string_view text) { return names(xquery::eval(doc(), xquery::Query::parse(text))); };
  CHECK(hit("for $d in /Result/Entries/Entry/Protein where $d/Description eq \"DNA Topoisomerase III\" return $d") ==
        std::vector<std::string>{"TOP3"});
  CHECK(hit("for $d in /Result/Entries/Entry/Protein where $d/Description eq \"dna topoisomerase iii\" return $d").empty());
  CHECK(hit("for $d in /Result/Entries/Entry/Protein where lower-case($d/Name) eq \"top3\" return $d") ==
        std::vector<std::string>{"TOP3"});
  CHECK(hit("for $d in /Result/Entries/Entry/Protein where $d/Refs/Ref eq \"2\" return $d") ==
        std::vector<std::string>{"Rad51"});
  CHECK(hit("for $d in /Result/Entries/Entry/Protein return $d/Refs/Ref") == std::vector<std::string>{"1", "2"});
  CHECK(hit("for $d in /Nothing return $d").empty());
}

TEST_CASE("result wraps deep copies in a Result element") {
  auto r = xquery::eval(doc(), xquery::Query::parse("for $d in /Result/Entries/Entry return $d/Protein/Name"));
  CHECK(r.name == "Result");
  CHECK(xml::serialize(r) == "<Result><Name>TOP3</Name><Name>Rad51</Name></Result>");
}

TEST_CASE("syntax errors carry positions") {
  std::size_t col = 0;
  CHECK(kind_of("for $d in Result return $d") == ErrorKind::Syntax);
  CHECK(kind_of("for $d in /a return $e", &col) == ErrorKind::Syntax);
  CHECK(col > 1);
  CHECK(kind_of("for $d in /a where $d/b = \"x\" return $d") == ErrorKind::Syntax);
  CHECK(kind_of("for $d in /a where $e/b eq \"x\" return $d") == ErrorKind::Syntax);
  CHECK(kind_of("for $d in /a where $d/b eq \"x return $d") == ErrorKind::Syntax);
  CHECK(kind_of("for $d in /a return $d order by $d") == ErrorKind::Syntax);
  CHECK(kind_of("let $d := /a return $d") == ErrorKind::Syntax);
  CHECK(kind_of("for $d in /a where $d//b eq \"x\" return $d") == ErrorKind::Syntax);
}
