#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "medley/error.hpp"
#include "medley/source.hpp"
#include "world.hpp"

using namespace medley;
using namespace medley::testing;

namespace {

std::shared_ptr<const DataService> sgd() {
  static auto s = DataService::load(fixtures_dir() / "sgd");
  return s;
}

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("medley_source_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  for (const char* f : {"service.json", "schema.xml", "data.xml"})
    std::filesystem::copy_file(fixtures_dir() / "sgd" / f, dir / f);
  return dir;
}

void write(const std::filesystem::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

ErrorKind load_error(const std::filesystem::path& dir) {
  try {
    DataService::load(dir);
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::Internal;
}

}  // namespace

TEST_CASE("fixture service answers the root query") {
  auto s = sgd();
  CHECK(s->name() == "sgd");
  CHECK(s->descriptor().schema_id == "sgd-export-1");
  std::string r = s->query(
      "for $d in /Result/Entries/Entry/Protein where $d/Description eq \"DNA Topoisomerase III\" return $d");
  auto doc = xml::parse(r);
  REQUIRE(doc.children.size() == 1);
  CHECK(doc.children[0].child("Name")->string_value() == "TOP3");
  CHECK(xml::parse(s->query("for $d in /Result/Entries/Entry/Protein where $d/Description eq \"none\" return $d"))
            .children.empty());
  CHECK(SourceSchema::parse(s->schema_text()).id() == "sgd-export-1");
}

TEST_CASE("bad XQuery names the source") {
  try {
    sgd()->query("for $d in Result return $d");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Syntax);
    CHECK(e.detail().rfind("source sgd: ", 0) == 0);
  }
}

TEST_CASE("provenance records round trip") {
  ProvenanceRecord p = sgd()->provenance("inproc:sgd");
  CHECK(p.source == "sgd");
  CHECK(p.schema_id == "sgd-export-1");
  CHECK(p.retrieved_at.size() == 20);
  CHECK(p.retrieved_at.back() == 'Z');
  auto q = ProvenanceRecord::from_xml(xml::parse(xml::serialize(p.to_xml())));
  CHECK(q.source == p.source);
  CHECK(q.endpoint == p.endpoint);
  CHECK(q.schema_id == p.schema_id);
  CHECK(q.description == p.description);
  CHECK(q.retrieved_at == p.retrieved_at);
  CHECK_THROWS_AS(ProvenanceRecord::from_xml(xml::parse("<Other/>")), Error);
}

TEST_CASE("service descriptors") {
  auto d = ServiceDescriptor::parse_json(R"({"name":"x","schema":"x-1"})");
  CHECK(d.name == "x");
  CHECK(d.schema_id == "x-1");
  CHECK(d.description.empty());
  CHECK_THROWS_AS(ServiceDescriptor::parse_json(R"({"name":"x"})"), Error);
  CHECK_THROWS_AS(ServiceDescriptor::parse_json("{"), Error);
}

TEST_CASE("loading rejects broken exports") {
  auto dir = scratch("schema_id");
  write(dir / "service.json", R"({"name":"sgd","schema":"other"})");
  CHECK(load_error(dir) == ErrorKind::Config);

  dir = scratch("invalid");
  write(dir / "data.xml", "<Result><Entries><Entry><Gene/></Entry></Entries></Result>");
  CHECK(load_error(dir) == ErrorKind::Schema);

  dir = scratch("missing");
  std::filesystem::remove(dir / "data.xml");
  CHECK(load_error(dir) == ErrorKind::Config);
}

TEST_CASE("in-process and counting clients") {
  auto inner = make_inprocess_client(sgd(), "inproc:sgd");
  auto counting = std::make_shared<CountingClient>(inner);
  const std::string q = "for $d in /Result/Entries/Entry/Protein where lower-case($d/Name) eq \"top3\" return $d";
  auto a = counting->query(q);
  counting->query(q);
  CHECK(counting->calls() == 2);
  CHECK(counting->queries().at(q) == 2);
  CHECK(a.result.children.size() == 1);
  CHECK(xml::serialize(a.result) == a.raw);
  CHECK(a.provenance.endpoint == "inproc:sgd");
  CHECK(counting->name() == "sgd");
  counting->reset();
  CHECK(counting->calls() == 0);
  CHECK(counting->queries().empty());
}

TEST_CASE("unreachable HTTP source is a transport error") {
  auto c = make_http_client("gone", "http://127.0.0.1:1");
  try {
    c->query("for $d in /Result return $d");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Transport);
  }
}
