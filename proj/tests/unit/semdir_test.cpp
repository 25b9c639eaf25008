#include <doctest.h>

#include <sstream>

#include "medley/error.hpp"
#include "medley/semdir.hpp"
#include "world.hpp"

using namespace medley;
using namespace medley::testing;

namespace {

const World& W() { return fixture_world(); }

const SourceData& source(const std::string& name) {
  for (const auto& s : W().sources)
    if (s.reg.name == name) return s;
  throw std::runtime_error("no fixture source " + name);
}

std::vector<std::string> rule_lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);)
    if (!line.empty() && line[0] != '#') out.push_back(line);
  return out;
}

Error mapping_error(std::string_view text) {
  try {
    parse_mapping_file("sgd", text, *W().ontology);
  } catch (const Error& e) {
    return e;
  }
  FAIL("expected an error for: " << text);
  return Error(ErrorKind::Internal, "unreachable");
}

ErrorKind register_error(SourceRegistration reg, std::vector<Mapping> mappings, int min_correspondence = 0) {
  SemanticDirectory dir(W().ontology, min_correspondence);
  try {
    dir.register_source(std::move(reg), source("sgd").schema, std::move(mappings));
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::Internal;
}

std::vector<std::string> sources_of(const auto& mappings) {
  std::vector<std::string> out;
  for (const auto& m : mappings) out.push_back(m.source);
  return out;
}

}  // namespace

TEST_CASE("fixture mapping files round trip line by line") {
  for (const auto& name : W().source_names()) {
    auto lines = rule_lines(read_text(fixtures_dir() / (name + ".map")));
    auto parsed = parse_mapping_file(name, read_text(fixtures_dir() / (name + ".map")), *W().ontology);
    REQUIRE(parsed.size() == lines.size());
    for (std::size_t i = 0; i < lines.size(); ++i) CHECK(serialize_mapping(parsed[i]) == lines[i]);
  }
}

TEST_CASE("mapping kinds") {
  auto m = parse_mapping_file("sgd",
                              "/Result/Entries/Entry/Protein, protein, 90\n"
                              "Result/Entries/Entry/Protein; Description, Protein; HasDescription, 100\n"
                              "Result/Entries/Entry/Protein; Result/Entries/Entry/Protein/References/BibRef, Protein; BibRef; hasBibRef, 100\n",
                              *W().ontology);
  REQUIRE(m.size() == 3);
  const auto& c = std::get<ClassMapping>(m[0]);
  CHECK(c.class_name == "Protein");
  CHECK(c.element_location.absolute);
  CHECK(c.correspondence_index == 90);
  const auto& d = std::get<DatatypeMapping>(m[1]);
  CHECK(d.property_name == "hasDescription");
  CHECK(d.value_location.to_string() == "Description");
  const auto& o = std::get<ObjectMapping>(m[2]);
  CHECK(o.domain_name == "Protein");
  CHECK(o.range_name == "BibRef");
  CHECK(mapping_source(m[2]) == "sgd");
}

TEST_CASE("malformed mapping rules") {
  auto e = mapping_error("# c\nResult/Entries/Entry/Protein, Protein\n");
  CHECK(e.kind() == ErrorKind::Mapping);
  CHECK(e.detail().rfind("sgd.map line 2:", 0) == 0);
  CHECK(mapping_error("Result/Entries/Entry/Protein, Protein, x\n").kind() == ErrorKind::Mapping);
  CHECK(mapping_error("Result/Entries/Entry/Protein, Protein, 101\n").kind() == ErrorKind::Mapping);
  CHECK(mapping_error("Result/Entries/Entry/Protein, Enzyme, 100\n").kind() == ErrorKind::Mapping);
  CHECK(mapping_error("Result/Entries/Entry/Protein, hasName, 100\n").kind() == ErrorKind::Mapping);
  CHECK(mapping_error("Result/Entries/Entry/Protein; Name, Protein; hasTitle, 100\n").kind() == ErrorKind::Mapping);
  CHECK(mapping_error("Result/Entries/Entry/Protein; /Name, Protein; hasName, 100\n").kind() == ErrorKind::Mapping);
  CHECK(mapping_error("a; b, BibRef; Protein; hasBibRef, 100\n").kind() == ErrorKind::Mapping);
  CHECK(mapping_error("a; b, Protein; BibRef; hasName, 100\n").kind() == ErrorKind::Mapping);
  CHECK(mapping_error("a b, Protein, 100\n").kind() == ErrorKind::Mapping);
}

TEST_CASE("registry parsing") {
  auto regs = parse_registry(read_text(fixtures_dir() / "registry.txt"));
  REQUIRE(regs.size() == 5);
  CHECK(regs[0].name == "sgd");
  CHECK(regs[0].endpoint == "inproc:sgd");
  CHECK(regs[0].schema_id == "sgd-export-1");
  CHECK(regs[0].map_path == "sgd.map");
  CHECK(regs[0].key_paths.at("BibRef").to_string() == "PubMedId");
  CHECK(regs[2].key_paths.size() == 2);
  for (const char* bad : {"source sgd endpoint=x schema=y\n", "source sgd endpoint=x schema=y map=z colour=red\n",
                          "source sgd endpoint=x schema=y map=z\nsource sgd endpoint=x schema=y map=z\n",
                          "key sgd Protein Name\n", "source sgd endpoint=x schema=y map=z\nkey sgd Protein /Name\n",
                          "source sgd endpoint=x schema=y map=z\nkey sgd Protein Name\nkey sgd Protein Id\n",
                          "mirror sgd\n"}) {
    CHECK_THROWS_AS(parse_registry(bad), Error);
  }
}

TEST_CASE("fixture directory lookups") {
  SemanticDirectory dir = W().directory();
  CHECK(dir.source_names() == std::vector<std::string>{"sgd", "yeastract", "phosphogrid", "mips", "biogrid"});
  CHECK(dir.source_rank("phosphogrid") == 2);
  CHECK(sources_of(dir.lookup_class("Protein")) ==
        std::vector<std::string>{"sgd", "yeastract", "yeastract", "yeastract", "phosphogrid"});
  CHECK(sources_of(dir.lookup_class("TranscriptionFactor")) ==
        std::vector<std::string>{"yeastract", "yeastract", "phosphogrid"});
  CHECK(sources_of(dir.lookup_class("BioEntity")).size() == 9);
  CHECK(sources_of(dir.lookup_datatype("Chromosome", "hasName")) == std::vector<std::string>{"yeastract"});
  CHECK(sources_of(dir.lookup_datatype("TranscriptionFactor", "hasName")) ==
        std::vector<std::string>{"yeastract", "yeastract", "yeastract"});
  CHECK(sources_of(dir.datatype_mappings("hasName")).size() == 7);
  CHECK(sources_of(dir.lookup_object("TranscriptionFactor", "Chromosome", "belongsTo")) ==
        std::vector<std::string>{"yeastract"});
  CHECK(dir.lookup_object("Gene", "Chromosome", "belongsTo").empty());
  CHECK(dir.key_path("phosphogrid", "TranscriptionFactor")->to_string() == "Name");
  CHECK(dir.key_path("yeastract", "TranscriptionFactor")->to_string() == "Name");
  CHECK_FALSE(dir.key_path("sgd", "Gene"));
  const auto& o = std::get<ObjectMapping>(dir.mappings("yeastract").back());
  CHECK(o.record_location.to_string() == "/Result/Chromosomes/Chromosome");
  CHECK_THROWS_AS(dir.schema("uniprot"), Error);
}

TEST_CASE("restriction keeps registry order") {
  SemanticDirectory dir = W().directory().restrict({"phosphogrid", "sgd"});
  CHECK(dir.source_names() == std::vector<std::string>{"sgd", "phosphogrid"});
  CHECK(sources_of(dir.lookup_class("Protein")) == std::vector<std::string>{"sgd", "phosphogrid"});
  CHECK_THROWS_AS(W().directory().restrict({"uniprot"}), Error);
}

TEST_CASE("registration checks") {
  const SourceData& sgd = source("sgd");
  CHECK(register_error(sgd.reg, sgd.mappings) == ErrorKind::Internal);

  SourceRegistration wrong_schema = sgd.reg;
  wrong_schema.schema_id = "other";
  CHECK(register_error(wrong_schema, sgd.mappings) == ErrorKind::Schema);

  SourceRegistration bad_name = sgd.reg;
  bad_name.name = "s g d";
  CHECK(register_error(bad_name, {}) == ErrorKind::Config);

  SourceRegistration no_keys = sgd.reg;
  no_keys.key_paths.clear();
  CHECK(register_error(no_keys, sgd.mappings) == ErrorKind::Mapping);

  SourceRegistration unmapped_key = sgd.reg;
  unmapped_key.key_paths.emplace("Gene", xpath::Path::parse("Name"));
  CHECK(register_error(unmapped_key, sgd.mappings) == ErrorKind::Config);

  SourceRegistration prop_key = sgd.reg;
  prop_key.key_paths.emplace("hasName", xpath::Path::parse("Name"));
  CHECK(register_error(prop_key, sgd.mappings) == ErrorKind::Config);

  auto with = [&](const std::string& src, const char* rule) {
    auto maps = sgd.mappings;
    for (auto& m : parse_mapping_file(src, rule, *W().ontology)) maps.push_back(std::move(m));
    return maps;
  };
  CHECK(register_error(sgd.reg, with("sgd", "Result/Entries/Entry/Gene, Protein, 100\n")) == ErrorKind::Mapping);
  CHECK(register_error(sgd.reg, with("sgd", "Result/Entries/Entry/Protein; Symbol, Protein; hasName, 100\n")) ==
        ErrorKind::Mapping);
  CHECK(register_error(sgd.reg, with("sgd", "Result/Entries/Entry/Protein/References, Gene, 100\n")) ==
        ErrorKind::Mapping);
  CHECK(register_error(sgd.reg, with("yeastract", "Result/Entries/Entry/Protein, Protein, 100\n")) ==
        ErrorKind::Mapping);
}

TEST_CASE("object mappings need a repeating common ancestor") {
  auto onto = std::make_shared<const Ontology>(
      Ontology::load("class A\nclass B\nobjprop p domain=A range=B\n"));
  auto schema = SourceSchema::parse(
      "<Schema id=\"s\"><Element name=\"R\"><Element name=\"A\"><Element name=\"K\"/></Element>"
      "<Element name=\"B\"><Element name=\"K\"/></Element></Element></Schema>");
  SourceRegistration reg{"s", "inproc:s", "s", "s.map", {{"A", xpath::Path::parse("K")}, {"B", xpath::Path::parse("K")}}};
  auto maps = parse_mapping_file("s", "R/A, A, 100\nR/B, B, 100\nR/A; R/B, A; B; p, 100\n", *onto);
  SemanticDirectory dir(onto);
  try {
    dir.register_source(reg, schema, maps);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Mapping);
    CHECK(e.detail().find("no repeating ancestor") != std::string::npos);
  }
  CHECK(dir.source_names().empty());
}

TEST_CASE("re-registration") {
  SemanticDirectory dir(W().ontology);
  const SourceData& sgd = source("sgd");
  dir.register_source(sgd.reg, sgd.schema, sgd.mappings);
  CHECK_NOTHROW(dir.register_source(sgd.reg, sgd.schema, sgd.mappings));
  CHECK(dir.source_names().size() == 1);
  auto fewer = sgd.mappings;
  fewer.pop_back();
  try {
    dir.register_source(sgd.reg, sgd.schema, fewer);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DuplicateName);
  }
}

TEST_CASE("correspondence threshold drops weak rules") {
  auto maps = parse_mapping_file("sgd",
                                 "Result/Entries/Entry/Protein, Protein, 100\n"
                                 "Result/Entries/Entry/Protein/References/BibRef, BibRef, 100\n"
                                 "Result/Entries/Entry/Protein; Description, Protein; hasDescription, 40\n",
                                 *W().ontology);
  SemanticDirectory dir(W().ontology, 50);
  dir.register_source(source("sgd").reg, source("sgd").schema, maps);
  CHECK(dir.mappings("sgd").size() == 2);
  CHECK(dir.datatype_mappings("hasDescription").empty());
}
