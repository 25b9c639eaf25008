// Semantic directory: registered sources, their exported schemas, and the GAV
// mapping rules tying ontology terms to XPath locations in those schemas.
//
// Mapping files (`<source>.map`), one rule per line, `#` comments:
//   Result/Entries/Entry/Protein, Protein, 100                              class
//   Result/Entries/Entry/Protein; Description, Protein; hasDescription, 100  datatype
//   <domain path>; <range path>, <Domain>; <Range>; <property>, 100          object
// Element locations are absolute whether or not they start with '/'.
//
// Registry file:
//   source <name> endpoint=<inproc:dir|http://host:port> schema=<id> map=<path>
//   key <source> <Class> <relative path>
#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "medley/ontology.hpp"
#include "medley/schema.hpp"
#include "medley/xpath.hpp"

namespace medley {

struct ClassMapping {
  std::string source;
  xpath::Path element_location;
  std::string class_name;
  int correspondence_index = 100;

  friend bool operator==(const ClassMapping&, const ClassMapping&) = default;
};

struct DatatypeMapping {
  std::string source;
  xpath::Path domain_location;
  xpath::Path value_location;  // relative to domain_location
  std::string domain_name;
  std::string property_name;
  int correspondence_index = 100;

  friend bool operator==(const DatatypeMapping&, const DatatypeMapping&) = default;
};

struct ObjectMapping {
  std::string source;
  xpath::Path domain_location;
  xpath::Path range_location;
  std::string domain_name;
  std::string range_name;
  std::string property_name;
  int correspondence_index = 100;
  // Deepest common ancestor-or-self of both locations; filled in at registration.
  xpath::Path record_location;

  friend bool operator==(const ObjectMapping&, const ObjectMapping&) = default;
};

using Mapping = std::variant<ClassMapping, DatatypeMapping, ObjectMapping>;

const std::string& mapping_source(const Mapping& m);
int correspondence_index(const Mapping& m);

/// Parses a mapping file. Ontology terms are checked against `ontology`
/// (canonical spelling is stored).
std::vector<Mapping> parse_mapping_file(const std::string& source, std::string_view text, const Ontology& ontology);
std::string serialize_mapping(const Mapping& m);

struct SourceRegistration {
  std::string name;
  std::string endpoint;
  std::string schema_id;
  std::string map_path;
  std::map<std::string, xpath::Path> key_paths;  // class -> relative path
};

/// Parsed registry file; file paths are returned as written.
std::vector<SourceRegistration> parse_registry(std::string_view text);

class SemanticDirectory {
 public:
  explicit SemanticDirectory(std::shared_ptr<const Ontology> ontology, int min_correspondence = 0);

  /// Validates mappings against the schema and the ontology, then adds the
  /// source. Registering an identical source again is a no-op.
  void register_source(SourceRegistration reg, SourceSchema schema, std::vector<Mapping> mappings);

  const Ontology& ontology() const noexcept { return *ontology_; }
  std::shared_ptr<const Ontology> ontology_ptr() const noexcept { return ontology_; }
  int min_correspondence() const noexcept { return min_correspondence_; }

  /// Source names in registration order.
  std::vector<std::string> source_names() const;
  bool has_source(std::string_view name) const;
  const SourceRegistration& registration(std::string_view source) const;
  const SourceSchema& schema(std::string_view source) const;
  std::size_t source_rank(std::string_view source) const;

  /// Key path for `cls` in `source`, inherited from the nearest ancestor with a
  /// declaration.
  std::optional<xpath::Path> key_path(std::string_view source, std::string_view cls) const;

  /// Class mappings whose class is `cls` or one of its subclasses.
  std::vector<ClassMapping> lookup_class(std::string_view cls) const;
  /// Mappings of `property` whose domain (and range) is subclass-compatible.
  std::vector<DatatypeMapping> lookup_datatype(std::string_view domain, std::string_view property) const;
  std::vector<ObjectMapping> lookup_object(std::string_view domain, std::string_view range, std::string_view property) const;
  std::vector<DatatypeMapping> datatype_mappings(std::string_view property) const;
  std::vector<ObjectMapping> object_mappings(std::string_view property) const;

  /// Every mapping of one source, in file order.
  const std::vector<Mapping>& mappings(std::string_view source) const;

  /// Directory limited to `sources` (which must be registered).
  SemanticDirectory restrict(const std::vector<std::string>& sources) const;

 private:
  struct Entry {
    SourceRegistration reg;
    SourceSchema schema;
    std::vector<Mapping> mappings;
  };
  const Entry& entry(std::string_view source) const;
  void check_mapping(const Entry& e, Mapping& m) const;

  std::shared_ptr<const Ontology> ontology_;
  int min_correspondence_ = 0;
  std::vector<Entry> entries_;
};

}  // namespace medley
