// Exported source schema: the element structure a data service promises for its
// documents and query answers.
//
//   <Schema id="sgd-export-1">
//     <Element name="Result">
//       <Element name="Entries">
//         <Element name="Entry" repeating="true">
//           <Element name="Protein" unique="Name"> ... </Element>
//
// `repeating="true"` allows several siblings of that name; `unique="<rel-path>"`
// declares that the case-folded value at the relative path identifies the
// element within the document.
#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "medley/xml.hpp"
#include "medley/xpath.hpp"

namespace medley {

struct SchemaElement {
  std::string name;
  bool repeating = false;
  std::optional<xpath::Path> unique;
  std::set<std::string> attributes;
  std::vector<SchemaElement> children;

  const SchemaElement* child(const std::string& n) const;
};

class SourceSchema {
 public:
  static SourceSchema from_xml(const xml::Node& doc);
  static SourceSchema parse(std::string_view text);

  const std::string& id() const noexcept { return id_; }
  const SchemaElement& root() const noexcept { return root_; }
  const xml::Node& document() const noexcept { return doc_; }

  /// Declaration at an absolute wildcard-free path, or nullptr.
  const SchemaElement* find(const xpath::Path& path) const;
  bool contains(const xpath::Path& path) const { return find(path) != nullptr; }
  /// Deepest element on the root..path chain declared repeating, if any.
  std::optional<xpath::Path> deepest_repeating(const xpath::Path& path) const;
  /// Unique-key path declared on the element at `path`, if any.
  std::optional<xpath::Path> unique_key(const xpath::Path& path) const;
  /// Every declared absolute element path, depth first.
  std::vector<xpath::Path> element_paths() const;

  /// Throws Error(Schema) when `node` (an element found at absolute `path`) does
  /// not conform to the declaration at that path.
  void validate(const xml::Node& node, const xpath::Path& path) const;
  /// Validates a whole document including unique-key constraints.
  void validate_document(const xml::Node& doc) const;

 private:
  std::string id_;
  SchemaElement root_;
  xml::Node doc_;
};

}  // namespace medley
