// Minimal XML 1.0 subset: elements, attributes, character data, the predefined
// entities and numeric character references. Comments, processing instructions
// and the XML declaration are accepted and dropped. No namespaces, no DTDs.
#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace medley::xml {

struct Node {
  enum class Kind { Element, Text };

  Kind kind = Kind::Element;
  std::string name;                               // element name (empty for text)
  std::string text;                               // character data (text nodes only)
  std::map<std::string, std::string> attributes;  // serialized in name order
  std::vector<Node> children;

  static Node element(std::string name);
  static Node text_node(std::string text);

  bool is_element() const noexcept { return kind == Kind::Element; }
  bool is_text() const noexcept { return kind == Kind::Text; }

  /// Appends and returns a reference to the new child element.
  Node& add_element(std::string child_name);
  /// Appends `<child_name>value</child_name>`.
  Node& add_leaf(std::string child_name, std::string value);
  void add_text(std::string value);

  /// Concatenation of all descendant character data (XPath string-value).
  std::string string_value() const;
  /// First child element with the given name, or nullptr.
  const Node* child(std::string_view child_name) const;
  std::vector<const Node*> child_elements() const;

  friend bool operator==(const Node&, const Node&) = default;
};

/// Parses a document; whitespace-only text nodes are dropped, adjacent character
/// data is merged. Throws medley::Error(Syntax) with position on malformed input.
Node parse(std::string_view text);

struct SerializeOptions {
  bool declaration = false;
  bool indent = false;  // indent element-only content with two spaces
};

std::string serialize(const Node& node, SerializeOptions options = {});

std::string escape_text(std::string_view s);
std::string escape_attribute(std::string_view s);
bool is_name(std::string_view s) noexcept;

}  // namespace medley::xml
