// Child-axis XPath subset: `/a/b/c`, `a/b`, `*` name tests.
#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "medley/xml.hpp"

namespace medley::xpath {

struct Path {
  bool absolute = false;
  std::vector<std::string> steps;  // element names or "*"

  static Path parse(std::string_view text);
  std::string to_string() const;

  bool empty() const noexcept { return steps.empty(); }
  /// Concatenation; `rel` must be relative.
  Path join(const Path& rel) const;
  /// True when `*this` is an ancestor-or-self of `other` (both absolute, no wildcards compared literally).
  bool is_prefix_of(const Path& other) const;
  /// Steps of `other` below `*this`; requires is_prefix_of(other).
  Path relative_to_descendant(const Path& other) const;
  /// Longest common prefix of two absolute paths.
  static Path common_prefix(const Path& a, const Path& b);

  friend bool operator==(const Path&, const Path&) = default;
  friend auto operator<=>(const Path&, const Path&) = default;
};

/// Matched element plus the concrete element names from the evaluation start.
using MatchVisitor = std::function<void(const xml::Node&, const std::vector<std::string>& names)>;

/// Evaluates `path` on `doc`. Relative paths require `context`; absolute paths
/// ignore it. Results are in document order.
std::vector<const xml::Node*> eval(const xml::Node& doc, const Path& path, const xml::Node* context = nullptr);

/// Relative evaluation from `context`.
std::vector<const xml::Node*> eval_relative(const xml::Node& context, const Path& path);

/// Like eval for absolute paths, reporting the concrete absolute name path of each match.
void visit_absolute(const xml::Node& doc, const Path& path, const MatchVisitor& visit);

}  // namespace medley::xpath
