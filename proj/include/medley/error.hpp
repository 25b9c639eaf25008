// Error type shared by every layer of the mediator.
#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace medley {

enum class ErrorKind {
  Syntax,           // malformed input text (query, ontology, mapping, XML, XQuery)
  DuplicateName,
  DanglingReference,
  Cycle,
  UnknownName,      // unknown class/predicate/source/format
  Ambiguous,
  Arity,
  InvalidQuery,     // well-formed but semantically rejected query
  Mapping,          // structurally invalid mapping rule
  Schema,           // document violates an exported schema
  Plan,             // no mapped group / no root / unreachable group
  MissingBinding,
  Transport,        // data service unreachable or failed
  Config,
  Internal,
};

std::string_view to_string(ErrorKind kind);

/// Position inside the text that failed to parse. `line`/`column` are 1-based.
struct SourcePosition {
  std::size_t offset = 0;
  std::size_t line = 1;
  std::size_t column = 1;

  static SourcePosition at(std::string_view text, std::size_t offset);
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string message, std::optional<SourcePosition> pos = std::nullopt);

  ErrorKind kind() const noexcept { return kind_; }
  const std::optional<SourcePosition>& position() const noexcept { return pos_; }
  /// Message without the position suffix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::optional<SourcePosition> pos_;
  std::string detail_;
};

}  // namespace medley
