#include "medley/error.hpp"

namespace medley {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Syntax: return "syntax";
    case ErrorKind::DuplicateName: return "duplicate-name";
    case ErrorKind::DanglingReference: return "dangling-reference";
    case ErrorKind::Cycle: return "cycle";
    case ErrorKind::UnknownName: return "unknown-name";
    case ErrorKind::Ambiguous: return "ambiguous";
    case ErrorKind::Arity: return "arity";
    case ErrorKind::InvalidQuery: return "invalid-query";
    case ErrorKind::Mapping: return "mapping";
    case ErrorKind::Schema: return "schema";
    case ErrorKind::Plan: return "plan";
    case ErrorKind::MissingBinding: return "missing-binding";
    case ErrorKind::Transport: return "transport";
    case ErrorKind::Config: return "config";
    case ErrorKind::Internal: return "internal";
  }
  return "internal";
}

SourcePosition SourcePosition::at(std::string_view text, std::size_t offset) {
  SourcePosition pos;
  pos.offset = offset;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++pos.line;
      pos.column = 1;
    } else {
      ++pos.column;
    }
  }
  return pos;
}

namespace {
std::string with_position(const std::string& message, const std::optional<SourcePosition>& pos) {
  if (!pos) return message;
  return message + " (line " + std::to_string(pos->line) + ", column " + std::to_string(pos->column) + ")";
}
}  // namespace

Error::Error(ErrorKind kind, std::string message, std::optional<SourcePosition> pos)
    : std::runtime_error(with_position(message, pos)), kind_(kind), pos_(pos), detail_(std::move(message)) {}

}  // namespace medley
