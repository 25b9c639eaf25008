#include "medley/ontology.hpp"

#include <sstream>

#include "medley/error.hpp"
#include "medley/text.hpp"

namespace medley {

std::string_view to_string(PredicateKind kind) {
  switch (kind) {
    case PredicateKind::Class: return "class";
    case PredicateKind::DatatypeProperty: return "datatype-property";
    case PredicateKind::ObjectProperty: return "object-property";
  }
  return "class";
}

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return out;
}

std::vector<std::string> tokens(std::string_view line) {
  std::vector<std::string> out;
  std::istringstream in{std::string(line)};
  std::string t;
  while (in >> t) out.push_back(t);
  return out;
}

struct LineError {
  std::size_t line;
  [[noreturn]] void fail(ErrorKind kind, const std::string& msg) const {
    SourcePosition pos;
    pos.line = line;
    throw Error(kind, msg, pos);
  }
};

std::string keyed(const std::string& tok, std::string_view key, const LineError& at) {
  std::string prefix = std::string(key) + "=";
  if (tok.rfind(prefix, 0) != 0) at.fail(ErrorKind::Syntax, "expected " + prefix + "<Class>, got '" + tok + "'");
  std::string v = tok.substr(prefix.size());
  if (!text::is_identifier(v)) at.fail(ErrorKind::Syntax, "invalid class name '" + v + "'");
  return v;
}

}  // namespace

Ontology Ontology::load(std::string_view text) {
  Ontology o;
  // lower-cased name -> declaring line; classes and properties are separate namespaces
  std::map<std::string, std::size_t> class_lines_by_name, prop_lines_by_name;
  std::vector<std::size_t> class_lines, dp_lines, op_lines;
  bool base_seen = false;

  std::size_t lineno = 0;
  for (const std::string& raw : text::split(text, '\n')) {
    ++lineno;
    std::string_view line = text::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    LineError at{lineno};
    auto t = tokens(line);
    auto check_new = [&](std::map<std::string, std::size_t>& ns, const std::string& name) {
      if (!text::is_identifier(name)) at.fail(ErrorKind::Syntax, "invalid name '" + name + "'");
      if (auto it = ns.find(lower(name)); it != ns.end())
        at.fail(ErrorKind::DuplicateName, "'" + name + "' already declared on line " + std::to_string(it->second));
      ns[lower(name)] = lineno;
    };
    if (t[0] == "class") {
      if (t.size() != 2 && !(t.size() == 4 && t[2] == "<")) at.fail(ErrorKind::Syntax, "expected 'class <Name> [< <Parent>]'");
      check_new(class_lines_by_name, t[1]);
      ClassDef c{t[1], std::nullopt};
      if (t.size() == 4) {
        if (!text::is_identifier(t[3])) at.fail(ErrorKind::Syntax, "invalid parent name '" + t[3] + "'");
        c.parent = t[3];
      }
      o.class_index_[lower(c.name)] = o.classes_.size();
      o.classes_.push_back(std::move(c));
      class_lines.push_back(lineno);
    } else if (t[0] == "dataprop") {
      if (t.size() != 3) at.fail(ErrorKind::Syntax, "expected 'dataprop <name> domain=<Class>'");
      check_new(prop_lines_by_name, t[1]);
      o.dataprop_index_[lower(t[1])] = o.datatype_properties_.size();
      o.datatype_properties_.push_back({t[1], keyed(t[2], "domain", at)});
      dp_lines.push_back(lineno);
    } else if (t[0] == "objprop") {
      if (t.size() != 4) at.fail(ErrorKind::Syntax, "expected 'objprop <name> domain=<Class> range=<Class>'");
      check_new(prop_lines_by_name, t[1]);
      o.objprop_index_[lower(t[1])] = o.object_properties_.size();
      o.object_properties_.push_back({t[1], keyed(t[2], "domain", at), keyed(t[3], "range", at)});
      op_lines.push_back(lineno);
    } else if (t[0] == "base") {
      if (t.size() != 2) at.fail(ErrorKind::Syntax, "expected 'base <absolute-IRI>'");
      if (base_seen) at.fail(ErrorKind::DuplicateName, "base IRI declared twice");
      if (t[1].find("://") == std::string::npos) at.fail(ErrorKind::Syntax, "base IRI must be absolute");
      base_seen = true;
      o.base_iri_ = t[1];
    } else {
      at.fail(ErrorKind::Syntax, "unknown declaration '" + t[0] + "'");
    }
  }

  // Resolve references now that every name is known; canonicalize spelling.
  auto resolve_class = [&](std::string& ref, std::size_t line, const std::string& what) {
    auto it = o.class_index_.find(lower(ref));
    if (it == o.class_index_.end()) LineError{line}.fail(ErrorKind::DanglingReference, what + " '" + ref + "' is not a declared class");
    ref = o.classes_[it->second].name;
  };
  for (std::size_t i = 0; i < o.classes_.size(); ++i)
    if (o.classes_[i].parent) resolve_class(*o.classes_[i].parent, class_lines[i], "parent");
  for (std::size_t i = 0; i < o.datatype_properties_.size(); ++i)
    resolve_class(o.datatype_properties_[i].domain, dp_lines[i], "domain");
  for (std::size_t i = 0; i < o.object_properties_.size(); ++i) {
    resolve_class(o.object_properties_[i].domain, op_lines[i], "domain");
    resolve_class(o.object_properties_[i].range, op_lines[i], "range");
  }

  // Acyclicity: walking parents from any class must terminate within |classes| steps.
  o.roots_.resize(o.classes_.size());
  for (std::size_t i = 0; i < o.classes_.size(); ++i) {
    std::size_t cur = i, steps = 0;
    while (o.classes_[cur].parent) {
      cur = o.class_index_.at(lower(*o.classes_[cur].parent));
      if (++steps > o.classes_.size())
        LineError{class_lines[i]}.fail(ErrorKind::Cycle, "class '" + o.classes_[i].name + "' is part of a parent cycle");
    }
    o.roots_[i] = o.classes_[cur].name;
  }
  return o;
}

bool Ontology::has_class(std::string_view name) const { return class_index_.count(lower(name)) > 0; }

const ClassDef& Ontology::class_def(std::string_view name) const {
  auto it = class_index_.find(lower(name));
  if (it == class_index_.end()) throw Error(ErrorKind::UnknownName, "unknown class '" + std::string(name) + "'");
  return classes_[it->second];
}

const DatatypeProperty& Ontology::datatype_property(std::string_view name) const {
  auto it = dataprop_index_.find(lower(name));
  if (it == dataprop_index_.end()) throw Error(ErrorKind::UnknownName, "unknown datatype property '" + std::string(name) + "'");
  return datatype_properties_[it->second];
}

const ObjectProperty& Ontology::object_property(std::string_view name) const {
  auto it = objprop_index_.find(lower(name));
  if (it == objprop_index_.end()) throw Error(ErrorKind::UnknownName, "unknown object property '" + std::string(name) + "'");
  return object_properties_[it->second];
}

bool Ontology::is_subclass(std::string_view a, std::string_view b) const {
  const ClassDef* cur = &class_def(a);
  const std::string& target = class_def(b).name;
  for (;;) {
    if (cur->name == target) return true;
    if (!cur->parent) return false;
    cur = &class_def(*cur->parent);
  }
}

bool Ontology::compatible(std::string_view a, std::string_view b) const { return is_subclass(a, b) || is_subclass(b, a); }

const std::string& Ontology::root_of(std::string_view name) const {
  auto it = class_index_.find(lower(name));
  if (it == class_index_.end()) throw Error(ErrorKind::UnknownName, "unknown class '" + std::string(name) + "'");
  return roots_[it->second];
}

std::size_t Ontology::depth(std::string_view name) const {
  std::size_t d = 0;
  const ClassDef* cur = &class_def(name);
  while (cur->parent) {
    cur = &class_def(*cur->parent);
    ++d;
  }
  return d;
}

std::vector<std::string> Ontology::descendants(std::string_view name) const {
  std::vector<std::string> out;
  for (const auto& c : classes_)
    if (is_subclass(c.name, name)) out.push_back(c.name);
  return out;
}

ResolvedPredicate Ontology::resolve_predicate(std::string_view name) const {
  std::string key = lower(name);
  std::vector<ResolvedPredicate> hits;
  if (auto it = class_index_.find(key); it != class_index_.end())
    hits.push_back({PredicateKind::Class, classes_[it->second].name});
  if (auto it = dataprop_index_.find(key); it != dataprop_index_.end())
    hits.push_back({PredicateKind::DatatypeProperty, datatype_properties_[it->second].name});
  if (auto it = objprop_index_.find(key); it != objprop_index_.end())
    hits.push_back({PredicateKind::ObjectProperty, object_properties_[it->second].name});
  if (hits.empty()) throw Error(ErrorKind::UnknownName, "unknown predicate '" + std::string(name) + "'");
  if (hits.size() > 1) throw Error(ErrorKind::Ambiguous, "predicate '" + std::string(name) + "' names more than one ontology term");
  hits[0].casing_differs = hits[0].canonical != name;
  return hits[0];
}

}  // namespace medley
