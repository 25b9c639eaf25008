#include "medley/schema.hpp"

#include <map>

#include "medley/error.hpp"
#include "medley/text.hpp"

namespace medley {

const SchemaElement* SchemaElement::child(const std::string& n) const {
  for (const auto& c : children)
    if (c.name == n) return &c;
  return nullptr;
}

namespace {

SchemaElement read_element(const xml::Node& n) {
  if (n.name != "Element") throw Error(ErrorKind::Schema, "unexpected <" + n.name + "> in schema");
  auto name = n.attributes.find("name");
  if (name == n.attributes.end() || !xml::is_name(name->second))
    throw Error(ErrorKind::Schema, "schema <Element> without a valid name");
  SchemaElement e;
  e.name = name->second;
  if (auto r = n.attributes.find("repeating"); r != n.attributes.end()) e.repeating = r->second == "true";
  if (auto u = n.attributes.find("unique"); u != n.attributes.end()) {
    xpath::Path p = xpath::Path::parse(u->second);
    if (p.absolute) throw Error(ErrorKind::Schema, "unique path on <" + e.name + "> must be relative");
    e.unique = p;
  }
  for (const xml::Node* c : n.child_elements()) {
    if (c->name == "Attribute") {
      auto an = c->attributes.find("name");
      if (an == c->attributes.end()) throw Error(ErrorKind::Schema, "schema <Attribute> without name");
      e.attributes.insert(an->second);
      continue;
    }
    SchemaElement child = read_element(*c);
    if (e.child(child.name)) throw Error(ErrorKind::Schema, "duplicate declaration of <" + child.name + "> under <" + e.name + ">");
    e.children.push_back(std::move(child));
  }
  return e;
}

void collect_paths(const SchemaElement& e, xpath::Path& cur, std::vector<xpath::Path>& out) {
  cur.steps.push_back(e.name);
  out.push_back(cur);
  for (const auto& c : e.children) collect_paths(c, cur, out);
  cur.steps.pop_back();
}

void validate_rec(const xml::Node& node, const SchemaElement& decl, std::string& where) {
  if (node.name != decl.name)
    throw Error(ErrorKind::Schema, "element <" + node.name + "> where <" + decl.name + "> is declared at " + where);
  for (const auto& [attr, _] : node.attributes)
    if (!decl.attributes.count(attr)) throw Error(ErrorKind::Schema, "undeclared attribute '" + attr + "' at " + where);
  std::map<std::string, int> counts;
  for (const auto& c : node.children) {
    if (c.is_text()) {
      if (!decl.children.empty() && !text::trim(c.text).empty())
        throw Error(ErrorKind::Schema, "character data inside structured element at " + where);
      continue;
    }
    const SchemaElement* cd = decl.child(c.name);
    if (!cd) throw Error(ErrorKind::Schema, "undeclared element <" + c.name + "> at " + where);
    if (++counts[c.name] > 1 && !cd->repeating)
      throw Error(ErrorKind::Schema, "non-repeating element <" + c.name + "> occurs more than once at " + where);
    std::size_t len = where.size();
    where += "/" + c.name;
    validate_rec(c, *cd, where);
    where.resize(len);
  }
}

void check_unique(const xml::Node& doc, const SchemaElement& e, xpath::Path& cur) {
  cur.steps.push_back(e.name);
  if (e.unique) {
    std::map<std::string, int> seen;
    for (const xml::Node* n : xpath::eval(doc, cur)) {
      auto hits = xpath::eval_relative(*n, *e.unique);
      if (hits.empty()) continue;
      std::string key = text::fold_key(hits.front()->string_value());
      if (key.empty()) continue;
      if (++seen[key] > 1)
        throw Error(ErrorKind::Schema,
                    "unique key '" + key + "' repeats at " + cur.to_string() + " (" + e.unique->to_string() + ")");
    }
  }
  for (const auto& c : e.children) check_unique(doc, c, cur);
  cur.steps.pop_back();
}

}  // namespace

SourceSchema SourceSchema::from_xml(const xml::Node& doc) {
  if (doc.name != "Schema") throw Error(ErrorKind::Schema, "schema document root must be <Schema>");
  auto id = doc.attributes.find("id");
  if (id == doc.attributes.end() || id->second.empty()) throw Error(ErrorKind::Schema, "schema without id");
  auto roots = doc.child_elements();
  if (roots.size() != 1) throw Error(ErrorKind::Schema, "schema must declare exactly one root element");
  SourceSchema s;
  s.id_ = id->second;
  s.root_ = read_element(*roots.front());
  s.doc_ = doc;
  return s;
}

SourceSchema SourceSchema::parse(std::string_view text) { return from_xml(xml::parse(text)); }

const SchemaElement* SourceSchema::find(const xpath::Path& path) const {
  if (!path.absolute || path.steps.empty() || path.steps[0] != root_.name) return nullptr;
  const SchemaElement* cur = &root_;
  for (std::size_t i = 1; i < path.steps.size() && cur; ++i) cur = cur->child(path.steps[i]);
  return cur;
}

std::optional<xpath::Path> SourceSchema::deepest_repeating(const xpath::Path& path) const {
  if (!find(path)) return std::nullopt;
  std::optional<xpath::Path> best;
  xpath::Path cur;
  cur.absolute = true;
  const SchemaElement* e = &root_;
  cur.steps.push_back(e->name);
  if (e->repeating) best = cur;
  for (std::size_t i = 1; i < path.steps.size(); ++i) {
    e = e->child(path.steps[i]);
    cur.steps.push_back(e->name);
    if (e->repeating) best = cur;
  }
  return best;
}

std::optional<xpath::Path> SourceSchema::unique_key(const xpath::Path& path) const {
  const SchemaElement* e = find(path);
  if (!e) return std::nullopt;
  return e->unique;
}

std::vector<xpath::Path> SourceSchema::element_paths() const {
  std::vector<xpath::Path> out;
  xpath::Path cur;
  cur.absolute = true;
  collect_paths(root_, cur, out);
  return out;
}

void SourceSchema::validate(const xml::Node& node, const xpath::Path& path) const {
  const SchemaElement* decl = find(path);
  if (!decl) throw Error(ErrorKind::Schema, "path " + path.to_string() + " is not declared by schema " + id_);
  std::string where = path.to_string();
  validate_rec(node, *decl, where);
}

void SourceSchema::validate_document(const xml::Node& doc) const {
  xpath::Path root;
  root.absolute = true;
  root.steps.push_back(doc.name);
  validate(doc, root);
  xpath::Path cur;
  cur.absolute = true;
  check_unique(doc, root_, cur);
}

}  // namespace medley
