#include "medley/semdir.hpp"

#include <algorithm>
#include <charconv>

#include "medley/error.hpp"
#include "medley/text.hpp"

namespace medley {

const std::string& mapping_source(const Mapping& m) {
  return std::visit([](const auto& x) -> const std::string& { return x.source; }, m);
}

int correspondence_index(const Mapping& m) {
  return std::visit([](const auto& x) { return x.correspondence_index; }, m);
}

namespace {

std::vector<std::string> fields(std::string_view s, char sep) {
  std::vector<std::string> out;
  for (const auto& f : text::split(s, sep)) out.emplace_back(text::trim(f));
  return out;
}

xpath::Path location(const std::string& s, std::size_t line) {
  if (s.empty()) throw Error(ErrorKind::Mapping, "line " + std::to_string(line) + ": empty element location");
  xpath::Path p = xpath::Path::parse(s.front() == '/' ? s : "/" + s);
  return p;
}

std::string location_text(const xpath::Path& p) {
  std::string s = p.to_string();
  return s.substr(1);
}

}  // namespace

std::vector<Mapping> parse_mapping_file(const std::string& source, std::string_view text, const Ontology& ontology) {
  std::vector<Mapping> out;
  std::size_t line_no = 0;
  for (const auto& raw : text::split(text, '\n')) {
    ++line_no;
    std::string line(text::trim(raw));
    if (line.empty() || line.front() == '#') continue;
    auto fail = [&](const std::string& msg) -> Error {
      return Error(ErrorKind::Mapping, source + ".map line " + std::to_string(line_no) + ": " + msg,
                   SourcePosition{0, line_no, 1});
    };
    auto f = fields(line, ',');
    if (f.size() != 3) throw fail("expected 3 comma-separated fields, got " + std::to_string(f.size()));
    int index = 0;
    auto [ptr, ec] = std::from_chars(f[2].data(), f[2].data() + f[2].size(), index);
    if (ec != std::errc() || ptr != f[2].data() + f[2].size()) throw fail("correspondence index '" + f[2] + "' is not an integer");
    if (index < 0 || index > 100) throw fail("correspondence index must be within 0..100");
    auto loc = fields(f[0], ';');
    auto terms = fields(f[1], ';');

    auto class_name = [&](const std::string& n) {
      ResolvedPredicate r;
      try {
        r = ontology.resolve_predicate(n);
      } catch (const Error&) {
        throw fail("unknown ontology term '" + n + "'");
      }
      if (r.kind != PredicateKind::Class) throw fail("'" + n + "' is not a class");
      return r.canonical;
    };
    auto property = [&](const std::string& n, PredicateKind want) {
      ResolvedPredicate r;
      try {
        r = ontology.resolve_predicate(n);
      } catch (const Error&) {
        throw fail("unknown ontology term '" + n + "'");
      }
      if (r.kind != want) throw fail("'" + n + "' is not a " + std::string(to_string(want)));
      return r.canonical;
    };

    try {
      if (loc.size() == 1 && terms.size() == 1) {
        std::string cls = class_name(terms[0]);
        out.push_back(ClassMapping{source, location(loc[0], line_no), cls, index});
      } else if (loc.size() == 2 && terms.size() == 2) {
        xpath::Path value = xpath::Path::parse(loc[1]);
        if (value.absolute) throw fail("datatype value location must be relative");
        std::string dom = class_name(terms[0]);
        std::string prop = property(terms[1], PredicateKind::DatatypeProperty);
        if (!ontology.is_subclass(dom, ontology.datatype_property(prop).domain))
          throw fail(prop + " is not defined on " + dom);
        xpath::Path domain = location(loc[0], line_no);
        out.push_back(DatatypeMapping{source, std::move(domain), value, dom, prop, index});
      } else if (loc.size() == 2 && terms.size() == 3) {
        std::string dom = class_name(terms[0]);
        std::string rng = class_name(terms[1]);
        std::string prop = property(terms[2], PredicateKind::ObjectProperty);
        const auto& def = ontology.object_property(prop);
        if (!ontology.is_subclass(dom, def.domain)) throw fail(prop + " is not defined on " + dom);
        if (!ontology.is_subclass(rng, def.range)) throw fail(rng + " is not within the range of " + prop);
        xpath::Path domain = location(loc[0], line_no);
        xpath::Path range = location(loc[1], line_no);
        out.push_back(ObjectMapping{source, std::move(domain), std::move(range), dom, rng, prop, index, {}});
      } else {
        throw fail("unrecognized field structure");
      }
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::Mapping) throw;
      throw fail(e.what());
    }
  }
  return out;
}

std::string serialize_mapping(const Mapping& m) {
  struct V {
    std::string operator()(const ClassMapping& c) const {
      return location_text(c.element_location) + ", " + c.class_name + ", " + std::to_string(c.correspondence_index);
    }
    std::string operator()(const DatatypeMapping& d) const {
      return location_text(d.domain_location) + "; " + d.value_location.to_string() + ", " + d.domain_name + "; " +
             d.property_name + ", " + std::to_string(d.correspondence_index);
    }
    std::string operator()(const ObjectMapping& o) const {
      return location_text(o.domain_location) + "; " + location_text(o.range_location) + ", " + o.domain_name + "; " +
             o.range_name + "; " + o.property_name + ", " + std::to_string(o.correspondence_index);
    }
  };
  return std::visit(V{}, m);
}

std::vector<SourceRegistration> parse_registry(std::string_view text) {
  std::vector<SourceRegistration> out;
  std::size_t line_no = 0;
  auto find = [&](const std::string& name) -> SourceRegistration* {
    for (auto& r : out)
      if (r.name == name) return &r;
    return nullptr;
  };
  for (const auto& raw : text::split(text, '\n')) {
    ++line_no;
    std::string_view line = text::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    auto fail = [&](const std::string& msg) {
      return Error(ErrorKind::Config, "registry line " + std::to_string(line_no) + ": " + msg, SourcePosition{0, line_no, 1});
    };
    std::vector<std::string> tok;
    for (const auto& t : text::split(line, ' '))
      if (!text::trim(t).empty()) tok.emplace_back(text::trim(t));
    if (tok[0] == "source") {
      if (tok.size() < 2 || !text::is_identifier(tok[1])) throw fail("expected 'source <name> key=value...'");
      if (find(tok[1])) throw fail("duplicate source '" + tok[1] + "'");
      SourceRegistration r;
      r.name = tok[1];
      for (std::size_t i = 2; i < tok.size(); ++i) {
        auto eq = tok[i].find('=');
        if (eq == std::string::npos) throw fail("expected key=value, got '" + tok[i] + "'");
        std::string k = tok[i].substr(0, eq), v = tok[i].substr(eq + 1);
        if (k == "endpoint") r.endpoint = v;
        else if (k == "schema") r.schema_id = v;
        else if (k == "map") r.map_path = v;
        else throw fail("unknown source attribute '" + k + "'");
      }
      if (r.endpoint.empty() || r.schema_id.empty() || r.map_path.empty())
        throw fail("source '" + r.name + "' needs endpoint=, schema= and map=");
      out.push_back(std::move(r));
    } else if (tok[0] == "key") {
      if (tok.size() != 4) throw fail("expected 'key <source> <Class> <relative path>'");
      SourceRegistration* r = find(tok[1]);
      if (!r) throw fail("key for unknown source '" + tok[1] + "'");
      xpath::Path p = xpath::Path::parse(tok[3]);
      if (p.absolute) throw fail("key path must be relative");
      if (!r->key_paths.emplace(tok[2], p).second) throw fail("duplicate key for " + tok[1] + "/" + tok[2]);
    } else {
      throw fail("unknown directive '" + tok[0] + "'");
    }
  }
  return out;
}

SemanticDirectory::SemanticDirectory(std::shared_ptr<const Ontology> ontology, int min_correspondence)
    : ontology_(std::move(ontology)), min_correspondence_(min_correspondence) {}

void SemanticDirectory::check_mapping(const Entry& e, Mapping& m) const {
  const SourceSchema& schema = e.schema;
  const std::string& src = e.reg.name;
  auto need = [&](const xpath::Path& p) {
    if (!schema.contains(p)) throw Error(ErrorKind::Mapping, src + ": location " + p.to_string() + " is not in schema " + schema.id());
  };
  auto need_key = [&](const std::string& cls, const xpath::Path& at) {
    auto k = key_path(src, cls);
    if (!k) throw Error(ErrorKind::Mapping, src + ": no key path declared for " + cls + " or its ancestors");
    need(at.join(*k));
  };
  if (mapping_source(m) != src) throw Error(ErrorKind::Mapping, "mapping for source '" + mapping_source(m) + "' registered under " + src);
  if (auto* c = std::get_if<ClassMapping>(&m)) {
    need(c->element_location);
    need_key(c->class_name, c->element_location);
  } else if (auto* d = std::get_if<DatatypeMapping>(&m)) {
    need(d->domain_location);
    need(d->domain_location.join(d->value_location));
    need_key(d->domain_name, d->domain_location);
  } else {
    auto& o = std::get<ObjectMapping>(m);
    need(o.domain_location);
    need(o.range_location);
    need_key(o.domain_name, o.domain_location);
    need_key(o.range_name, o.range_location);
    xpath::Path record = xpath::Path::common_prefix(o.domain_location, o.range_location);
    if (record.empty() || !schema.deepest_repeating(record))
      throw Error(ErrorKind::Mapping, src + ": " + o.property_name + " locations share no repeating ancestor element");
    o.record_location = record;
  }
}

void SemanticDirectory::register_source(SourceRegistration reg, SourceSchema schema, std::vector<Mapping> mappings) {
  if (!text::is_identifier(reg.name)) throw Error(ErrorKind::Config, "invalid source name '" + reg.name + "'");
  if (schema.id() != reg.schema_id)
    throw Error(ErrorKind::Schema, reg.name + ": registry expects schema " + reg.schema_id + ", source exports " + schema.id());
  std::vector<Mapping> kept;
  for (auto& m : mappings)
    if (correspondence_index(m) >= min_correspondence_) kept.push_back(std::move(m));

  // Canonical class spelling for key declarations.
  std::map<std::string, xpath::Path> keys;
  for (auto& [cls, p] : reg.key_paths) {
    auto r = ontology_->resolve_predicate(cls);
    if (r.kind != PredicateKind::Class) throw Error(ErrorKind::Config, reg.name + ": key declared for non-class '" + cls + "'");
    keys.emplace(r.canonical, p);
  }
  reg.key_paths = std::move(keys);

  for (const auto& e : entries_)
    if (e.reg.name == reg.name) {
      Entry candidate{reg, schema, {}};
      for (auto m : kept) {
        check_mapping(e, m);
        candidate.mappings.push_back(std::move(m));
      }
      if (candidate.mappings == e.mappings && candidate.reg.key_paths == e.reg.key_paths &&
          candidate.reg.endpoint == e.reg.endpoint && candidate.schema.id() == e.schema.id())
        return;
      throw Error(ErrorKind::DuplicateName, "source '" + reg.name + "' is already registered");
    }

  entries_.push_back(Entry{std::move(reg), std::move(schema), {}});
  Entry& e = entries_.back();
  try {
    for (const auto& [cls, _] : e.reg.key_paths) {
      bool mapped = std::any_of(kept.begin(), kept.end(), [&](const Mapping& m) {
        auto* c = std::get_if<ClassMapping>(&m);
        return c && c->class_name == cls;
      });
      if (!mapped) throw Error(ErrorKind::Config, e.reg.name + ": key declared for " + cls + ", which has no class mapping");
    }
    for (auto& m : kept) {
      check_mapping(e, m);
      e.mappings.push_back(std::move(m));
    }
  } catch (...) {
    entries_.pop_back();
    throw;
  }
}

const SemanticDirectory::Entry& SemanticDirectory::entry(std::string_view source) const {
  for (const auto& e : entries_)
    if (e.reg.name == source) return e;
  throw Error(ErrorKind::UnknownName, "unknown source '" + std::string(source) + "'");
}

std::vector<std::string> SemanticDirectory::source_names() const {
  std::vector<std::string> out;
  for (const auto& e : entries_) out.push_back(e.reg.name);
  return out;
}

bool SemanticDirectory::has_source(std::string_view name) const {
  return std::any_of(entries_.begin(), entries_.end(), [&](const Entry& e) { return e.reg.name == name; });
}

const SourceRegistration& SemanticDirectory::registration(std::string_view source) const { return entry(source).reg; }
const SourceSchema& SemanticDirectory::schema(std::string_view source) const { return entry(source).schema; }
const std::vector<Mapping>& SemanticDirectory::mappings(std::string_view source) const { return entry(source).mappings; }

std::size_t SemanticDirectory::source_rank(std::string_view source) const {
  for (std::size_t i = 0; i < entries_.size(); ++i)
    if (entries_[i].reg.name == source) return i;
  throw Error(ErrorKind::UnknownName, "unknown source '" + std::string(source) + "'");
}

std::optional<xpath::Path> SemanticDirectory::key_path(std::string_view source, std::string_view cls) const {
  const auto& keys = entry(source).reg.key_paths;
  std::optional<std::string> cur = std::string(cls);
  while (cur) {
    if (auto it = keys.find(*cur); it != keys.end()) return it->second;
    cur = ontology_->class_def(*cur).parent;
  }
  return std::nullopt;
}

std::vector<ClassMapping> SemanticDirectory::lookup_class(std::string_view cls) const {
  std::vector<ClassMapping> out;
  for (const auto& e : entries_)
    for (const auto& m : e.mappings)
      if (auto* c = std::get_if<ClassMapping>(&m); c && ontology_->is_subclass(c->class_name, cls)) out.push_back(*c);
  return out;
}

std::vector<DatatypeMapping> SemanticDirectory::datatype_mappings(std::string_view property) const {
  std::vector<DatatypeMapping> out;
  for (const auto& e : entries_)
    for (const auto& m : e.mappings)
      if (auto* d = std::get_if<DatatypeMapping>(&m); d && d->property_name == property) out.push_back(*d);
  return out;
}

std::vector<ObjectMapping> SemanticDirectory::object_mappings(std::string_view property) const {
  std::vector<ObjectMapping> out;
  for (const auto& e : entries_)
    for (const auto& m : e.mappings)
      if (auto* o = std::get_if<ObjectMapping>(&m); o && o->property_name == property) out.push_back(*o);
  return out;
}

std::vector<DatatypeMapping> SemanticDirectory::lookup_datatype(std::string_view domain, std::string_view property) const {
  std::vector<DatatypeMapping> out;
  for (auto& d : datatype_mappings(property))
    if (ontology_->compatible(d.domain_name, domain)) out.push_back(std::move(d));
  return out;
}

std::vector<ObjectMapping> SemanticDirectory::lookup_object(std::string_view domain, std::string_view range,
                                                           std::string_view property) const {
  std::vector<ObjectMapping> out;
  for (auto& o : object_mappings(property))
    if (ontology_->compatible(o.domain_name, domain) && ontology_->compatible(o.range_name, range)) out.push_back(std::move(o));
  return out;
}

SemanticDirectory SemanticDirectory::restrict(const std::vector<std::string>& sources) const {
  for (const auto& s : sources)
    if (!has_source(s)) throw Error(ErrorKind::UnknownName, "unknown source '" + s + "' in selection");
  SemanticDirectory out(ontology_, min_correspondence_);
  for (const auto& e : entries_)
    if (std::find(sources.begin(), sources.end(), e.reg.name) != sources.end()) out.entries_.push_back(e);
  return out;
}

}  // namespace medley
