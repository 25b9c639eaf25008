#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "medley/answers.hpp"
#include "medley/error.hpp"
#include "medley/text.hpp"
#include "medley/xml.hpp"

namespace medley {

OutputFormat parse_format(std::string_view name) {
  std::string n = text::lower_case(name);
  if (n == "rdf") return OutputFormat::Rdf;
  if (n == "xml") return OutputFormat::Xml;
  if (n == "html") return OutputFormat::Html;
  if (n == "json") return OutputFormat::Json;
  throw Error(ErrorKind::InvalidQuery, "unknown output format '" + std::string(name) + "' (expected rdf, xml, html or json)");
}

std::string_view to_string(OutputFormat f) {
  switch (f) {
    case OutputFormat::Rdf: return "rdf";
    case OutputFormat::Xml: return "xml";
    case OutputFormat::Html: return "html";
    case OutputFormat::Json: return "json";
  }
  return "?";
}

std::string_view content_type(OutputFormat f) {
  switch (f) {
    case OutputFormat::Rdf: return "application/n-triples";
    case OutputFormat::Xml: return "application/xml";
    case OutputFormat::Html: return "text/html; charset=utf-8";
    case OutputFormat::Json: return "application/json";
  }
  return "text/plain";
}

namespace {

std::string percent_encode(std::string_view s) {
  static const char* hex = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : s) {
    if (std::isalnum(c) || c == '-' || c == '.' || c == '_' || c == '~') {
      out += static_cast<char>(c);
    } else {
      out += '%';
      out += hex[c >> 4];
      out += hex[c & 15];
    }
  }
  return out;
}

std::string nt_literal(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  return out + "\"";
}

std::string local_name(const Individual& ind, const Ontology& ont) { return ind.class_name(ont) + "/" + ind.id.key; }

std::string value_label(const ResultSet& rs, const Value& v, const Ontology& ont) {
  if (const auto* s = std::get_if<std::string>(&v)) return *s;
  const auto& id = std::get<IndividualId>(v);
  const Individual* ind = rs.graph.find(id);
  return ind ? local_name(*ind, ont) : id.root + "/" + id.key;
}

std::string join_set(const std::set<std::string>& s) {
  return text::join(std::vector<std::string>(s.begin(), s.end()), " ");
}

std::string rdf(const ResultSet& rs, const Ontology& ont) {
  if (rs.empty()) return "";
  const std::string& base = ont.base_iri();
  auto iri = [&](const IndividualId& id) {
    const Individual* ind = rs.graph.find(id);
    return "<" + (ind ? individual_iri(*ind, ont) : base + id.root + "/" + percent_encode(id.key)) + ">";
  };
  std::set<std::string> lines;
  for (const auto& [id, ind] : rs.graph.individuals) {
    std::string s = iri(id);
    for (const auto& [cls, _] : ind.memberships)
      lines.insert(s + " <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <" + base + cls + "> .");
    for (const auto& l : ind.literals) lines.insert(s + " <" + base + l.property + "> " + nt_literal(l.value) + " .");
  }
  for (const auto& e : rs.graph.edges) lines.insert(iri(e.domain) + " <" + base + e.property + "> " + iri(e.range) + " .");
  std::string out;
  for (const auto& l : lines) out += l + "\n";
  return out;
}

// Facts that differ only in the mapping they came from render once, with every source.
std::map<std::pair<std::string, std::string>, std::set<std::string>> literal_sources(const Individual& ind) {
  std::map<std::pair<std::string, std::string>, std::set<std::string>> out;
  for (const auto& l : ind.literals) out[{l.property, l.value}].insert(l.source);
  return out;
}

std::map<std::tuple<std::string, IndividualId, IndividualId>, std::set<std::string>> edge_sources(const InstanceGraph& g) {
  std::map<std::tuple<std::string, IndividualId, IndividualId>, std::set<std::string>> out;
  for (const auto& e : g.edges) out[{e.property, e.domain, e.range}].insert(e.source);
  return out;
}

xml::Node xml_doc(const ResultSet& rs, const Ontology& ont) {
  xml::Node root = xml::Node::element("ResultSet");
  if (rs.empty()) return root;
  root.attributes["vars"] = text::join(rs.answer_vars, " ");
  xml::Node& rows = root.add_element("Rows");
  for (const auto& r : rs.rows) {
    xml::Node& row = rows.add_element("Row");
    for (std::size_t i = 0; i < r.size(); ++i) {
      xml::Node& b = row.add_element("Binding");
      b.attributes["var"] = rs.answer_vars[i];
      if (const auto* s = std::get_if<std::string>(&r[i])) b.attributes["literal"] = *s;
      else b.attributes["individual"] = value_label(rs, r[i], ont);
    }
  }
  xml::Node& inds = root.add_element("Individuals");
  for (const auto& [id, ind] : rs.graph.individuals) {
    xml::Node& n = inds.add_element("Individual");
    n.attributes["class"] = ind.class_name(ont);
    n.attributes["key"] = id.key;
    n.attributes["source"] = join_set(ind.sources());
    for (const auto& [cls, src] : ind.memberships) {
      xml::Node& t = n.add_element("Type");
      t.attributes["class"] = cls;
      t.attributes["source"] = src;
    }
    for (const auto& [pv, srcs] : literal_sources(ind)) {
      xml::Node& l = n.add_element("Literal");
      l.attributes["property"] = pv.first;
      l.attributes["source"] = join_set(srcs);
      l.add_text(pv.second);
    }
  }
  xml::Node& edges = root.add_element("Edges");
  for (const auto& [k, srcs] : edge_sources(rs.graph)) {
    xml::Node& e = edges.add_element("Edge");
    e.attributes["property"] = std::get<0>(k);
    e.attributes["domain"] = value_label(rs, std::get<1>(k), ont);
    e.attributes["range"] = value_label(rs, std::get<2>(k), ont);
    e.attributes["source"] = join_set(srcs);
  }
  xml::Node& prov = root.add_element("Sources");
  for (const auto& p : rs.sources) {
    xml::Node& s = prov.add_element("Source");
    s.attributes["name"] = p.source;
    s.attributes["endpoint"] = p.endpoint;
    s.attributes["schema"] = p.schema_id;
    s.add_text(p.description);
  }
  return root;
}

nlohmann::json json_value(const ResultSet& rs, const Value& v, const Ontology& ont) {
  if (const auto* s = std::get_if<std::string>(&v)) return {{"literal", *s}};
  const auto& id = std::get<IndividualId>(v);
  const Individual* ind = rs.graph.find(id);
  nlohmann::json j{{"key", id.key}};
  if (ind) {
    j["class"] = ind->class_name(ont);
    j["iri"] = individual_iri(*ind, ont);
  }
  return {{"individual", j}};
}

nlohmann::json json_doc(const ResultSet& rs, const Ontology& ont) {
  nlohmann::json j;
  j["answer_vars"] = rs.answer_vars;
  j["rows"] = nlohmann::json::array();
  for (const auto& r : rs.rows) {
    nlohmann::json row = nlohmann::json::array();
    for (const auto& v : r) row.push_back(json_value(rs, v, ont));
    j["rows"].push_back(row);
  }
  nlohmann::json inds = nlohmann::json::array();
  for (const auto& [id, ind] : rs.graph.individuals) {
    nlohmann::json i{{"class", ind.class_name(ont)}, {"key", id.key}, {"iri", individual_iri(ind, ont)}};
    auto sources = ind.sources();
    i["sources"] = std::vector<std::string>(sources.begin(), sources.end());
    nlohmann::json types = nlohmann::json::array();
    for (const auto& [cls, src] : ind.memberships) types.push_back({{"class", cls}, {"source", src}});
    i["types"] = types;
    nlohmann::json lits = nlohmann::json::array();
    for (const auto& [pv, srcs] : literal_sources(ind))
      lits.push_back({{"property", pv.first}, {"value", pv.second}, {"sources", srcs}});
    i["literals"] = lits;
    inds.push_back(i);
  }
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& [k, srcs] : edge_sources(rs.graph))
    edges.push_back({{"property", std::get<0>(k)},
                     {"domain", value_label(rs, std::get<1>(k), ont)},
                     {"range", value_label(rs, std::get<2>(k), ont)},
                     {"sources", srcs}});
  j["graph"] = {{"individuals", inds}, {"edges", edges}};
  nlohmann::json prov = nlohmann::json::array();
  for (const auto& p : rs.sources)
    prov.push_back({{"source", p.source}, {"endpoint", p.endpoint}, {"schema", p.schema_id}, {"description", p.description}});
  j["provenance"] = prov;
  return j;
}

std::string html(const ResultSet& rs, const Ontology& ont) {
  auto esc = [](std::string_view s) { return xml::escape_text(s); };
  std::ostringstream os;
  os << "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"><title>Query results</title>\n"
     << "<style>table{border-collapse:collapse;margin:1em 0}td,th{border:1px solid #999;padding:2px 6px}"
     << ".badge{font-size:80%;background:#eef;border-radius:3px;padding:0 4px;margin-left:4px}</style></head><body>\n";
  if (rs.empty()) {
    os << "<p>No matches.</p>\n</body></html>\n";
    return os.str();
  }
  for (std::size_t v = 0; v < rs.answer_vars.size(); ++v) {
    std::set<Value> seen;
    for (const auto& r : rs.rows) seen.insert(r[v]);
    os << "<h2>" << esc(rs.answer_vars[v]) << "</h2>\n<table><tr><th>Value</th><th>Class</th><th>Facts</th></tr>\n";
    for (const auto& val : seen) {
      os << "<tr><td>";
      if (const auto* s = std::get_if<std::string>(&val)) {
        os << esc(*s) << "</td><td>literal</td><td></td></tr>\n";
        continue;
      }
      const Individual* ind = rs.graph.find(std::get<IndividualId>(val));
      os << esc(std::get<IndividualId>(val).key);
      if (ind)
        for (const auto& s : ind->sources()) os << "<span class=\"badge\">" << esc(s) << "</span>";
      os << "</td><td>" << (ind ? esc(ind->class_name(ont)) : "") << "</td><td>";
      if (ind)
        for (const auto& [pv, srcs] : literal_sources(*ind)) {
          os << esc(pv.first) << ": " << esc(pv.second);
          for (const auto& s : srcs) os << "<span class=\"badge\">" << esc(s) << "</span>";
          os << "<br>";
        }
      os << "</td></tr>\n";
    }
    os << "</table>\n";
  }
  if (!rs.graph.edges.empty()) {
    os << "<h2>Relationships</h2>\n<table><tr><th>Domain</th><th>Property</th><th>Range</th></tr>\n";
    for (const auto& [k, srcs] : edge_sources(rs.graph)) {
      os << "<tr><td>" << esc(value_label(rs, std::get<1>(k), ont)) << "</td><td>" << esc(std::get<0>(k));
      for (const auto& s : srcs) os << "<span class=\"badge\">" << esc(s) << "</span>";
      os << "</td><td>" << esc(value_label(rs, std::get<2>(k), ont)) << "</td></tr>\n";
    }
    os << "</table>\n";
  }
  os << "<h2>Sources</h2>\n<ul>\n";
  for (const auto& p : rs.sources)
    os << "<li><b>" << esc(p.source) << "</b> " << esc(p.endpoint) << ": " << esc(p.description) << "</li>\n";
  os << "</ul>\n</body></html>\n";
  return os.str();
}

}  // namespace

std::string individual_iri(const Individual& ind, const Ontology& ont) {
  return ont.base_iri() + ind.class_name(ont) + "/" + percent_encode(ind.id.key);
}

std::string serialize(const ResultSet& rs, OutputFormat format, const Ontology& ontology) {
  switch (format) {
    case OutputFormat::Rdf: return rdf(rs, ontology);
    case OutputFormat::Xml: return xml::serialize(xml_doc(rs, ontology), {.declaration = false, .indent = true});
    case OutputFormat::Html: return html(rs, ontology);
    case OutputFormat::Json: return json_doc(rs, ontology).dump(2) + "\n";
  }
  throw Error(ErrorKind::Internal, "unhandled output format");
}

}  // namespace medley
