#include "medley/xml.hpp"

#include <cstdint>

#include "medley/error.hpp"
#include "medley/text.hpp"

namespace medley::xml {

Node Node::element(std::string name) {
  Node n;
  n.kind = Kind::Element;
  n.name = std::move(name);
  return n;
}

Node Node::text_node(std::string text) {
  Node n;
  n.kind = Kind::Text;
  n.text = std::move(text);
  return n;
}

Node& Node::add_element(std::string child_name) {
  children.push_back(element(std::move(child_name)));
  return children.back();
}

Node& Node::add_leaf(std::string child_name, std::string value) {
  Node& c = add_element(std::move(child_name));
  if (!value.empty()) c.add_text(std::move(value));
  return c;
}

void Node::add_text(std::string value) { children.push_back(text_node(std::move(value))); }

namespace {
void collect_text(const Node& n, std::string& out) {
  if (n.is_text()) {
    out += n.text;
    return;
  }
  for (const auto& c : n.children) collect_text(c, out);
}
}  // namespace

std::string Node::string_value() const {
  std::string out;
  collect_text(*this, out);
  return out;
}

const Node* Node::child(std::string_view child_name) const {
  for (const auto& c : children)
    if (c.is_element() && c.name == child_name) return &c;
  return nullptr;
}

std::vector<const Node*> Node::child_elements() const {
  std::vector<const Node*> out;
  for (const auto& c : children)
    if (c.is_element()) out.push_back(&c);
  return out;
}

bool is_name(std::string_view s) noexcept {
  if (s.empty()) return false;
  auto start = [](unsigned char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_' || c >= 0x80; };
  auto rest = [&](unsigned char c) { return start(c) || (c >= '0' && c <= '9') || c == '-' || c == '.'; };
  if (!start(static_cast<unsigned char>(s[0]))) return false;
  for (unsigned char c : s.substr(1))
    if (!rest(c)) return false;
  return true;
}

namespace {

void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

class Parser {
 public:
  explicit Parser(std::string_view text) : s_(text) {}

  Node parse_document() {
    skip_misc();
    if (at_end() || peek() != '<') fail("expected root element");
    Node root = parse_element();
    skip_misc();
    if (!at_end()) fail("content after root element");
    return root;
  }

 private:
  std::string_view s_;
  std::size_t i_ = 0;

  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(ErrorKind::Syntax, "malformed XML: " + msg, SourcePosition::at(s_, i_));
  }
  bool at_end() const { return i_ >= s_.size(); }
  char peek() const { return s_[i_]; }
  bool starts_with(std::string_view p) const { return s_.substr(i_, p.size()) == p; }
  void skip_ws() {
    while (!at_end() && text::is_xml_space(peek())) ++i_;
  }

  void skip_until(std::string_view terminator, const char* what) {
    std::size_t pos = s_.find(terminator, i_);
    if (pos == std::string_view::npos) fail(std::string("unterminated ") + what);
    i_ = pos + terminator.size();
  }

  // Prolog/epilog: whitespace, comments, PIs, XML declaration.
  void skip_misc() {
    for (;;) {
      skip_ws();
      if (starts_with("<?")) {
        skip_until("?>", "processing instruction");
      } else if (starts_with("<!--")) {
        skip_until("-->", "comment");
      } else if (starts_with("<!DOCTYPE")) {
        fail("DOCTYPE is not supported");
      } else {
        return;
      }
    }
  }

  std::string parse_name() {
    std::size_t b = i_;
    while (!at_end()) {
      char c = peek();
      if (text::is_xml_space(c) || c == '>' || c == '/' || c == '=' || c == '<' || c == '"' || c == '\'') break;
      ++i_;
    }
    std::string name(s_.substr(b, i_ - b));
    if (!is_name(name)) {
      i_ = b;
      fail("invalid name '" + name + "'");
    }
    return name;
  }

  void parse_reference(std::string& out) {
    std::size_t start = i_;
    ++i_;  // '&'
    std::size_t semi = s_.find(';', i_);
    if (semi == std::string_view::npos || semi - i_ > 10) {
      i_ = start;
      fail("unterminated entity reference");
    }
    std::string_view ref = s_.substr(i_, semi - i_);
    if (ref == "amp") out += '&';
    else if (ref == "lt") out += '<';
    else if (ref == "gt") out += '>';
    else if (ref == "quot") out += '"';
    else if (ref == "apos") out += '\'';
    else if (ref.size() > 1 && ref[0] == '#') {
      std::uint32_t cp = 0;
      bool hex = ref[1] == 'x';
      std::string_view digits = ref.substr(hex ? 2 : 1);
      if (digits.empty()) {
        i_ = start;
        fail("empty character reference");
      }
      for (char c : digits) {
        int v;
        if (c >= '0' && c <= '9') v = c - '0';
        else if (hex && c >= 'a' && c <= 'f') v = c - 'a' + 10;
        else if (hex && c >= 'A' && c <= 'F') v = c - 'A' + 10;
        else {
          i_ = start;
          fail("bad character reference");
        }
        cp = cp * (hex ? 16 : 10) + static_cast<std::uint32_t>(v);
        if (cp > 0x10FFFF) {
          i_ = start;
          fail("character reference out of range");
        }
      }
      bool allowed = cp == 0x9 || cp == 0xA || cp == 0xD || (cp >= 0x20 && cp <= 0xD7FF) ||
                     (cp >= 0xE000 && cp <= 0xFFFD) || cp >= 0x10000;
      if (!allowed) {
        i_ = start;
        fail("character reference to a character not allowed in XML");
      }
      append_utf8(out, cp);
    } else {
      i_ = start;
      fail("unknown entity '&" + std::string(ref) + ";'");
    }
    i_ = semi + 1;
  }

  std::string parse_attribute_value() {
    if (at_end() || (peek() != '"' && peek() != '\'')) fail("expected quoted attribute value");
    char q = peek();
    ++i_;
    std::string out;
    while (!at_end() && peek() != q) {
      if (peek() == '<') fail("'<' in attribute value");
      if (peek() == '&') parse_reference(out);
      else out += s_[i_++];
    }
    if (at_end()) fail("unterminated attribute value");
    ++i_;
    return out;
  }

  static void flush_text(Node& parent, std::string& pending) {
    if (pending.empty()) return;
    if (text::trim(pending).empty()) {
      pending.clear();
      return;
    }
    if (!parent.children.empty() && parent.children.back().is_text()) parent.children.back().text += pending;
    else parent.add_text(std::move(pending));
    pending.clear();
  }

  Node parse_element() {
    std::size_t open_pos = i_;
    ++i_;  // '<'
    Node node = Node::element(parse_name());
    for (;;) {
      skip_ws();
      if (at_end()) fail("unterminated start tag");
      if (peek() == '/') {
        if (!starts_with("/>")) fail("expected '/>'");
        i_ += 2;
        return node;
      }
      if (peek() == '>') {
        ++i_;
        break;
      }
      std::string attr = parse_name();
      skip_ws();
      if (at_end() || peek() != '=') fail("expected '=' after attribute name");
      ++i_;
      skip_ws();
      std::string value = parse_attribute_value();
      if (!node.attributes.emplace(attr, std::move(value)).second) fail("duplicate attribute '" + attr + "'");
    }
    std::string pending;
    for (;;) {
      if (at_end()) {
        i_ = open_pos;
        fail("element <" + node.name + "> is not closed");
      }
      char c = peek();
      if (c == '<') {
        if (starts_with("</")) {
          flush_text(node, pending);
          std::size_t close_pos = i_;
          i_ += 2;
          std::string closing = parse_name();
          skip_ws();
          if (at_end() || peek() != '>') fail("expected '>' in end tag");
          if (closing != node.name) {
            i_ = close_pos;
            fail("mismatched end tag </" + closing + "> for <" + node.name + ">");
          }
          ++i_;
          return node;
        }
        if (starts_with("<!--")) {
          skip_until("-->", "comment");
          continue;
        }
        if (starts_with("<![CDATA[")) {
          i_ += 9;
          std::size_t end = s_.find("]]>", i_);
          if (end == std::string_view::npos) fail("unterminated CDATA section");
          pending.append(s_.substr(i_, end - i_));
          i_ = end + 3;
          continue;
        }
        if (starts_with("<?")) {
          skip_until("?>", "processing instruction");
          continue;
        }
        flush_text(node, pending);
        node.children.push_back(parse_element());
        continue;
      }
      if (c == '&') {
        parse_reference(pending);
        continue;
      }
      if (c == '>' && starts_with("]]>")) fail("']]>' in character data");
      pending += c;
      ++i_;
    }
  }
};

void serialize_into(const Node& n, std::string& out, const SerializeOptions& opt, int depth) {
  if (n.is_text()) {
    out += escape_text(n.text);
    return;
  }
  out += '<';
  out += n.name;
  for (const auto& [k, v] : n.attributes) {
    out += ' ';
    out += k;
    out += "=\"";
    out += escape_attribute(v);
    out += '"';
  }
  if (n.children.empty()) {
    out += "/>";
    return;
  }
  out += '>';
  bool element_only = opt.indent;
  for (const auto& c : n.children)
    if (c.is_text()) element_only = false;
  for (const auto& c : n.children) {
    if (element_only) {
      out += '\n';
      out.append(static_cast<std::size_t>(depth + 1) * 2, ' ');
    }
    serialize_into(c, out, opt, depth + 1);
  }
  if (element_only) {
    out += '\n';
    out.append(static_cast<std::size_t>(depth) * 2, ' ');
  }
  out += "</";
  out += n.name;
  out += '>';
}

}  // namespace

Node parse(std::string_view text) { return Parser(text).parse_document(); }

std::string serialize(const Node& node, SerializeOptions options) {
  std::string out;
  if (options.declaration) out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  serialize_into(node, out, options, 0);
  if (options.declaration || options.indent) out += '\n';
  return out;
}

std::string escape_text(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string escape_attribute(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\n': out += "&#10;"; break;
      case '\t': out += "&#9;"; break;
      case '\r': out += "&#13;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace medley::xml
