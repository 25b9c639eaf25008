#include "medley/xpath.hpp"

#include "medley/error.hpp"

namespace medley::xpath {

Path Path::parse(std::string_view text) {
  Path p;
  std::string_view rest = text;
  if (!rest.empty() && rest.front() == '/') {
    p.absolute = true;
    rest.remove_prefix(1);
  }
  if (rest.empty()) throw Error(ErrorKind::Syntax, "empty XPath '" + std::string(text) + "'");
  std::size_t start = 0;
  for (std::size_t i = 0; i <= rest.size(); ++i) {
    if (i == rest.size() || rest[i] == '/') {
      std::string step(rest.substr(start, i - start));
      if (step != "*" && !xml::is_name(step))
        throw Error(ErrorKind::Syntax, "invalid XPath step '" + step + "' in '" + std::string(text) + "'",
                    SourcePosition::at(text, start + (p.absolute ? 1 : 0)));
      p.steps.push_back(std::move(step));
      start = i + 1;
    }
  }
  return p;
}

std::string Path::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (i || absolute) out += '/';
    out += steps[i];
  }
  return out;
}

Path Path::join(const Path& rel) const {
  Path out = *this;
  out.steps.insert(out.steps.end(), rel.steps.begin(), rel.steps.end());
  return out;
}

bool Path::is_prefix_of(const Path& other) const {
  if (absolute != other.absolute || steps.size() > other.steps.size()) return false;
  for (std::size_t i = 0; i < steps.size(); ++i)
    if (steps[i] != other.steps[i]) return false;
  return true;
}

Path Path::relative_to_descendant(const Path& other) const {
  Path out;
  out.absolute = false;
  out.steps.assign(other.steps.begin() + static_cast<std::ptrdiff_t>(steps.size()), other.steps.end());
  return out;
}

Path Path::common_prefix(const Path& a, const Path& b) {
  Path out;
  out.absolute = a.absolute && b.absolute;
  for (std::size_t i = 0; i < a.steps.size() && i < b.steps.size() && a.steps[i] == b.steps[i]; ++i)
    out.steps.push_back(a.steps[i]);
  return out;
}

namespace {

bool matches(const std::string& step, const xml::Node& n) { return step == "*" || step == n.name; }

void walk(const xml::Node& n, const std::vector<std::string>& steps, std::size_t depth, std::vector<std::string>& names,
          const MatchVisitor& visit) {
  if (depth == steps.size()) {
    visit(n, names);
    return;
  }
  for (const auto& c : n.children) {
    if (!c.is_element() || !matches(steps[depth], c)) continue;
    names.push_back(c.name);
    walk(c, steps, depth + 1, names, visit);
    names.pop_back();
  }
}

}  // namespace

void visit_absolute(const xml::Node& doc, const Path& path, const MatchVisitor& visit) {
  if (path.steps.empty() || !doc.is_element() || !matches(path.steps[0], doc)) return;
  std::vector<std::string> names{doc.name};
  walk(doc, path.steps, 1, names, visit);
}

std::vector<const xml::Node*> eval_relative(const xml::Node& context, const Path& path) {
  std::vector<const xml::Node*> out;
  std::vector<std::string> names;
  walk(context, path.steps, 0, names, [&](const xml::Node& n, const std::vector<std::string>&) { out.push_back(&n); });
  return out;
}

std::vector<const xml::Node*> eval(const xml::Node& doc, const Path& path, const xml::Node* context) {
  if (path.absolute) {
    std::vector<const xml::Node*> out;
    visit_absolute(doc, path, [&](const xml::Node& n, const std::vector<std::string>&) { out.push_back(&n); });
    return out;
  }
  if (context == nullptr) throw Error(ErrorKind::InvalidQuery, "relative path '" + path.to_string() + "' needs a context node");
  return eval_relative(*context, path);
}

}  // namespace medley::xpath
